"""Command-line workflow: ``gen``, ``baseline``, ``train``, ``eval``, ``spectrum``.

Every command is deterministic in its inputs. Failures print one JSON object
on stderr and exit with 2 (configuration), 3 (data) or 4 (numerical fit).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io
from .config import RunConfig, reference_config
from .errors import ConfigError, DataFormatError, FitError, QscError
from .metrics import format_percent, render_summary, render_table, subset_fidelities
from .pipeline import Baseline, evaluate, fit_baseline, generate, kernel_row_spectrum, train_qsc
from .signal import split_dataset
from .spectrum import to_csv


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _load_config(path, seed=None) -> RunConfig:
    if path is None:
        cfg = RunConfig()
    elif path == "reference":
        cfg = reference_config()
    else:
        cfg = RunConfig.from_dict(io.read_json(path))
    if seed is not None:
        cfg.signal.seed = seed
    return cfg


def _check_target(cfg: RunConfig, dataset):
    if dataset.target_qubit != cfg.eval.target_qubit:
        raise ConfigError(f"data target Q{dataset.target_qubit + 1} differs from config target "
                          f"Q{cfg.eval.target_qubit + 1}")
    if dataset.n_samples != cfg.signal.n_samples or dataset.sample_rate != cfg.signal.sample_rate:
        raise ConfigError("data sampling grid differs from the config's signal section")


def _qubit_names(qubits):
    return [f"Q{q + 1}" for q in qubits]


def _split_fraction(text: str) -> float:
    try:
        a, b = (float(t) for t in text.split(":"))
    except ValueError:
        raise ConfigError(f"--split expects 'train:test', got {text!r}") from None
    if a <= 0 or b <= 0:
        raise ConfigError("--split parts must be positive")
    return a / (a + b)


def _paired_paths(out: Path):
    return out.with_name(f"{out.stem}_train{out.suffix}"), out.with_name(f"{out.stem}_test{out.suffix}")


def cmd_gen(args) -> dict:
    cfg = _load_config(args.config, args.seed)
    dataset = generate(cfg)
    out = Path(args.out)
    if args.split is None:
        io.write_dataset(dataset, out)
        return {"out": str(out), "n_shots": len(dataset)}
    training, test = split_dataset(dataset, _split_fraction(args.split))
    p_train, p_test = _paired_paths(out)
    io.write_dataset(training, p_train)
    io.write_dataset(test, p_test)
    return {"train": str(p_train), "test": str(p_test), "n_train": len(training), "n_test": len(test)}


def baseline_to_dict(bl: Baseline, mu0, sigma0, unified) -> dict:
    return {"format": "qsc.baseline", "version": 1, "target_qubit": bl.target_qubit,
            "spectators": bl.spectators, "subset_labels": bl.subset_labels,
            "kernel": io.kernel_to_dict(bl.kernel), "unified": io.line_to_dict(bl.unified),
            "dedicated": [io.line_to_dict(ln) for ln in bl.dedicated],
            "mu0": mu0, "sigma0": sigma0, "unified_report": unified.to_dict()}


def baseline_from_dict(d: dict) -> Baseline:
    io._check_format(d, "qsc.baseline")
    try:
        return Baseline(io.kernel_from_dict(d["kernel"]), io.line_from_dict(d["unified"]),
                        [io.line_from_dict(x) for x in d["dedicated"]], list(d["subset_labels"]),
                        [int(q) for q in d["spectators"]], int(d["target_qubit"]))
    except KeyError as exc:
        raise DataFormatError(f"baseline document lacks {exc.args[0]!r}") from None


def _table(rows, bl: Baseline, title):
    return render_table(rows, bl.subset_labels, _qubit_names(bl.spectators), title)


def cmd_baseline(args) -> dict:
    cfg = _load_config(args.config)
    outs = args.out.split(",")
    if len(outs) != 2:
        raise ConfigError("--out expects 'kernel.json,line.json'")
    data = io.read_dataset(args.data)
    _check_target(cfg, data)
    bl = fit_baseline(data, cfg.eval, cfg.signal.if_freqs[cfg.eval.target_qubit])
    mu0, sigma0, unified = bl.stats(data)
    meta = {"target_qubit": bl.target_qubit, "if_freq": float(cfg.signal.if_freqs[bl.target_qubit]),
            "sample_rate": data.sample_rate}
    io.write_json(io.kernel_to_dict(bl.kernel, meta), outs[0])
    io.write_json(io.line_to_dict(bl.unified), outs[1])
    io.write_json(baseline_to_dict(bl, mu0, sigma0, unified), args.report)
    rows = {f"F{k + 1}": subset_fidelities(clf, data, spectators=bl.spectators).F
            for k, clf in enumerate(bl.dedicated_classifiers())}
    rows[f"F{len(rows) + 1}"] = unified.F
    print(_table(rows, bl, f"Assignment fidelities of Q{bl.target_qubit + 1} (calibration shots)"))
    print(f"mu0 = {format_percent(mu0)}  sigma0 = {format_percent(sigma0)}")
    return {"mu0": mu0, "sigma0": sigma0, "mu5": unified.mu}


def cmd_train(args) -> dict:
    cfg = _load_config(args.config)
    if args.iterations is not None:
        cfg.train.iterations = args.iterations
    data = io.read_dataset(args.data)
    _check_target(cfg, data)
    kernel = io.kernel_from_dict(io.read_json(args.kernel))
    if kernel.n_samples != data.n_samples:
        raise ConfigError(f"kernel length {kernel.n_samples} does not match data length {data.n_samples}")
    _, model, trace = train_qsc(data, kernel, cfg.train)
    meta = {"target_qubit": data.target_qubit, "sample_rate": data.sample_rate,
            "train": cfg.train.to_dict(), "train_digest": io.train_digest(cfg.train),
            "final_loss": trace.final_loss, "final_accuracy": trace.final_accuracy}
    io.write_json(io.model_to_dict(model, meta), args.out)
    if args.trace:
        losses = trace.loss + [trace.final_loss]
        io.atomic_write(args.trace, "iteration,loss\n" + "".join(f"{k},{v!r}\n" for k, v in enumerate(losses)))
    return {"iterations": cfg.train.iterations, "initial_loss": (trace.loss or [trace.final_loss])[0],
            "final_loss": trace.final_loss, "final_accuracy": trace.final_accuracy}


def cmd_eval(args) -> dict:
    data = io.read_dataset(args.data)
    model_doc = io.read_json(args.model)
    model = io.model_from_dict(model_doc)
    bl = baseline_from_dict(io.read_json(args.baseline))
    if data.target_qubit != bl.target_qubit:
        raise ConfigError("data and baseline target qubits differ")
    if model.n_samples != data.n_samples:
        raise ConfigError(f"model length {model.n_samples} does not match data length {data.n_samples}")
    report = evaluate(model, bl, data)
    doc = {"format": "qsc.report", "version": 1, "target_qubit": data.target_qubit,
           "spectators": bl.spectators, **report.to_dict()}
    io.write_json(doc, args.report)
    rows = {f"F{k + 1}": subset_fidelities(clf, data, spectators=bl.spectators).F
            for k, clf in enumerate(bl.dedicated_classifiers())}
    k = len(rows)
    rows[f"F{k + 1}"] = report.extra["F5"]
    rows[f"F{k + 2}"] = report.F
    print(_table(rows, bl, f"Assignment fidelities of Q{data.target_qubit + 1}'s state"))
    print()
    print(render_summary({"F0": (report.mu0, report.sigma0),
                          f"F{k + 1}": (report.extra["mu5"], report.extra["sigma5"]),
                          f"F{k + 2}": (report.mu, report.sigma)}))
    print()
    print(f"f_p1 = {format_percent(report.f_p1)}  f_p2 = {format_percent(report.f_p2)}  "
          f"crosstalk_free = {str(report.crosstalk_free).lower()}")
    return {"mu6": report.mu, "sigma6": report.sigma, "crosstalk_free": report.crosstalk_free}


def cmd_spectrum(args) -> dict:
    cfg = _load_config(args.config)
    doc = io.read_json(args.model)
    fmt = doc.get("format") if isinstance(doc, dict) else None
    if fmt == "qsc.model":
        source = io.model_from_dict(doc)
    elif fmt == "qsc.kernel":
        source = io.kernel_from_dict(doc)
    else:
        raise DataFormatError("--model must be a qsc.model or qsc.kernel document")
    sample_rate = float(doc.get("meta", {}).get("sample_rate", cfg.signal.sample_rate))
    if args.row is not None:
        cfg.spectrum.row = args.row
    if cfg.spectrum.row not in (0, 1):
        raise ConfigError("--row must be 0 or 1")
    report, checks = kernel_row_spectrum(source, sample_rate, cfg.spectrum, cfg.signal.if_freqs)
    io.atomic_write(args.out, to_csv(report))
    top = float(report.amps.max())
    peaks = {"format": "qsc.peaks", "version": 1, "row": cfg.spectrum.row, "sample_rate": sample_rate,
             "zero_pad_to": cfg.spectrum.zero_pad_to, "window": cfg.spectrum.window,
             "floor_ratio": cfg.spectrum.floor_ratio, "max_amplitude": top,
             "candidates": [{"qubit": q, "if_freq": c.candidate, "found": c.found, "peak_freq": c.freq,
                             "amplitude": c.amp, "ratio": c.amp / top if top > 0 else 0.0}
                            for q, c in enumerate(checks)],
             "peaks": [{"freq": f, "amplitude": a} for f, a in report.peaks]}
    if args.peaks:
        io.write_json(peaks, args.peaks)
    for q, c in enumerate(checks):
        print(f"Q{q + 1} {c.candidate / 1e6:7.1f} MHz  {'peak' if c.found else '-':4}  "
              f"{peaks['candidates'][q]['ratio']:.3f}")
    return {"found": [q for q, c in enumerate(checks) if c.found]}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qsc", description="Multiplexed qubit readout: DSP baseline and trainable classifier.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    cfg_help = "run config JSON (or 'reference'); defaults apply when omitted"

    g = sub.add_parser("gen", help="generate a synthetic dataset")
    g.add_argument("--config", help=cfg_help)
    g.add_argument("--out", required=True)
    g.add_argument("--split", help="write paired train/test files, e.g. 50:50")
    g.add_argument("--seed", type=int, help="override signal.seed")
    g.set_defaults(func=cmd_gen)

    b = sub.add_parser("baseline", help="weighted kernel and SVM discriminants")
    b.add_argument("--config", help=cfg_help)
    b.add_argument("--data", required=True)
    b.add_argument("--out", required=True, help="kernel.json,line.json")
    b.add_argument("--report", required=True)
    b.set_defaults(func=cmd_baseline)

    t = sub.add_parser("train", help="initialise the network from a kernel and train it")
    t.add_argument("--config", help=cfg_help)
    t.add_argument("--data", required=True)
    t.add_argument("--kernel", required=True)
    t.add_argument("--out", required=True)
    t.add_argument("--trace")
    t.add_argument("--iterations", type=int)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="per-subset fidelities on held-out data")
    e.add_argument("--data", required=True)
    e.add_argument("--model", required=True)
    e.add_argument("--baseline", required=True)
    e.add_argument("--report", required=True)
    e.set_defaults(func=cmd_eval)

    s = sub.add_parser("spectrum", help="amplitude spectrum of a demodulation row")
    s.add_argument("--config", help=cfg_help)
    s.add_argument("--model", required=True, help="model or kernel JSON")
    s.add_argument("--row", type=int)
    s.add_argument("--out", required=True)
    s.add_argument("--peaks")
    s.set_defaults(func=cmd_spectrum)
    return p


def _fail(exc: QscError) -> int:
    sys.stderr.write(json.dumps(exc.to_dict(), sort_keys=True) + "\n")
    return exc.exit_code


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        with np.errstate(over="ignore", under="ignore"):
            args.func(args)
        return 0
    except QscError as exc:
        return _fail(exc)
    except FileNotFoundError as exc:
        return _fail(DataFormatError(f"no such file: {exc.filename}"))
    except OSError as exc:
        return _fail(DataFormatError(f"{exc.filename}: {exc.strerror}"))
    except (FloatingPointError, np.linalg.LinAlgError) as exc:
        return _fail(FitError(f"numerical failure: {exc}"))


if __name__ == "__main__":
    sys.exit(main())
