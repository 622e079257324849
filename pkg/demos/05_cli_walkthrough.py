"""
Command-line walkthrough
========================

The same workflow through the ``qsc`` command: generate paired train/test
files, calibrate, train, evaluate on held-out shots, and dump the spectrum.
Files go to a temporary directory that is printed at the end.
"""
import subprocess
import sys
import tempfile
from pathlib import Path

from qsc import io
from qsc.config import reference_config

work = Path(tempfile.mkdtemp(prefix="qsc-demo-"))
io.write_json(reference_config().to_dict(), work / "cfg.json")


def qsc(*args):
    cmd = [sys.executable, "-m", "qsc", *map(str, args)]
    print("$ qsc", " ".join(map(str, args)), flush=True)
    subprocess.run(cmd, check=True, cwd=work)
    print()


qsc("gen", "--config", "cfg.json", "--out", "data.qscd", "--split", "50:50")
qsc("baseline", "--config", "cfg.json", "--data", "data_train.qscd",
    "--out", "kernel.json,line.json", "--report", "base.json")
qsc("train", "--config", "cfg.json", "--data", "data_train.qscd", "--kernel", "kernel.json",
    "--out", "model.json", "--trace", "trace.csv")
qsc("eval", "--data", "data_test.qscd", "--model", "model.json", "--baseline", "base.json",
    "--report", "report.json")
qsc("spectrum", "--config", "cfg.json", "--model", "model.json", "--row", "0",
    "--out", "spec.csv", "--peaks", "peaks.json")
print("outputs in", work)
