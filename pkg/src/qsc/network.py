"""Quantum state classifier: the demodulation chain as a two-layer network.

    h = w1 @ scale(x) + b1        demodulation layer (2 x N weights, bias d)
    p = w2 @ tanh(h) + b2         projection layer ([a b], c)

``p > 0`` assigns the excited state. The network starts out as the
conventional chain (weighted kernel, clouds centred on the origin, bisector
projection) and is then trained full-batch on the logistic loss of ``p``
against labels ``y = +1`` (excited) / ``-1`` (ground).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dsp import DemodKernel, fit_bisector
from .errors import ConfigError, FitError, ShapeError
from .signal import Dataset

SCALE_FLOOR = 1e-12
INIT_RADIUS = 0.2


@dataclass
class FeatureScaler:
    shift: np.ndarray
    scale: np.ndarray

    def __post_init__(self):
        self.shift = np.asarray(self.shift, dtype=float)
        self.scale = np.asarray(self.scale, dtype=float)
        if self.shift.shape != self.scale.shape or self.shift.ndim != 1:
            raise ShapeError("scaler shift and scale must be vectors of equal length")
        if np.any(self.scale <= 0):
            raise ShapeError("scaler scale must be positive")

    def __call__(self, x) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.shift) / self.scale

    @classmethod
    def identity(cls, n: int) -> "FeatureScaler":
        return cls(np.zeros(n), np.ones(n))


def fit_feature_scaler(dataset: Dataset | np.ndarray) -> FeatureScaler:
    """Per-time-point mean and standard deviation over all shots."""
    x = dataset.samples if isinstance(dataset, Dataset) else np.asarray(dataset, dtype=float)
    if x.ndim != 2 or len(x) == 0:
        raise ShapeError("scaler needs a non-empty (n_shots, n_samples) array")
    shift = x.mean(axis=0)
    scale = np.maximum(x.std(axis=0), SCALE_FLOOR)
    return FeatureScaler(shift, scale)


@dataclass
class QscModel:
    scaler: FeatureScaler
    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: float

    def __post_init__(self):
        self.w1 = np.array(self.w1, dtype=float)
        self.b1 = np.array(self.b1, dtype=float)
        self.w2 = np.array(self.w2, dtype=float)
        self.b2 = float(self.b2)
        n = self.scaler.shift.shape[0]
        if self.w1.shape != (2, n) or self.b1.shape != (2,) or self.w2.shape != (2,):
            raise ShapeError(f"inconsistent QSC parameter shapes for N={n}")
        if not all(np.all(np.isfinite(v)) for v in (self.w1, self.b1, self.w2, self.b2)):
            raise ShapeError("QSC parameters must be finite")

    @property
    def n_samples(self) -> int:
        return self.w1.shape[1]

    def copy(self) -> "QscModel":
        return QscModel(FeatureScaler(self.scaler.shift.copy(), self.scaler.scale.copy()),
                        self.w1.copy(), self.b1.copy(), self.w2.copy(), self.b2)

    def hidden(self, x) -> np.ndarray:
        """Demodulation-layer output (pre-tanh I-Q points)."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.n_samples:
            raise ShapeError(f"signal length {x.shape[-1]} does not match model length {self.n_samples}")
        return self.scaler(x) @ self.w1.T + self.b1

    def effective_kernel(self) -> DemodKernel:
        """Demodulation layer re-expressed on raw samples: ``h = D @ x + d``."""
        d = self.w1 / self.scaler.scale
        return DemodKernel(d, self.b1 - d @ self.scaler.shift)


def forward(model: QscModel, x) -> np.ndarray | float:
    p = np.tanh(model.hidden(x)) @ model.w2 + model.b2
    return float(p) if np.ndim(p) == 0 else p


def classify_qsc(model: QscModel, x) -> np.ndarray | int:
    out = (np.asarray(forward(model, x)) > 0).astype(np.int64)
    return int(out) if out.ndim == 0 else out


def init_from_dsp(kernel: DemodKernel, scaler: FeatureScaler, init_sample: Dataset | tuple,
                  radius: float = INIT_RADIUS) -> QscModel:
    """Network equal in decisions to the kernel + bisector chain.

    ``init_sample`` is a :class:`Dataset` (labels from its target qubit) or a
    ``(samples, labels)`` pair. The kernel is moved onto scaled inputs, the I-Q
    frame is shifted so the class centroids sit symmetrically about the origin,
    and everything is scaled by ``gamma`` so the centroids land at ``radius``,
    inside the near-linear range of tanh. The projection layer is the
    perpendicular bisector of the tanh-mapped centroids.
    """
    x, labels = _unpack(init_sample)
    if kernel.n_samples != scaler.shift.shape[0]:
        raise ShapeError("kernel and scaler lengths differ")
    if labels.min() == labels.max():
        raise FitError("initialisation sample holds a single class")
    d_scaled = kernel.d_matrix * scaler.scale
    iq = scaler(x) @ d_scaled.T
    cg, ce = iq[labels == 0].mean(axis=0), iq[labels == 1].mean(axis=0)
    mid = 0.5 * (cg + ce)
    half = 0.5 * np.hypot(*(ce - cg))
    if not half > 0:
        raise FitError("class centroids coincide after demodulation")
    gamma = radius / half
    w1 = gamma * d_scaled
    b1 = -gamma * mid
    line = fit_bisector(np.tanh(iq * gamma + b1), labels)
    return QscModel(scaler, w1, b1, np.array([line.a, line.b]), line.c)


def _unpack(batch):
    if isinstance(batch, Dataset):
        return batch.samples, batch.labels
    x, labels = batch
    x = np.atleast_2d(np.asarray(x, dtype=float))
    labels = np.asarray(labels).astype(np.int64).ravel()
    if len(x) != len(labels):
        raise ShapeError("one label per shot required")
    return x, labels


def _log1pexp(z):
    """ln(1 + exp(z)) without overflow."""
    return np.logaddexp(0.0, z)


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _loss_grad_scaled(params, xs, y):
    w1, b1, w2, b2 = params
    h = xs @ w1.T + b1
    a = np.tanh(h)
    p = a @ w2 + b2
    m = len(y)
    loss = _log1pexp(-y * p).sum() / m
    dp = -y * _sigmoid(-y * p) / m
    dh = np.outer(dp, w2) * (1.0 - a * a)
    grads = (dh.T @ xs, dh.sum(axis=0), a.T @ dp, dp.sum())
    return loss, grads


def loss_and_gradient(model: QscModel, batch) -> tuple[float, dict]:
    """Mean logistic loss and its exact gradient for every parameter."""
    x, labels = _unpack(batch)
    if len(labels) == 0:
        raise ConfigError("empty batch")
    y = np.where(labels > 0, 1.0, -1.0)
    params = (model.w1, model.b1, model.w2, model.b2)
    loss, (g_w1, g_b1, g_w2, g_b2) = _loss_grad_scaled(params, model.scaler(x), y)
    return float(loss), {"w1": g_w1, "b1": g_b1, "w2": g_w2, "b2": float(g_b2)}


@dataclass
class TrainConfig:
    """Full-batch RMSProp settings.

    Each parameter moves by ``lr * g / (sqrt(v) + eps)`` with ``v`` the
    decaying average (factor ``rho``) of its squared gradient.
    """

    iterations: int = 500
    lr: float = 0.05
    rho: float = 0.9
    eps: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        self.iterations = int(self.iterations)
        if self.iterations < 0:
            raise ConfigError("iterations must be >= 0")
        if not self.lr > 0:
            raise ConfigError("learning rate must be positive")
        if not 0 < self.rho < 1:
            raise ConfigError("rho must lie in (0, 1)")

    def to_dict(self) -> dict:
        return {"iterations": self.iterations, "lr": self.lr, "rho": self.rho,
                "eps": self.eps, "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        unknown = sorted(set(d) - {"iterations", "lr", "rho", "eps", "seed"})
        if unknown:
            raise ConfigError(f"unknown train config keys: {unknown}")
        return cls(**d)


@dataclass
class TrainTrace:
    loss: list = field(default_factory=list)
    final_loss: float = float("nan")
    final_accuracy: float = float("nan")


def train(model: QscModel, dataset: Dataset | tuple, cfg: TrainConfig | None = None) -> tuple[QscModel, TrainTrace]:
    """Train on the target-qubit labels; returns a new model and the loss trace.

    ``trace.loss[k]`` is the full-batch loss before update ``k``.
    """
    cfg = cfg or TrainConfig()
    x, labels = _unpack(dataset)
    y = np.where(labels > 0, 1.0, -1.0)
    out = model.copy()
    xs = out.scaler(x)
    params = [out.w1, out.b1, out.w2, np.array(out.b2)]
    sq = [np.zeros_like(p) for p in params]
    trace = TrainTrace()
    for _ in range(cfg.iterations):
        loss, grads = _loss_grad_scaled(params, xs, y)
        trace.loss.append(float(loss))
        for p, s, g in zip(params, sq, grads):
            s *= cfg.rho
            s += (1.0 - cfg.rho) * g * g
            p -= cfg.lr * g / (np.sqrt(s) + cfg.eps)
    out.w1, out.b1, out.w2, out.b2 = params[0], params[1], params[2], float(params[3])
    final_loss, _ = _loss_grad_scaled(params, xs, y)
    trace.final_loss = float(final_loss)
    trace.final_accuracy = float(np.mean(classify_qsc(out, x) == labels))
    return out, trace
