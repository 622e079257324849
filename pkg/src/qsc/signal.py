"""Synthetic frequency-multiplexed readout traces.

Each resonator ``i`` contributes a tone at its intermediate frequency whose
complex amplitude depends on the state of its own qubit. Excited spectator
qubits add a further complex offset to that amplitude through the coupling
matrix ``crosstalk``::

    c_i = amp_i * exp(1j * phase_i(bit_i))
          + sum_{j != i} crosstalk[i, j] * bit_j * amp_i * exp(1j * crosstalk_phase_i)

    x[k] = sum_i Re(c_i * exp(2j * pi * f_i * t_k)) + noise[k],  t_k = k / sample_rate

The offset from a spectator is independent of the target's own state, so an
excited neighbour translates both I-Q clouds of the target by the same vector.

Noise is i.i.d. Gaussian, drawn with the Box-Muller transform from uniforms of
a PCG64 generator. Every shot has its own generator whose seed is a SplitMix64
mix of ``(seed, state index, shot index)``, so shots can be produced in any
order with identical results.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, fields
from typing import Iterator, Sequence

import numpy as np

from .errors import ConfigError, ShapeError

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One SplitMix64 output step applied to ``x`` (64-bit wraparound)."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def shot_seed(seed: int, state_index: int, shot_index: int) -> int:
    h = splitmix64(seed & _MASK64)
    h = splitmix64(h ^ (state_index & _MASK64))
    return splitmix64(h ^ (shot_index & _MASK64))


def box_muller(rng: np.random.Generator, n: int) -> np.ndarray:
    """``n`` standard normal deviates from pairs of uniforms."""
    m = (n + 1) // 2
    u = rng.random((2, m))
    r = np.sqrt(-2.0 * np.log1p(-u[0]))  # 1 - u in (0, 1]
    theta = 2.0 * np.pi * u[1]
    z = np.concatenate([r * np.cos(theta), r * np.sin(theta)])
    return z[:n]


def _per_qubit(value, n, name, default):
    if value is None:
        value = default
    arr = np.array(value, dtype=float)
    if arr.ndim == 0:
        arr = np.full(n, float(arr))
    if arr.shape != (n,):
        raise ConfigError(f"{name} must have one entry per qubit ({n}), got shape {arr.shape}")
    return arr


@dataclass
class SignalModelConfig:
    """Parameters of the synthetic readout model.

    Per-qubit fields accept a scalar (broadcast) or a sequence of length
    ``n_qubits``. ``crosstalk[i][j]`` scales the offset that qubit ``j`` being
    excited adds to resonator ``i``; the diagonal is ignored.
    ``crosstalk_phase[i]`` is the direction of that offset in resonator ``i``'s
    I-Q plane.
    """

    n_qubits: int = 6
    sample_rate: float = 1.6e9
    n_samples: int = 320
    if_freqs: Sequence[float] | None = None
    amp: Sequence[float] | float | None = None
    phase_g: Sequence[float] | float | None = None
    phase_e: Sequence[float] | float | None = None
    crosstalk: Sequence[Sequence[float]] | None = None
    crosstalk_phase: Sequence[float] | float | None = None
    noise_sigma: float = 1.0
    seed: int = 0

    def __post_init__(self):
        n = int(self.n_qubits)
        if n < 1 or n > 16:
            raise ConfigError(f"n_qubits must be in [1, 16], got {self.n_qubits}")
        self.n_qubits = n
        self.n_samples = int(self.n_samples)
        self.sample_rate = float(self.sample_rate)
        self.noise_sigma = float(self.noise_sigma)
        self.seed = int(self.seed) & _MASK64
        if self.n_samples < 2:
            raise ConfigError(f"n_samples must be >= 2, got {self.n_samples}")
        if not self.sample_rate > 0:
            raise ConfigError(f"sample_rate must be positive, got {self.sample_rate}")
        self.if_freqs = _per_qubit(self.if_freqs, n, "if_freqs", 500e6 + 20e6 * np.arange(n))
        self.amp = _per_qubit(self.amp, n, "amp", 1.0)
        self.phase_g = _per_qubit(self.phase_g, n, "phase_g", 0.0)
        self.phase_e = _per_qubit(self.phase_e, n, "phase_e", np.pi / 2)
        self.crosstalk_phase = _per_qubit(self.crosstalk_phase, n, "crosstalk_phase", 0.0)
        kappa = np.zeros((n, n)) if self.crosstalk is None else np.array(self.crosstalk, dtype=float)
        if kappa.shape != (n, n):
            raise ConfigError(f"crosstalk must be {n}x{n}, got shape {kappa.shape}")
        self.crosstalk = kappa

        nyq = self.sample_rate / 2
        if np.any(self.if_freqs <= 0) or np.any(self.if_freqs >= nyq):
            raise ConfigError(f"every IF must lie in (0, {nyq:g}) Hz, got {self.if_freqs.tolist()}")
        if len(np.unique(self.if_freqs)) != n:
            raise ConfigError("IF frequencies must be pairwise distinct")
        if np.any(self.amp < 0):
            raise ConfigError("amp must be non-negative")
        if self.noise_sigma < 0:
            raise ConfigError("noise_sigma must be non-negative")
        for name in ("if_freqs", "amp", "phase_g", "phase_e", "crosstalk", "crosstalk_phase"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ConfigError(f"{name} contains non-finite values")

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_samples) / self.sample_rate

    def to_dict(self) -> dict:
        d = {}
        for f in fields(self):
            v = getattr(self, f.name)
            d[f.name] = v.tolist() if isinstance(v, np.ndarray) else v
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SignalModelConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown signal config keys: {unknown}")
        return cls(**d)


@dataclass(frozen=True)
class BasisState:
    """Joint computational basis state; ``bits[i]`` is the state of qubit ``i``."""

    bits: tuple

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits):
            raise ConfigError(f"basis state bits must be 0 or 1, got {self.bits}")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_string(cls, s: str) -> "BasisState":
        return cls(tuple(int(c) for c in s))

    @classmethod
    def from_mask(cls, mask: int, n_qubits: int) -> "BasisState":
        return cls(tuple((mask >> i) & 1 for i in range(n_qubits)))

    @property
    def mask(self) -> int:
        return sum(b << i for i, b in enumerate(self.bits))

    def __len__(self):
        return len(self.bits)

    def __str__(self):
        return "".join(str(b) for b in self.bits)


def subset_states(n_qubits: int, qubits: Sequence[int]) -> list[BasisState]:
    """All assignments of ``qubits`` with every other qubit in ground.

    The first listed qubit is the most significant digit of the ordering, so
    ``subset_states(6, [1, 2, 3])`` walks |Q2,Q3,Q4> = 000, 001, ..., 111.
    """
    states = []
    for combo in itertools.product((0, 1), repeat=len(qubits)):
        bits = [0] * n_qubits
        for q, b in zip(qubits, combo):
            bits[q] = b
        states.append(BasisState(tuple(bits)))
    return states


@dataclass
class ShotRecord:
    state: BasisState
    samples: np.ndarray


@dataclass
class Dataset:
    """Labelled shots stored as arrays.

    ``samples`` is ``(n_shots, n_samples)``; ``states`` is ``(n_shots, n_qubits)``
    with entries in {0, 1}.
    """

    n_qubits: int
    sample_rate: float
    n_samples: int
    target_qubit: int
    samples: np.ndarray
    states: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        self.states = np.asarray(self.states, dtype=np.uint8)
        if self.samples.ndim != 2 or self.samples.shape[1] != self.n_samples:
            raise ShapeError(f"samples must be (n_shots, {self.n_samples}), got {self.samples.shape}")
        if self.states.shape != (self.samples.shape[0], self.n_qubits):
            raise ShapeError(f"states must be ({self.samples.shape[0]}, {self.n_qubits}), got {self.states.shape}")
        if np.any(self.states > 1):
            raise ShapeError("state bits must be 0 or 1")
        if not 0 <= self.target_qubit < self.n_qubits:
            raise ShapeError(f"target_qubit {self.target_qubit} out of range")

    def __len__(self):
        return self.samples.shape[0]

    @property
    def labels(self) -> np.ndarray:
        """Target-qubit bit of every shot (0 ground, 1 excited)."""
        return self.states[:, self.target_qubit].astype(np.int64)

    @property
    def masks(self) -> np.ndarray:
        weights = (1 << np.arange(self.n_qubits)).astype(np.int64)
        return self.states.astype(np.int64) @ weights

    @property
    def shots(self) -> Iterator[ShotRecord]:
        for i in range(len(self)):
            yield ShotRecord(BasisState(tuple(self.states[i])), self.samples[i])

    def subset(self, index) -> "Dataset":
        return Dataset(self.n_qubits, self.sample_rate, self.n_samples, self.target_qubit,
                       self.samples[index], self.states[index])


def response_amplitudes(config: SignalModelConfig, state: BasisState) -> np.ndarray:
    """Complex amplitude of every resonator tone for a noiseless shot."""
    if len(state) != config.n_qubits:
        raise ConfigError(f"state has {len(state)} bits, config has {config.n_qubits} qubits")
    bits = np.array(state.bits, dtype=float)
    phase = np.where(bits > 0, config.phase_e, config.phase_g)
    own = config.amp * np.exp(1j * phase)
    kappa = config.crosstalk.copy()
    np.fill_diagonal(kappa, 0.0)
    shift = (kappa @ bits) * config.amp * np.exp(1j * config.crosstalk_phase)
    return own + shift


def noiseless_trace(config: SignalModelConfig, state: BasisState) -> np.ndarray:
    c = response_amplitudes(config, state)
    t = config.times
    carrier = np.exp(2j * np.pi * np.outer(config.if_freqs, t))
    return (c[:, None] * carrier).real.sum(axis=0)


def generate_shot(config: SignalModelConfig, state: BasisState, shot_seed: int) -> ShotRecord:
    x = noiseless_trace(config, state)
    if config.noise_sigma > 0:
        rng = np.random.Generator(np.random.PCG64(shot_seed & _MASK64))
        x = x + config.noise_sigma * box_muller(rng, config.n_samples)
    return ShotRecord(state, x)


def generate_dataset(config: SignalModelConfig, shots_per_state: int, states: Sequence[BasisState],
                     target_qubit: int) -> Dataset:
    """``shots_per_state`` shots of every state, grouped state by state."""
    states = list(states)
    if not states:
        raise ConfigError("state list is empty")
    if shots_per_state < 1:
        raise ConfigError(f"shots_per_state must be >= 1, got {shots_per_state}")
    if not 0 <= target_qubit < config.n_qubits:
        raise ConfigError(f"target_qubit {target_qubit} out of range")
    n = config.n_samples
    samples = np.empty((shots_per_state * len(states), n))
    bits = np.empty((shots_per_state * len(states), config.n_qubits), dtype=np.uint8)
    row = 0
    for si, state in enumerate(states):
        clean = noiseless_trace(config, state)
        for k in range(shots_per_state):
            x = clean
            if config.noise_sigma > 0:
                rng = np.random.Generator(np.random.PCG64(shot_seed(config.seed, si, k)))
                x = clean + config.noise_sigma * box_muller(rng, n)
            samples[row] = x
            bits[row] = state.bits
            row += 1
    return Dataset(config.n_qubits, config.sample_rate, n, target_qubit, samples, bits)


def split_dataset(dataset: Dataset, fraction: float = 0.5) -> tuple[Dataset, Dataset]:
    """Split every prepared state's shots into a leading and a trailing part."""
    if not 0 < fraction < 1:
        raise ConfigError(f"split fraction must be in (0, 1), got {fraction}")
    masks = dataset.masks
    first, second = [], []
    for m in dict.fromkeys(masks.tolist()):
        idx = np.flatnonzero(masks == m)
        cut = int(round(len(idx) * fraction))
        first.append(idx[:cut])
        second.append(idx[cut:])
    return dataset.subset(np.concatenate(first)), dataset.subset(np.concatenate(second))
