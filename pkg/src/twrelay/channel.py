"""Random network model: configs, fading laws and channel realizations."""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np


@dataclass(frozen=True)
class FadingLaw:
    """Law of the path-loss/shadowing factors E_k, F_k, P_k, Q_k."""

    kind: Literal["uniform", "constant"] = "uniform"
    lo: float = 0.5
    hi: float = 1.5

    def __post_init__(self):
        if self.kind == "uniform":
            if not (self.lo > 0 and self.hi >= self.lo):
                raise ValueError(f"uniform fading needs 0 < lo <= hi, got ({self.lo}, {self.hi})")
        elif self.kind == "constant":
            if not self.lo > 0:
                raise ValueError(f"constant fading needs c > 0, got {self.lo}")
        else:
            raise ValueError(f"unknown fading kind {self.kind!r}")

    @classmethod
    def uniform(cls, lo: float = 0.5, hi: float = 1.5) -> "FadingLaw":
        return cls("uniform", float(lo), float(hi))

    @classmethod
    def constant(cls, c: float = 1.0) -> "FadingLaw":
        return cls("constant", float(c), float(c))

    @classmethod
    def parse(cls, text: str) -> "FadingLaw":
        """Parse ``uniform:lo,hi`` or ``constant:c``."""
        kind, _, args = text.strip().partition(":")
        vals = [float(v) for v in args.split(",") if v.strip()]
        if kind == "uniform" and len(vals) == 2:
            return cls.uniform(*vals)
        if kind == "constant" and len(vals) == 1:
            return cls.constant(vals[0])
        raise ValueError(f"cannot parse fading law {text!r}; use uniform:lo,hi or constant:c")

    @property
    def mean(self) -> float:
        return 0.5 * (self.lo + self.hi) if self.kind == "uniform" else self.lo

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.kind == "constant":
            return np.full(size, self.lo)
        return rng.uniform(self.lo, self.hi, size)

    def __str__(self) -> str:
        if self.kind == "constant":
            return f"constant:{self.lo:g}"
        return f"uniform:{self.lo:g},{self.hi:g}"


@dataclass(frozen=True)
class SystemConfig:
    """One experiment point. Powers and noise variance are linear."""

    M: int = 2
    N: int = 2
    K: int = 256
    P: float = 10.0
    P_R: float = 10.0
    sigma2: float = 1.0
    alpha: float = 0.5
    fading: FadingLaw = field(default_factory=FadingLaw)

    def __post_init__(self):
        for name in ("M", "N", "K"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be >= 1")
        for name in ("P", "P_R", "sigma2"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"{name} must be positive and finite, got {v}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")

    def with_(self, **changes) -> "SystemConfig":
        return replace(self, **changes)


_PURPOSES = {"channel": 0, "slot": 1}


def _purpose_code(tag: str) -> int:
    return _PURPOSES.get(tag, zlib.crc32(tag.encode()) | (1 << 32))


@dataclass(frozen=True)
class RngStream:
    """Substream ``(seed, trial, purpose)`` of a counter-based generator.

    Each stream keys its own Philox generator, so draws never depend on
    which other substreams were consumed first.
    """

    seed: int
    trial: int = 0
    purpose: str = "channel"

    def generator(self) -> np.random.Generator:
        mask = (1 << 64) - 1
        ss = np.random.SeedSequence([self.seed & mask, self.trial, _purpose_code(self.purpose)])
        return np.random.Generator(np.random.Philox(ss))


def complex_normal(rng: np.random.Generator, shape, var: float = 1.0) -> np.ndarray:
    """Circularly-symmetric CN(0, var) samples."""
    z = rng.standard_normal((2,) + tuple(np.atleast_1d(shape)))
    return math.sqrt(var / 2.0) * (z[0] + 1j * z[1])


@dataclass(frozen=True)
class ChannelRealization:
    """All per-relay channels of one coherence block.

    Matrices are stacked along axis 0 (relay index k, 0-based):
    ``H`` (K,N,M) T1->relay, ``G`` (K,M,N) relay->T2, ``Hr`` (K,M,N)
    relay->T1, ``Gr`` (K,N,M) T2->relay. ``E, F`` are the T1/T2->relay
    fading factors, ``P, Q`` the relay->T2/T1 ones.
    """

    H: np.ndarray
    G: np.ndarray
    Hr: np.ndarray
    Gr: np.ndarray
    E: np.ndarray
    F: np.ndarray
    P: np.ndarray
    Q: np.ndarray

    def __post_init__(self):
        K, N, M = self.H.shape
        shapes = {"G": (K, M, N), "Hr": (K, M, N), "Gr": (K, N, M)}
        for name, shape in shapes.items():
            if getattr(self, name).shape != shape:
                raise ValueError(f"{name} has shape {getattr(self, name).shape}, expected {shape}")
        for name in "EFPQ":
            v = getattr(self, name)
            if v.shape != (K,) or np.any(v <= 0):
                raise ValueError(f"fading factor {name} must be {K} positive values")

    @property
    def K(self) -> int:
        return self.H.shape[0]

    @property
    def N(self) -> int:
        return self.H.shape[1]

    @property
    def M(self) -> int:
        return self.H.shape[2]

    def swap_roles(self) -> "ChannelRealization":
        """Exchange the roles of T1 and T2 (H<->Gr, G<->Hr, E<->F, P<->Q)."""
        return ChannelRealization(
            H=self.Gr, G=self.Hr, Hr=self.G, Gr=self.H,
            E=self.F, F=self.E, P=self.Q, Q=self.P,
        )


def sample_realization(config: SystemConfig, stream: RngStream) -> ChannelRealization:
    rng = stream.generator()
    K, N, M = config.K, config.N, config.M
    H = complex_normal(rng, (K, N, M))
    G = complex_normal(rng, (K, M, N))
    Hr = complex_normal(rng, (K, M, N))
    Gr = complex_normal(rng, (K, N, M))
    E, F, P, Q = (config.fading.sample(rng, K) for _ in range(4))
    return ChannelRealization(H, G, Hr, Gr, E, F, P, Q)


def ensemble_mean_check(real: ChannelRealization, mu: float) -> float:
    """Max entrywise deviation of (1/K) sum_k P_k G_k G_k^H from mu*N*I."""
    gram = np.einsum("k,kmn,kln->ml", real.P, real.G, np.conj(real.G)) / real.K
    target = mu * real.N * np.eye(real.M)
    return float(np.max(np.abs(gram - target)))


_MATRICES = ("H", "G", "Hr", "Gr")


def dump_realization(real: ChannelRealization) -> str:
    lines = []
    for k in range(real.K):
        for name in _MATRICES:
            mat = getattr(real, name)[k]
            for (i, j), z in np.ndenumerate(mat):
                lines.append(f"{k},{name},{i},{j},{float(z.real)!r},{float(z.imag)!r}")
        fad = ",".join(repr(float(getattr(real, f)[k])) for f in "EFPQ")
        lines.append(f"{k},fading,{fad}")
    return "\n".join(lines) + "\n"


def load_realization(text: str, M: int, N: int) -> ChannelRealization:
    rows = [ln.split(",") for ln in text.splitlines() if ln.strip()]
    K = 1 + max(int(r[0]) for r in rows)
    shapes = {"H": (N, M), "G": (M, N), "Hr": (M, N), "Gr": (N, M)}
    mats = {name: np.zeros((K,) + s, dtype=np.complex128) for name, s in shapes.items()}
    fad = np.zeros((4, K))
    for r in rows:
        k = int(r[0])
        if r[1] == "fading":
            fad[:, k] = [float(v) for v in r[2:6]]
        else:
            mats[r[1]][k, int(r[2]), int(r[3])] = complex(float(r[4]), float(r[5]))
    return ChannelRealization(**mats, E=fad[0], F=fad[1], P=fad[2], Q=fad[3])
