"""Achievable rates of the two AF relay strategies.

* Dual channel matching (coherent relays): relay k applies
  ``W_k / sqrt(beta_k)`` with ``W_k = G_k^H H_k^H + Hr_k^H Gr_k^H``.
* Normalize-and-forward (non-coherent relays): relay k scales its received
  signal by the ensemble-average receive power ``N (P (E_k + F_k) + sigma2)``.

In both cases each terminal subtracts its own echoed signal exactly before
decoding, so each direction reduces to a point-to-point MIMO link
``y = A x + noise`` described by an :class:`EffectiveLink`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .capacity import mimo_mutual_information
from .channel import ChannelRealization, RngStream, SystemConfig, complex_normal
from .matcore import adjoint

Direction = Literal[12, 21]
Strategy = Literal["dcm", "nc_af"]


@dataclass(frozen=True)
class PowerAllocation:
    gamma: np.ndarray

    def __post_init__(self):
        if np.any(self.gamma < 0):
            raise ValueError("relay powers must be nonnegative")

    @property
    def total(self) -> float:
        return float(np.sum(self.gamma))

    def scaled(self, c: float) -> "PowerAllocation":
        return PowerAllocation(c * self.gamma)


@dataclass(frozen=True)
class EffectiveLink:
    A: np.ndarray
    Rnoise: np.ndarray


@dataclass(frozen=True)
class RatePair:
    r12_bits: float
    r21_bits: float

    @property
    def sum_bits(self) -> float:
        return self.r12_bits + self.r21_bits


def equal_power_allocation(cfg: SystemConfig) -> PowerAllocation:
    return PowerAllocation(np.full(cfg.K, cfg.P_R / cfg.K))


def _check_direction(direction) -> None:
    if direction not in (12, 21):
        raise ValueError(f"direction must be 12 or 21, got {direction!r}")


def _herm(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + adjoint(a))


# -- dual channel matching ---------------------------------------------------

def dcm_weights(real: ChannelRealization) -> np.ndarray:
    """Stack of all W_k, shape (K, N, N)."""
    return adjoint(real.G) @ adjoint(real.H) + adjoint(real.Hr) @ adjoint(real.Gr)


def dcm_weight(real: ChannelRealization, k: int) -> np.ndarray:
    """W_k for relay ``k`` (0-based)."""
    return adjoint(real.G[k]) @ adjoint(real.H[k]) + adjoint(real.Hr[k]) @ adjoint(real.Gr[k])


def relay_receive_covariance(real: ChannelRealization, cfg: SystemConfig) -> np.ndarray:
    """E{r_k r_k^H | channels} for every relay, shape (K, N, N)."""
    M, N = real.M, real.N
    hh = real.H @ adjoint(real.H)
    gg = real.Gr @ adjoint(real.Gr)
    return ((cfg.P / M) * (real.E[:, None, None] * hh + real.F[:, None, None] * gg)
            + cfg.sigma2 * np.eye(N))


def dcm_normalizations(real: ChannelRealization, cfg: SystemConfig) -> np.ndarray:
    """beta_k = tr(W_k R_k W_k^H) for every relay, so that E{t_k^H t_k} = 1.

    A relay whose W_k is identically zero gets beta_k = 0 and forwards nothing.
    """
    W = dcm_weights(real)
    R = relay_receive_covariance(real, cfg)
    beta = np.einsum("kij,kjl,kil->k", W, R, np.conj(W)).real
    live = np.any(W != 0, axis=(1, 2))
    bad = live & ~(beta > 0)
    if np.any(bad):
        k = int(np.argmax(bad))
        raise ValueError(f"DCM normalization of relay {k} is not positive ({beta[k]:.3e})")
    return np.where(live, beta, 0.0)


def dcm_normalization(real: ChannelRealization, cfg: SystemConfig, k: int) -> float:
    return float(dcm_normalizations(real, cfg)[k])


def _relay_maps(real, cfg, strategy: Strategy) -> np.ndarray:
    """Linear map T_k applied by each relay (t_k = T_k r_k), shape (K, N, N)."""
    if strategy == "dcm":
        beta = dcm_normalizations(real, cfg)
        inv = np.divide(1.0, np.sqrt(beta), out=np.zeros_like(beta), where=beta > 0)
        return dcm_weights(real) * inv[:, None, None]
    if strategy == "nc_af":
        scale = 1.0 / np.sqrt(real.N * (cfg.P * (real.E + real.F) + cfg.sigma2))
        return scale[:, None, None] * np.eye(real.N)
    raise ValueError(f"unknown strategy {strategy!r}")


def _link_from_maps(real, cfg, alloc, direction, maps) -> EffectiveLink:
    # direction 12: x enters through sqrt(P E_k/M) H_k, leaves through sqrt(gamma_k P_k) G_k
    if direction == 12:
        tx, txf, rx, rxf = real.H, real.E, real.G, real.P
    else:
        tx, txf, rx, rxf = real.Gr, real.F, real.Hr, real.Q
    M = real.M
    out_gain = np.sqrt(alloc.gamma * rxf)[:, None, None] * (rx @ maps)  # (K, M, N)
    in_gain = np.sqrt(cfg.P * txf / M)[:, None, None]
    A = np.sum(out_gain @ (in_gain * tx), axis=0)
    noise = cfg.sigma2 * np.sum(out_gain @ adjoint(out_gain), axis=0)
    return EffectiveLink(A=A, Rnoise=_herm(noise + cfg.sigma2 * np.eye(M)))


def dcm_effective_link(real: ChannelRealization, cfg: SystemConfig,
                       alloc: PowerAllocation, direction: Direction) -> EffectiveLink:
    """Signal matrix and noise covariance after self-interference removal.

    For direction 12: ``A = sum_k sqrt(g_k P_k P E_k / (M b_k)) G_k W_k H_k``,
    ``Rnoise = sum_k (g_k P_k s2 / b_k) G_k W_k W_k^H G_k^H + s2 I``.
    Direction 21 swaps (H, E, G, P) for (Gr, F, Hr, Q).
    """
    _check_direction(direction)
    return _link_from_maps(real, cfg, alloc, direction, _relay_maps(real, cfg, "dcm"))


def dcm_rate(link12: EffectiveLink, link21: EffectiveLink, cfg: SystemConfig) -> RatePair:
    M = link12.A.shape[0]
    qx = np.eye(M)
    return RatePair(0.5 * mimo_mutual_information(link12.A, qx, link12.Rnoise),
                    0.5 * mimo_mutual_information(link21.A, qx, link21.Rnoise))


# -- normalize-and-forward ---------------------------------------------------

def nc_af_effective_link(real: ChannelRealization, cfg: SystemConfig,
                         alloc: PowerAllocation, direction: Direction) -> EffectiveLink:
    """Effective link when each relay only rescales by its average receive power."""
    _check_direction(direction)
    return _link_from_maps(real, cfg, alloc, direction, _relay_maps(real, cfg, "nc_af"))


def nc_af_rate(link12: EffectiveLink, link21: EffectiveLink, cfg: SystemConfig) -> RatePair:
    M = link12.A.shape[0]
    qx = np.eye(M)  # unit power per stream; the 1/M is already inside A
    return RatePair(0.5 * mimo_mutual_information(link12.A, qx, link12.Rnoise),
                    0.5 * mimo_mutual_information(link21.A, qx, link21.Rnoise))


def achievable_rates(real: ChannelRealization, cfg: SystemConfig,
                     strategy: Strategy, alloc: PowerAllocation | None = None) -> RatePair:
    alloc = equal_power_allocation(cfg) if alloc is None else alloc
    if strategy == "dcm":
        return dcm_rate(dcm_effective_link(real, cfg, alloc, 12),
                        dcm_effective_link(real, cfg, alloc, 21), cfg)
    return nc_af_rate(nc_af_effective_link(real, cfg, alloc, 12),
                      nc_af_effective_link(real, cfg, alloc, 21), cfg)


# -- signal-level simulation -------------------------------------------------

@dataclass
class SlotTranscript:
    strategy: str
    x: np.ndarray
    u: np.ndarray
    r: np.ndarray  # (K, N)
    t: np.ndarray  # (K, N)
    y: np.ndarray
    v: np.ndarray
    residual12: float  # ||(y - echo) - (A x + noise)|| / ||y||
    residual21: float
    relay_power: np.ndarray = field(default=None)  # |t_k|^2

    def dump(self) -> str:
        def vec(name, a):
            a = np.atleast_2d(a)
            rows = [" ".join(f"{z.real:+.9e}{z.imag:+.9e}j" for z in row) for row in a]
            return f"[{name}]\n" + "\n".join(rows)

        parts = [f"# slot transcript, strategy={self.strategy}",
                 vec("x", self.x), vec("u", self.u), vec("r_k", self.r), vec("t_k", self.t),
                 vec("y", self.y), vec("v", self.v),
                 "[residuals]", f"residual12 {self.residual12:.3e}",
                 f"residual21 {self.residual21:.3e}"]
        return "\n".join(parts) + "\n"


def simulate_slot(real: ChannelRealization, cfg: SystemConfig, alloc: PowerAllocation,
                  strategy: Strategy, stream: RngStream, *,
                  noiseless: bool = False, mute_u: bool = False) -> SlotTranscript:
    """Push one symbol vector through both phases and check echo cancellation.

    ``x`` and ``u`` are CN(0, I_M), so E{x^H x} = M. ``noiseless`` zeros all
    receiver noise and ``mute_u`` silences T2; both only affect the drawn
    signals, not the relay maps.
    """
    rng = stream.generator()
    K, N, M = real.K, real.N, real.M
    s2 = 0.0 if noiseless else cfg.sigma2
    x = complex_normal(rng, M)
    u = complex_normal(rng, M) * (0.0 if mute_u else 1.0)
    n = complex_normal(rng, (K, N), s2) if s2 else np.zeros((K, N), complex)
    w = complex_normal(rng, M, s2) if s2 else np.zeros(M, complex)
    z = complex_normal(rng, M, s2) if s2 else np.zeros(M, complex)

    sx = np.sqrt(cfg.P * real.E / M)[:, None] * (real.H @ x)
    su = np.sqrt(cfg.P * real.F / M)[:, None] * (real.Gr @ u)
    r = sx + su + n
    T = _relay_maps(real, cfg, strategy)
    t = np.einsum("kij,kj->ki", T, r)
    gy = np.sqrt(alloc.gamma * real.P)[:, None, None] * real.G
    gv = np.sqrt(alloc.gamma * real.Q)[:, None, None] * real.Hr
    y = np.einsum("kmn,kn->m", gy, t) + z
    v = np.einsum("kmn,kn->m", gv, t) + w

    # each terminal rebuilds its own echo from known signal and CSI
    echo_y = np.einsum("kmn,kn->m", gy, np.einsum("kij,kj->ki", T, su))
    echo_v = np.einsum("kmn,kn->m", gv, np.einsum("kij,kj->ki", T, sx))
    noise_y = np.einsum("kmn,kn->m", gy, np.einsum("kij,kj->ki", T, n)) + z
    noise_v = np.einsum("kmn,kn->m", gv, np.einsum("kij,kj->ki", T, n)) + w

    link = dcm_effective_link if strategy == "dcm" else nc_af_effective_link
    A12 = link(real, cfg, alloc, 12).A
    A21 = link(real, cfg, alloc, 21).A

    def rel(a, ref):
        d = np.linalg.norm(ref)
        return float(np.linalg.norm(a) / d) if d > 0 else float(np.linalg.norm(a))

    res12 = rel((y - echo_y) - (A12 @ x + noise_y), y)
    res21 = rel((v - echo_v) - (A21 @ u + noise_v), v)
    return SlotTranscript(strategy, x, u, r, t, y, v, res12, res21,
                          relay_power=np.sum(np.abs(t) ** 2, axis=1))
