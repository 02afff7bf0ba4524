"""Cut-set upper bounds for the coherent and non-coherent two-way relay channel."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, SystemConfig
from .matcore import HermitianSpectrum, adjoint, eigvals_hermitian, logdet_hpd, whiten


class UnsupportedConfigError(ValueError):
    pass


@dataclass(frozen=True)
class WaterfillResult:
    nu: float
    powers: np.ndarray
    capacity_bits: float


@dataclass(frozen=True)
class BoundPair:
    r12_bits: float
    r21_bits: float


def mimo_mutual_information(heff: np.ndarray, qx: np.ndarray, rnoise: np.ndarray) -> float:
    """log2 det(I + R^-1 H Q H^H), evaluated in whitened Hermitian form."""
    s = heff @ qx @ adjoint(heff)
    t = whiten(rnoise, 0.5 * (s + adjoint(s)))
    return max(logdet_hpd(np.eye(t.shape[0]) + t), 0.0)


def waterfill(gains, budget: float, sigma2: float = 1.0) -> WaterfillResult:
    """Maximize sum log2(1 + p_l g_l / sigma2) s.t. sum p_l = budget, p_l >= 0.

    Parameters
    ----------
    gains : HermitianSpectrum or array_like
        Per-mode power gains. Non-positive modes never receive power.
    budget : float
        Total power to distribute.
    sigma2 : float
        Noise variance per mode.
    """
    g = np.asarray(gains, dtype=float).ravel()
    if not (budget > 0 and sigma2 > 0):
        raise ValueError("budget and sigma2 must be positive")
    if not np.any(g > 0):
        raise ValueError("waterfill needs at least one positive gain")

    order = np.argsort(-g, kind="stable")
    pos = order[g[order] > 0]
    floors = sigma2 / g[pos]  # ascending
    # shrink the active set until the weakest active mode sits below the water
    m = len(pos)
    while True:
        nu = (budget + floors[:m].sum()) / m
        if nu - floors[m - 1] > 0 or m == 1:
            break
        m -= 1
    p = np.zeros_like(g)
    p[pos[:m]] = nu - floors[:m]
    cap = float(np.sum(np.log2(1.0 + p[pos[:m]] * g[pos[:m]] / sigma2)))
    return WaterfillResult(nu=float(nu), powers=p, capacity_bits=cap)


def _gram(a: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """sum_k w_k A_k^H A_k for a stack A of shape (K, r, c)."""
    out = np.einsum("k,kri,krj->ij", weights, np.conj(a), a)
    return 0.5 * (out + adjoint(out))


def _outer_gram(a: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """sum_k w_k A_k A_k^H for a stack A of shape (K, r, c)."""
    out = np.einsum("k,kic,kjc->ij", weights, a, np.conj(a))
    return 0.5 * (out + adjoint(out))


def broadcast_cut_bound(real: ChannelRealization, cfg: SystemConfig) -> BoundPair:
    M = real.M
    snr = cfg.P / (M * cfg.sigma2)
    eye = np.eye(M)
    r12 = logdet_hpd(eye + snr * _gram(real.H, real.E))
    r21 = logdet_hpd(eye + snr * _gram(real.Gr, real.F))
    return BoundPair(cfg.alpha * r12, cfg.alpha * r21)


def mac_spectrum(real: ChannelRealization, direction: int) -> HermitianSpectrum:
    """Eigenvalues of Phi Phi^H = (1/K) sum_k P_k G_k G_k^H (or Q_k, Hr_k)."""
    if direction == 12:
        phi_gram = _outer_gram(real.G, real.P) / real.K
    elif direction == 21:
        phi_gram = _outer_gram(real.Hr, real.Q) / real.K
    else:
        raise ValueError(f"direction must be 12 or 21, got {direction}")
    return eigvals_hermitian(phi_gram)


def mac_cut_bound(real: ChannelRealization, cfg: SystemConfig) -> BoundPair:
    # 1/sqrt(K) signal scaling with noise sigma2/K == gain K*lambda at noise sigma2
    rates = []
    for direction in (12, 21):
        lam = mac_spectrum(real, direction).eigenvalues
        wf = waterfill(real.K * lam, cfg.P_R, cfg.sigma2)
        rates.append((1.0 - cfg.alpha) * wf.capacity_bits)
    return BoundPair(*rates)


def coherent_upper_bound(real: ChannelRealization, cfg: SystemConfig) -> BoundPair:
    bc = broadcast_cut_bound(real, cfg)
    mac = mac_cut_bound(real, cfg)
    return BoundPair(min(bc.r12_bits, mac.r12_bits), min(bc.r21_bits, mac.r21_bits))


def require_half_duplex_split(cfg: SystemConfig) -> None:
    if not math.isclose(cfg.alpha, 0.5, rel_tol=0.0, abs_tol=1e-12):
        raise UnsupportedConfigError(
            f"non-coherent bounds are defined only for alpha = 0.5 "
            f"(equal transmit and receive phases); got alpha = {cfg.alpha}"
        )


def noncoherent_mac_bound(real: ChannelRealization, cfg: SystemConfig) -> BoundPair:
    """MAC cut without relay CSI: relays send i.i.d. Q = P_R/(NK) I."""
    require_half_duplex_split(cfg)
    eye = np.eye(real.M)
    snr = cfg.P_R / (real.N * real.K * cfg.sigma2)
    r12 = 0.5 * logdet_hpd(eye + snr * _outer_gram(real.G, real.P))
    r21 = 0.5 * logdet_hpd(eye + snr * _outer_gram(real.Hr, real.Q))
    return BoundPair(r12, r21)
