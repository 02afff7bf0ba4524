import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twrelay.capacity import (
    UnsupportedConfigError,
    broadcast_cut_bound,
    coherent_upper_bound,
    mac_cut_bound,
    mac_spectrum,
    mimo_mutual_information,
    noncoherent_mac_bound,
    waterfill,
)
from twrelay.channel import ChannelRealization, FadingLaw, RngStream, SystemConfig, sample_realization
from twrelay.matcore import HermitianSpectrum, NotPositiveDefiniteError, adjoint


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def scalar_realization(h=1.0, g=1.0, hr=1.0, gr=1.0, fading=1.0):
    m = lambda v: np.full((1, 1, 1), v, dtype=complex)  # noqa: E731
    f = np.full(1, fading)
    return ChannelRealization(m(h), m(g), m(hr), m(gr), f, f, f, f)


def grid_capacity(gains, budget, sigma2, step):
    """Brute-force max of sum log2(1 + p g / s2) over a simplex grid (<= 3 modes)."""
    gains = np.asarray(gains, float)
    ticks = np.arange(0.0, budget + step / 2, step)
    if len(gains) == 1:
        return np.log2(1 + budget * gains[0] / sigma2)
    if len(gains) == 2:
        p = np.stack([ticks, budget - ticks], axis=1)
    else:
        p1, p2 = np.meshgrid(ticks, ticks, indexing="ij")
        p3 = budget - p1 - p2
        ok = p3 >= -1e-12
        p = np.stack([p1[ok], p2[ok], np.clip(p3[ok], 0, None)], axis=1)
    return np.max(np.sum(np.log2(1 + p * np.clip(gains, 0, None) / sigma2), axis=1))


# -- mutual information -------------------------------------------------------

def test_mutual_information_examples():
    assert mimo_mutual_information(np.zeros((2, 2)), np.eye(2), np.eye(2)) == 0.0
    assert mimo_mutual_information(np.eye(2), np.eye(2), np.eye(2)) == pytest.approx(2.0)


def test_mutual_information_alternate_form():
    rng = np.random.default_rng(0)
    h = crandn(rng, 2, 2)
    b = crandn(rng, 2, 2)
    q = b @ adjoint(b)
    c = crandn(rng, 2, 2)
    r = c @ adjoint(c) + 0.5 * np.eye(2)
    # Sylvester: det(I + R^-1 H Q H^H) = det(I + Q^1/2 H^H R^-1 H Q^1/2)
    w, v = np.linalg.eigh(q)
    qh = v @ np.diag(np.sqrt(np.clip(w, 0, None))) @ adjoint(v)
    inner = qh @ adjoint(h) @ np.linalg.inv(r) @ h @ qh
    oracle = np.sum(np.log2(1 + np.linalg.eigvalsh(0.5 * (inner + adjoint(inner)))))
    assert mimo_mutual_information(h, q, r) == pytest.approx(oracle, rel=1e-10)


def test_mutual_information_rejects_singular_noise():
    with pytest.raises(NotPositiveDefiniteError):
        mimo_mutual_information(np.eye(2), np.eye(2), np.diag([1.0, 0.0]))


# -- waterfilling -------------------------------------------------------------

def test_waterfill_examples():
    wf = waterfill([1.0], 3.0, 1.0)
    np.testing.assert_allclose(wf.powers, [3.0])
    assert wf.capacity_bits == pytest.approx(2.0)
    wf = waterfill([1.0, 1.0], 2.0, 1.0)
    np.testing.assert_allclose(wf.powers, [1.0, 1.0])
    assert wf.capacity_bits == pytest.approx(2.0)
    wf = waterfill(HermitianSpectrum(np.array([1.0, 0.01])), 1.0, 1.0)
    np.testing.assert_allclose(wf.powers, [1.0, 0.0])
    assert wf.capacity_bits == pytest.approx(1.0)
    # grid oracle at resolution 1e-4 puts the maximizer at p1 = 1
    p1 = np.arange(0, 1 + 5e-5, 1e-4)
    obj = np.log2(1 + p1) + np.log2(1 + 0.01 * (1 - p1))
    assert p1[np.argmax(obj)] == pytest.approx(1.0)


def test_waterfill_errors():
    with pytest.raises(ValueError):
        waterfill([0.0, -1.0], 1.0, 1.0)
    with pytest.raises(ValueError):
        waterfill([1.0], 0.0, 1.0)


def test_waterfill_order_and_inactive_modes():
    wf = waterfill([0.0, 0.01, 5.0, 1.0], 2.0, 1.0)
    assert wf.powers[0] == 0.0 and wf.powers[1] == 0.0
    assert wf.powers[2] > wf.powers[3] > 0


spectra = st.lists(st.floats(1e-3, 100.0), min_size=1, max_size=3)


@settings(max_examples=200)
@given(spectra, st.floats(0.01, 50.0), st.floats(0.1, 10.0))
def test_waterfill_kkt(gains, budget, sigma2):
    g = np.array(gains)
    wf = waterfill(g, budget, sigma2)
    assert np.sum(wf.powers) == pytest.approx(budget, rel=1e-8)
    floors = sigma2 / g
    active = wf.powers > 0
    np.testing.assert_allclose(wf.powers[active], wf.nu - floors[active], rtol=1e-9, atol=1e-12)
    assert np.all(wf.nu <= floors[~active] + 1e-9)
    assert np.all(active == (wf.nu > floors))
    expected = np.sum(np.log2(1 + wf.powers[active] * g[active] / sigma2))
    assert wf.capacity_bits == pytest.approx(expected, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(spectra, st.floats(0.01, 20.0), st.integers(0, 2**32 - 1))
def test_waterfill_beats_random_allocations(gains, budget, seed):
    g = np.array(gains)
    wf = waterfill(g, budget, 1.0)
    rng = np.random.default_rng(seed)
    p = rng.dirichlet(np.ones(len(g)), size=10_000) * budget
    rand_caps = np.sum(np.log2(1 + p * g), axis=1)
    assert wf.capacity_bits >= rand_caps.max() - 1e-12


def test_waterfill_matches_grid_oracle():
    rng = np.random.default_rng(3)
    for _ in range(20):
        n = rng.integers(1, 4)
        g = rng.exponential(2.0, n)
        budget = rng.uniform(0.1, 10)
        step = budget / 400
        oracle = grid_capacity(g, budget, 1.0, step)
        cap = waterfill(g, budget, 1.0).capacity_bits
        assert cap >= oracle - 1e-9
        # grid optimum trails the continuous one by at most one grid step of slope
        assert cap - oracle <= step * np.max(g) * len(g) / np.log(2)


# -- cut-set bounds -------------------------------------------------------------

def unit_cfg(**kw):
    base = dict(M=1, N=1, K=1, P=1.0, P_R=1.0, sigma2=1.0, alpha=1.0,
                fading=FadingLaw.constant(1.0))
    base.update(kw)
    return SystemConfig(**base)


def test_broadcast_cut_examples():
    real = scalar_realization()
    assert broadcast_cut_bound(real, unit_cfg()).r12_bits == pytest.approx(1.0)
    b = broadcast_cut_bound(real, unit_cfg(alpha=0.0))
    assert b.r12_bits == 0.0 and b.r21_bits == 0.0


def test_mac_cut_examples():
    real = scalar_realization()
    b = mac_cut_bound(real, unit_cfg(P_R=3.0, alpha=0.0))
    assert b.r12_bits == pytest.approx(2.0)
    b = mac_cut_bound(real, unit_cfg(alpha=1.0))
    assert b.r12_bits == 0.0 and b.r21_bits == 0.0


def test_coherent_bound_examples():
    real = sample_realization(SystemConfig(K=16), RngStream(1))
    for alpha in (0.0, 1.0):
        b = coherent_upper_bound(real, SystemConfig(K=16, alpha=alpha))
        assert b.r12_bits == 0.0 and b.r21_bits == 0.0


@pytest.mark.parametrize("alpha", [0.1, 0.3, 0.5, 0.7, 0.9])
def test_coherent_bound_is_min_of_cuts(alpha):
    cfg = SystemConfig(K=32, alpha=alpha)
    real = sample_realization(cfg, RngStream(4))
    bc_full = broadcast_cut_bound(real, cfg.with_(alpha=1.0))
    mac_full = mac_cut_bound(real, cfg.with_(alpha=0.0))
    b = coherent_upper_bound(real, cfg)
    assert b.r12_bits == pytest.approx(min(alpha * bc_full.r12_bits, (1 - alpha) * mac_full.r12_bits), rel=1e-12)
    assert b.r21_bits == pytest.approx(min(alpha * bc_full.r21_bits, (1 - alpha) * mac_full.r21_bits), rel=1e-12)
    assert b.r12_bits <= broadcast_cut_bound(real, cfg).r12_bits
    assert b.r12_bits <= mac_cut_bound(real, cfg).r12_bits


def test_bounds_monotone_in_power():
    cfg = SystemConfig(K=16)
    for t in range(5):
        real = sample_realization(cfg, RngStream(8, t))
        lo, hi = broadcast_cut_bound(real, cfg), broadcast_cut_bound(real, cfg.with_(P=20.0))
        assert hi.r12_bits >= lo.r12_bits and hi.r21_bits >= lo.r21_bits
        lo, hi = mac_cut_bound(real, cfg), mac_cut_bound(real, cfg.with_(P_R=20.0))
        assert hi.r12_bits >= lo.r12_bits and hi.r21_bits >= lo.r21_bits
        lo, hi = noncoherent_mac_bound(real, cfg), noncoherent_mac_bound(real, cfg.with_(P_R=20.0))
        assert hi.r12_bits >= lo.r12_bits and hi.r21_bits >= lo.r21_bits


def test_broadcast_cut_matches_lln_limit():
    cfg = SystemConfig(M=2, N=2, K=512, P=10.0, alpha=0.5)
    vals = [broadcast_cut_bound(sample_realization(cfg, RngStream(42, t)), cfg).r12_bits
            for t in range(200)]
    limit = cfg.M / 2 * np.log2(1 + cfg.K * cfg.N * cfg.P * 1.0 / (cfg.M * cfg.sigma2))
    assert abs(np.mean(vals) - limit) < 0.3


def test_mac_spectrum_converges_to_N_mu():
    cfg = SystemConfig(M=2, N=2, K=4096)
    real = sample_realization(cfg, RngStream(42, 0))
    for d in (12, 21):
        lam = mac_spectrum(real, d).eigenvalues
        np.testing.assert_allclose(lam, cfg.N * cfg.fading.mean, atol=0.15)


def test_mac_cut_matches_lln_limit():
    # equal eigenvalues K*N*mu make the waterfill split P_R evenly over M modes
    cfg = SystemConfig(M=2, N=2, K=512, P_R=10.0, alpha=0.5)
    vals = [mac_cut_bound(sample_realization(cfg, RngStream(42, t)), cfg).r12_bits for t in range(100)]
    limit = 0.5 * cfg.M * np.log2(1 + cfg.P_R / cfg.M * cfg.K * cfg.N / cfg.sigma2)
    assert abs(np.mean(vals) - limit) < 0.3


def test_noncoherent_bound_examples():
    real = scalar_realization()
    cfg = unit_cfg(alpha=0.5)
    assert noncoherent_mac_bound(real, cfg).r12_bits == pytest.approx(0.5)
    tiny = noncoherent_mac_bound(real, cfg.with_(P_R=1e-9))
    assert tiny.r12_bits < 1e-8
    with pytest.raises(UnsupportedConfigError):
        noncoherent_mac_bound(real, cfg.with_(alpha=0.4))


def test_noncoherent_bound_matches_lln_limit():
    cfg = SystemConfig(M=2, N=2, K=1024, P_R=100.0)
    vals = [noncoherent_mac_bound(sample_realization(cfg, RngStream(42, t)), cfg).r12_bits
            for t in range(100)]
    limit = cfg.M / 2 * np.log2(1 + cfg.P_R * 1.0 / cfg.sigma2)
    assert abs(np.mean(vals) - limit) < 0.3


def test_bounds_nonnegative_and_finite():
    cfg = SystemConfig(M=3, N=1, K=3, P=0.01, P_R=0.01)
    for t in range(10):
        real = sample_realization(cfg, RngStream(2, t))
        for fn in (broadcast_cut_bound, mac_cut_bound, coherent_upper_bound, noncoherent_mac_bound):
            b = fn(real, cfg)
            assert np.isfinite(b.r12_bits) and b.r12_bits >= 0
            assert np.isfinite(b.r21_bits) and b.r21_bits >= 0
