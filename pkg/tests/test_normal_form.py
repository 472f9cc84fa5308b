"""Transform kernels, their exact identities, and the bilinear energy."""

import math

import numpy as np
import pytest

from nlslab.dispersion import omega, qhat, qhat_prime, resonance_denominator
from nlslab.normal_form import (
    KernelSpec,
    Weight,
    adjoint_identity_defect,
    alpha_kernel,
    apply_bilinear,
    b01_kernel,
    b01_line_kernel,
    b10_kernel,
    b11_kernel,
    b115_kernel,
    cancellation_defect,
    cross_transport_defects,
    d_transform_check,
    energy,
    g_multiplier,
    g_sum_defects,
    p0,
    p1,
    s_kernel,
    theta0_mul,
    theta_div,
    theta_mul,
    transport_identity_defect,
)
from nlslab.spectral import Field, make_grid, product

DELTA = 0.5


def full_band(grid, rng, kmax_frac=0.25, mean=0.0):
    """Real random field over all resolved modes; optional nonzero mean."""
    hat = np.zeros(grid.N, dtype=complex)
    keep = int(grid.N // 2 * kmax_frac)
    hat[1:keep] = rng.standard_normal(keep - 1) + 1j * rng.standard_normal(keep - 1)
    hat[-keep + 1:] = np.conj(hat[1:keep][::-1])
    hat[0] = mean
    return Field.from_hat(grid, hat)


def carrier_band(grid, rng, lo=0.8, hi=2.0):
    """Real random field supported on lo < |k| < hi only (mean-free)."""
    hat = np.zeros(grid.N, dtype=complex)
    k = grid.k
    sel = (np.abs(k) > lo) & (np.abs(k) < hi) & (k > 0)
    idx = np.nonzero(sel)[0]
    hat[idx] = rng.standard_normal(idx.size) + 1j * rng.standard_normal(idx.size)
    conj_idx = np.array([grid.N - i for i in idx if i != 0]) % grid.N
    hat[conj_idx] = np.conj(hat[idx])
    return Field.from_hat(grid, hat)


@pytest.fixture
def grid():
    return make_grid(60.0, 256)


# ---------------------------------------------------------------------------
# weight and projections


def test_weight_profile():
    w = Weight(0.05, 0.1)
    assert w.theta(0.0) == pytest.approx(0.05)
    assert w.theta(0.2) == 1.0
    assert w.theta(-0.2) == 1.0
    assert w.theta(0.1) == pytest.approx(1.0)          # continuous at the knee
    assert w.theta(0.05) == pytest.approx(0.525)       # midpoint of the ramp
    ks = np.linspace(-0.5, 0.5, 401)
    th = w.theta(ks)
    assert np.all(th >= 0.05) and np.all(th <= 1.0)
    t0 = w.theta0(ks)
    assert w.theta0(0.0) == 0.0
    assert np.all(t0 <= np.abs(ks) / 0.1 + 1e-15)
    with pytest.raises(ValueError, match="eps"):
        Weight(1.0, 0.1)
    with pytest.raises(ValueError, match="delta"):
        Weight(0.05, 0.0)


def test_band_projections_complementary(grid):
    rng = np.random.default_rng(7)
    f = full_band(grid, rng, mean=0.4)
    lo, hi = p0(f, DELTA), p1(f, DELTA)
    assert np.max(np.abs((lo + hi).hat - f.hat)) <= 1e-15
    assert np.max(np.abs(lo.hat[np.abs(grid.k) > DELTA])) == 0.0
    assert np.max(np.abs(hi.hat[np.abs(grid.k) <= DELTA])) == 0.0
    with pytest.raises(ValueError, match="delta"):
        p0(f, -1.0)


def test_theta_multiplication_round_trip(grid):
    rng = np.random.default_rng(8)
    f = full_band(grid, rng)
    w = Weight(0.05, DELTA)
    back = theta_div(theta_mul(f, w), w)
    assert np.max(np.abs(back.hat - f.hat)) <= 1e-14
    z = theta0_mul(f, w)
    assert abs(z.hat[0]) == 0.0  # theta0 kills the mean


# ---------------------------------------------------------------------------
# interaction symbols


def test_alpha_closed_forms():
    rng = np.random.default_rng(9)
    l = rng.uniform(-3, 3, 40)
    m = rng.uniform(-3, 3, 40)
    k = l + m
    for j1 in (1, -1):
        for j2 in (1, -1):
            assert np.allclose(alpha_kernel(1, j1, j2, k, l, m), j2 * qhat(m))
            assert np.allclose(alpha_kernel(2, j1, j2, k, l, m), qhat(l))
            assert np.allclose(
                alpha_kernel(3, j1, j2, k, l, m), j1 * j2 * qhat(l) * qhat(m) / qhat(k)
            )
            assert np.allclose(alpha_kernel(4, j1, j2, k, l, m), -j1 / qhat(k))
            expect5 = -j1 / (qhat(k) * (1 + k**2) * (1 + l**2) * (1 + m**2))
            assert np.allclose(alpha_kernel(5, j1, j2, k, l, m), expect5)


def test_alpha_validation():
    with pytest.raises(ValueError, match="symbol index"):
        alpha_kernel(6, 1, 1, 1.0, 0.5, 0.5)
    with pytest.raises(ValueError, match="branch indices"):
        alpha_kernel(1, 0, 1, 1.0, 0.5, 0.5)
    with pytest.raises(ValueError, match="l \\+ m = k"):
        alpha_kernel(1, 1, 1, 1.0, 0.5, 0.6)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_kernels_are_even(n):
    w = Weight(0.05, DELTA)
    rng = np.random.default_rng(n)
    for j1 in (1, -1):
        for j2 in (1, -1):
            # admissible triples per family, then mirror all three legs
            m = rng.uniform(0.6, 3.0, 20)
            k01 = rng.uniform(-0.45, 0.45, 20)
            assert np.allclose(
                b01_kernel(n, j1, j2, -k01, -(k01 - m), -m, w),
                b01_kernel(n, j1, j2, k01, k01 - m, m, w),
                atol=1e-13,
            )
            k = rng.uniform(0.8, 4.0, 20)
            mlow = rng.uniform(-0.45, 0.45, 20)
            assert np.allclose(
                b10_kernel(n, j1, j2, -k, -(k - mlow), -mlow, w),
                b10_kernel(n, j1, j2, k, k - mlow, mlow, w),
                atol=1e-13,
            )
            assert np.allclose(
                b11_kernel(n, j1, j2, -k, -(k - m), -m, w),
                b11_kernel(n, j1, j2, k, k - m, m, w),
                atol=1e-13,
            )


def test_kernel_removable_zeros():
    w = Weight(0.05, 0.1)
    # low-band output at k = 0: explicit k factor wins
    assert b01_kernel(1, 1, -1, 0.0, -1.0, 1.0, w) == 0.0
    # low input leg at m = 0 on the degenerate branch: theta0(0) = 0 wins
    assert b10_kernel(1, -1, 1, 1.0, 1.0, 0.0, w) == 0.0
    assert b10_kernel(1, -1, -1, 1.0, 1.0, 0.0, w) == 0.0


def test_b10_bounded_through_degenerate_line():
    # j1 = -1 mismatch vanishes linearly as m -> 0; kernel stays bounded
    w = Weight(0.05, 0.1)
    ms = 10.0 ** -np.arange(3, 10, dtype=float)
    vals = b10_kernel(1, -1, 1, 1.0 + ms, np.ones_like(ms), ms, w)
    assert np.all(np.isfinite(vals))
    assert np.max(np.abs(vals)) <= 20.0
    # the one-sided limit is a fixed nonzero constant
    assert abs(vals[-1] - vals[-2]) <= 1e-5 * abs(vals[-1])


def test_kernel_strict_support():
    w = Weight(0.05, 0.1)
    with pytest.raises(ValueError, match="outside its declared support"):
        b01_kernel(1, 1, 1, 1.0, 0.5, 0.5, w, strict=True)
    with pytest.raises(ValueError, match="outside its declared support"):
        b11_kernel(1, 1, 1, 1.0, 0.95, 0.05, w, strict=True)
    # non-strict evaluation outside support is 0, not an error
    assert b01_kernel(1, 1, 1, 1.0, 0.5, 0.5, w) == 0.0


def test_kernel_exact_resonance_raises():
    # same-branch l = 0 zeroes the mismatch with a live numerator
    w = Weight(0.05, 0.1)
    with pytest.raises(ArithmeticError, match="exact resonance"):
        b11_kernel(1, 1, 1, 2.0, 0.0, 2.0, w)


def test_b01_line_kernel():
    w = Weight(0.05, 0.1)
    ks = np.linspace(-0.1, 0.1, 41)
    vals = b01_line_kernel(1, -1, 1, 1, 1, ks, 1.0, w)
    assert np.all(np.isfinite(vals))
    assert vals[20] == 0.0  # k = 0 is the removable zero
    assert np.max(np.abs(vals) * w.theta(ks)) <= 10.0
    with pytest.raises(ValueError, match="peak signs"):
        b01_line_kernel(1, -1, 1, 0, 1, ks, 1.0, w)
    with pytest.raises(ValueError, match="carrier wavenumber"):
        b01_line_kernel(1, -1, 1, 1, 1, ks, -1.0, w)


def test_kernel_spec_validation():
    w = Weight(0.05, 0.1)
    with pytest.raises(ValueError, match="unknown kernel family"):
        KernelSpec("b99", 1, 1, 1, w)
    with pytest.raises(ValueError, match="symbol index"):
        KernelSpec("b01", 6, 1, 1, w)
    with pytest.raises(ValueError, match="1..4"):
        KernelSpec("s", 5, 1, 1, w)
    with pytest.raises(ValueError, match="fixes n = 5"):
        KernelSpec("b115", 3, 1, 1, w)
    spec = KernelSpec("b115", 5, 1, -1, w)
    assert spec.values(2.0, 1.0, 1.0) == b115_kernel(1, -1, 2.0, 1.0, 1.0, w)


# ---------------------------------------------------------------------------
# bilinear quadrature


def test_apply_bilinear_single_mode_reduction(grid):
    # alpha n=2 is qhat(l): one-|l| phi makes B a constant times the product
    rng = np.random.default_rng(10)
    l0 = grid.k[5]
    phi = Field(grid, np.cos(l0 * grid.x))
    R = full_band(grid, rng, kmax_frac=0.2)
    B = apply_bilinear(KernelSpec("alpha", 2, 1, 1, Weight(0.05, DELTA)), phi, R)
    ref = qhat(l0) * product(phi, R)
    assert np.max(np.abs(B.hat - ref.hat)) <= 1e-13


def test_apply_bilinear_linearity(grid):
    rng = np.random.default_rng(11)
    w = Weight(0.05, DELTA)
    spec = KernelSpec("b11", 2, 1, -1, w)
    phi = carrier_band(grid, rng)
    Ra = full_band(grid, rng)
    Rb = full_band(grid, rng)
    lhs = apply_bilinear(spec, phi, 2.0 * Ra - 3.0 * Rb)
    rhs = 2.0 * apply_bilinear(spec, phi, Ra) - 3.0 * apply_bilinear(spec, phi, Rb)
    assert np.max(np.abs(lhs.hat - rhs.hat)) <= 1e-12 * max(1.0, np.max(np.abs(lhs.hat)))


def test_apply_bilinear_grid_mismatch_and_empty(grid):
    w = Weight(0.05, DELTA)
    spec = KernelSpec("alpha", 1, 1, 1, w)
    other = make_grid(60.0, 512)
    with pytest.raises(ValueError, match="grid mismatch"):
        apply_bilinear(spec, Field(grid, np.cos(grid.x)), Field(other, np.cos(other.x)))
    zero = Field(grid, np.zeros(grid.N))
    out = apply_bilinear(spec, zero, Field(grid, np.cos(grid.x)))
    assert np.max(np.abs(out.hat)) == 0.0


# ---------------------------------------------------------------------------
# exact identities


@pytest.mark.parametrize(
    "family,n,j1,j2",
    [
        ("b01", 1, -1, 1),
        ("b01", 5, 1, 1),
        ("b10", 3, 1, -1),
        ("b10", 2, -1, -1),
        ("b11", 2, -1, -1),
        ("b11", 4, 1, 1),
        ("b11", 5, -1, 1),
    ],
)
def test_cancellation_identity(grid, family, n, j1, j2):
    rng = np.random.default_rng(0)
    w = Weight(0.05, DELTA)
    phi = carrier_band(grid, rng)
    f = full_band(grid, rng, mean=1.3)
    assert cancellation_defect(family, n, j1, j2, phi, f, w) <= 1e-12


def test_cancellation_family_guard(grid):
    rng = np.random.default_rng(0)
    w = Weight(0.05, DELTA)
    phi = carrier_band(grid, rng)
    with pytest.raises(ValueError, match="b01/b10/b11"):
        cancellation_defect("alpha", 1, 1, 1, phi, phi, w)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_adjoint_identity(grid, n):
    rng = np.random.default_rng(20 + n)
    w = Weight(0.05, DELTA)
    h = carrier_band(grid, rng)
    f = full_band(grid, rng)
    g = full_band(grid, rng)
    for j1 in (1, -1):
        for j2 in (1, -1):
            assert adjoint_identity_defect(n, j1, j2, h, f, g, w) <= 1e-12
    with pytest.raises(ValueError, match="1..4"):
        adjoint_identity_defect(5, 1, 1, h, f, g, w)


def test_transport_identities(grid):
    rng = np.random.default_rng(30)
    a = full_band(grid, rng, mean=0.7)
    f = full_band(grid, rng)
    assert transport_identity_defect(a, f) <= 1e-12
    a2 = full_band(grid, rng, mean=-0.2)
    f2 = full_band(grid, rng)
    d2, d3 = cross_transport_defects((a, a2), (f, f2))
    assert d2 <= 1e-12 and d3 <= 1e-12


def test_g_multiplier_values():
    ks = np.linspace(-8.0, 8.0, 1001)
    mixed = np.asarray(g_multiplier(1, -1, ks, DELTA))
    inside = np.abs(ks) <= DELTA
    assert np.all(mixed[inside] == 0.0)
    assert np.all(mixed[~inside] == 0.5)
    same = np.asarray(g_multiplier(1, 1, ks, DELTA))
    sel = ~inside
    expect = 1.0 / (-2j * (ks[sel] + omega(ks[sel])))
    assert np.max(np.abs(same[sel] - expect)) <= 1e-15
    with pytest.raises(ValueError, match="delta"):
        g_multiplier(1, 1, ks, 0.0)


def test_g_sum_closed_forms():
    d4, d5 = g_sum_defects(np.linspace(-8.0, 8.0, 2001), DELTA)
    assert d4 <= 1e-12
    assert d5 <= 1e-12


def test_s_kernel_diagonal_limits():
    w = Weight(0.05, DELTA)
    # mixed branches: the difference quotient is filled with its l -> 0 limit
    k = 2.0
    den = resonance_denominator(1, -1, k, k)
    expect = (1j / 2.0) * (qhat(k) - k * qhat_prime(k)) / den
    assert s_kernel(1, 1, -1, k, 0.0, k, w) == pytest.approx(expect, rel=1e-12)
    lim = s_kernel(4, -1, 1, k, 0.0, k, w)
    near = s_kernel(4, -1, 1, k, 1e-7, k - 1e-7, w)
    assert abs(lim - near) <= 1e-5 * abs(lim)
    # same branches on the diagonal: genuine resonance
    with pytest.raises(ArithmeticError, match="exact resonance"):
        s_kernel(1, 1, 1, k, 0.0, k, w)
    with pytest.raises(ValueError, match="1..4"):
        s_kernel(5, 1, -1, k, 0.0, k, w)


def test_b11_large_k_asymptote():
    # same-branch high-high kernel tracks its linear-in-k asymptote to O(1/k)
    w = Weight(0.05, 0.1)
    j, l = 1, 1.0
    asym = lambda k: j * k * qhat(k - l) / (2.0 * (j * l + omega(l)))
    d200 = abs(b11_kernel(1, j, j, 200.0, l, 199.0, w) - asym(200.0))
    d400 = abs(b11_kernel(1, j, j, 400.0, l, 399.0, w) - asym(400.0))
    assert d200 * 200.0 <= 1.0
    assert d400 * 400.0 == pytest.approx(d200 * 200.0, rel=0.1)


def test_d_transform_report():
    rep = d_transform_check(1.0, -1, 1)
    assert rep.value_at_zero == pytest.approx(4.640379972803842, rel=1e-12)
    assert rep.min_abs >= 0.9 * rep.value_at_zero
    rep_minus = d_transform_check(1.0, -1, -1)
    assert rep_minus.value_at_zero == pytest.approx(0.2585995127625136, rel=1e-12)
    assert rep_minus.min_abs >= 0.02
    assert d_transform_check(1.0, 1, -1).min_abs >= 0.02
    with pytest.raises(ValueError, match="carrier wavenumber"):
        d_transform_check(-1.0, 1, 1)
    with pytest.raises(ValueError, match="branch indices"):
        d_transform_check(1.0, 2, 1)


# ---------------------------------------------------------------------------
# energy


def _random_errors(grid, rng):
    R = [full_band(grid, rng) for _ in range(2)]
    R0 = tuple(p0(r, DELTA) for r in R)
    R1 = tuple(p1(r, DELTA) for r in R)
    return R0, R1


def test_energy_zero_fields(grid):
    z = Field(grid, np.zeros(grid.N))
    rep = energy((z, z), (z, z), z, 2, 0.01, Weight(0.01, DELTA))
    assert rep.total == 0.0
    assert rep.modified == 0.0
    assert math.isnan(rep.ratio)


def test_energy_equivalence_tightens_with_eps(grid):
    spreads = {}
    for eps in (0.05, 0.01):
        w = Weight(eps, DELTA)
        devs = []
        for seed in range(4):
            rng = np.random.default_rng(seed)
            phi_c = carrier_band(grid, rng)
            R0, R1 = _random_errors(grid, rng)
            rep = energy(R0, R1, phi_c, 2, eps, w)
            devs.append(abs(rep.ratio - 1.0))
        spreads[eps] = max(devs)
    assert spreads[0.01] <= 0.03
    assert spreads[0.05] <= 0.2
    assert spreads[0.01] < spreads[0.05]


def test_energy_report_structure(grid):
    rng = np.random.default_rng(1)
    phi_c = carrier_band(grid, rng)
    R0, R1 = _random_errors(grid, rng)
    rep = energy(R0, R1, phi_c, 2, 0.05, Weight(0.05, DELTA))
    assert len(rep.levels) == 3
    assert len(rep.h_levels) == 2
    assert rep.total == pytest.approx(sum(rep.levels), rel=1e-12)
    assert rep.modified == pytest.approx(
        rep.total + (0.05**2 / 4.0) * sum(rep.h_levels), rel=1e-12
    )
    assert rep.total == pytest.approx(0.5 * rep.norm_sq + rep.cross, rel=1e-10)


def test_energy_validation(grid):
    z = Field(grid, np.zeros(grid.N))
    with pytest.raises(ValueError, match="nonnegative"):
        energy((z, z), (z, z), z, -1, 0.05, Weight(0.05, DELTA))
    with pytest.raises(ValueError, match="eps"):
        energy((z, z), (z, z), z, 2, 1.5, Weight(0.05, DELTA))
