"""Bilinear normal-form machinery for the diagonalized two-branch system.

The order-epsilon coupling between the carrier band and the error is removed
by quadratic transforms R -> R + eps B(phi_c, R).  Everything needed to build
and check those transforms lives here:

  * the spectral weight theta that interpolates between eps at k = 0 and 1
    outside the low band, plus the low/high projections,
  * the five interaction symbols alpha^n of the quadratic nonlinearity,
  * the transform kernels (low output band, high output with low input, high
    output with high input), each a ratio of symbol to frequency mismatch,
  * apply_bilinear, a direct quadrature over the carrier modes,
  * the cancellation identities that certify each kernel kills its target,
  * the adjoint structure of the high-high transform (swap kernels S^n),
  * the G multipliers and the integration-by-parts identities used to trade
    counterpropagating products for symmetric ones plus lower order,
  * the cascaded-output denominator check for the second normalization stage,
  * the energy functional with its cross terms and the modified correction.

Kernels evaluate to zero outside their declared support; pass strict=True to
error instead (useful when a caller believes it never leaves the support).
All kernels are real and even under (k, l, m) -> (-k, -l, -m), which keeps
real fields real under the transforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from nlslab.dispersion import omega, qhat, qhat_prime, resonance_denominator
from nlslab.spectral import (
    Field,
    Multiplier,
    PeriodicGrid,
    _check_same_grid,
    derivative_multiplier,
    integrate,
    product,
)

__all__ = [
    "Weight",
    "p0",
    "p1",
    "theta_mul",
    "theta0_mul",
    "theta_div",
    "alpha_kernel",
    "b01_kernel",
    "b10_kernel",
    "b11_kernel",
    "b115_kernel",
    "b01_line_kernel",
    "KernelSpec",
    "apply_bilinear",
    "cancellation_defect",
    "DTransformReport",
    "d_transform_check",
    "g_multiplier",
    "g_sum_defects",
    "s_kernel",
    "adjoint_identity_defect",
    "transport_identity_defect",
    "cross_transport_defects",
    "EnergyReport",
    "energy",
]

_FAMILIES = ("alpha", "b01", "b10", "b11", "b115", "s")


# ---------------------------------------------------------------------------
# Weight and projections.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Weight:
    """Piecewise-linear spectral weight: eps at k = 0, rising to 1 at |k| = delta.

    theta(k)  = 1 for |k| > delta, eps + (1 - eps)|k|/delta inside.
    theta0(k) = theta(k) - eps, so theta0(0) = 0 and theta0(k) <= |k|/delta.

    The eps floor keeps division by theta harmless; the linear ramp is what
    lets the low-band kernels absorb one factor of k near the origin.
    """

    eps: float
    delta: float

    def __post_init__(self):
        if not 0.0 < self.eps < 1.0:
            raise ValueError(f"eps must lie in (0, 1), got {self.eps}")
        if self.delta <= 0.0:
            raise ValueError(f"delta must be positive, got {self.delta}")

    def theta(self, k):
        k = np.asarray(k, dtype=float)
        ramp = self.eps + (1.0 - self.eps) * np.abs(k) / self.delta
        out = np.where(np.abs(k) > self.delta, 1.0, ramp)
        return out if out.ndim else float(out)

    def theta0(self, k):
        k = np.asarray(k, dtype=float)
        out = np.asarray(self.theta(k)) - self.eps
        return out if out.ndim else float(out)


def _band_projection(f: Field, delta: float, low: bool) -> Field:
    if delta <= 0.0:
        raise ValueError(f"delta must be positive, got {delta}")
    mask = np.abs(f.grid.k) <= delta
    hat = np.where(mask if low else ~mask, f.hat, 0.0)
    return Field.from_hat(f.grid, hat)


def p0(f: Field, delta: float) -> Field:
    """Sharp projection onto the low band |k| <= delta."""
    return _band_projection(f, delta, low=True)


def p1(f: Field, delta: float) -> Field:
    """Complementary sharp projection onto |k| > delta."""
    return _band_projection(f, delta, low=False)


def theta_mul(f: Field, w: Weight) -> Field:
    """Multiply by the weight theta in Fourier space."""
    return Field.from_hat(f.grid, f.hat * w.theta(f.grid.k))


def theta0_mul(f: Field, w: Weight) -> Field:
    """Multiply by the floored weight theta - eps."""
    return Field.from_hat(f.grid, f.hat * w.theta0(f.grid.k))


def theta_div(f: Field, w: Weight) -> Field:
    """Divide by theta; bounded by 1/eps, exact inverse of theta_mul."""
    return Field.from_hat(f.grid, f.hat / w.theta(f.grid.k))


# ---------------------------------------------------------------------------
# Interaction symbols and transform kernels.
# ---------------------------------------------------------------------------


def _check_branches(j1: int, j2: int) -> None:
    if j1 not in (-1, 1) or j2 not in (-1, 1):
        raise ValueError(f"branch indices must be +-1, got j1={j1}, j2={j2}")


def _check_triple(k, l, m):
    k = np.asarray(k, dtype=float)
    l = np.asarray(l, dtype=float)
    m = np.asarray(m, dtype=float)
    k, l, m = np.broadcast_arrays(k, l, m)
    scale = max(1.0, float(np.max(np.abs(k))) if k.size else 1.0)
    if k.size and not np.allclose(l + m, k, rtol=0.0, atol=1e-9 * scale):
        raise ValueError("triple must satisfy l + m = k")
    return k, l, m


def alpha_kernel(n: int, j1: int, j2: int, k, l, m):
    """Interaction symbol of the n-th quadratic term on branch pair (j1, j2).

    Defined on triples with l + m = k.  All five are real and even, so the
    i-factors of the nonlinearity stay in the outer derivative.  n = 5 is the
    triple-smoothed electron-pressure tail; its <.>^-2 decay in every leg is
    what buys derivatives back in the high-high estimates.
    """
    _check_branches(j1, j2)
    k, l, m = _check_triple(k, l, m)
    if n == 1:
        out = j2 * qhat(m)
    elif n == 2:
        out = qhat(l)
    elif n == 3:
        out = j1 * j2 * qhat(l) * qhat(m) / qhat(k)
    elif n == 4:
        out = -j1 / qhat(k) * np.ones_like(k)
    elif n == 5:
        out = -j1 / (qhat(k) * (1.0 + k**2) * (1.0 + l**2) * (1.0 + m**2))
    else:
        raise ValueError(f"symbol index must be in 1..5, got {n}")
    out = np.asarray(out, dtype=float)
    return out if out.ndim else float(out)


def _safe_ratio(num, den, where_ok, name: str):
    """num/den where where_ok, demanding num == 0 at exact zeros of den."""
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    zero = (den == 0.0) & where_ok
    if np.any(zero & (num != 0.0)):
        raise ArithmeticError(f"exact resonance with nonzero numerator in {name}")
    den = np.where(den == 0.0, 1.0, den)
    out = np.where(where_ok, num / den, 0.0)
    return out if out.ndim else float(out)


def _support(mask, strict: bool, name: str):
    if strict and not np.all(mask):
        raise ValueError(f"{name} evaluated outside its declared support")
    return mask


def b01_kernel(n: int, j1: int, j2: int, k, l, m, w: Weight, strict: bool = False):
    """Kernel of the transform that empties the low output band |k| <= delta.

      b = -k P0(k) alpha^n / (-j1 w(k) - w(l) + j2 w(m)) * theta(m) / (2 theta(k))

    The mismatch can degenerate like |k| on the j2 = -1 branch as k -> 0, but
    the explicit k upstairs keeps the ratio bounded; at the lattice point
    k = 0 the 0/0 is removable and the kernel is 0.  theta(k) >= eps floors
    the division.
    """
    k, l, m = _check_triple(k, l, m)
    a = alpha_kernel(n, j1, j2, k, l, m)
    inside = _support(np.abs(k) <= w.delta, strict, "b01_kernel")
    num = -k * a * w.theta(m)
    den = resonance_denominator(j1, j2, k, m) * 2.0 * w.theta(k)
    return _safe_ratio(np.where(inside, num, 0.0), den, inside, "b01_kernel")


def b10_kernel(n: int, j1: int, j2: int, k, l, m, w: Weight, strict: bool = False):
    """Kernel pairing a high output |k| > delta with a low input leg |m| <= delta.

      b = -(k/2) P1(k) alpha^n / (-j1 w(k) - w(l) + j2 w(m)) * theta0(m) / theta(k)

    On the j1 = -1 branch the mismatch vanishes linearly as the carrier leg
    lines up (k near the carrier, m -> 0); theta0(m) <= |m|/delta supplies
    the offsetting zero, so the kernel extends continuously.  The whole line
    m = 0 is a removable 0/0 on that branch and evaluates to 0.
    """
    k, l, m = _check_triple(k, l, m)
    a = alpha_kernel(n, j1, j2, k, l, m)
    inside = _support(
        (np.abs(k) > w.delta) & (np.abs(m) <= w.delta), strict, "b10_kernel"
    )
    num = -0.5 * k * a * w.theta0(m)
    den = resonance_denominator(j1, j2, k, m) * np.asarray(w.theta(k))
    return _safe_ratio(np.where(inside, num, 0.0), den, inside, "b10_kernel")


def b11_kernel(n: int, j1: int, j2: int, k, l, m, w: Weight, strict: bool = False):
    """Kernel pairing a high output |k| > delta with a high input leg |m| > delta.

    Same shape as b10_kernel but with weight ratio theta(m)/theta(k), which is
    identically 1 on the support, so effectively -(k/2) alpha^n / mismatch.
    One normalization for all n = 1..5.
    """
    k, l, m = _check_triple(k, l, m)
    a = alpha_kernel(n, j1, j2, k, l, m)
    inside = _support(
        (np.abs(k) > w.delta) & (np.abs(m) > w.delta), strict, "b11_kernel"
    )
    num = -0.5 * k * a * w.theta(m)
    den = resonance_denominator(j1, j2, k, m) * np.asarray(w.theta(k))
    return _safe_ratio(np.where(inside, num, 0.0), den, inside, "b11_kernel")


def b115_kernel(j1: int, j2: int, k, l, m, w: Weight, strict: bool = False):
    """The n = 5 high-high kernel; separate name because it alone gains three
    derivatives from the <.>^-2 smoothing in each leg."""
    return b11_kernel(5, j1, j2, k, l, m, w, strict)


def b01_line_kernel(
    n: int, j1: int, j2: int, lsign: int, nusign: int, k, k0: float, w: Weight
):
    """Low-band kernel with the carrier leg frozen at lsign*k0.

    Single-variable reduction used once the carrier is resolved into its two
    peaks: the input leg sits at m = k - lsign*k0 and the weight is evaluated
    at the recentered output k - (lsign + nusign)*k0.
    """
    if lsign not in (-1, 1) or nusign not in (-1, 1):
        raise ValueError(f"peak signs must be +-1, got {lsign}, {nusign}")
    if k0 <= 0:
        raise ValueError(f"carrier wavenumber must be positive, got {k0}")
    k = np.asarray(k, dtype=float)
    l = lsign * k0
    m = k - l
    a = alpha_kernel(n, j1, j2, k, np.full_like(k, l), m)
    inside = np.abs(k) <= w.delta
    num = -k * a * w.theta(k - (lsign + nusign) * k0)
    den = resonance_denominator(j1, j2, k, m) * 2.0 * w.theta(k)
    return _safe_ratio(np.where(inside, num, 0.0), den, inside, "b01_line_kernel")


# ---------------------------------------------------------------------------
# Direct bilinear quadrature.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KernelSpec:
    """A kernel family bound to branch indices and a weight.

    family in {"alpha", "b01", "b10", "b11", "b115", "s"}; n is the symbol
    index (1..5, or 1..4 for the swap family "s").  values(k, l, m) evaluates
    the kernel on triples with l + m = k.
    """

    family: str
    n: int
    j1: int
    j2: int
    weight: Weight
    strict: bool = False

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(
                f"unknown kernel family {self.family!r}; expected one of {_FAMILIES}"
            )
        _check_branches(self.j1, self.j2)
        top = 4 if self.family == "s" else 5
        if not 1 <= self.n <= top:
            raise ValueError(
                f"symbol index must be in 1..{top} for family {self.family!r}, got {self.n}"
            )
        if self.family == "b115" and self.n != 5:
            raise ValueError("family 'b115' fixes n = 5")

    def values(self, k, l, m):
        w = self.weight
        if self.family == "alpha":
            return alpha_kernel(self.n, self.j1, self.j2, k, l, m)
        if self.family == "b01":
            return b01_kernel(self.n, self.j1, self.j2, k, l, m, w, self.strict)
        if self.family == "b10":
            return b10_kernel(self.n, self.j1, self.j2, k, l, m, w, self.strict)
        if self.family == "b11":
            return b11_kernel(self.n, self.j1, self.j2, k, l, m, w, self.strict)
        if self.family == "b115":
            return b115_kernel(self.j1, self.j2, k, l, m, w, self.strict)
        return s_kernel(self.n, self.j1, self.j2, k, l, m, w)


def apply_bilinear(
    spec: KernelSpec, phi: Field, R: Field, support_tol: float = 0.0
) -> Field:
    """B(phi, R) with hat(k) = sum_l b(k, l, k - l) phi_hat(l) R_hat(k - l) dk.

    Direct quadrature over the nonzero modes of phi_hat, O(N * W) for W
    carrier modes; phi must be spectrally compact (cut it first if it came
    from sampled data, else W = N).  Differences k - l that leave the
    resolved band are dropped rather than wrapped, so the sum is the honest
    continuum quadrature restricted to the grid band.  A constant kernel
    reduces to that constant times the pointwise product.
    """
    _check_same_grid(phi.grid, R.grid)
    grid = phi.grid
    kv = grid.k
    dk = grid.dk
    ph = phi.hat
    support = np.flatnonzero(np.abs(ph) > support_tol)
    out = np.zeros(grid.N, dtype=complex)
    if support.size == 0:
        return Field.from_hat(grid, out)
    Rh = R.hat
    nyq = grid.nyquist_index
    # Mode integers of the output wavenumbers, for index arithmetic.
    kmodes = np.rint(kv / dk).astype(int)
    half = grid.N // 2
    for j in support:
        if j == nyq:
            continue
        l = kv[j]
        m = kv - l
        mmode = kmodes - kmodes[j]
        ok = np.abs(mmode) <= half - 1
        mi = np.where(ok, mmode % grid.N, 0)
        vals = np.asarray(spec.values(kv, np.full_like(kv, l), m), dtype=complex)
        out += np.where(ok, vals * ph[j] * Rh[mi], 0.0)
    out *= dk
    out[nyq] = 0.0
    return Field.from_hat(grid, out)


# ---------------------------------------------------------------------------
# Cancellation identities: each kernel kills its target coupling exactly.
# ---------------------------------------------------------------------------


def _omega_mul(f: Field) -> Field:
    """The skew multiplier i*omega(k); real fields stay real."""
    return Field.from_hat(f.grid, 1j * omega(f.grid.k) * f.hat)


def cancellation_defect(
    family: str,
    n: int,
    j1: int,
    j2: int,
    phi: Field,
    f: Field,
    w: Weight,
    support_tol: float = 0.0,
) -> float:
    """Relative defect of the kernel's defining cancellation.

    With Omega = i omega(D) and B the family's transform,

      -j1 Omega B(phi, f) - B(Omega phi, f) + j2 B(phi, Omega f)
        + (P d_x / (2 theta)) [alpha^n-product of phi with weight * f] = 0,

    where (P, weight) is (P0, theta) for b01, (P1, theta - eps) for b10 and
    (P1, theta) for b11.  Exact on the lattice (up to roundoff) because both
    sides are finite quadratures of the same triples; f is projected onto the
    family's input band first so the kernel support masks are inactive.
    """
    if family not in ("b01", "b10", "b11"):
        raise ValueError(f"cancellation is defined for b01/b10/b11, got {family!r}")
    _check_same_grid(phi.grid, f.grid)
    grid = phi.grid
    if family == "b10":
        f = p0(f, w.delta)
        weighted = theta0_mul(f, w)
        low_out = False
    elif family == "b11":
        f = p1(f, w.delta)
        weighted = theta_mul(f, w)
        low_out = False
    else:
        weighted = theta_mul(f, w)
        low_out = True

    spec = KernelSpec(family, n, j1, j2, w)
    B = apply_bilinear(spec, phi, f, support_tol)
    lhs = (
        _omega_mul(B) * (-j1)
        - apply_bilinear(spec, _omega_mul(phi), f, support_tol)
        + apply_bilinear(spec, phi, _omega_mul(f), support_tol) * j2
    )
    aspec = KernelSpec("alpha", n, j1, j2, w)
    conv = apply_bilinear(aspec, phi, weighted, support_tol)
    k = grid.k
    sym = 1j * k / (2.0 * w.theta(k))
    sym = np.where((np.abs(k) <= w.delta) == low_out, sym, 0.0)
    rhs = Field.from_hat(grid, sym * conv.hat)

    defect = lhs + rhs
    scale = max(
        np.max(np.abs(B.hat)),
        np.max(np.abs(conv.hat)),
        1e-300,
    )
    return float(np.max(np.abs(defect.hat)) / scale)


# ---------------------------------------------------------------------------
# Cascaded-output mismatch for the second normalization stage.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DTransformReport:
    """Scan of the second-stage mismatch -j1 w(k) - 2 w(k0) + j3 w(k - 2 k0)."""

    k0: float
    j1: int
    j3: int
    delta: float
    value_at_zero: float
    min_abs: float
    argmin: float


def d_transform_check(
    k0: float, j1: int, j3: int, delta: float = 0.1, samples: int = 4001
) -> DTransformReport:
    """Certify the cascaded transform's denominator is bounded away from zero.

    Feeding a low-band output back through the carrier band lands two carrier
    legs in the mismatch: d(k) = -j1 w(k) - 2 w(k0) + j3 w(k - 2 k0) for
    |k| <= delta.  Both j3-branches must stay uniformly nonresonant there;
    raises if the scan finds |d| below 1e-9.
    """
    if k0 <= 0:
        raise ValueError(f"carrier wavenumber must be positive, got {k0}")
    if j1 not in (-1, 1) or j3 not in (-1, 1):
        raise ValueError(f"branch indices must be +-1, got j1={j1}, j3={j3}")
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    ks = np.linspace(-delta, delta, samples)
    d = -j1 * omega(ks) - 2.0 * omega(k0) + j3 * omega(ks - 2.0 * k0)
    absd = np.abs(d)
    i = int(np.argmin(absd))
    min_abs = float(absd[i])
    if min_abs <= 1e-9:
        raise ArithmeticError(
            f"cascaded mismatch degenerates at k={ks[i]:.6g} (|d|={min_abs:.3e})"
        )
    at0 = float(abs(-2.0 * omega(k0) + j3 * omega(-2.0 * k0)))
    return DTransformReport(k0, j1, j3, delta, at0, min_abs, float(ks[i]))


# ---------------------------------------------------------------------------
# G multipliers and the swap kernels S^n of the adjoint identities.
# ---------------------------------------------------------------------------


def g_multiplier(j1: int, j2: int, k, delta: float):
    """Resolvent-type symbols used to symmetrize the quadratic energy terms.

    G_{j,j}(k) = 1 / (-2i (j k + omega(k))) and G_{j,-j}(k) = 1/2, both cut
    to |k| > delta.  j k + omega(k) = k (j + qhat(k)) only vanishes at k = 0,
    which the cut removes.
    """
    _check_branches(j1, j2)
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta}")
    k = np.asarray(k, dtype=float)
    chi = np.abs(k) > delta
    if j1 == j2:
        den = np.where(chi, -2j * (j1 * k + omega(k)), 1.0)
        out = np.where(chi, 1.0 / den, 0.0)
    else:
        out = np.where(chi, 0.5 + 0.0j, 0.0)
    return out if out.ndim else complex(out)


def g_sum_defects(k, delta: float) -> tuple[float, float]:
    """Sup relative deviation of the two closed-form G combinations.

      G_{-1,-1} + G_{1,1} = (1/(-ik) + ik) qhat(k)
      G_{-1,-1} - G_{1,1} = (1/(-ik) + ik)

    Both are exact identities of the symbols on |k| > delta; returns the two
    sup-defects, each normalized by the closed form's local magnitude (the
    raw difference picks up 1/(qhat - 1) roundoff amplification near the cut).
    """
    k = np.asarray(k, dtype=float)
    chi = np.abs(k) > delta
    gmm = np.asarray(g_multiplier(-1, -1, k, delta))
    gpp = np.asarray(g_multiplier(1, 1, k, delta))
    ksafe = np.where(chi, k, 1.0)
    closed = np.where(chi, 1.0 / (-1j * ksafe) + 1j * ksafe, 0.0)
    scale = np.maximum(np.abs(closed), 1.0)
    d4 = float(np.max(np.abs((gmm + gpp) - closed * qhat(k)) / (scale * qhat(k))))
    d5 = float(np.max(np.abs((gmm - gpp) - closed) / scale))
    return d4, d5


def s_kernel(n: int, j1: int, j2: int, k, l, m, w: Weight):
    """Swap kernel S^n_{j1,j2}: the lower-order leftover when the high-high
    transform is moved off one factor of an L2 pairing.

    All four divide by the same mismatch as the forward kernels and carry the
    high-band cut in both outer legs.  The difference quotients degenerate on
    the k = m diagonal (l = 0) and are filled with their limits there; for
    j1 = j2 the mismatch itself also vanishes on that diagonal, a genuine
    resonance, and exact evaluation raises.  The middle leg never sits at
    l = 0 in the intended use (it carries the carrier profile's band).
    """
    _check_branches(j1, j2)
    if not 1 <= n <= 4:
        raise ValueError(f"swap kernels exist for n in 1..4, got {n}")
    k, l, m = _check_triple(k, l, m)
    inside = (np.abs(k) > w.delta) & (np.abs(m) > w.delta)
    den = resonance_denominator(j1, j2, k, m)
    qk = qhat(k)
    qm = qhat(m)
    diag = l == 0.0
    lsafe = np.where(diag, 1.0, l)
    if n == 1:
        ratio = np.where(diag, qk - k * qhat_prime(k), (k * qm - m * qk) / lsafe)
        num = (j1 * 1j / 2.0) * ratio
    elif n == 2:
        num = -qhat(l) / 2j
    elif n == 3:
        g = k * qm / qk - m * qk / qm
        ratio = np.where(diag, 1.0 - 2.0 * k * qhat_prime(k) / qk, g / lsafe)
        num = -(j1 * j2) * qhat(l) * ratio / 2j
    else:
        h = k / qk - m / qm
        ratio = np.where(diag, (qk - k * qhat_prime(k)) / qk**2, h / lsafe)
        num = j2 * ratio / 2j
    num = np.where(inside, num, 0.0)
    return _safe_ratio_complex(num, den, inside, "s_kernel")


def _safe_ratio_complex(num, den, where_ok, name: str):
    num = np.asarray(num, dtype=complex)
    den = np.asarray(den, dtype=float)
    zero = (den == 0.0) & where_ok
    if np.any(zero & (num != 0.0)):
        raise ArithmeticError(f"exact resonance with nonzero numerator in {name}")
    den = np.where(den == 0.0, 1.0, den)
    out = np.where(where_ok, num / den, 0.0)
    return out if out.ndim else complex(out)


def adjoint_identity_defect(
    n: int,
    j1: int,
    j2: int,
    h: Field,
    f: Field,
    g: Field,
    w: Weight,
    support_tol: float = 0.0,
) -> float:
    """Relative defect of the high-high transform's adjoint identity.

      int f B^n_{j1,j2}(h, g) dx
        = -c int B^n_{j2,j1}(h, f) g dx + int S^n_{j2,j1}(h_x, f) g dx,

    with c = j1/j2 for n in {1, 4} and c = 1 for n in {2, 3}.  Both outer
    fields are projected onto |k| > delta first (the identity lives on the
    high band); h should be spectrally compact and all bands narrow enough
    that no quadrature triple wraps around the grid.
    """
    if n not in (1, 2, 3, 4):
        raise ValueError(f"adjoint identities cover n in 1..4, got {n}")
    f = p1(f, w.delta)
    g = p1(g, w.delta)
    c = j1 / j2 if n in (1, 4) else 1.0
    B_fwd = apply_bilinear(KernelSpec("b11", n, j1, j2, w), h, g, support_tol)
    B_swp = apply_bilinear(KernelSpec("b11", n, j2, j1, w), h, f, support_tol)
    hx = Field.from_hat(h.grid, 1j * h.grid.k * h.hat)
    S = apply_bilinear(KernelSpec("s", n, j2, j1, w), hx, f, support_tol)
    lhs = integrate(product(f, B_fwd))
    rhs = -c * integrate(product(B_swp, g)) + integrate(product(S, g))
    scale = max(abs(lhs), abs(rhs), 1e-300)
    return abs(lhs - rhs) / scale


# ---------------------------------------------------------------------------
# Integration-by-parts identities for transport terms.
# ---------------------------------------------------------------------------


def _dx(f: Field) -> Field:
    return Field.from_hat(f.grid, 1j * f.grid.k * f.hat)


def transport_identity_defect(a: Field, f: Field) -> float:
    """|int a f f_x dx + (1/2) int a_x f^2 dx|, which vanishes identically."""
    _check_same_grid(a.grid, f.grid)
    lhs = integrate(product(product(a, f), _dx(f)))
    rhs = -0.5 * integrate(product(_dx(a), product(f, f)))
    return abs(lhs - rhs)


def cross_transport_defects(
    a_pair: tuple[Field, Field], f_pair: tuple[Field, Field]
) -> tuple[float, float]:
    """Defects of the two counterpropagating-product identities.

    With pairs indexed (j = +1, j = -1), s = f1 + fm1 and arbitrary smooth
    coefficients:

      sum_j int a_j f_j (f_{-j})_x dx
        = (1/2) int (am1 - a1) s (f1 - fm1)_x
          + (1/4) int (am1 - a1)_x (f1^2 - fm1^2)
          - (1/2) int (a1 + am1)_x f1 fm1

      sum_j j int a_j f_j (f_{-j})_x dx
        = (1/2) int (a1 + am1) s (fm1 - f1)_x
          + (1/4) int (a1 + am1)_x (fm1^2 - f1^2)
          - (1/2) int (a1 - am1)_x f1 fm1

    Both are exact; the value is the pair of absolute defects.  These are the
    trades that turn mixed-branch transport into a symmetric principal part
    plus zero-derivative remainders.
    """
    a1, am1 = a_pair
    f1, fm1 = f_pair
    _check_same_grid(a1.grid, am1.grid)
    _check_same_grid(a1.grid, f1.grid)
    _check_same_grid(f1.grid, fm1.grid)

    lhs2 = integrate(product(product(a1, f1), _dx(fm1))) + integrate(
        product(product(am1, fm1), _dx(f1))
    )
    lhs3 = integrate(product(product(a1, f1), _dx(fm1))) - integrate(
        product(product(am1, fm1), _dx(f1))
    )

    s = f1 + fm1
    diff_a = am1 - a1
    sum_a = a1 + am1
    sq_diff = product(f1, f1) - product(fm1, fm1)
    mixed = product(f1, fm1)

    rhs2 = (
        0.5 * integrate(product(product(diff_a, s), _dx(f1 - fm1)))
        + 0.25 * integrate(product(_dx(diff_a), sq_diff))
        - 0.5 * integrate(product(_dx(sum_a), mixed))
    )
    rhs3 = (
        0.5 * integrate(product(product(sum_a, s), _dx(fm1 - f1)))
        - 0.25 * integrate(product(_dx(sum_a), sq_diff))
        - 0.5 * integrate(product(_dx(a1 - am1), mixed))
    )
    return abs(lhs2 - rhs2), abs(lhs3 - rhs3)


# ---------------------------------------------------------------------------
# Energy functional.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EnergyReport:
    """Level-by-level energy with its bilinear cross terms and correction.

    levels[l] is the full order-l energy (quadratic plus eps * cross);
    total sums them; norm_sq is the matching plain seminorm sum
    sum_l (||d^l R0||^2 + ||d^l R1||^2) over both branches, and ratio is the
    equivalence ratio total / (norm_sq / 2), which tends to 1 as eps -> 0.
    h_levels are the correction integrands' values for l = 1..s and
    modified = total + (eps^2/4) * sum.
    """

    levels: tuple[float, ...]
    cross: float
    total: float
    norm_sq: float
    ratio: float
    h_levels: tuple[float, ...]
    modified: float


def _deriv_hat(f: Field, ell: int) -> np.ndarray:
    return (1j * f.grid.k) ** ell * f.hat


def energy(
    R0: tuple[Field, Field],
    R1: tuple[Field, Field],
    phi_c: Field,
    s: int,
    eps: float,
    w: Weight,
    *,
    phi1: Field | None = None,
    phi2: Field | None = None,
    gee: Field | None = None,
    mixed_sign: float = -1.0,
    support_tol: float = 0.0,
) -> EnergyReport:
    """Quadratic energy of both error branches with carrier cross terms.

    R0 and R1 are the (j = +1, j = -1) pairs of low- and high-band errors.
    For each derivative order l = 0..s,

      E_l = (1/2) sum_j (int (d^l R0_j)^2 + int (d^l R1_j)^2)
            + eps sum_{j1 j2 n} int d^l R1_{j1} d^l [B10 + B11](phi_c, .)

    and the total is sum_l E_l.  The modified energy adds (eps^2/4) times the
    l = 1..s correction integrals

      h_l = int [ (2l+1) q^2(-phi_c + phi_c'') (2 phi1 - eps gee)
                  + phi_c (phi1 + phi2 + mixed_sign * 2 q phi2) - gee ]
            (d^l (R1_+ + R1_-))^2 dx,

    whose time derivative absorbs the non-decaying quadratic flux terms.
    phi1 and phi2 default to phi_c and gee to phi_c^2, their leading-order
    content; mixed_sign toggles the one sign the two bookkeeping routes
    disagree on (-1 follows the term-by-term sum).
    """
    if s < 0:
        raise ValueError(f"derivative count must be nonnegative, got {s}")
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    grid = phi_c.grid
    for f in (*R0, *R1):
        _check_same_grid(grid, f.grid)
    if phi1 is None:
        phi1 = phi_c
    if phi2 is None:
        phi2 = phi_c
    if gee is None:
        gee = product(phi_c, phi_c)

    # One transform sum per output branch, reused across derivative orders.
    cross_fields = []
    for j1 in (1, -1):
        acc = Field.zeros(grid)
        for j2, source in ((1, R0[0]), (-1, R0[1])):
            for n in range(1, 6):
                acc = acc + apply_bilinear(
                    KernelSpec("b10", n, j1, j2, w), phi_c, source, support_tol
                )
        for j2, source in ((1, R1[0]), (-1, R1[1])):
            for n in range(1, 6):
                acc = acc + apply_bilinear(
                    KernelSpec("b11", n, j1, j2, w), phi_c, source, support_tol
                )
        cross_fields.append(acc)

    levels = []
    cross_total = 0.0
    norm_sq = 0.0
    for ell in range(s + 1):
        quad = 0.0
        for f in (*R0, *R1):
            dfl = Field.from_hat(grid, _deriv_hat(f, ell))
            quad += integrate(product(dfl, dfl))
        norm_sq += quad
        cross = 0.0
        for R1j, Bj in zip(R1, cross_fields):
            da = Field.from_hat(grid, _deriv_hat(R1j, ell))
            db = Field.from_hat(grid, _deriv_hat(Bj, ell))
            cross += integrate(product(da, db))
        cross_total += eps * cross
        levels.append(0.5 * quad + eps * cross)

    total = float(sum(levels))
    ratio = total / (0.5 * norm_sq) if norm_sq > 0 else math.nan

    # Correction density shared by every l; only the (2l+1) factor moves.
    qop = Multiplier.from_symbol(grid, lambda k: qhat(k), parity="even")
    curv = Field.from_hat(grid, (-1.0 - grid.k**2) * phi_c.hat)
    msym = qop(qop(curv))
    base1 = phi1 * 2.0 - gee * eps
    base2 = product(phi_c, phi1 + phi2 + qop(phi2) * (2.0 * mixed_sign))
    rsum = R1[0] + R1[1]
    h_levels = []
    for ell in range(1, s + 1):
        dens = product(msym, base1) * float(2 * ell + 1) + base2 - gee
        dr = Field.from_hat(grid, _deriv_hat(rsum, ell))
        h_levels.append(integrate(product(dens, product(dr, dr))))
    modified = total + (eps**2 / 4.0) * float(sum(h_levels))

    return EnergyReport(
        levels=tuple(levels),
        cross=cross_total,
        total=total,
        norm_sq=norm_sq,
        ratio=ratio,
        h_levels=tuple(h_levels),
        modified=modified,
    )
