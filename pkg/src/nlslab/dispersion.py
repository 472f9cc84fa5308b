"""Dispersion relation of the linearized ion system and its resonance structure.

The linear waves travel at speed qhat(k) = sqrt((2+k^2)/(1+k^2)), so the
branch frequencies are +-omega(k) with omega(k) = k*qhat(k) (odd in k).
Derivatives are analytic closed forms, not finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "qhat",
    "qhat_prime",
    "qhat_double_prime",
    "omega",
    "omega_prime",
    "omega_double_prime",
    "DispersionPoint",
    "dispersion_point",
    "resonance_denominator",
    "check_second_harmonic_nonresonance",
    "scan_resonances",
]


def _maybe_scalar(x, arg):
    return float(x) if np.isscalar(arg) or np.ndim(arg) == 0 else x


def qhat(k):
    """Phase speed sqrt((2+k^2)/(1+k^2)); decreases from sqrt(2) to 1."""
    k = np.asarray(k, dtype=float)
    return _maybe_scalar(np.sqrt((2.0 + k**2) / (1.0 + k**2)), k)


def qhat_prime(k):
    k = np.asarray(k, dtype=float)
    q = np.sqrt((2.0 + k**2) / (1.0 + k**2))
    return _maybe_scalar(-k / (q * (1.0 + k**2) ** 2), k)


def qhat_double_prime(k):
    k = np.asarray(k, dtype=float)
    q = np.sqrt((2.0 + k**2) / (1.0 + k**2))
    p = 1.0 + k**2
    num = q * p**2 + k**2 / q - 4.0 * k**2 * p * q
    return _maybe_scalar(-num / (q**2 * p**4), k)


def omega(k):
    """omega(k) = k * qhat(k), the (odd) frequency of the right-moving branch."""
    k = np.asarray(k, dtype=float)
    return _maybe_scalar(k * np.sqrt((2.0 + k**2) / (1.0 + k**2)), k)


def omega_prime(k):
    """Group velocity omega'(k) = qhat + k qhat'; omega'(0) = sqrt(2)."""
    k = np.asarray(k, dtype=float)
    q = np.sqrt((2.0 + k**2) / (1.0 + k**2))
    return _maybe_scalar(q - k**2 / (q * (1.0 + k**2) ** 2), k)


def omega_double_prime(k):
    """omega''(k) = 2 qhat' + k qhat''; strictly negative for k > 0."""
    k = np.asarray(k, dtype=float)
    return _maybe_scalar(2.0 * qhat_prime(k) + k * qhat_double_prime(k), k)


@dataclass(frozen=True)
class DispersionPoint:
    """Dispersion data evaluated at one wavenumber."""

    k: float
    qhat: float
    omega: float
    omega_prime: float
    omega_double_prime: float


def dispersion_point(k: float) -> DispersionPoint:
    k = float(k)
    return DispersionPoint(
        k=k,
        qhat=qhat(k),
        omega=omega(k),
        omega_prime=omega_prime(k),
        omega_double_prime=omega_double_prime(k),
    )


def resonance_denominator(j1: int, j2: int, k, m):
    """d(k, m) = -j1*omega(k) - omega(k-m) + j2*omega(m), j1, j2 in {+1, -1}.

    This is the frequency mismatch of a triad (k; k-m, m) where the k-m leg
    rides the carrier branch; zeros are the resonances the normal form must
    avoid or exploit.
    """
    if j1 not in (-1, 1) or j2 not in (-1, 1):
        raise ValueError(f"branch indices must be +-1, got j1={j1}, j2={j2}")
    k = np.asarray(k, dtype=float)
    m = np.asarray(m, dtype=float)
    out = -j1 * omega(k) - omega(k - m) + j2 * omega(m)
    return _maybe_scalar(out, out)


def check_second_harmonic_nonresonance(k0: float, mmax: int = 6) -> float:
    """Smallest harmonic frequency gap min_m |m*omega(k0) - omega(m*k0)|, m=2..mmax.

    Positive for every k0 > 0 because omega is strictly concave on (0, inf);
    raises if a gap underflows (which would make the harmonic corrections
    secular rather than oscillatory).
    """
    if k0 <= 0:
        raise ValueError(f"carrier wavenumber must be positive, got {k0}")
    if mmax < 2:
        raise ValueError(f"mmax must be at least 2, got {mmax}")
    ms = np.arange(2, mmax + 1, dtype=float)
    gaps = np.abs(ms * omega(k0) - omega(ms * k0))
    gap = float(np.min(gaps))
    if gap <= 1e-12:
        raise ValueError(f"harmonic resonance at k0={k0}: gap {gap:.3e}")
    return gap


def scan_resonances(j1: int, j2: int, k0: float, kgrid: np.ndarray) -> list[float]:
    """Roots of k -> d(k, k - k0) on the given grid, bisected to 1e-10.

    The scanned function freezes the middle leg at the carrier wavenumber k0:
    f(k) = -j1*omega(k) - omega(k0) + j2*omega(k - k0).  Sign changes are
    bracketed on consecutive grid points and refined by bisection; exact zeros
    on grid points are kept as-is.
    """
    kgrid = np.asarray(kgrid, dtype=float)
    if kgrid.ndim != 1 or kgrid.size < 2:
        raise ValueError("kgrid must be a 1-D array with at least two points")

    def f(k):
        return resonance_denominator(j1, j2, k, k - k0)

    vals = f(kgrid)
    roots: list[float] = []
    for i in range(kgrid.size - 1):
        a, b = kgrid[i], kgrid[i + 1]
        fa, fb = vals[i], vals[i + 1]
        if fa == 0.0:
            roots.append(float(a))
            continue
        if fa * fb < 0.0:
            for _ in range(200):
                c = 0.5 * (a + b)
                fc = f(c)
                if fc == 0.0 or (b - a) < 1e-10:
                    break
                if fa * fc < 0.0:
                    b = c
                else:
                    a, fa = c, fc
            roots.append(float(0.5 * (a + b)))
    if vals[-1] == 0.0:
        roots.append(float(kgrid[-1]))
    # merge near-duplicates from adjacent brackets
    merged: list[float] = []
    for r in sorted(roots):
        if not merged or abs(r - merged[-1]) > 1e-8:
            merged.append(r)
    return merged
