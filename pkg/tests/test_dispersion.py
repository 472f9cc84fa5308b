"""Dispersion relation values, parity, derivatives, and nonresonance margins."""

import math

import numpy as np
import pytest

from nlslab.dispersion import (
    check_second_harmonic_nonresonance,
    dispersion_point,
    omega,
    omega_double_prime,
    omega_prime,
    qhat,
    qhat_prime,
    resonance_denominator,
)


def test_symbol_endpoints():
    assert qhat(0.0) == pytest.approx(math.sqrt(2.0), rel=1e-15)
    assert qhat(1.0) == pytest.approx(math.sqrt(1.5), rel=1e-15)
    assert qhat(1e6) == pytest.approx(1.0, abs=1e-11)


def test_omega_structure():
    k = np.linspace(-8.0, 8.0, 161)
    assert np.allclose(omega(k), k * qhat(k), atol=1e-14)
    assert np.allclose(omega(-k), -omega(k), atol=1e-14)


def test_carrier_point_values():
    # frozen closed-form values at k0 = 1
    assert omega(1.0) == pytest.approx(math.sqrt(1.5), rel=1e-15)
    assert omega_prime(1.0) == pytest.approx(1.0206207261596574, rel=1e-14)
    assert omega_double_prime(1.0) == pytest.approx(-0.23814483610392015, rel=1e-13)
    p = dispersion_point(1.0)
    assert p.omega == pytest.approx(math.sqrt(1.5))
    assert p.omega_prime == pytest.approx(1.0206207261596574)


def test_derivatives_match_finite_differences():
    h = 1e-3
    for k0 in (0.7, 1.0, 2.5):
        pts = omega(k0 + h * np.array([-2.0, -1.0, 0.0, 1.0, 2.0]))
        fd1 = np.dot([1.0, -8.0, 0.0, 8.0, -1.0], pts) / (12 * h)
        fd2 = np.dot([-1.0, 16.0, -30.0, 16.0, -1.0], pts) / (12 * h**2)
        assert abs(fd1 - omega_prime(k0)) < 1e-7
        assert abs(fd2 - omega_double_prime(k0)) < 1e-7


def test_large_k_asymptotics():
    # omega(k) = k + 1/(2k) + O(1/k^3); omega'(k) = 1 + O(1/k^2)
    for k in (50.0, 100.0, 400.0):
        assert (omega(k) - k) * 2 * k == pytest.approx(1.0, abs=5.0 / k**2)
        assert omega_prime(k) == pytest.approx(1.0, abs=5.0 / k**2)


def test_qhat_prime_consistency():
    h = 1e-4
    for k in (0.3, 1.0, 4.0):
        fd = (qhat(k + h) - qhat(k - h)) / (2 * h)
        assert qhat_prime(k) == pytest.approx(fd, abs=1e-7)


def test_resonance_denominator_values():
    # at (j1, j2) = (-1, +1), k = 2, m = 1 the carrier leg cancels exactly
    assert resonance_denominator(-1, 1, 2.0, 1.0) == pytest.approx(
        omega(2.0), rel=1e-15
    )
    with pytest.raises(ValueError):
        resonance_denominator(0, 1, 1.0, 0.5)
    with pytest.raises(ValueError):
        resonance_denominator(1, 2, 1.0, 0.5)


def test_second_harmonic_margin():
    # |-2 omega(1) + omega(2)|, the closest second-stage denominator at k0 = 1
    margin = check_second_harmonic_nonresonance(1.0)
    assert margin == pytest.approx(0.2585995127625136, rel=1e-12)
    expected = abs(-2.0 * omega(1.0) + omega(2.0))
    assert margin == pytest.approx(expected, rel=1e-14)
