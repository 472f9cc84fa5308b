#!/usr/bin/env python3
# The electrostatic potential solve, step by step: Newton iteration, the
# small-amplitude expansion, and the cubic remainder.

import numpy as np

from nlslab.poisson import M_remainder, phi_expansion, solve_phi_perturbation
from nlslab.spectral import Field, make_grid

grid = make_grid(2.0 * np.pi, 128)


def rho(amp):
    return Field(grid, amp * np.cos(grid.x))


def sup(f):
    return float(np.max(np.abs(f.values)))


print("Newton residual history on n = 1 + 0.1 cos x:")
sol = solve_phi_perturbation(rho(0.1))
for i, r in enumerate(sol.history):
    print("  iteration %d: %.3e" % (i + 1, r))
print("  (each step squares the previous residual: quadratic convergence)")

print()
print("distance from the truncated expansions, amplitude sweep:")
print("  amp        order 1      order 2      order 3")
for amp in (0.1, 0.05, 0.025, 0.0125):
    s = solve_phi_perturbation(rho(amp), tol=1e-13)
    errs = [sup(s.phi - phi_expansion(rho(amp), order)) for order in (1, 2, 3)]
    print("  %.4f   %.4e   %.4e   %.4e" % (amp, *errs))
print("  (columns shrink like amp^2, amp^3, amp^4)")

print()
print("cubic remainder M(rho) under amplitude halving:")
prev = None
for amp in (0.2, 0.1, 0.05, 0.025):
    m = sup(M_remainder(rho(amp)))
    note = "" if prev is None else "   ratio %.3f" % (prev / m)
    print("  amp %.4f: sup|M| = %.4e%s" % (amp, m, note))
    prev = m
print("  (ratio -> 8: the remainder starts at third order)")
