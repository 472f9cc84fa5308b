#!/usr/bin/env python3
# Audit of the exact operator identities on random fields.  Everything here
# should sit at quadrature roundoff (1e-13 or below); these identities are
# what the energy argument spends, so they are checked as equalities, not
# estimates.

import numpy as np

from nlslab.normal_form import (
    Weight,
    adjoint_identity_defect,
    cancellation_defect,
    cross_transport_defects,
    g_sum_defects,
    transport_identity_defect,
)
from nlslab.spectral import Field, make_grid

grid = make_grid(60.0, 256)
w = Weight(0.05, 0.5)
rng = np.random.default_rng(0)


def full_band(mean=0.0):
    hat = np.zeros(grid.N, dtype=complex)
    keep = grid.N // 8
    hat[1:keep] = rng.standard_normal(keep - 1) + 1j * rng.standard_normal(keep - 1)
    hat[-keep + 1:] = np.conj(hat[1:keep][::-1])
    hat[0] = mean
    return Field.from_hat(grid, hat)


def carrier_band():
    hat = np.zeros(grid.N, dtype=complex)
    sel = (np.abs(grid.k) > 0.8) & (np.abs(grid.k) < 2.0) & (grid.k > 0)
    idx = np.nonzero(sel)[0]
    hat[idx] = rng.standard_normal(idx.size) + 1j * rng.standard_normal(idx.size)
    hat[(grid.N - idx) % grid.N] = np.conj(hat[idx])
    return Field.from_hat(grid, hat)


phi = carrier_band()
f = full_band(mean=1.3)

print("defining cancellation, all families / symbols / branches:")
for family in ("b01", "b10", "b11"):
    worst = max(
        cancellation_defect(family, n, j1, j2, phi, f, w)
        for n in range(1, 6)
        for j1 in (1, -1)
        for j2 in (1, -1)
    )
    print("  %s: worst of 20 = %.2e" % (family, worst))

print()
print("adjoint identities (high-high transform against its swap):")
h = carrier_band()
u = full_band()
g = full_band()
for n in range(1, 5):
    worst = max(
        adjoint_identity_defect(n, j1, j2, h, u, g, w)
        for j1 in (1, -1)
        for j2 in (1, -1)
    )
    print("  n=%d: worst of 4 = %.2e" % (n, worst))

print()
a1, a2 = full_band(mean=0.7), full_band(mean=-0.2)
f1, f2 = full_band(), full_band()
print("transport identity:        %.2e" % transport_identity_defect(a1, f1))
d2, d3 = cross_transport_defects((a1, a2), (f1, f2))
print("cross-transport pair:      %.2e  %.2e" % (d2, d3))
d4, d5 = g_sum_defects(np.linspace(-8.0, 8.0, 2001), 0.5)
print("multiplier sum rules:      %.2e  %.2e" % (d4, d5))
