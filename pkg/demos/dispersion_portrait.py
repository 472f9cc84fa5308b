#!/usr/bin/env python3
"""Portrait of the linear dispersion relation and its resonance structure.

Writes dispersion_portrait.png in the working directory.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from nlslab.dispersion import (
    check_second_harmonic_nonresonance,
    dispersion_point,
    omega,
    omega_prime,
    qhat,
    resonance_denominator,
)

k = np.linspace(0.0, 6.0, 601)

pt = dispersion_point(1.0)
print("carrier k0 = 1:")
print("  omega0   = %.15f  (sqrt(3/2) = %.15f)" % (pt.omega, np.sqrt(1.5)))
print("  c_g      = %.15f" % pt.omega_prime)
print("  omega''  = %.15f" % pt.omega_double_prime)

# the second harmonic is nonresonant: |j*2*omega(k0) - omega(2 k0)| stays
# away from zero, which is what lets the harmonic corrections be solved for
margin = check_second_harmonic_nonresonance(1.0)
print("  second-harmonic nonresonance margin = %.6f" % margin)

fig, axes = plt.subplots(1, 3, figsize=(12.5, 4.0))

ax = axes[0]
ax.plot(k, omega(k), "k-", label=r"$\omega(k)$")
ax.plot(k, k, "k:", label="sonic line $ck$")
ax.plot(k, k * qhat(k), "r--", lw=0.8, label=r"$k\,\hat q(k)$ (same curve)")
ax.set_xlabel("k")
ax.legend(loc="upper left", fontsize=9)
ax.set_title("dispersion relation")

ax = axes[1]
ax.plot(k, omega_prime(k), "k-", label=r"$\omega'(k)$")
ax.plot(k[1:], omega(k[1:]) / k[1:], "b--", label=r"$\omega(k)/k$")
ax.set_xlabel("k")
ax.legend(fontsize=9)
ax.set_title("group vs phase speed")

# mismatch surfaces along the two quadratic interaction branches: bounded
# away from zero except at the trivial k = 0 crossing
ax = axes[2]
kk = np.linspace(-4.0, 4.0, 801)
for j1, j2, style in ((1, 1, "k-"), (1, -1, "b--"), (-1, 1, "g-."), (-1, -1, "r:")):
    ax.plot(kk, np.abs(resonance_denominator(j1, j2, kk, kk - 1.0)), style,
            label=f"j=({j1:+d},{j2:+d})")
ax.set_xlabel("k (input leg at k - 1)")
ax.set_yscale("log")
ax.legend(fontsize=8)
ax.set_title("|resonance mismatch|")

fig.tight_layout()
fig.savefig("dispersion_portrait.png", dpi=140)
print("wrote dispersion_portrait.png")
