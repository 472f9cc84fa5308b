"""Spectral laboratory for the ion Euler-Poisson system and its NLS modulation limit.

The package is organized bottom-up:

- ``spectral``: periodic grids, Fourier multipliers, norms, convolution, snapshots.
- ``dispersion``: the closed-form dispersion relation and resonance structure.
- ``poisson``: the nonlinear electron-Boltzmann Poisson solve and its inversion series.
- ``plasma``: the quasilinear ion system, its diagonalization, and time integration.
- ``nls``: envelope-equation coefficients assembled from the quadratic kernels, and a
  split-step envelope solver.
- ``ansatz``: modulated wave-packet approximations and their residuals.
- ``normal_form``: weights, projections, bilinear normal-form kernels, operator
  identities, and the (modified) error energy.
- ``harness``: experiment configuration, sweep orchestration, CSV/plot emission.
"""

from nlslab.spectral import PeriodicGrid, Field, Multiplier, make_grid
from nlslab.dispersion import qhat, omega, omega_prime, omega_double_prime
from nlslab.nls import nls_coefficients

__version__ = "0.1.0"

__all__ = [
    "PeriodicGrid",
    "Field",
    "Multiplier",
    "make_grid",
    "qhat",
    "omega",
    "omega_prime",
    "omega_double_prime",
    "nls_coefficients",
    "__version__",
]
