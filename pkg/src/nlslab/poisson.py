"""Electron-potential solve and its small-amplitude inversion series.

The potential phi balances the Boltzmann electrons against the ion density,
d^2phi/dx^2 = e^phi - n, solved by spectrally preconditioned Newton.  For
small rho = n - 1 the inverse has the expansion

    phi(rho) = B rho - (1/2) B[(B rho)^2] + M(rho),     B = (1 - d^2/dx^2)^{-1},

whose cubic term B[(1/2) B rho * B[(B rho)^2] - (1/6)(B rho)^3] is obtained by
iterating (1 - d^2/dx^2) phi = rho - phi^2/2 - phi^3/6 - ...; the remainder M
is cubically small and two derivatives smoother than rho.

The core solver works in the perturbation variables (rho, phi) with expm1,
so its accuracy floor scales with the data instead of with the unit
background; callers holding a density field use solve_phi, callers already
holding rho = n - 1 (time steppers at small amplitude) should call
solve_phi_perturbation directly to avoid the 1 + rho - 1 round trip.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from nlslab.spectral import Field, Multiplier, PeriodicGrid, product

__all__ = [
    "PoissonSolution",
    "inverse_helmholtz",
    "solve_phi",
    "solve_phi_perturbation",
    "phi_expansion",
    "M_remainder",
]


def inverse_helmholtz(grid: PeriodicGrid) -> Multiplier:
    """B = (1 - d^2/dx^2)^{-1}, symbol 1/(1+k^2)."""
    return Multiplier(grid, 1.0 / (1.0 + grid.k**2), parity="even")


@dataclass(frozen=True)
class PoissonSolution:
    """Result of the nonlinear potential solve.

    iterations counts residual evaluations (an exact initial guess counts 1);
    residual is the discrete L2 norm of d^2phi/dx^2 - e^phi + n at return and
    history holds the residual of every outer iteration.  Expansion terms are
    filled only when requested.
    """

    phi: Field
    iterations: int
    residual: float
    history: tuple[float, ...] = ()
    phi1: Field | None = None
    phi2: Field | None = None
    phi3: Field | None = None


def _laplacian_hat(grid: PeriodicGrid, hat: np.ndarray) -> np.ndarray:
    out = -grid.k**2 * hat
    out[grid.nyquist_index] = 0.0
    return out


def solve_phi_perturbation(
    rho: Field,
    tol: float = 1e-12,
    max_iter: int = 40,
    *,
    phi0: Field | None = None,
    with_expansion: bool = False,
) -> PoissonSolution:
    """Newton solve of d^2phi/dx^2 = expm1(phi) - rho (density n = 1 + rho).

    The Jacobian d^2/dx^2 - e^phi is inverted by Richardson iteration
    preconditioned with (d^2/dx^2 - 1)^{-1}, which contracts at rate
    max|e^phi - 1| < 1 in the admissible regime.  ``phi0`` warm-starts the
    outer iteration (time steppers pass the previous stage's potential).

    Raises on out-of-regime amplitude (max|rho| >= 1), tolerance outside
    (1e-14, 1e-6], stagnation (three consecutive iterations failing to shrink
    the residual by 10%), or iteration-budget exhaustion.
    """
    if not (1e-14 < tol <= 1e-6):
        raise ValueError(f"tol must lie in (1e-14, 1e-6], got {tol}")
    if max_iter < 1:
        raise ValueError(f"max_iter must be positive, got {max_iter}")
    grid = rho.grid
    rv = rho.real_values()
    if np.max(np.abs(rv)) >= 1.0:
        raise ValueError("density out of the small-amplitude regime (|n-1| >= 1)")

    B = inverse_helmholtz(grid)
    phi = B(rho) if phi0 is None else phi0
    phi_v = phi.real_values().copy()
    precond = -1.0 / (1.0 + grid.k**2)  # (d^2/dx^2 - 1)^{-1}
    norm_w = grid.dx / (2.0 * np.pi)

    prev_res = np.inf
    stall = 0
    iterations = 0
    history: list[float] = []
    while True:
        iterations += 1
        em1 = np.expm1(phi_v)
        res_v = np.fft.ifft(_laplacian_hat(grid, np.fft.fft(phi_v))).real - em1 + rv
        res_norm = float(np.sqrt(np.sum(res_v**2) * norm_w))
        history.append(res_norm)
        if res_norm <= tol:
            break
        if iterations >= max_iter:
            raise ArithmeticError(
                f"Poisson Newton did not reach tol={tol:g} in {max_iter} iterations "
                f"(residual {res_norm:.3e})"
            )
        if res_norm > 0.9 * prev_res:
            stall += 1
            if stall >= 3:
                raise ArithmeticError(
                    f"Poisson Newton stagnated at residual {res_norm:.3e}"
                )
        else:
            stall = 0
        prev_res = res_norm

        # Newton step: solve (d^2/dx^2 - e^phi) delta = -res by preconditioned
        # Richardson; the inner tolerance scales with res^2 to keep the outer
        # iteration quadratic until it reaches tol.
        expphi = 1.0 + em1
        inner_tol = max(0.05 * tol, min(1e-2, res_norm) * res_norm)
        delta = np.fft.ifft(precond * np.fft.fft(-res_v)).real
        for _ in range(200):
            jd = (
                np.fft.ifft(_laplacian_hat(grid, np.fft.fft(delta))).real
                - expphi * delta
            )
            inner_res = jd + res_v
            if float(np.sqrt(np.sum(inner_res**2) * norm_w)) <= inner_tol:
                break
            delta = delta - np.fft.ifft(precond * np.fft.fft(inner_res)).real
        phi_v = phi_v + delta

    sol_phi = Field(grid, phi_v)
    if with_expansion:
        return PoissonSolution(
            phi=sol_phi,
            iterations=iterations,
            residual=res_norm,
            history=tuple(history),
            phi1=phi_expansion(rho, 1),
            phi2=phi_expansion(rho, 2),
            phi3=phi_expansion(rho, 3),
        )
    return PoissonSolution(
        phi=sol_phi, iterations=iterations, residual=res_norm, history=tuple(history)
    )


def solve_phi(
    n: Field,
    tol: float = 1e-12,
    max_iter: int = 40,
    *,
    phi0: Field | None = None,
    with_expansion: bool = False,
) -> PoissonSolution:
    """Newton solve of d^2phi/dx^2 = e^phi - n for a density field n > 0."""
    nv = n.real_values()
    if np.min(nv) <= 0.0:
        raise ValueError("density must be positive pointwise")
    rho = Field(n.grid, nv - 1.0)
    return solve_phi_perturbation(
        rho, tol, max_iter, phi0=phi0, with_expansion=with_expansion
    )


def phi_expansion(rho: Field, order: int) -> Field:
    """Inversion series of the potential through the given order (1, 2, or 3)."""
    if order not in (1, 2, 3):
        raise ValueError(f"expansion order must be 1, 2, or 3, got {order}")
    B = inverse_helmholtz(rho.grid)
    brho = B(rho)
    out = brho
    if order >= 2:
        bsq = B(product(brho, brho))
        out = out - 0.5 * bsq
        if order >= 3:
            cubic = 0.5 * product(brho, bsq) - (1.0 / 6.0) * product(
                brho, product(brho, brho)
            )
            out = out + B(cubic)
    return out


def M_remainder(rho: Field, tol: float = 1e-13) -> Field:
    """Remainder M(rho) = phi(rho) - [B rho - (1/2) B (B rho)^2]; cubically small."""
    sol = solve_phi_perturbation(rho, tol=tol)
    return sol.phi - phi_expansion(rho, 2)
