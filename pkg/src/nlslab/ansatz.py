"""Modulated wave-packet construction and residual measurement.

The envelope A lives on its own slow periodic grid whose length is exactly
eps times the physical length, so every slow mode kappa_j lands exactly on a
physical sideband k0 + eps*kappa_j (an integer number of lattice steps away
from the carrier).  Assembly is therefore a transplantation of Fourier
coefficients, not an interpolation.

The carrier rides the branch whose linear phase is exp(-i omega(k) t); for a
right-moving packet that is the U_{-1} component, with physical polarization
v = +qhat(k0) rho at leading order.  Corrections at depth 1 add the second
harmonic (both branches, weighted by the algebraic ratios from `nls`) and the
mean flow near k = 0.

Residuals are measured against the full plasma tendency: Res = -dU/dt + F(U),
with dU/dt obtained by fourth-order time differencing of the assembled fields
and sharpened by one Richardson extrapolation step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .dispersion import omega
from .nls import NlsCoefficients, nls_coefficients, split_step
from .plasma import PlasmaState, diagonalize, rhs, undiagonalize
from .spectral import Field, PeriodicGrid, convolve, l2_norm, make_grid, sobolev_norm

__all__ = [
    "AnsatzConfig",
    "Approximation",
    "BandRecord",
    "CarrierPhaseReport",
    "EnvelopeFlow",
    "ResidualReport",
    "apply_gauge_shift",
    "band_norm",
    "build",
    "build_extended",
    "build_leading",
    "carrier_phase_check",
    "envelope_grid",
    "fourier_cutoff",
    "make_builder",
    "physical_grid",
    "residual",
    "sech_envelope",
    "tabulated_builder",
    "time_step",
]


# ---------------------------------------------------------------------------
# grid policy

def physical_grid(eps: float, k0: float) -> PeriodicGrid:
    """Domain commensurate with the carrier and long enough for the packet.

    The length is the smallest multiple of 2*pi/k0 above max(40/eps, 20
    carrier wavelengths); the resolution keeps at least 32 points per carrier
    wavelength, rounded up to a multiple of 512 for FFT efficiency.
    """
    if not 0.0 < eps <= 0.2:
        raise ValueError(f"eps must be in (0, 0.2], got {eps}")
    if k0 <= 0.0:
        raise ValueError(f"k0 must be positive, got {k0}")
    L_min = max(40.0 / eps, 20.0 * 2.0 * math.pi / k0)
    M = math.ceil(k0 * L_min / (2.0 * math.pi) - 1e-9)
    L = 2.0 * math.pi * M / k0
    N = 512 * math.ceil(32 * M / 512 - 1e-9)
    return make_grid(L, max(N, 512))


def envelope_grid(grid: PeriodicGrid, eps: float, nx: int = 512) -> PeriodicGrid:
    """Slow grid matched to `grid`: length eps*L, so sidebands transplant exactly."""
    return make_grid(eps * grid.L, nx)


def time_step(grid: PeriodicGrid, cfl: float = 0.5) -> float:
    return cfl * grid.dx


def sech_envelope(egrid: PeriodicGrid, amplitude: float, width: float = 1.0) -> Field:
    """amplitude * sech((X - L/2)/width), centered to keep the wrap seam small."""
    if width <= 0.0:
        raise ValueError(f"width must be positive, got {width}")
    return Field(egrid, amplitude / np.cosh((egrid.x - 0.5 * egrid.L) / width))


# ---------------------------------------------------------------------------
# configuration and assembled product

@dataclass(frozen=True, eq=False)
class AnsatzConfig:
    """Parameters of the wave-packet construction.

    depth 0 builds the carrier block only; depth 1 adds the mean-flow and
    second-harmonic corrections.  `delta` is the half-width of the spectral
    bands used by the cutoff (default k0/10); `envelope` is the initial
    envelope on the slow grid, advanced by the cubic envelope flow unless
    `envelope_frozen` is set.
    """

    eps: float
    k0: float
    depth: int = 1
    delta: float | None = None
    cutoff: bool = False
    envelope: Field | None = None
    envelope_frozen: bool = False

    def __post_init__(self):
        if not 0.0 < self.eps <= 0.2:
            raise ValueError(f"eps must be in (0, 0.2], got {self.eps}")
        if self.k0 <= 0.0:
            raise ValueError(f"k0 must be positive, got {self.k0}")
        if self.depth not in (0, 1):
            raise ValueError(f"depth must be 0 or 1, got {self.depth}")
        if self.delta is None:
            object.__setattr__(self, "delta", self.k0 / 10.0)
        if not 0.0 < self.delta < self.k0 / 2.0:
            raise ValueError(
                f"delta must lie in (0, k0/2) to keep the bands disjoint, got {self.delta}"
            )


class BandRecord(NamedTuple):
    component: str
    harmonic: int
    placed: int
    clipped: int


@dataclass(frozen=True)
class Approximation:
    """Assembled wave-packet fields at one instant, in both representations."""

    t: float
    rho: Field
    v: Field
    u1: Field
    um1: Field
    bands: tuple[BandRecord, ...] = ()
    discarded_l2: float = 0.0

    @classmethod
    def from_fields(cls, t: float, rho: Field, v: Field) -> "Approximation":
        u1, um1 = diagonalize(rho, v)
        return cls(t=t, rho=rho, v=v, u1=u1, um1=um1)


# ---------------------------------------------------------------------------
# assembly

def _carrier_index(cfg: AnsatzConfig, grid: PeriodicGrid) -> int:
    m = cfg.k0 / grid.dk
    M = round(m)
    if M <= 0 or abs(m - M) > 1e-9 * max(1.0, m):
        raise ValueError(
            f"carrier k0={cfg.k0} is not on the lattice of grid (L={grid.L}, N={grid.N})"
        )
    return M


def _check_envelope_grid(cfg: AnsatzConfig, egrid: PeriodicGrid, grid: PeriodicGrid) -> None:
    # slow modes transplant exactly only if L_slow = eps * L
    if abs(egrid.L - cfg.eps * grid.L) > 1e-9 * cfg.eps * grid.L:
        raise ValueError(
            f"envelope grid length {egrid.L} must equal eps*L = {cfg.eps * grid.L}"
        )


def _assemble(
    A: Field, t: float, cfg: AnsatzConfig, grid: PeriodicGrid, coeffs: NlsCoefficients, depth: int
) -> Approximation:
    egrid = A.grid
    _check_envelope_grid(cfg, egrid, grid)
    M = _carrier_index(cfg, grid)
    eps, k0 = cfg.eps, cfg.k0
    kappa = egrid.k
    jj = np.rint(kappa / egrid.dk).astype(int)
    # keep sidebands strictly inside the half-gap between harmonics; drop the
    # unpaired slow Nyquist mode so every block stays Hermitian-completable
    keep = (np.abs(eps * kappa) < 0.5 * k0) & (jj != -egrid.N // 2)

    u1_hat = np.zeros(grid.N, dtype=complex)
    um1_hat = np.zeros(grid.N, dtype=complex)
    records: list[BandRecord] = []

    def place(target: np.ndarray, harmonic: int, env_hat: np.ndarray, weight: complex, label: str):
        phase = np.exp(-1j * (harmonic * coeffs.omega0 + eps * kappa * coeffs.c_g) * t)
        coeff = weight * env_hat * phase
        modes = harmonic * M + jj
        ok = keep & (np.abs(modes) < grid.N // 2)
        np.add.at(target, modes[ok] % grid.N, coeff[ok])
        if harmonic != 0:
            np.add.at(target, (-modes[ok]) % grid.N, np.conj(coeff[ok]))
        records.append(BandRecord(label, harmonic, int(ok.sum()), int((~ok).sum())))

    place(um1_hat, 1, A.hat, 1.0, "U-1")
    if depth == 1:
        conj_A = Field(egrid, np.conj(A.values))
        a2 = convolve(A, A)
        a0 = convolve(A, conj_A)
        place(um1_hat, 2, a2, eps * coeffs.ratio21, "U-1")
        place(um1_hat, 0, a0, eps * coeffs.ratio01, "U-1")
        place(u1_hat, 2, a2, eps * coeffs.ratio22, "U1")
        place(u1_hat, 0, a0, eps * coeffs.ratio02, "U1")

    u1 = Field.from_hat(grid, u1_hat)
    um1 = Field.from_hat(grid, um1_hat)
    rho, v = undiagonalize(u1, um1)
    appr = Approximation(t=t, rho=rho, v=v, u1=u1, um1=um1, bands=tuple(records))
    if cfg.cutoff:
        appr = fourier_cutoff(appr, cfg)
    return appr


def build_leading(
    A: Field, t: float, cfg: AnsatzConfig, grid: PeriodicGrid,
    coeffs: NlsCoefficients | None = None,
) -> Approximation:
    """Carrier block only: rho = 2 eps Re(A e^{i(k0 x - w0 t)}), v = +qhat rho."""
    return _assemble(A, t, cfg, grid, coeffs or nls_coefficients(cfg.k0), depth=0)


def build_extended(
    A: Field, t: float, cfg: AnsatzConfig, grid: PeriodicGrid,
    coeffs: NlsCoefficients | None = None,
) -> Approximation:
    """Carrier plus eps^2 mean-flow and second-harmonic corrections."""
    if cfg.depth != 1:
        raise ValueError("extended build requires cfg.depth == 1")
    return _assemble(A, t, cfg, grid, coeffs or nls_coefficients(cfg.k0), depth=1)


def build(
    A: Field, t: float, cfg: AnsatzConfig, grid: PeriodicGrid,
    coeffs: NlsCoefficients | None = None,
) -> Approximation:
    """Dispatch on cfg.depth."""
    return _assemble(A, t, cfg, grid, coeffs or nls_coefficients(cfg.k0), depth=cfg.depth)


def fourier_cutoff(appr: Approximation, cfg: AnsatzConfig) -> Approximation:
    """Hard truncation to the allowed harmonic bands; reports discarded mass."""
    grid = appr.rho.grid
    k = grid.k
    harmonics = (0, 1, 2) if cfg.depth == 1 else (1,)
    mask = np.zeros(grid.N, dtype=bool)
    for c in harmonics:
        mask |= np.abs(k - c * cfg.k0) <= cfg.delta
        if c != 0:
            mask |= np.abs(k + c * cfg.k0) <= cfg.delta
    dropped = 0.0
    new_hats = []
    for f in (appr.u1, appr.um1):
        h = np.where(mask, f.hat, 0.0)
        dropped += float(np.sum(np.abs(f.hat[~mask]) ** 2) * grid.dk)
        new_hats.append(h)
    u1 = Field.from_hat(grid, new_hats[0])
    um1 = Field.from_hat(grid, new_hats[1])
    rho, v = undiagonalize(u1, um1)
    return Approximation(
        t=appr.t, rho=rho, v=v, u1=u1, um1=um1, bands=appr.bands,
        discarded_l2=appr.discarded_l2 + math.sqrt(dropped),
    )


def apply_gauge_shift(appr: Approximation, cfg: AnsatzConfig, dt_shift: float) -> Approximation:
    """Translate by c_g*dt and rotate each harmonic band by its carrier phase.

    For a frozen envelope this reproduces the construction at t + dt_shift
    exactly, band by band.
    """
    co = nls_coefficients(cfg.k0)
    grid = appr.rho.grid
    k = grid.k
    c = np.rint(k / cfg.k0)
    phase = np.exp(-1j * (k * co.c_g + c * (co.omega0 - cfg.k0 * co.c_g)) * dt_shift)
    u1 = Field.from_hat(grid, appr.u1.hat * phase)
    um1 = Field.from_hat(grid, appr.um1.hat * phase)
    rho, v = undiagonalize(u1, um1)
    return Approximation(
        t=appr.t + dt_shift, rho=rho, v=v, u1=u1, um1=um1,
        bands=appr.bands, discarded_l2=appr.discarded_l2,
    )


# ---------------------------------------------------------------------------
# envelope flow and builders

class EnvelopeFlow:
    """A(T) along the cubic envelope equation, cached at the last query time.

    Repeated nearby queries (differencing stencils, dense sampling) advance
    incrementally in steps of at most dT_max, so the map T -> A(T) is smooth
    across a stencil; short backward hops are taken directly (the flow is
    reversible), long ones restart from T = 0.
    """

    def __init__(self, A0: Field, nu1: float, nu2: float, dT_max: float = 1e-3):
        if dT_max <= 0.0:
            raise ValueError(f"dT_max must be positive, got {dT_max}")
        self._A0 = A0
        self._nu1 = nu1
        self._nu2 = nu2
        self._dT_max = dT_max
        self._T = 0.0
        self._A = A0

    def at(self, T: float) -> Field:
        delta = T - self._T
        if delta < 0.0 and abs(delta) > 5.0 * self._dT_max:
            self._T, self._A = 0.0, self._A0
            delta = T
        if delta != 0.0:
            n = max(1, math.ceil(abs(delta) / self._dT_max))
            self._A = split_step(self._A, self._nu1, self._nu2, delta / n, n)
            self._T = T
        return self._A


def make_builder(
    cfg: AnsatzConfig, grid: PeriodicGrid, coeffs: NlsCoefficients | None = None
) -> Callable[[float], Approximation]:
    """t -> Approximation with the envelope advanced to slow time T = eps^2 t.

    Passing modified `coeffs` perturbs both the envelope flow and the
    correction ratios; the assembly ratios always follow `coeffs`.
    """
    if cfg.envelope is None:
        raise ValueError("cfg.envelope is required to make a builder")
    co = coeffs if coeffs is not None else nls_coefficients(cfg.k0)
    flow = EnvelopeFlow(cfg.envelope, co.nu1, co.nu2)

    def build_at(t: float) -> Approximation:
        A = cfg.envelope if cfg.envelope_frozen else flow.at(cfg.eps**2 * t)
        return _assemble(A, t, cfg, grid, co, depth=cfg.depth)

    return build_at


def tabulated_builder(
    approximations: Sequence[Approximation], tol: float = 1e-9
) -> Callable[[float], Approximation]:
    """Builder backed by precomputed snapshots (e.g. a simulated trajectory)."""
    table = list(approximations)

    def build_at(t: float) -> Approximation:
        for appr in table:
            if abs(appr.t - t) <= tol * max(1.0, abs(t)):
                return appr
        raise KeyError(f"no tabulated approximation at t={t}")

    return build_at


# ---------------------------------------------------------------------------
# residual

@dataclass(frozen=True)
class ResidualReport:
    """Res = -dU/dt + F(U) per diagonal component, plus differencing diagnostics."""

    t: float
    h: float
    res_u1: Field
    res_um1: Field
    derivative_error: float

    def norm(self, s: float = 0.0) -> float:
        return math.hypot(sobolev_norm(self.res_u1, s), sobolev_norm(self.res_um1, s))

    def band(self, center: float, halfwidth: float, s: float = 0.0) -> float:
        return math.hypot(
            band_norm(self.res_u1, center, halfwidth, s),
            band_norm(self.res_um1, center, halfwidth, s),
        )

    def resonant_band(self, center: float, halfwidth: float, s: float = 0.0) -> float:
        """One-sided band of the carrier-slot component near +center.

        The mirror band at -center belongs to the co-rotating component and
        carries a cubic leftover the envelope equation cannot cancel, so the
        envelope-coefficient diagnostics look only at this side.
        """
        if halfwidth <= 0.0:
            raise ValueError(f"halfwidth must be positive, got {halfwidth}")
        grid = self.res_um1.grid
        mask = np.abs(grid.k - center) < halfwidth
        weight = (1.0 + grid.k[mask] ** 2) ** s
        return math.sqrt(np.sum(np.abs(self.res_um1.hat[mask]) ** 2 * weight) * grid.dk)


def band_norm(f: Field, center: float, halfwidth: float, s: float = 0.0) -> float:
    """Sobolev-weighted mass of the modes within `halfwidth` of +-center."""
    if halfwidth <= 0.0:
        raise ValueError(f"halfwidth must be positive, got {halfwidth}")
    k = f.grid.k
    mask = (np.abs(k - center) < halfwidth) | (np.abs(k + center) < halfwidth)
    w = (1.0 + k[mask] ** 2) ** s
    return float(np.sqrt(np.sum(np.abs(f.hat[mask]) ** 2 * w) * f.grid.dk))


def residual(
    appr_builder: Callable[[float], Approximation],
    t: float,
    cfg: AnsatzConfig,
    h: float | None = None,
) -> ResidualReport:
    """Defect of the built fields under the plasma dynamics at time t.

    The time derivative uses the four-point fourth-order stencil at spacings h
    and h/2; the Richardson pair both sharpens the derivative and bounds the
    differencing error, which must stay below a quarter of the residual.
    """
    if h is None:
        h = 1e-3 * 2.0 * math.pi / omega(cfg.k0)
    if h <= 0.0:
        raise ValueError(f"h must be positive, got {h}")
    offsets = (-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0)  # ascending: cheap for the flow cache
    a = {s_: appr_builder(t + s_ * h) for s_ in offsets}

    def ddt(step: float, sample):
        c = 1.0 / (12.0 * step)
        drho = c * (sample(-2).rho - 8.0 * sample(-1).rho + 8.0 * sample(1).rho - sample(2).rho)
        dv = c * (sample(-2).v - 8.0 * sample(-1).v + 8.0 * sample(1).v - sample(2).v)
        return drho, dv

    d1_rho, d1_v = ddt(h, lambda i: a[float(i)])
    d2_rho, d2_v = ddt(0.5 * h, lambda i: a[0.5 * i])
    drho = (1.0 / 15.0) * (16.0 * d2_rho - d1_rho)
    dv = (1.0 / 15.0) * (16.0 * d2_v - d1_v)
    err_est = math.hypot(l2_norm(d1_rho - d2_rho), l2_norm(d1_v - d2_v)) / 15.0

    center = a[0.0]
    tend_rho, tend_v = rhs(PlasmaState(t=center.t, rho=center.rho, v=center.v))
    res_rho = tend_rho - drho
    res_v = tend_v - dv
    res_norm = math.hypot(l2_norm(res_rho), l2_norm(res_v))
    signal = math.hypot(l2_norm(drho), l2_norm(dv))
    if err_est > max(0.25 * res_norm, 1e-8 * max(signal, 1e-300)):
        raise ArithmeticError(
            f"time differencing unresolved at h={h:.3e}: "
            f"error estimate {err_est:.3e} vs residual {res_norm:.3e}"
        )
    res_u1, res_um1 = diagonalize(res_rho, res_v)
    return ResidualReport(t=t, h=h, res_u1=res_u1, res_um1=res_um1, derivative_error=err_est)


# ---------------------------------------------------------------------------
# carrier phase defect

@dataclass(frozen=True)
class CarrierPhaseReport:
    eps_pair: tuple[float, float]
    norms: tuple[float, float]
    slope: float
    s: float


def carrier_phase_check(
    cfg: AnsatzConfig,
    profile: Callable[[np.ndarray], np.ndarray] | None = None,
    s: float = 2.0,
    min_slope: float = 1.8,
    nx: int = 512,
) -> CarrierPhaseReport:
    """Decay rate of the carrier-band phase defect d/dt psi + i omega psi.

    With a frozen envelope the defect spectrum is exactly
    i (omega(k) - omega0 - (k - k0) c_g) psi_hat(k), a Taylor remainder that is
    quadratic in the band width.  The weighted L1 mass is measured at cfg.eps
    and cfg.eps/2 and the log-log slope must reach `min_slope`.
    """
    if profile is None:
        profile = lambda X: 1.0 / np.cosh(X)
    co = nls_coefficients(cfg.k0)
    eps_pair = (cfg.eps, 0.5 * cfg.eps)
    norms = []
    for e in eps_pair:
        grid = physical_grid(e, cfg.k0)
        egrid = envelope_grid(grid, e, nx)
        env = Field(egrid, profile(egrid.x - 0.5 * egrid.L))
        kappa = egrid.k
        jj = np.rint(kappa / egrid.dk).astype(int)
        keep = (np.abs(e * kappa) < 0.5 * cfg.k0) & (jj != -egrid.N // 2)
        k_phys = cfg.k0 + e * kappa[keep]
        defect = np.abs(omega(k_phys) - co.omega0 - e * kappa[keep] * co.c_g)
        weight = (1.0 + k_phys**2) ** (0.5 * s)
        norms.append(float(np.sum(defect * np.abs(env.hat[keep]) * weight) * grid.dk))
    slope = math.log(norms[0] / norms[1]) / math.log(eps_pair[0] / eps_pair[1])
    if not slope >= min_slope:
        raise ArithmeticError(
            f"carrier phase defect slope {slope:.3f} below required {min_slope}"
        )
    return CarrierPhaseReport(eps_pair=eps_pair, norms=tuple(norms), slope=slope, s=s)
