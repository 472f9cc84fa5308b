"""Periodic spectral substrate: grids, fields, multipliers, norms, convolution.

Conventions
-----------
Spectra are stored under the continuum convention

    u_hat(k) = (1/2pi) * integral over the cell of u(x) e^{-ikx} dx,

so on an N-point grid ``u_hat = (L / (2 pi N)) * fft(u)`` and the field is
recovered as the dk-weighted mode sum u(x) = sum_j u_hat_j e^{i k_j x} dk
with dk = 2pi/L.  All k-space quadrature uses that same weight, hence

    ||u||_{H^s}^2 = sum_j |u_hat_j|^2 (1 + k_j^2)^s * dk,

whose s=0 case *is* the package's discrete L2 norm (Parseval holds exactly;
it differs from the plain (integral |u|^2 dx)^{1/2} by the constant
sqrt(2pi)).  Plain-dx cell integrals are provided separately (``integrate``)
for masses and energy densities.

Quadratic products are dealiased exactly by 3/2-rule zero padding (all
retained non-Nyquist modes are alias-free for full-band inputs); a 2/3-rule
truncation is kept as a separate operation.  The Nyquist mode is zeroed in
every derivative multiplier and in convolution output.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "PeriodicGrid",
    "Field",
    "Multiplier",
    "make_grid",
    "apply_multiplier",
    "sobolev_norm",
    "l2_norm",
    "integrate",
    "convolve",
    "product",
    "dealias",
    "derivative_multiplier",
    "save_snapshot",
    "load_snapshot",
    "snapshot_to_csv",
]

_PARITY_TOL = 1e-12


@dataclass(frozen=True)
class PeriodicGrid:
    """Uniform periodic grid on [0, L) with the standard FFT wavenumber lattice.

    Attributes:
        L: cell length (> 0).
        N: number of points (even, >= 16).
        x: sample locations x_n = n*L/N.
        k: wavenumbers 2*pi*j/L in FFT order, j in {0,...,N/2-1, -N/2,...,-1}.
    """

    L: float
    N: int
    x: np.ndarray = field(repr=False, compare=False)
    k: np.ndarray = field(repr=False, compare=False)

    @property
    def dx(self) -> float:
        return self.L / self.N

    @property
    def dk(self) -> float:
        return 2.0 * np.pi / self.L

    @property
    def nyquist_index(self) -> int:
        return self.N // 2

    def mode_index(self, j: int) -> int:
        """Array index of the mode with integer wavenumber index j."""
        if not -self.N // 2 <= j < self.N // 2:
            raise ValueError(f"mode index {j} outside lattice for N={self.N}")
        return j % self.N

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PeriodicGrid)
            and self.N == other.N
            and self.L == other.L
        )

    def __hash__(self) -> int:
        return hash((self.L, self.N))


def make_grid(L: float, N: int) -> PeriodicGrid:
    """Build a PeriodicGrid; rejects odd N, N < 16, or nonpositive L."""
    if L <= 0:
        raise ValueError(f"cell length must be positive, got L={L}")
    N = int(N)
    if N % 2 != 0:
        raise ValueError(f"point count must be even, got N={N}")
    if N < 16:
        raise ValueError(f"point count must be at least 16, got N={N}")
    x = np.arange(N) * (L / N)
    k = 2.0 * np.pi * np.fft.fftfreq(N, d=1.0 / N) / L
    return PeriodicGrid(L=float(L), N=N, x=x, k=k)


def forward(grid: PeriodicGrid, values: np.ndarray) -> np.ndarray:
    """Samples -> spectrum under the (1/2pi)-integral convention."""
    return np.fft.fft(values) * (grid.L / (2.0 * np.pi * grid.N))


def inverse(grid: PeriodicGrid, hat: np.ndarray) -> np.ndarray:
    """Spectrum -> samples (complex; callers take .real for real fields)."""
    return np.fft.ifft(hat) * (2.0 * np.pi * grid.N / grid.L)


class Field:
    """A sampled function on a PeriodicGrid, paired with its spectrum.

    Construct from samples (``Field(grid, values)``) or from a spectrum
    (``Field.from_hat``).  Whichever representation is missing is computed
    lazily and cached; instances are treated as immutable.
    """

    __slots__ = ("grid", "_values", "_hat")

    def __init__(self, grid: PeriodicGrid, values: np.ndarray):
        values = np.asarray(values)
        if values.shape != (grid.N,):
            raise ValueError(f"expected {grid.N} samples, got shape {values.shape}")
        self.grid = grid
        self._values = values
        self._hat = None

    @classmethod
    def from_hat(cls, grid: PeriodicGrid, hat: np.ndarray) -> "Field":
        hat = np.asarray(hat, dtype=complex)
        if hat.shape != (grid.N,):
            raise ValueError(f"expected {grid.N} modes, got shape {hat.shape}")
        obj = cls.__new__(cls)
        obj.grid = grid
        obj._values = None
        obj._hat = hat
        return obj

    @classmethod
    def zeros(cls, grid: PeriodicGrid) -> "Field":
        return cls(grid, np.zeros(grid.N))

    @property
    def values(self) -> np.ndarray:
        if self._values is None:
            v = inverse(self.grid, self._hat)
            # a Hermitian spectrum means a real field; drop the fp-noise imag part
            if np.max(np.abs(v.imag)) <= 1e-12 * max(1.0, np.max(np.abs(v.real))):
                v = v.real
            self._values = v
        return self._values

    @property
    def hat(self) -> np.ndarray:
        if self._hat is None:
            self._hat = forward(self.grid, self._values)
        return self._hat

    def is_real(self, tol: float = 1e-12) -> bool:
        v = self.values
        if not np.iscomplexobj(v):
            return True
        scale = max(1.0, float(np.max(np.abs(v))))
        return float(np.max(np.abs(v.imag))) <= tol * scale

    def real_values(self) -> np.ndarray:
        v = self.values
        return v.real if np.iscomplexobj(v) else v

    def __add__(self, other: "Field") -> "Field":
        _check_same_grid(self.grid, other.grid)
        return Field.from_hat(self.grid, self.hat + other.hat)

    def __sub__(self, other: "Field") -> "Field":
        _check_same_grid(self.grid, other.grid)
        return Field.from_hat(self.grid, self.hat - other.hat)

    def __mul__(self, scalar) -> "Field":
        return Field.from_hat(self.grid, self.hat * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "Field":
        return Field.from_hat(self.grid, -self.hat)


class Multiplier:
    """A Fourier multiplier m(k) evaluated on a grid's lattice.

    The declared parity ('even', 'odd', or 'none') is verified on the lattice
    at construction.  Multipliers compose by pointwise product.
    """

    __slots__ = ("grid", "values", "parity")

    def __init__(self, grid: PeriodicGrid, values: np.ndarray, parity: str = "none"):
        values = np.asarray(values)
        if values.shape != (grid.N,):
            raise ValueError(f"expected {grid.N} symbol values, got {values.shape}")
        if parity not in ("even", "odd", "none"):
            raise ValueError(f"unknown parity tag {parity!r}")
        if parity != "none":
            scale = float(np.max(np.abs(values))) or 1.0
            sign = 1.0 if parity == "even" else -1.0
            flipped = _reflect_modes(values)
            # the Nyquist mode has no -k partner on the lattice; skip it
            defect_arr = np.abs(values - sign * flipped)
            defect_arr[values.shape[0] // 2] = 0.0
            defect = float(np.max(defect_arr))
            if defect > _PARITY_TOL * scale:
                raise ValueError(
                    f"symbol fails declared {parity} parity: defect {defect:.3e}"
                )
        self.grid = grid
        self.values = values
        self.parity = parity

    @classmethod
    def from_symbol(cls, grid: PeriodicGrid, symbol, parity: str = "none") -> "Multiplier":
        return cls(grid, np.asarray(symbol(grid.k), dtype=complex), parity)

    def __mul__(self, other: "Multiplier") -> "Multiplier":
        _check_same_grid(self.grid, other.grid)
        return Multiplier(self.grid, self.values * other.values, "none")

    def __call__(self, f: Field) -> Field:
        return apply_multiplier(f, self)


def _reflect_modes(values: np.ndarray) -> np.ndarray:
    """values at -k in the same FFT layout (Nyquist maps to itself)."""
    out = np.empty_like(values)
    out[0] = values[0]
    out[1:] = values[:0:-1]
    return out


def _check_same_grid(a: PeriodicGrid, b: PeriodicGrid) -> None:
    if a != b:
        raise ValueError(f"grid mismatch: (L={a.L}, N={a.N}) vs (L={b.L}, N={b.N})")


def derivative_multiplier(grid: PeriodicGrid, order: int = 1) -> Multiplier:
    """(ik)^order with the Nyquist mode zeroed."""
    sym = (1j * grid.k) ** order
    sym[grid.nyquist_index] = 0.0
    parity = "odd" if order % 2 == 1 else "even"
    return Multiplier(grid, sym, parity)


def apply_multiplier(f: Field, m: Multiplier) -> Field:
    _check_same_grid(f.grid, m.grid)
    return Field.from_hat(f.grid, m.values * f.hat)


def sobolev_norm(f: Field, s: float) -> float:
    """H^s norm via the k-lattice quadrature (weight dk = 2pi/L)."""
    if s < 0:
        raise ValueError(f"Sobolev index must be nonnegative, got s={s}")
    w = (1.0 + f.grid.k**2) ** s
    return float(np.sqrt(np.sum(np.abs(f.hat) ** 2 * w) * f.grid.dk))


def l2_norm(f: Field) -> float:
    """The s=0 Sobolev norm, computed in real space (Parseval's other side)."""
    v = f.values
    return float(np.sqrt(np.sum(np.abs(v) ** 2) * f.grid.dx / (2.0 * np.pi)))


def integrate(f: Field) -> float:
    """Plain cell integral of the samples, integral f dx (exact for trig polys)."""
    return float(np.sum(f.real_values()) * f.grid.dx)


def pad_spectrum(hat: np.ndarray, N_to: int) -> np.ndarray:
    """Zero-pad an FFT-ordered spectrum from N to N_to modes (N_to >= N)."""
    N = hat.shape[0]
    half = N // 2
    out = np.zeros(N_to, dtype=complex)
    out[:half] = hat[:half]
    out[N_to - half :] = hat[half:]
    return out


def truncate_spectrum(hat: np.ndarray, N_to: int) -> np.ndarray:
    """Inverse of pad_spectrum: keep the lowest N_to modes."""
    N = hat.shape[0]
    half = N_to // 2
    out = np.empty(N_to, dtype=complex)
    out[:half] = hat[:half]
    out[half:] = hat[N - half :]
    return out


def convolve(a: Field, b: Field) -> np.ndarray:
    """Spectral convolution (a*b)(k) = sum_m a_hat(k-m) b_hat(m) dk, alias-free.

    Computed by 3/2-rule zero padding, so it equals the exact spectrum of the
    pointwise product a(x)b(x) on every retained mode except Nyquist (zeroed).
    The identity element is the spectrum of the constant 1 (value L/2pi at
    k=0): convolving with it returns the other operand.
    """
    _check_same_grid(a.grid, b.grid)
    grid = a.grid
    Npad = 3 * grid.N // 2
    if Npad % 2:
        Npad += 1
    scale_in = 2.0 * np.pi * Npad / grid.L
    av = np.fft.ifft(pad_spectrum(a.hat, Npad)) * scale_in
    bv = np.fft.ifft(pad_spectrum(b.hat, Npad)) * scale_in
    w_hat = np.fft.fft(av * bv) * (grid.L / (2.0 * np.pi * Npad))
    out = truncate_spectrum(w_hat, grid.N)
    out[grid.nyquist_index] = 0.0
    return out


def product(a: Field, b: Field) -> Field:
    """Alias-free pointwise product as a Field (real if both inputs are real)."""
    out = Field.from_hat(a.grid, convolve(a, b))
    if a.is_real() and b.is_real():
        v = out.values
        return Field(a.grid, v.real if np.iscomplexobj(v) else v)
    return out


def dealias(a: Field) -> Field:
    """2/3-rule truncation: zero modes with |j| > floor(N/3); idempotent."""
    grid = a.grid
    keep = grid.N // 3
    out = np.array(a.hat, dtype=complex, copy=True)
    j = np.rint(np.fft.fftfreq(grid.N, d=1.0 / grid.N)).astype(int)
    out[np.abs(j) > keep] = 0.0
    return Field.from_hat(grid, out)


# ---------------------------------------------------------------------------
# Snapshot files: JSON sidecar + flat little-endian float64 binary + CSV.
# ---------------------------------------------------------------------------


def save_snapshot(path_base: str | Path, t: float, fields: dict[str, Field]) -> Path:
    """Write <base>.json + <base>.bin (component-major float64, little-endian)."""
    if not fields:
        raise ValueError("snapshot needs at least one component")
    grids = {f.grid for f in fields.values()}
    if len(grids) != 1:
        raise ValueError("snapshot components must share a grid")
    grid = next(iter(grids))
    base = Path(path_base)
    components = list(fields.keys())
    header = {
        "L": grid.L,
        "N": grid.N,
        "t": float(t),
        "components": components,
        "convention": "paper-2pi",
    }
    base.parent.mkdir(parents=True, exist_ok=True)
    with open(base.with_suffix(".json"), "w") as fh:
        json.dump(header, fh, indent=1, sort_keys=True)
        fh.write("\n")
    flat = np.concatenate([fields[c].real_values().astype("<f8") for c in components])
    flat.tofile(base.with_suffix(".bin"))
    return base.with_suffix(".json")


def load_snapshot(path_base: str | Path) -> tuple[float, dict[str, Field]]:
    base = Path(path_base)
    with open(base.with_suffix(".json")) as fh:
        header = json.load(fh)
    grid = make_grid(header["L"], header["N"])
    raw = np.fromfile(base.with_suffix(".bin"), dtype="<f8")
    comps = header["components"]
    if raw.shape[0] != grid.N * len(comps):
        raise ValueError("snapshot binary length does not match header")
    fields = {
        name: Field(grid, raw[i * grid.N : (i + 1) * grid.N])
        for i, name in enumerate(comps)
    }
    return header["t"], fields


def snapshot_to_csv(path_base: str | Path, csv_path: str | Path) -> Path:
    """Export a snapshot to CSV with columns x, <component...>."""
    _, fields = load_snapshot(path_base)
    names = list(fields.keys())
    grid = next(iter(fields.values())).grid
    csv_path = Path(csv_path)
    with open(csv_path, "w") as fh:
        fh.write("x," + ",".join(names) + "\n")
        cols = [fields[n].real_values() for n in names]
        for i in range(grid.N):
            row = [f"{grid.x[i]:.17g}"] + [f"{c[i]:.17g}" for c in cols]
            fh.write(",".join(row) + "\n")
    return csv_path
