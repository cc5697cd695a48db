"""Periodic grid functions on the torus [0, 2pi) with spectral calculus.

Functions are sampled at the uniform nodes x_j = 2*pi*j/N, j = 0..N-1 (the
endpoint x = 2*pi is identified with x = 0 and not stored). All integrals
carry the 1/(2*pi) normalisation, so ``average(one) == 1`` and
``inner(sin, sin) == 1/2``.

The anti-derivative operator is the mean-zero primitive: division by ik in
Fourier space on mean-zero input, the literal cumulative integral minus its
average otherwise.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import GridMismatchError, ValidationError

TWO_PI = 2.0 * np.pi

#: Inputs whose average is below this threshold take the exact spectral
#: anti-derivative path (division by ik).
MEAN_ZERO_TOL = 1e-13

_MIN_N = 8


def nodes(n: int) -> np.ndarray:
    """Grid nodes x_j = 2*pi*j/n, j = 0..n-1."""
    return np.arange(n) * (TWO_PI / n)


def wavenumbers(n: int) -> np.ndarray:
    """Integer Fourier modes in numpy FFT ordering: 0, 1, ..., -n/2, ..., -1."""
    return np.fft.fftfreq(n, d=1.0 / n).astype(np.int64)


def _validate_n(n: int) -> None:
    if n < _MIN_N or n % 2 != 0:
        raise ValidationError(
            f"grid resolution must be an even integer >= {_MIN_N}, got {n}"
        )


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Immutable samples of a 2*pi-periodic function on a uniform grid."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 1:
            raise ValidationError(f"samples must be one-dimensional, got shape {v.shape}")
        _validate_n(v.shape[0])
        dtype = np.complex128 if np.iscomplexobj(v) else np.float64
        v = np.array(v, dtype=dtype)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    # -- construction -------------------------------------------------
    @classmethod
    def zeros(cls, n: int) -> "GridFunction":
        _validate_n(n)
        return cls(np.zeros(n))

    @classmethod
    def constant(cls, value: float, n: int) -> "GridFunction":
        _validate_n(n)
        return cls(np.full(n, value))

    @classmethod
    def from_function(cls, fn, n: int) -> "GridFunction":
        """Sample a callable of x on the n-point grid."""
        _validate_n(n)
        return cls(np.asarray(fn(nodes(n))))

    # -- basic queries -------------------------------------------------
    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def x(self) -> np.ndarray:
        return nodes(self.n)

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.values)

    def real(self) -> "GridFunction":
        return GridFunction(self.values.real)

    # -- arithmetic ------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, GridFunction):
            if other.n != self.n:
                raise GridMismatchError(
                    f"incompatible grids: N={self.n} vs N={other.n}"
                )
            return other.values
        return other

    def __add__(self, other):
        return GridFunction(self.values + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return GridFunction(self.values - self._coerce(other))

    def __rsub__(self, other):
        return GridFunction(self._coerce(other) - self.values)

    def __mul__(self, other):
        return GridFunction(self.values * self._coerce(other))

    __rmul__ = __mul__

    def __neg__(self):
        return GridFunction(-self.values)

    def __repr__(self) -> str:
        kind = "complex" if self.is_complex else "real"
        return f"GridFunction(n={self.n}, {kind})"

    # -- serialization -----------------------------------------------------
    def to_csv(self, path) -> None:
        """Write rows (x_j, value). Real-valued functions only."""
        if self.is_complex:
            raise ValidationError("CSV serialization is defined for real samples only")
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "value"])
            for xj, vj in zip(self.x, self.values):
                writer.writerow([format(xj, ".17g"), format(vj, ".17g")])

    @classmethod
    def from_csv(cls, path) -> "GridFunction":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if len(header) < 2:
                raise ValidationError(f"expected (x, value) columns in {path}")
            vals = [float(row[1]) for row in reader if row]
        return cls(np.asarray(vals))

    def to_binary(self, path) -> None:
        """Compact dump: little-endian int64 N followed by N float64 samples."""
        if self.is_complex:
            raise ValidationError("binary serialization is defined for real samples only")
        with open(path, "wb") as fh:
            fh.write(struct.pack("<q", self.n))
            fh.write(struct.pack(f"<{self.n}d", *self.values))

    @classmethod
    def from_binary(cls, path) -> "GridFunction":
        with open(path, "rb") as fh:
            (n,) = struct.unpack("<q", fh.read(8))
            _validate_n(n)
            raw = fh.read(8 * n)
            if len(raw) != 8 * n:
                raise ValidationError(f"truncated binary dump in {path}")
            return cls(np.asarray(struct.unpack(f"<{n}d", raw)))


@dataclass(frozen=True, eq=False)
class FourierCoeffs:
    """Fourier coefficients h_hat(k) = (1/2pi) int h e^{-ikx} dx, FFT ordering."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(np.asarray(self.coeffs), dtype=np.complex128)
        _validate_n(c.shape[0])
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def n(self) -> int:
        return self.coeffs.shape[0]

    @property
    def k(self) -> np.ndarray:
        return wavenumbers(self.n)

    def __getitem__(self, k: int) -> complex:
        if not -self.n // 2 <= k < self.n // 2:
            raise ValidationError(f"mode {k} outside resolved range for n={self.n}")
        return complex(self.coeffs[k % self.n])

    def to_grid(self) -> GridFunction:
        vals = np.fft.ifft(self.coeffs) * self.n
        scale = max(1.0, float(np.max(np.abs(vals))))
        if np.max(np.abs(vals.imag)) < 1e-12 * scale:
            vals = vals.real
        return GridFunction(vals)


def fourier(f: GridFunction) -> FourierCoeffs:
    return FourierCoeffs(np.fft.fft(f.values) / f.n)


def average(f: GridFunction):
    """(1/2pi) int f dx; on the uniform periodic grid this is the sample mean."""
    m = np.mean(f.values)
    return complex(m) if f.is_complex else float(m)


def inner(f: GridFunction, g: GridFunction):
    """<f, g> = (1/2pi) int f conj(g) dx via the grid mean."""
    if f.n != g.n:
        raise GridMismatchError(f"incompatible grids: N={f.n} vs N={g.n}")
    val = np.vdot(g.values, f.values) / f.n
    if f.is_complex or g.is_complex:
        return complex(val)
    return float(val.real)


def norm_sq(f: GridFunction) -> float:
    return float((np.vdot(f.values, f.values) / f.n).real)


def norm(f: GridFunction) -> float:
    return float(np.sqrt(norm_sq(f)))


def derivative(f: GridFunction) -> GridFunction:
    """Spectral derivative: multiply by ik; the Nyquist mode is zeroed."""
    c = np.fft.fft(f.values)
    k = wavenumbers(f.n)
    c *= 1j * k
    c[f.n // 2] = 0.0
    out = np.fft.ifft(c)
    return GridFunction(out.real if not f.is_complex else out)


def antiderivative(f: GridFunction) -> GridFunction:
    """Mean-zero primitive of f.

    Mean-zero input takes the exact Fourier route (divide by ik, zero the
    k = 0 and Nyquist modes); otherwise the cumulative trapezoid integral
    minus its grid average is returned, which realises the primitive of a
    non-periodic ramp pointwise at the nodes.
    """
    if abs(average(f)) < MEAN_ZERO_TOL:
        c = np.fft.fft(f.values)
        k = wavenumbers(f.n)
        c[1:] /= 1j * k[1:]
        c[0] = 0.0
        c[f.n // 2] = 0.0
        out = np.fft.ifft(c)
        return GridFunction(out.real if not f.is_complex else out)
    ext = np.concatenate([f.values, f.values[:1]])
    cum = cumulative_trapezoid(ext, dx=TWO_PI / f.n, initial=0.0)[: f.n]
    return GridFunction(cum - np.mean(cum))


def random_band_limited(
    n: int,
    seed=None,
    max_mode: int | None = None,
    zero_mean: bool = False,
) -> GridFunction:
    """Seeded random real trigonometric polynomial with modes |k| <= max_mode.

    Amplitudes are uniform on [-1, 1]; max_mode defaults to n // 8.
    """
    _validate_n(n)
    rng = np.random.default_rng(seed)
    kmax = n // 8 if max_mode is None else int(max_mode)
    if not 1 <= kmax <= n // 2 - 1:
        raise ValidationError(f"max_mode must lie in [1, n/2-1], got {kmax}")
    x = nodes(n)
    vals = np.zeros(n)
    if not zero_mean:
        vals += rng.uniform(-1.0, 1.0)
    for k in range(1, kmax + 1):
        a, b = rng.uniform(-1.0, 1.0, size=2)
        vals += a * np.cos(k * x) + b * np.sin(k * x)
    return GridFunction(vals)
