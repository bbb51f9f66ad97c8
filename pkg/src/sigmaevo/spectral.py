"""Periodic grids, spectral fields and Fourier-multiplier operators.

Transform convention
--------------------
The frequency view of a field is the *unscaled* forward DFT of its physical
samples (``numpy.fft.fftn``), in ``fftfreq`` order, so index k on an axis
corresponds to the angular frequency ``xi_k = 2 pi k / L`` with
k in {-N/2, ..., N/2 - 1}.  Multipliers do not depend on this scaling; norms
taken from the frequency side use Parseval in the form

    ||f||_{L^2}^2 = h^n sum |f_j|^2 = (L^n / N^(2n)) sum |F_k|^2 .
"""
from __future__ import annotations

import math
import struct
import sys
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.special import gammaln

from . import kernels


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on [-L/2, L/2)^n with N points per axis."""

    n: int
    N: int
    L: float

    def __post_init__(self):
        if self.n not in (1, 2, 3):
            raise ValueError(f"grid dimension must be 1, 2 or 3, got {self.n}")
        if self.N < 8 or self.N & (self.N - 1):
            raise ValueError(f"points per axis must be a power of two >= 8, got {self.N}")
        if not self.L > 0:
            raise ValueError(f"extent must be positive, got {self.L}")

    @property
    def h(self) -> float:
        return self.L / self.N

    @property
    def shape(self) -> tuple:
        return (self.N,) * self.n

    @property
    def cell_volume(self) -> float:
        return self.h ** self.n

    @cached_property
    def x(self) -> np.ndarray:
        return -0.5 * self.L + self.h * np.arange(self.N)

    @cached_property
    def coords(self) -> tuple:
        return tuple(np.meshgrid(*([self.x] * self.n), indexing="ij"))

    @cached_property
    def radius(self) -> np.ndarray:
        return np.sqrt(sum(c * c for c in self.coords))

    @cached_property
    def xi(self) -> np.ndarray:
        """Angular frequencies along one axis, ``fftfreq`` order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.N, d=self.h)

    @cached_property
    def xi_axes(self) -> tuple:
        return tuple(np.meshgrid(*([self.xi] * self.n), indexing="ij"))

    @cached_property
    def kmag(self) -> np.ndarray:
        """|xi| at every frequency node."""
        return np.sqrt(sum(k * k for k in self.xi_axes))

    @cached_property
    def kmax(self) -> float:
        return np.pi * self.N / self.L

    def mirror(self, values: np.ndarray, axis: int) -> np.ndarray:
        """Reflect samples through x_axis -> -x_axis (index j -> N - j mod N)."""
        return np.roll(np.flip(values, axis=axis), 1, axis=axis)


class SpectralField:
    """Samples on a :class:`Grid` with lazily synchronised physical and frequency views."""

    __slots__ = ("grid", "_values", "_freq")

    def __init__(self, grid: Grid, values=None, freq=None):
        if (values is None) == (freq is None):
            raise ValueError("give exactly one of values or freq")
        self.grid = grid
        self._values = None if values is None else np.asarray(values, dtype=np.complex128)
        self._freq = None if freq is None else np.asarray(freq, dtype=np.complex128)
        arr = self._values if self._values is not None else self._freq
        if arr.shape != grid.shape:
            raise ValueError(f"field shape {arr.shape} does not match grid {grid.shape}")

    @classmethod
    def from_function(cls, grid: Grid, func) -> "SpectralField":
        return cls(grid, values=func(*grid.coords))

    @classmethod
    def zeros(cls, grid: Grid) -> "SpectralField":
        return cls(grid, values=np.zeros(grid.shape, dtype=np.complex128))

    @property
    def values(self) -> np.ndarray:
        if self._values is None:
            self._values = np.fft.ifftn(self._freq)
        return self._values

    @property
    def freq(self) -> np.ndarray:
        if self._freq is None:
            self._freq = np.fft.fftn(self._values)
        return self._freq

    @property
    def real(self) -> np.ndarray:
        return self.values.real

    def imag_residue(self) -> float:
        """max |Im u| / max |u| in physical space (0 for the zero field)."""
        v = self.values
        peak = np.max(np.abs(v))
        return 0.0 if peak == 0 else float(np.max(np.abs(v.imag)) / peak)

    def __add__(self, other):
        return SpectralField(self.grid, values=self.values + other.values)

    def __sub__(self, other):
        return SpectralField(self.grid, values=self.values - other.values)

    def __mul__(self, c):
        return SpectralField(self.grid, values=self.values * c)

    __rmul__ = __mul__

    def __repr__(self):
        return f"SpectralField(n={self.grid.n}, N={self.grid.N}, L={self.grid.L})"


def apply_multiplier(f: SpectralField, symbol, zero_mode=None) -> SpectralField:
    """Multiply the frequency data of ``f`` by ``symbol(kmag, xi_axes)``.

    ``symbol`` may also be a precomputed array on the frequency grid.  When
    ``zero_mode`` is given the symbol is not evaluated at xi = 0 and that
    coefficient of the output is set to ``zero_mode`` times the input mean
    coefficient (``0.0`` projects the mean out).
    """
    grid = f.grid
    if callable(symbol):
        if zero_mode is None:
            s = np.asarray(symbol(grid.kmag, grid.xi_axes))
        else:
            km = grid.kmag.copy()
            km.flat[0] = 1.0  # placeholder, overwritten below
            with np.errstate(divide="ignore", invalid="ignore"):
                s = np.array(symbol(km, grid.xi_axes), dtype=np.complex128)
    else:
        s = np.array(symbol, dtype=np.complex128)
    s = np.broadcast_to(s, grid.shape).astype(np.complex128, copy=True)
    if zero_mode is not None:
        s.flat[0] = zero_mode
    if not np.all(np.isfinite(s)):
        bad = np.argwhere(~np.isfinite(s))[0]
        raise FloatingPointError(f"symbol is not finite at frequency index {tuple(bad)}")
    return SpectralField(grid, freq=f.freq * s)


def fractional_laplacian(f: SpectralField, s: float) -> SpectralField:
    """(-Delta)^s via the symbol |xi|^(2s); the mean maps to zero."""
    if not s > 0:
        raise ValueError(f"order s must be positive, got {s}")
    return apply_multiplier(f, f.grid.kmag ** (2.0 * s))


def riesz_symbol(grid: Grid, alpha: float, zero_mode: str = "project") -> np.ndarray:
    """|xi|^(-alpha) on the grid with the zero mode fixed by ``zero_mode``.

    ``"project"`` sets it to 0 (removes the mean); ``"retain"`` sets it to 1,
    which is the alpha -> 0 limit of the symbol at every other frequency.
    """
    km = grid.kmag.copy()
    km.flat[0] = 1.0
    s = km ** (-alpha)
    if zero_mode == "project":
        s.flat[0] = 0.0
    elif zero_mode == "retain":
        s.flat[0] = 1.0
    else:
        raise ValueError(f"zero_mode must be 'project' or 'retain', got {zero_mode!r}")
    return s


def riesz_potential(f: SpectralField, alpha: float, zero_mode: str = "project") -> SpectralField:
    """Normalized Riesz potential, the Fourier multiplier |xi|^(-alpha).

    The normalization constant of the physical-space kernel is *not* part of
    the symbol; see :func:`normalization_constant`.
    """
    n = f.grid.n
    if not 0 < alpha < n:
        raise ValueError(f"alpha must lie in (0, n) = (0, {n}), got {alpha}")
    return apply_multiplier(f, riesz_symbol(f.grid, alpha, zero_mode))


def normalization_constant(n, alpha) -> float:
    """Gamma((n-alpha)/2) / (pi^(n/2) 2^alpha Gamma(alpha/2)).

    This is the constant c for which c |x|^(alpha-n) has Fourier transform
    |xi|^(-alpha).
    """
    if not 0 < alpha < n:
        raise ValueError(f"alpha must lie in (0, n), got alpha={alpha}, n={n}")
    log_c = gammaln((n - alpha) / 2) - gammaln(alpha / 2) - 0.5 * n * math.log(math.pi) - alpha * math.log(2.0)
    return math.exp(log_c)


def hermitian_expand(half: np.ndarray, shape) -> np.ndarray:
    """Full spectrum of a real field from its ``rfftn`` half (last axis 0..N/2)."""
    N = shape[-1]
    full = np.empty(shape, dtype=np.complex128)
    h = N // 2 + 1
    full[..., :h] = half
    # F[k] = conj(F[-k]); on the last axis columns N/2+1..N-1 mirror columns N/2-1..1
    mirrored = half[..., N // 2 - 1:0:-1]
    for axis in range(len(shape) - 1):
        mirrored = np.roll(np.flip(mirrored, axis=axis), 1, axis=axis)
    full[..., h:] = np.conj(mirrored)
    return full


def lp_norm(f, p: float, grid: Grid | None = None) -> float:
    """Riemann-sum L^p norm (sum |f|^p h^n)^(1/p); max norm for p = inf.

    ``f`` is a :class:`SpectralField` or a raw array together with ``grid``.
    """
    if isinstance(f, SpectralField):
        grid, values = f.grid, f.values
    else:
        values = np.asarray(f, dtype=np.complex128)
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if math.isinf(p):
        return float(np.max(np.abs(values)))
    flat = np.ascontiguousarray(values).ravel()
    total = kernels.abs_pow_sum(flat, float(p))
    return (total * grid.cell_volume) ** (1.0 / p)


def l2_from_freq(freq: np.ndarray, grid: Grid, weight=None) -> float:
    """L^2 norm via Parseval, optionally with a real weight on |F|^2."""
    power = np.abs(freq) ** 2
    if weight is not None:
        power = power * weight
    return math.sqrt(float(np.sum(power)) * grid.L ** grid.n / grid.N ** (2 * grid.n))


def sobolev_seminorm(f: SpectralField, s: float) -> float:
    """||(-Delta)^(s/2) f||_{L^2} computed on the frequency side."""
    return l2_from_freq(f.freq, f.grid, f.grid.kmag ** (2.0 * s))


def dealias_mask(grid: Grid, fraction: float = 2.0 / 3.0) -> np.ndarray:
    """Spherical truncation keeping |xi| <= fraction * kmax."""
    return grid.kmag <= fraction * grid.kmax * (1.0 + 1e-12)


def boundary_density(f: SpectralField, layer: int = 1) -> float:
    """max |f| over the outermost ``layer`` cells of the box relative to max |f|."""
    v = np.abs(f.values)
    peak = v.max()
    if peak == 0:
        return 0.0
    mask = np.zeros(v.shape, dtype=bool)
    for axis in range(v.ndim):
        idx = [slice(None)] * v.ndim
        idx[axis] = slice(0, layer)
        mask[tuple(idx)] = True
        idx[axis] = slice(v.shape[axis] - layer, None)
        mask[tuple(idx)] = True
    return float(v[mask].max() / peak)


# --- snapshot format -----------------------------------------------------------
#
# offset size  field
#      0    4  magic b"SGVF"
#      4    1  format version (1)
#      5    1  endianness tag, ASCII b"<" (little) or b">" (big)
#      6    1  sample width in bytes: 8 (complex64) or 16 (complex128)
#      7    1  dimension n
#      8    4  N, uint32
#     12    8  L, float64
#     20    8  time, float64
#     28  ...  N**n complex samples, row-major (C order) over axes, physical space
#
# Every multi-byte field, header and samples alike, uses the tagged byte order.

SNAPSHOT_MAGIC = b"SGVF"
SNAPSHOT_VERSION = 1


def write_snapshot(path, field: SpectralField, time: float, dtype=np.complex128, byteorder: str = "<"):
    if byteorder not in ("<", ">"):
        raise ValueError("byteorder must be '<' or '>'")
    dtype = np.dtype(dtype)
    if dtype not in (np.dtype(np.complex64), np.dtype(np.complex128)):
        raise ValueError("snapshot samples must be complex64 or complex128")
    g = field.grid
    header = SNAPSHOT_MAGIC + struct.pack(
        byteorder + "BcBBIdd", SNAPSHOT_VERSION, byteorder.encode(), dtype.itemsize, g.n, g.N, float(g.L), float(time)
    )
    samples = np.ascontiguousarray(field.values, dtype=dtype.newbyteorder(byteorder))
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(samples.tobytes(order="C"))


def read_snapshot(path):
    """Return ``(field, time)`` from a snapshot file."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:4] != SNAPSHOT_MAGIC:
        raise ValueError(f"{path}: not a snapshot file")
    tag = raw[5:6].decode()
    if tag not in ("<", ">"):
        raise ValueError(f"{path}: bad endianness tag {tag!r}")
    version, _, width, n, N, L, time = struct.unpack(tag + "BcBBIdd", raw[4:28])
    if version != SNAPSHOT_VERSION:
        raise ValueError(f"{path}: unsupported snapshot version {version}")
    dtype = np.dtype({8: np.complex64, 16: np.complex128}[width]).newbyteorder(tag)
    grid = Grid(n, N, L)
    count = N ** n
    data = np.frombuffer(raw, dtype=dtype, count=count, offset=28)
    if data.size != count:
        raise ValueError(f"{path}: truncated sample block")
    values = data.astype(np.complex128).reshape(grid.shape)
    return SpectralField(grid, values=values), time


NATIVE_BYTEORDER = "<" if sys.byteorder == "little" else ">"
