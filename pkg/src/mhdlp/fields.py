"""Spectral fields on the periodic box and the calculus acting on them.

A field is stored as complex Fourier amplitudes: ``data[c, k]`` multiplies
``exp(i k.x)``, so a single unit mode has amplitude exactly 1.  Real-valued
fields keep the conjugate symmetry ``data[c, -k] == conj(data[c, k])``;
every operation here preserves it.

Pointwise products come in two flavours.  ``multiply`` forms the product on
the native grid and applies the 2/3-rule mask (the solver path), while
``multiply_padded`` zero-pads to a 3/2 grid so that products of dealiased
inputs are exact on the retained modes (the analysis path, where identities
are checked to near machine precision).
"""

import math

import numpy as np
from scipy import fft as sfft

from .grid import Grid, fft_workers


class SpectralField:
    """Real field on a :class:`Grid`, held as complex Fourier amplitudes.

    ``data`` has shape ``(ncomp, *grid.shape)``: ncomp is 1 for scalars,
    ``grid.dims`` for vector fields, and dims*dims for Jacobians.  Instances
    are treated as immutable values; operations return new fields.
    """

    __slots__ = ("grid", "data", "divergence_free")

    def __init__(self, grid: Grid, data: np.ndarray, divergence_free: bool = False):
        data = np.asarray(data)
        if data.ndim == grid.dims:
            data = data[np.newaxis]
        if data.shape[1:] != grid.shape:
            raise ValueError(f"data shape {data.shape} does not match grid {grid.shape}")
        if data.dtype != np.complex128:
            data = data.astype(np.complex128)
        self.grid = grid
        self.data = data
        self.divergence_free = bool(divergence_free)

    @property
    def ncomp(self) -> int:
        return self.data.shape[0]

    @property
    def is_vector(self) -> bool:
        return self.ncomp == self.grid.dims

    def copy(self) -> "SpectralField":
        return SpectralField(self.grid, self.data.copy(), self.divergence_free)

    def __add__(self, other):
        _check_compatible(self, other)
        return SpectralField(self.grid, self.data + other.data,
                             self.divergence_free and other.divergence_free)

    def __sub__(self, other):
        _check_compatible(self, other)
        return SpectralField(self.grid, self.data - other.data,
                             self.divergence_free and other.divergence_free)

    def __mul__(self, scalar):
        return SpectralField(self.grid, self.data * scalar, self.divergence_free)

    __rmul__ = __mul__

    def __neg__(self):
        return SpectralField(self.grid, -self.data, self.divergence_free)

    def __repr__(self):
        kind = "vector" if self.is_vector else f"{self.ncomp}-comp"
        return f"SpectralField({kind}, {self.grid!r})"


def _check_compatible(f: SpectralField, g: SpectralField) -> None:
    if f.grid != g.grid:
        raise ValueError("fields live on different grids")
    if f.ncomp != g.ncomp:
        raise ValueError(f"component mismatch: {f.ncomp} vs {g.ncomp}")


def _spatial_axes(grid: Grid):
    return tuple(range(1, grid.dims + 1))


def from_physical(grid: Grid, values: np.ndarray, divergence_free: bool = False) -> SpectralField:
    """Build a field from real samples of shape (*grid.shape) or (ncomp, *grid.shape)."""
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == grid.dims:
        values = values[np.newaxis]
    if values.shape[1:] != grid.shape:
        raise ValueError(f"sample shape {values.shape} does not match grid {grid.shape}")
    coeff = sfft.fftn(values, axes=_spatial_axes(grid), workers=fft_workers())
    coeff /= grid.size  # exact: size is a power of two
    return SpectralField(grid, coeff, divergence_free)


def to_physical(f: SpectralField) -> np.ndarray:
    """Real samples of shape (ncomp, *grid.shape)."""
    out = sfft.ifftn(f.data * f.grid.size, axes=_spatial_axes(f.grid), workers=fft_workers())
    return np.ascontiguousarray(out.real)


def zero_field(grid: Grid, ncomp: int = 1) -> SpectralField:
    return SpectralField(grid, np.zeros((ncomp,) + grid.shape, dtype=np.complex128),
                         divergence_free=True)


def constant_field(grid: Grid, values) -> SpectralField:
    """Spatially constant field with the given component values."""
    values = np.atleast_1d(np.asarray(values, dtype=np.float64))
    data = np.zeros((values.size,) + grid.shape, dtype=np.complex128)
    for c, v in enumerate(values):
        data[(c,) + (0,) * grid.dims] = v
    return SpectralField(grid, data, divergence_free=True)


def symmetry_error(f: SpectralField) -> float:
    """Max |u_hat(k) - conj(u_hat(-k))|: 0 for genuinely real fields."""
    rev = f.data
    for ax in _spatial_axes(f.grid):
        rev = np.roll(np.flip(rev, axis=ax), 1, axis=ax)
    return float(np.max(np.abs(f.data - np.conj(rev))))


def divergence_residual(f: SpectralField) -> float:
    """Normalized max of |k . u_hat(k)| over modes; ~1e-16 when solenoidal."""
    if not f.is_vector:
        raise ValueError("divergence_residual needs a vector field")
    g = f.grid
    div = np.einsum("c...,c...->...", g.k_vectors, f.data)
    peak = np.max(np.abs(f.data))
    if peak == 0.0:
        return 0.0
    scale = np.where(g.k_mag > 0, g.k_mag, 1.0) * peak
    return float(np.max(np.abs(div) / scale))


# ---------------------------------------------------------------------------
# differential operators (exact Fourier multipliers)
# ---------------------------------------------------------------------------

def gradient(f: SpectralField) -> SpectralField:
    """Gradient of a scalar field, returned as a dims-component field."""
    if f.ncomp != 1:
        raise ValueError("gradient acts on scalar fields; use jacobian for vectors")
    g = f.grid
    data = 1j * g.k_vectors * f.data[0]
    return SpectralField(g, data)


def jacobian(f: SpectralField) -> SpectralField:
    """All partial derivatives d_i f_c, flattened to ncomp*dims components."""
    g = f.grid
    out = np.empty((f.ncomp * g.dims,) + g.shape, dtype=np.complex128)
    for c in range(f.ncomp):
        for i in range(g.dims):
            out[c * g.dims + i] = 1j * g.k_vectors[i] * f.data[c]
    return SpectralField(g, out)


def derivative(f: SpectralField, alpha) -> SpectralField:
    """Mixed derivative d^alpha f for a multi-index alpha (one entry per axis)."""
    g = f.grid
    alpha = tuple(int(a) for a in alpha)
    if len(alpha) != g.dims or any(a < 0 for a in alpha):
        raise ValueError(f"alpha must be {g.dims} non-negative integers, got {alpha}")
    mult = np.ones(g.shape, dtype=np.complex128)
    for i, a in enumerate(alpha):
        if a:
            mult = mult * (1j * g.k_vectors[i]) ** a
    return SpectralField(g, f.data * mult, f.divergence_free)


def divergence(f: SpectralField) -> SpectralField:
    if not f.is_vector:
        raise ValueError("divergence needs a vector field")
    g = f.grid
    div = np.einsum("c...,c...->...", 1j * g.k_vectors, f.data)
    return SpectralField(g, div[np.newaxis])


def curl(f: SpectralField) -> SpectralField:
    """Curl of a vector field.

    In 3D returns the vector curl; in 2D returns the scalar vorticity
    d_x f_y - d_y f_x as a one-component field.
    """
    if not f.is_vector:
        raise ValueError("curl needs a vector field")
    g = f.grid
    k = g.k_vectors
    if g.dims == 2:
        w = 1j * (k[0] * f.data[1] - k[1] * f.data[0])
        return SpectralField(g, w[np.newaxis])
    out = np.empty_like(f.data)
    out[0] = 1j * (k[1] * f.data[2] - k[2] * f.data[1])
    out[1] = 1j * (k[2] * f.data[0] - k[0] * f.data[2])
    out[2] = 1j * (k[0] * f.data[1] - k[1] * f.data[0])
    return SpectralField(g, out, divergence_free=True)


def laplacian(f: SpectralField) -> SpectralField:
    return SpectralField(f.grid, -f.grid.k_squared * f.data, f.divergence_free)


def leray_project(f: SpectralField) -> SpectralField:
    """Project onto divergence-free fields: u_hat - k (k.u_hat) / |k|^2.

    The zero mode is untouched and pure gradients are annihilated; the
    projector is idempotent.
    """
    if not f.is_vector:
        raise ValueError("leray_project needs a vector field")
    g = f.grid
    kdotu = np.einsum("c...,c...->...", g.k_vectors, f.data)
    data = f.data - g.k_vectors * (kdotu * g.inv_k_squared)
    return SpectralField(g, data, divergence_free=True)


def dealias(f: SpectralField) -> SpectralField:
    """Zero every mode with any |index_i| >= n/3 (idempotent)."""
    return SpectralField(f.grid, f.data * f.grid.dealias_mask, f.divergence_free)


# ---------------------------------------------------------------------------
# norms and pairings
# ---------------------------------------------------------------------------

def pointwise_magnitude(f: SpectralField) -> np.ndarray:
    """Euclidean magnitude over components, sampled on the grid."""
    phys = to_physical(f)
    if f.ncomp == 1:
        return np.abs(phys[0])
    return np.sqrt(np.sum(phys**2, axis=0))


def lp_norm(f: SpectralField, p) -> float:
    """L^p norm by uniform-grid quadrature; p = inf gives the grid max.

    Vector fields are measured through their pointwise Euclidean magnitude.
    Exact for p = 2 (trigonometric quadrature); a documented sampling
    approximation for other p.
    """
    p = float(p)
    if p < 1.0:
        raise ValueError(f"p must satisfy p >= 1, got {p}")
    mag = pointwise_magnitude(f)
    if math.isinf(p):
        return float(np.max(mag))
    vol = f.grid.volume
    return float((np.mean(mag**p) * vol) ** (1.0 / p))


def l2_norm_spectral(f: SpectralField) -> float:
    """L^2 norm via Parseval on the coefficients (no transform)."""
    return math.sqrt(f.grid.volume * float(np.sum(np.abs(f.data) ** 2)))


def inner_product(f: SpectralField, g: SpectralField) -> float:
    """L^2 pairing integral f.g dx, exact via Parseval."""
    _check_compatible(f, g)
    return float(f.grid.volume * np.real(np.sum(f.data * np.conj(g.data))))


def grad_l2_norm_squared(f: SpectralField) -> float:
    """||grad f||_2^2 summed over components, via Parseval."""
    return float(f.grid.volume * np.sum(f.grid.k_squared * np.abs(f.data) ** 2))


# ---------------------------------------------------------------------------
# products
# ---------------------------------------------------------------------------

def _broadcast_pair(f: SpectralField, g: SpectralField):
    if f.grid != g.grid:
        raise ValueError("fields live on different grids")
    if f.ncomp == g.ncomp:
        return f, g
    if f.ncomp == 1 or g.ncomp == 1:
        return f, g
    raise ValueError(f"cannot broadcast {f.ncomp} against {g.ncomp} components")


def multiply(f: SpectralField, g: SpectralField) -> SpectralField:
    """Pointwise product on the native grid, 2/3-dealiased.

    Alias-free provided both inputs are already dealiased (the solver keeps
    its states that way).
    """
    f, g = _broadcast_pair(f, g)
    prod = to_physical(f) * to_physical(g)
    return dealias(from_physical(f.grid, prod))


def _pad_indices(n: int, m: int):
    """Index mapping that embeds FFT-ordered modes of size n into size m."""
    half = n // 2
    src = np.concatenate([np.arange(0, half), np.arange(half, n)])
    dst = np.concatenate([np.arange(0, half), np.arange(m - half, m)])
    return src, dst


def _embed(data: np.ndarray, grid: Grid, m: int) -> np.ndarray:
    src, dst = _pad_indices(grid.n, m)
    out = np.zeros(data.shape[:1] + (m,) * grid.dims, dtype=np.complex128)
    index_out = np.ix_(np.arange(data.shape[0]), *(dst,) * grid.dims)
    index_in = np.ix_(np.arange(data.shape[0]), *(src,) * grid.dims)
    out[index_out] = data[index_in]
    return out


def _extract(data: np.ndarray, grid: Grid, m: int) -> np.ndarray:
    src, dst = _pad_indices(grid.n, m)
    index_out = np.ix_(np.arange(data.shape[0]), *(dst,) * grid.dims)
    out = data[index_out]
    return np.ascontiguousarray(out)


def multiply_padded(f: SpectralField, g: SpectralField) -> SpectralField:
    """Pointwise product via a 3/2 zero-padded grid.

    Exact (to roundoff) on every retained mode when both inputs are
    band-limited to |index| < n/3; used wherever identities are verified
    rather than time-stepped.
    """
    f, g = _broadcast_pair(f, g)
    grid = f.grid
    m = (3 * grid.n) // 2
    axes = tuple(range(1, grid.dims + 1))
    scale = m**grid.dims
    fp = sfft.ifftn(_embed(f.data, grid, m) * scale, axes=axes, workers=fft_workers()).real
    gp = sfft.ifftn(_embed(g.data, grid, m) * scale, axes=axes, workers=fft_workers()).real
    prod = sfft.fftn(fp * gp, axes=axes, workers=fft_workers()) / scale
    return SpectralField(grid, _extract(prod, grid, m))


def dot_product_padded(u: SpectralField, v: SpectralField) -> SpectralField:
    """Pointwise u.v over components, via the padded product."""
    _check_compatible(u, v)
    acc = None
    for c in range(u.ncomp):
        term = multiply_padded(_component(u, c), _component(v, c))
        acc = term if acc is None else acc + term
    return acc


def _component(f: SpectralField, c: int) -> SpectralField:
    return SpectralField(f.grid, f.data[c : c + 1])


def advect_padded(u: SpectralField, f: SpectralField) -> SpectralField:
    """(u . grad) f with every product computed on the padded grid."""
    if not u.is_vector:
        raise ValueError("advecting velocity must be a vector field")
    g = u.grid
    out = np.zeros_like(f.data)
    for c in range(f.ncomp):
        for i in range(g.dims):
            df = SpectralField(g, (1j * g.k_vectors[i] * f.data[c])[np.newaxis])
            out[c] += multiply_padded(_component(u, i), df).data[0]
    return SpectralField(g, out)


def embed_field(f: SpectralField, fine: Grid) -> SpectralField:
    """Represent f exactly on a finer grid (same dims/period, larger n)."""
    coarse = f.grid
    if fine.dims != coarse.dims or fine.period != coarse.period:
        raise ValueError("grids must share dims and period")
    if fine.n < coarse.n:
        raise ValueError("target grid must be at least as fine")
    if fine.n == coarse.n:
        return f.copy()
    src, dst = _pad_indices(coarse.n, fine.n)
    out = np.zeros(f.data.shape[:1] + fine.shape, dtype=np.complex128)
    comps = np.arange(f.ncomp)
    out[np.ix_(comps, *(dst,) * coarse.dims)] = f.data[np.ix_(comps, *(src,) * coarse.dims)]
    return SpectralField(fine, out, f.divergence_free)


# ---------------------------------------------------------------------------
# random fields
# ---------------------------------------------------------------------------

def random_field(grid: Grid, rng: np.random.Generator, ncomp: int = 1,
                 k_lo: float = 0.0, k_hi: float | None = None) -> SpectralField:
    """White-noise field, optionally restricted to the shell k_lo < |k| <= k_hi."""
    phys = rng.standard_normal((ncomp,) + grid.shape)
    f = from_physical(grid, phys)
    data = f.data
    if k_hi is not None:
        data = data * (grid.k_mag <= k_hi)
    if k_lo > 0.0:
        data = data * (grid.k_mag > k_lo)
    else:
        data = data.copy()
        data[(slice(None),) + (0,) * grid.dims] = 0.0  # mean-free by default
    return SpectralField(grid, data)


def random_divergence_free(grid: Grid, rng: np.random.Generator,
                           k_lo: float = 0.0, k_hi: float | None = None,
                           rms: float = 1.0) -> SpectralField:
    """Random solenoidal vector field with prescribed root-mean-square value."""
    f = leray_project(random_field(grid, rng, grid.dims, k_lo, k_hi))
    cur = l2_norm_spectral(f) / math.sqrt(grid.volume)
    if cur > 0.0 and rms > 0.0:
        f = f * (rms / cur)
    return SpectralField(grid, f.data, divergence_free=True)
