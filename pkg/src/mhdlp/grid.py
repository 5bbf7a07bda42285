"""Periodic-box grid descriptor with cached spectral machinery.

The grid lives on the torus [0, period)^dims with n uniformly spaced points
per axis.  All wavenumber bookkeeping (integer mode indices, physical
wavenumbers, the 2/3-rule dealiasing mask) is computed once here and shared
by every field operation.
"""

import os

import numpy as np

TWO_PI = 2.0 * np.pi


def fft_workers() -> int:
    """Worker count for FFT calls; capped by the MHD_THREADS env var."""
    raw = os.environ.get("MHD_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


class Grid:
    """Uniform periodic grid on [0, period)^dims.

    Parameters
    ----------
    dims : int
        Spatial dimension, 2 or 3.
    n : int
        Points per axis; must be a power of two and at least 8.
    period : float
        Box edge length (same along every axis).  Defaults to 2*pi so that
        the wavenumbers are the integers.

    Notes
    -----
    Mode indices per axis run over [-n/2, n/2) in FFT order; physical
    wavenumbers are those indices times 2*pi/period.  Nonlinear products
    formed on this grid must be passed through the 2/3-rule mask
    (``dealias_mask``) to stay alias-free.
    """

    def __init__(self, dims: int, n: int, period: float = TWO_PI):
        if dims not in (2, 3):
            raise ValueError(f"dims must be 2 or 3, got {dims}")
        if n < 8 or (n & (n - 1)) != 0:
            raise ValueError(f"n must be a power of two >= 8, got {n}")
        if not (period > 0.0 and np.isfinite(period)):
            raise ValueError(f"period must be positive and finite, got {period}")

        self.dims = int(dims)
        self.n = int(n)
        self.period = float(period)
        self.shape = (self.n,) * self.dims
        self.size = self.n**self.dims
        self.volume = self.period**self.dims
        self.dx = self.period / self.n
        self.k_unit = TWO_PI / self.period

        # Integer mode indices in FFT order: 0, 1, ..., n/2-1, -n/2, ..., -1.
        idx = np.fft.fftfreq(self.n, d=1.0 / self.n)
        mesh = np.meshgrid(*(idx,) * self.dims, indexing="ij")
        self.index_vectors = np.stack(mesh)  # (dims, *shape)
        self.k_vectors = self.k_unit * self.index_vectors
        self.k_squared = np.sum(self.k_vectors**2, axis=0)
        self.k_mag = np.sqrt(self.k_squared)

        inv = np.zeros_like(self.k_squared)
        nonzero = self.k_squared > 0.0
        inv[nonzero] = 1.0 / self.k_squared[nonzero]
        self.inv_k_squared = inv  # zero mode mapped to 0

        # 2/3 rule: drop every mode with any |index_i| >= n/3.
        self.dealias_mask = np.all(np.abs(self.index_vectors) < self.n / 3.0, axis=0)
        self.k_dealias = (self.n / 3.0) * self.k_unit

        x1 = np.arange(self.n) * self.dx
        self.coords = np.stack(np.meshgrid(*(x1,) * self.dims, indexing="ij"))

    def __eq__(self, other):
        return (
            isinstance(other, Grid)
            and self.dims == other.dims
            and self.n == other.n
            and self.period == other.period
        )

    def __hash__(self):
        return hash((self.dims, self.n, self.period))

    def __repr__(self):
        return f"Grid(dims={self.dims}, n={self.n}, period={self.period:.6g})"
