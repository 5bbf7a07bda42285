"""Dyadic frequency decomposition: cutoff profiles, band filters, Besov norms.

The radial pair (chi, phi) is built from the classical exp(-1/x) mollifier
ramp.  chi equals 1 on a core ball and falls to 0 at radius 4/3 across a
transition window w; phi is *defined* as chi(r/2) - chi(r), so the dyadic
partition of unity

    chi(r) + sum_{j>=0} phi(2^-j r) = chi(2^-(J+1) r)  ->  1

telescopes exactly instead of holding only approximately.  With the default
window w = 7/12 the supports are exactly {r <= 4/3} and {3/4 <= r <= 8/3}.

Band filters are exact Fourier multipliers on the grid.  The largest usable
band index is tied to the dealiased spectrum so that analysis and dynamics
see the same resolved modes; fields whose modes lie within ``k_resolved``
reconstruct exactly from their bands.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from .fields import SpectralField, derivative, lp_norm
from .grid import Grid

#: transition window giving supp phi = [3/4, 8/3] exactly
BASE_WINDOW = 4.0 / 3.0 - 3.0 / 4.0


def smooth_step(y):
    """C-infinity monotone step: 0 for y <= 0, 1 for y >= 1."""
    y = np.asarray(y, dtype=np.float64)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(y > 0.0, np.exp(-1.0 / np.maximum(y, 1e-300)), 0.0)
        b = np.where(y < 1.0, np.exp(-1.0 / np.maximum(1.0 - y, 1e-300)), 0.0)
    return a / (a + b)


@dataclass(frozen=True)
class BesovSpec:
    """Exponent triple (s, p, q) selecting a Besov norm."""

    s: float
    p: float
    q: float = math.inf

    def __post_init__(self):
        if not (self.p > 1.0):
            raise ValueError(f"integrability exponent p must exceed 1, got {self.p}")
        if not (self.q >= 1.0):
            raise ValueError(f"summation exponent q must be >= 1, got {self.q}")
        if not np.isfinite(self.s):
            raise ValueError("regularity index s must be finite")


@dataclass(frozen=True)
class BernsteinRatios:
    """Measured direct/reverse band-derivative ratios for one sample.

    direct:  ||d^alpha f||_q / (2^{j(|alpha| + d(1/p-1/q))} ||f||_p)
    reverse: 2^{j|alpha|} ||f||_p / max_{|beta|=|alpha|} ||d^beta f||_p,
             None when the annulus hypothesis does not apply (j = -1).
    """

    direct: float
    reverse: float | None


def _multi_indices(dims: int, order: int):
    """All multi-indices of the given total order."""
    if dims == 1:
        yield (order,)
        return
    for head in range(order + 1):
        for rest in _multi_indices(dims - 1, order - head):
            yield (head,) + rest


class DyadicFamily:
    """Concrete dyadic partition of unity bound to a grid.

    Parameters
    ----------
    grid : Grid
    transition_sharpness : float
        Scales the transition window: w = BASE_WINDOW / transition_sharpness.
        Must be >= 1 so the supports stay inside the classical annuli.

    Attributes
    ----------
    j_max : int
        Largest usable band index; bands above it would poke out of the
        dealiased spectrum.
    k_resolved : float
        Radius below which the finite partition sums exactly to 1; fields
        band-limited to it reconstruct exactly and are called *resolved*.
    """

    j_min = -1

    def __init__(self, grid: Grid, transition_sharpness: float = 1.0):
        if transition_sharpness < 1.0:
            raise ValueError("transition_sharpness must be >= 1")
        self.grid = grid
        self.window = BASE_WINDOW / float(transition_sharpness)
        k_max = (grid.n / 3.0) * grid.k_unit
        j_max = math.floor(math.log2(k_max)) - 2
        if j_max < 2:
            raise ValueError(
                f"grid hosts only bands up to j={j_max}; need j_max >= 2 "
                f"(n={grid.n}, period={grid.period:g})"
            )
        self.j_max = j_max
        self.k_band_limit = k_max
        self.k_resolved = (4.0 / 3.0 - self.window) * 2.0 ** (j_max + 1)
        self.resolved_mask = grid.k_mag <= self.k_resolved
        self._band_mult: dict[int, np.ndarray] = {}
        self._low_mult: dict[int, np.ndarray] = {}

    # -- 1D radial profiles -------------------------------------------------

    def chi(self, r):
        """Low-pass profile: 1 on the core, supported in {r <= 4/3}."""
        r = np.asarray(r, dtype=np.float64)
        return smooth_step((4.0 / 3.0 - r) / self.window)

    def phi(self, r):
        """Band profile chi(r/2) - chi(r), supported in {3/4 <= r <= 8/3}."""
        r = np.asarray(r, dtype=np.float64)
        return self.chi(0.5 * r) - self.chi(r)

    def band_profile(self, j: int, r):
        """Multiplier profile of band j at radius r."""
        if j == -1:
            return self.chi(r)
        return self.phi(np.asarray(r, dtype=np.float64) * 2.0**-j)

    def band_support(self, j: int) -> tuple[float, float]:
        """(inner, outer) support radii of band j (inner is 0 for j = -1)."""
        if j == -1:
            return 0.0, 4.0 / 3.0
        return (4.0 / 3.0 - self.window) * 2.0**j, (8.0 / 3.0) * 2.0**j

    # -- multiplier operators ------------------------------------------------

    def band_multiplier(self, j: int) -> np.ndarray:
        if j not in self._band_mult:
            self._band_mult[j] = self.band_profile(j, self.grid.k_mag)
        return self._band_mult[j]

    def low_pass_multiplier(self, j: int) -> np.ndarray:
        if j not in self._low_mult:
            self._low_mult[j] = self.chi(self.grid.k_mag * 2.0**-j)
        return self._low_mult[j]

    def band(self, f: SpectralField, j: int) -> SpectralField:
        """Dyadic block of f at band j (j = -1 is the low-frequency block).

        Blocks vanish identically for j <= -2 by convention; j above j_max
        is rejected because that band exceeds the resolved spectrum.
        """
        if j > self.j_max:
            raise ValueError(f"band {j} exceeds j_max={self.j_max}")
        if j <= -2:
            return SpectralField(f.grid, np.zeros_like(f.data), f.divergence_free)
        return SpectralField(f.grid, f.data * self.band_multiplier(j), f.divergence_free)

    def low_pass(self, f: SpectralField, j: int) -> SpectralField:
        """Cumulative low-pass: all blocks strictly below band j."""
        if j < 0:
            raise ValueError(f"low_pass index must be >= 0, got {j}")
        return SpectralField(f.grid, f.data * self.low_pass_multiplier(j), f.divergence_free)

    def _low_pass_or_zero(self, f: SpectralField, j: int) -> SpectralField:
        if j < 0:
            return SpectralField(f.grid, np.zeros_like(f.data), f.divergence_free)
        return self.low_pass(f, j)

    def restrict_resolved(self, f: SpectralField) -> SpectralField:
        """Truncate f to the modes the finite partition covers exactly."""
        return SpectralField(f.grid, f.data * self.resolved_mask, f.divergence_free)

    def bands(self):
        return range(-1, self.j_max + 1)

    # -- norms ----------------------------------------------------------------

    def band_l2(self, f: SpectralField, j: int) -> float:
        """||block_j f||_2 straight from the coefficients (Parseval)."""
        mult = self.band_multiplier(j) if j >= -1 else None
        if mult is None:
            return 0.0
        return math.sqrt(
            f.grid.volume * float(np.sum((mult * np.abs(f.data)) ** 2))
        )

    def besov_norm(self, f: SpectralField, spec: BesovSpec) -> float:
        """Besov norm: dyadic block L^p norms aggregated in l^q with 2^{js} weights."""
        terms = [
            2.0 ** (j * spec.s) * lp_norm(self.band(f, j), spec.p)
            for j in self.bands()
        ]
        if math.isinf(spec.q):
            return max(terms)
        return float(np.sum(np.asarray(terms) ** spec.q) ** (1.0 / spec.q))

    # -- Bernstein ratios -------------------------------------------------------

    def bernstein_ratios(self, f: SpectralField, j: int, alpha, p, q) -> BernsteinRatios:
        """Measure both band-derivative inequalities on one sample.

        Requires f band-limited to band j's ball (direct) resp. annulus
        (reverse); coefficients outside the declared support beyond 1e-12
        of the peak are rejected.  p <= q.
        """
        p, q = float(p), float(q)
        if p > q:
            raise ValueError(f"need p <= q, got p={p}, q={q}")
        alpha = tuple(int(a) for a in alpha)
        order = sum(alpha)
        grid = self.grid
        inner, outer = self.band_support(j)

        peak = float(np.max(np.abs(f.data)))
        if peak == 0.0:
            raise ValueError("zero field has no Bernstein ratio")
        outside_ball = np.abs(f.data) * (grid.k_mag > outer)
        if float(np.max(outside_ball)) > 1e-12 * peak:
            raise ValueError(f"coefficients outside the band-{j} ball")

        dims = grid.dims
        norm_p = lp_norm(f, p)
        direct_scale = 2.0 ** (j * (order + dims * (1.0 / p - 1.0 / q)))
        direct = lp_norm(derivative(f, alpha), q) / (direct_scale * norm_p)

        reverse = None
        if j >= 0:
            inside_core = np.abs(f.data) * (grid.k_mag < inner)
            if float(np.max(inside_core)) <= 1e-12 * peak:
                best = max(
                    lp_norm(derivative(f, beta), p)
                    for beta in _multi_indices(dims, order)
                )
                if best > 0.0:
                    reverse = 2.0 ** (j * order) * norm_p / best
        return BernsteinRatios(direct=direct, reverse=reverse)


def build_dyadic_family(grid: Grid, transition_sharpness: float = 1.0) -> DyadicFamily:
    return DyadicFamily(grid, transition_sharpness)


def dump_profiles(fam: DyadicFamily, path, r_max: float = 4.0, count: int = 2000) -> None:
    """Write (r, chi(r), phi(r)) samples as CSV for plotting/validation."""
    r = np.linspace(0.0, r_max, count)
    chi = fam.chi(r)
    phi = fam.phi(r)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["r", "chi", "phi"])
        for row in zip(r, chi, phi):
            writer.writerow([repr(float(v)) for v in row])
