"""Bony para-product calculus and band-commutator machinery.

The decomposition splits a product uv into the part where u sits at much
lower frequency than v, the mirrored part, and a comparable-frequency
remainder.  All quadratic terms here go through the 3/2 zero-padded product
so the decomposition identity can be checked to near machine precision;
pairings are evaluated spectrally and are exact for the represented modes.

The commutator reports measure the dyadic energy-estimate machinery: for a
band k they evaluate the actual commutator pairings against the
norm-product majorants term by term, exposing the ratio so the hidden
constants can be estimated empirically rather than asserted.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from .dyadic import DyadicFamily
from .fields import (
    SpectralField,
    advect_padded,
    divergence_residual,
    grad_l2_norm_squared,
    inner_product,
    jacobian,
    l2_norm_spectral,
    lp_norm,
    multiply_padded,
)

DIVERGENCE_TOL = 1e-8


@dataclass(frozen=True)
class BonyTriple:
    """The three pieces whose sum is the (dealiased) pointwise product."""

    low_high: SpectralField   # u low, v high
    high_low: SpectralField   # v low, u high
    remainder: SpectralField  # comparable frequencies

    def total(self) -> SpectralField:
        return self.low_high + self.high_low + self.remainder


@dataclass(frozen=True)
class CommutatorReport:
    """Measured pairing against its majorant for one band and term group."""

    term_id: str
    k: int
    lhs: float
    rhs: float

    @property
    def ratio(self) -> float:
        if self.rhs > 0.0:
            return self.lhs / self.rhs
        return 0.0 if self.lhs == 0.0 else math.inf


def paraproduct(fam: DyadicFamily, u: SpectralField, v: SpectralField) -> SpectralField:
    """Low-frequency u against dyadic blocks of v: sum_j S_{j-1}u * block_j v.

    Terms with an empty low-pass (j <= 0) drop out by the block convention.
    """
    acc = None
    for j in range(1, fam.j_max + 1):
        term = multiply_padded(fam.low_pass(u, j - 1), fam.band(v, j))
        acc = term if acc is None else acc + term
    if acc is None:
        return SpectralField(u.grid, np.zeros_like(v.data))
    return acc


def remainder(fam: DyadicFamily, u: SpectralField, v: SpectralField) -> SpectralField:
    """Comparable-frequency part: sum over |j - j'| <= 1 of block_j u * block_j' v."""
    acc = None
    for j in fam.bands():
        for jp in (j - 1, j, j + 1):
            if jp < -1 or jp > fam.j_max:
                continue
            term = multiply_padded(fam.band(u, j), fam.band(v, jp))
            acc = term if acc is None else acc + term
    return acc


def bony_decompose(fam: DyadicFamily, u: SpectralField, v: SpectralField) -> BonyTriple:
    """Split uv into paraproducts plus remainder; the pieces sum back to uv."""
    return BonyTriple(
        low_high=paraproduct(fam, u, v),
        high_low=paraproduct(fam, v, u),
        remainder=remainder(fam, u, v),
    )


def band_commutator(fam: DyadicFamily, u: SpectralField, f: SpectralField,
                    k: int) -> SpectralField:
    """Commutator of advection by u with the band-k filter applied to f.

    Returns u.grad(block_k f) - block_k(u.grad f) with padded products.
    The advecting field must be solenoidal.
    """
    if not u.is_vector:
        raise ValueError("advecting field must be a vector field")
    res = divergence_residual(u)
    if res > DIVERGENCE_TOL:
        raise ValueError(f"advecting field is not divergence-free (residual {res:.3e})")
    if k > fam.j_max:
        raise ValueError(f"band {k} exceeds j_max={fam.j_max}")
    direct = advect_padded(u, fam.band(f, k))
    filtered = fam.band(advect_padded(u, f), k)
    return direct - filtered


def _band_l2(fam, f, j):
    return fam.band_l2(f, j) if -1 <= j <= fam.j_max else 0.0


def _band_inf(fam, f, j):
    if not (-1 <= j <= fam.j_max):
        return 0.0
    return lp_norm(fam.band(f, j), math.inf)


def _grad_low_inf(fam, f, j):
    if j < 0:
        return 0.0
    return lp_norm(jacobian(fam.low_pass(f, j)), math.inf)


def _grad_low_l2(fam, f, j):
    if j < 0:
        return 0.0
    return math.sqrt(grad_l2_norm_squared(fam.low_pass(f, j)))


def commutator_reports(fam: DyadicFamily, u: SpectralField, b: SpectralField,
                       k: int) -> tuple[CommutatorReport, CommutatorReport, CommutatorReport]:
    """Evaluate the three commutator pairings of band k against their majorants.

    The left-hand sides are the actual (absolute) pairings appearing in the
    dyadic energy balance; the right-hand sides are the corresponding
    norm-product majorants with all sums truncated at j_max.  Ratios
    estimate the constants the estimates hide.
    """
    if k > fam.j_max or k < -1:
        raise ValueError(f"band {k} out of range [-1, {fam.j_max}]")
    u_k = fam.band(u, k)
    b_k = fam.band(b, k)

    com_uu = band_commutator(fam, u, u, k)
    com_bb = band_commutator(fam, b, b, k)
    com_ub = band_commutator(fam, u, b, k)
    com_bu = band_commutator(fam, b, u, k)

    lhs_adv = abs(inner_product(com_uu, u_k))
    lhs_mag = abs(-inner_product(com_bb, u_k) - inner_product(com_bu, b_k))
    lhs_mix = abs(inner_product(com_ub, b_k))

    near = [kp for kp in range(k - 4, k + 5) if -1 <= kp <= fam.j_max]
    tail = [kp for kp in range(max(k - 2, -1), fam.j_max + 1)]
    two_k = 2.0**k

    u_k_l2 = _band_l2(fam, u, k)
    u_k_inf = _band_inf(fam, u, k)
    b_k_l2 = _band_l2(fam, b, k)

    rhs_adv = u_k_l2 * sum(
        _grad_low_inf(fam, u, kp - 1) * _band_l2(fam, u, kp) for kp in near
    ) + two_k * u_k_inf * sum(_band_l2(fam, u, kp) ** 2 for kp in tail)

    mixed_near = sum(
        _grad_low_inf(fam, u, kp - 1) * _band_l2(fam, b, kp)
        + _grad_low_l2(fam, b, kp - 1) * _band_inf(fam, u, kp)
        for kp in near
    )
    diag_tail = sum(
        _band_inf(fam, u, kp) * _band_l2(fam, b, kpp)
        for kp in tail
        for kpp in tail
        if abs(kp - kpp) <= 1
    )

    rhs_mag = (
        u_k_inf * sum(_grad_low_l2(fam, b, kp - 1) * _band_l2(fam, b, kp) for kp in near)
        + two_k * u_k_inf * sum(_band_l2(fam, b, kp) ** 2 for kp in tail)
        + b_k_l2 * mixed_near
        + two_k * b_k_l2 * diag_tail
    )
    rhs_mix = b_k_l2 * mixed_near + two_k * b_k_l2 * diag_tail

    return (
        CommutatorReport("I", k, lhs_adv, rhs_adv),
        CommutatorReport("II+IV", k, lhs_mag, rhs_mag),
        CommutatorReport("III", k, lhs_mix, rhs_mix),
    )


@dataclass(frozen=True)
class CancellationResult:
    """The two advection pairings that vanish for solenoidal fields.

    ``first`` pairs each field's band with its own advection by u;
    ``second`` is the mixed magnetic pairing.  The scales are the
    Cauchy-Schwarz bounds of the un-cancelled pairings, for forming
    relative residuals.
    """

    first: float
    second: float
    first_scale: float
    second_scale: float


def cancellation_check(fam: DyadicFamily, u: SpectralField, b: SpectralField,
                       k: int) -> CancellationResult:
    """Quadrature of the advection pairings of band k (no solenoidality enforced)."""
    u_k = fam.band(u, k)
    b_k = fam.band(b, k)
    adv_uu = advect_padded(u, u_k)
    adv_ub = advect_padded(u, b_k)
    adv_bb = advect_padded(b, b_k)
    adv_bu = advect_padded(b, u_k)
    first = inner_product(adv_uu, u_k) + inner_product(adv_ub, b_k)
    second = inner_product(adv_bb, u_k) + inner_product(adv_bu, b_k)
    first_scale = (
        l2_norm_spectral(adv_uu) * l2_norm_spectral(u_k)
        + l2_norm_spectral(adv_ub) * l2_norm_spectral(b_k)
    )
    second_scale = (
        l2_norm_spectral(adv_bb) * l2_norm_spectral(u_k)
        + l2_norm_spectral(adv_bu) * l2_norm_spectral(b_k)
    )
    return CancellationResult(first, second, first_scale, second_scale)


def dump_commutator_reports(reports, path) -> None:
    """Write commutator reports as CSV rows (k, lhs, rhs, ratio, term_id)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "lhs", "rhs", "ratio", "term_id"])
        for rep in reports:
            writer.writerow([rep.k, repr(rep.lhs), repr(rep.rhs), repr(rep.ratio), rep.term_id])
