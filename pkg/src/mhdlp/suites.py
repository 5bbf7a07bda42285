"""Desk-scale verification suites: exact identities, band-derivative
inequalities, commutator majorants, and the product decomposition.

Each suite runs deterministic randomized checks and returns a list of
:class:`CheckResult`; the CLI prints them and fails on the first violation.
The measured values double as regression baselines for the empirical
constants the estimates hide.
"""

import math
from dataclasses import dataclass

import numpy as np

from .dyadic import DyadicFamily
from .fields import (
    SpectralField,
    l2_norm_spectral,
    multiply_padded,
    random_divergence_free,
    random_field,
)
from .grid import Grid
from .paraproduct import bony_decompose, commutator_reports


@dataclass(frozen=True)
class CheckResult:
    name: str
    measured: float
    threshold: float

    @property
    def passed(self) -> bool:
        return self.measured <= self.threshold

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name}: measured={self.measured:.3e} threshold={self.threshold:.3e}"


def _resolved_sample(fam: DyadicFamily, rng, ncomp: int = 1) -> SpectralField:
    f = random_field(fam.grid, rng, ncomp=ncomp)
    f = fam.restrict_resolved(f)
    norm = l2_norm_spectral(f)
    return f * (1.0 / norm) if norm > 0 else f


def identity_suite(n: int = 64, dims: int = 2, seed: int = 0,
                   samples: int = 20) -> list[CheckResult]:
    """Partition of unity, reconstruction, block orthogonality, and the
    low-high product support fact (the latter on a grid wide enough to
    host bands five apart)."""
    grid = Grid(dims, n)
    fam = DyadicFamily(grid)
    rng = np.random.default_rng(seed)
    results = []

    r = np.concatenate([[0.0], 10.0 ** rng.uniform(-2, 2, size=10_000)])
    j_top = int(math.ceil(math.log2(max(r.max(), 1.0)))) + 2
    total = fam.chi(r) + sum(fam.phi(r * 2.0**-j) for j in range(0, j_top + 1))
    results.append(CheckResult("partition_of_unity", float(np.max(np.abs(total - 1.0))), 1e-12))

    worst = 0.0
    for _ in range(samples):
        f = _resolved_sample(fam, rng)
        recon = None
        for j in fam.bands():
            blk = fam.band(f, j)
            recon = blk if recon is None else recon + blk
        worst = max(worst, l2_norm_spectral(recon - f) / l2_norm_spectral(f))
    results.append(CheckResult(f"reconstruction[{samples} fields]", worst, 1e-12))

    f = _resolved_sample(fam, rng)
    worst = 0.0
    for j in fam.bands():
        for k in fam.bands():
            if abs(j - k) >= 2:
                worst = max(worst, fam.band_l2(fam.band(f, k), j))
    results.append(CheckResult("block_orthogonality |j-k|>=2",
                               worst, np.finfo(float).eps))

    # |j-k| >= 5 needs at least seven bands; run on the widest cheap grid.
    wide = Grid(2, max(n, 256))
    wfam = DyadicFamily(wide)
    wrng = np.random.default_rng(seed + 1)
    g = _resolved_sample(wfam, wrng)
    worst = 0.0
    for k in wfam.bands():
        low = wfam._low_pass_or_zero(g, k - 1)
        prod = multiply_padded(low, wfam.band(g, k))
        for j in wfam.bands():
            if abs(j - k) >= 5:
                worst = max(worst, wfam.band_l2(prod, j))
    results.append(CheckResult("low_high_support |j-k|>=5", worst, 1e-12))
    return results


def bony_suite(n: int = 64, dims: int = 2, seed: int = 0,
               samples: int = 20) -> list[CheckResult]:
    """Decomposition identity: the three pieces sum back to the product."""
    grid = Grid(dims, n)
    fam = DyadicFamily(grid)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        u = _resolved_sample(fam, rng)
        v = _resolved_sample(fam, rng)
        triple = bony_decompose(fam, u, v)
        product = multiply_padded(u, v)
        rel = l2_norm_spectral(triple.total() - product) / l2_norm_spectral(product)
        worst = max(worst, rel)
    return [CheckResult(f"bony_identity[{samples} pairs]", worst, 1e-10)]


_BERNSTEIN_PQ = ((2.0, 2.0), (2.0, math.inf), (math.inf, math.inf))


def _multi_indices(dims, order):
    if dims == 1:
        yield (order,)
        return
    for head in range(order + 1):
        for rest in _multi_indices(dims - 1, order - head):
            yield (head,) + rest


def bernstein_suite(n: int = 64, dims: int = 2, seed: int = 0,
                    samples: int = 100, bound: float = 10.0) -> list[CheckResult]:
    """Max direct/reverse band-derivative ratios per (order, p, q) over samples."""
    grid = Grid(dims, n)
    fam = DyadicFamily(grid)
    rng = np.random.default_rng(seed)
    direct_max: dict[tuple, float] = {}
    reverse_max: dict[tuple, float] = {}
    for _ in range(samples):
        g = random_field(grid, rng)
        j = int(rng.integers(0, fam.j_max + 1))
        f = fam.band(g, j)
        if l2_norm_spectral(f) == 0.0:
            continue
        for order in (0, 1, 2):
            for alpha in _multi_indices(dims, order):
                for p, q in _BERNSTEIN_PQ:
                    ratios = fam.bernstein_ratios(f, j, alpha, p, q)
                    key = (order, p, q)
                    direct_max[key] = max(direct_max.get(key, 0.0), ratios.direct)
                    if ratios.reverse is not None:
                        reverse_max[key] = max(reverse_max.get(key, 0.0), ratios.reverse)
    results = []
    for key in sorted(direct_max):
        order, p, q = key
        results.append(CheckResult(
            f"bernstein_direct[|a|={order},p={p:g},q={q:g}]", direct_max[key], bound))
    for key in sorted(reverse_max):
        order, p, q = key
        results.append(CheckResult(
            f"bernstein_reverse[|a|={order},p={p:g}]", reverse_max[key], bound))
    return results


def commutator_suite(n: int = 64, dims: int = 2, seed: int = 0,
                     samples: int = 100, k_lo_fraction: float = 1.0):
    """Max lhs/rhs ratio per estimate over random solenoidal pairs.

    Returns (results, table) where table maps term id -> max ratio; the
    pass criterion is finiteness (the constants themselves are empirical).
    k_lo_fraction < 1 band-limits samples to that fraction of the resolved
    radius, for cross-resolution comparisons of the same ensemble.
    """
    grid = Grid(dims, n)
    fam = DyadicFamily(grid)
    rng = np.random.default_rng(seed)
    k_hi = fam.k_resolved * k_lo_fraction
    table: dict[str, float] = {}
    for _ in range(samples):
        u = random_divergence_free(grid, rng, k_hi=k_hi)
        b = random_divergence_free(grid, rng, k_hi=k_hi)
        for k in range(0, fam.j_max + 1):
            for rep in commutator_reports(fam, u, b, k):
                if rep.rhs > 0.0:
                    table[rep.term_id] = max(table.get(rep.term_id, 0.0), rep.ratio)
    results = [
        CheckResult(f"commutator_ratio[{term}]", val, 1e6)
        for term, val in sorted(table.items())
    ]
    return results, table


SUITES = {
    "identity": lambda seed, samples: identity_suite(seed=seed, samples=samples),
    "bony": lambda seed, samples: bony_suite(seed=seed, samples=samples),
    "bernstein": lambda seed, samples: bernstein_suite(seed=seed, samples=samples),
    "commutator": lambda seed, samples: commutator_suite(seed=seed, samples=samples)[0],
}
