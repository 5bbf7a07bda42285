"""Regularity-criterion quantities and proof functionals along trajectories.

Everything here consumes immutable state snapshots and produces time
series: per-band energies, Besov norms of the velocity, the criterion
integral K(t), Serrin-type mixed norms, the vorticity-coherence statistic,
the per-band energy-balance residual, and the exponential (Gronwall)
envelope check with its empirically fitted constant.

Monitors accept any iterable of states, so a run can be streamed through
them without materializing the trajectory.
"""

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .dyadic import BesovSpec, DyadicFamily
from .fields import (
    advect_padded,
    curl,
    grad_l2_norm_squared,
    inner_product,
    jacobian,
    l2_norm_spectral,
    lp_norm,
    to_physical,
)
from .solver import MHDState, PhysicsParams


# ---------------------------------------------------------------------------
# exponent bookkeeping
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScalarDiagnostic:
    """One named scalar sampled at a simulation time (an NDJSON record)."""

    time: float
    name: str
    value: float

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError(f"diagnostic {self.name!r} at t={self.time} is not finite")

    def as_json(self) -> str:
        return json.dumps({"t": self.time, "name": self.name, "value": self.value})


@dataclass(frozen=True)
class CriterionSpec:
    """Admissible exponent triple with q derived from the scaling relation.

    The triple satisfies 2/q + 3/p = 1 + s exactly; q is never free.
    """

    s: float
    p: float
    q: float


def make_criterion_spec(s: float, p: float) -> CriterionSpec:
    """Validate (s, p) and derive q from 2/q + 3/p = 1 + s.

    Each violated constraint produces its own error: s outside (-1, 1],
    p not above 3/(1+s), the excluded marginal pair (p, s) = (inf, 1),
    and a derived q that fails to exceed 1.
    """
    s = float(s)
    p = float(p)
    if not (-1.0 < s <= 1.0):
        raise ValueError(f"regularity index s must lie in (-1, 1], got {s}")
    p_floor = 3.0 / (1.0 + s)
    if not (p > p_floor):
        raise ValueError(f"integrability exponent p must exceed {p_floor:.6g}, got {p}")
    if math.isinf(p) and s == 1.0:
        raise ValueError("the pair (p, s) = (inf, 1) is excluded")
    denom = 1.0 + s - (0.0 if math.isinf(p) else 3.0 / p)
    q = 2.0 / denom
    if not (q > 1.0 and math.isfinite(q)):
        raise ValueError(f"derived exponent q = {q:.6g} must be finite and exceed 1")
    return CriterionSpec(s=s, p=p, q=q)


def envelope_besov_spec(spec: CriterionSpec) -> BesovSpec:
    """The sup-sup Besov norm the envelope always uses: s = 2/q - 1, p = inf."""
    return BesovSpec(s=2.0 / spec.q - 1.0, p=math.inf, q=math.inf)


# ---------------------------------------------------------------------------
# per-state quantities
# ---------------------------------------------------------------------------

def band_energies(fam: DyadicFamily, state: MHDState) -> np.ndarray:
    """Per-band combined energy F_k = sqrt(||u_k||_2^2 + ||b_k||_2^2), k = -1..j_max."""
    return np.asarray([
        math.sqrt(fam.band_l2(state.u, k) ** 2 + fam.band_l2(state.b, k) ** 2)
        for k in fam.bands()
    ])


def _trapezoid_cumulative(times: np.ndarray, values: np.ndarray) -> np.ndarray:
    if times.size == 0:
        return np.asarray([])
    steps = 0.5 * (values[1:] + values[:-1]) * np.diff(times)
    return np.concatenate([[0.0], np.cumsum(steps)])


def criterion_integral(fam: DyadicFamily, history, spec: CriterionSpec):
    """K(t) = int_0^t ||u||_{B^s_{p,inf}}^q dtau by trapezoid quadrature."""
    bspec = BesovSpec(spec.s, spec.p, math.inf)
    times, norms = [], []
    for state in history:
        times.append(state.t)
        norms.append(fam.besov_norm(state.u, bspec))
    times = np.asarray(times)
    norms = np.asarray(norms)
    return times, _trapezoid_cumulative(times, norms**spec.q)


# ---------------------------------------------------------------------------
# envelope check
# ---------------------------------------------------------------------------

@dataclass
class EnvelopeReport:
    """Result of fitting the exponential a-priori envelope to a trajectory.

    The fitted constant is the smallest C >= 1 with
    sup_{tau<=t} A(tau)^m <= C * offset * exp(C * integral(t)) at every
    sample, where m and the band weight depend on the case split at q = 2.
    """

    case_id: int
    rho: float | None
    weight_exponent: float
    power: float
    times: np.ndarray
    a_series: np.ndarray
    a_sup_series: np.ndarray
    b_series: np.ndarray
    integral_series: np.ndarray
    offset: float
    c_fit: float
    c_cap: float
    satisfied: bool
    binding_time: float

    def rhs_series(self) -> np.ndarray:
        c = min(self.c_fit, self.c_cap)
        return c * self.offset * np.exp(c * self.integral_series)


def _smallest_constant(lhs: float, offset: float, integral: float, cap: float) -> float:
    """Smallest C >= 1 with C * offset * exp(C * integral) >= lhs (inf if none <= cap).

    Worked in log space so large caps and integrals cannot overflow.
    """
    if lhs <= 0.0:
        return 1.0
    if offset <= 0.0:
        return math.inf
    target = math.log(lhs) - math.log(offset)

    def log_gap(c: float) -> float:
        return math.log(c) + c * integral - target

    if log_gap(1.0) >= 0.0:
        return 1.0
    if log_gap(cap) < 0.0:
        return math.inf
    lo, hi = 1.0, cap
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if log_gap(mid) >= 0.0:
            hi = mid
        else:
            lo = mid
    return hi


def _envelope_case(spec: CriterionSpec, rho: float | None):
    if spec.q <= 2.0:
        if rho is None:
            rho = 0.75
        if not (0.5 < rho < 1.0):
            raise ValueError(f"rho must lie in (1/2, 1), got {rho}")
        return 1, rho, rho, 2.0
    return 2, None, 1.0 - 1.0 / spec.q, 2.0 * spec.q


def envelope_from_series(spec: CriterionSpec, bands, times, f_matrix, env_norms,
                         e0_u: float, e0_b: float, rho: float | None = None,
                         c_cap: float = 1e6) -> EnvelopeReport:
    """Fit the envelope from precomputed series (the streaming entry point).

    f_matrix is (samples, bands) of F_k values; env_norms is the sup-sup
    Besov norm of the velocity at regularity 2/q - 1 per sample.
    """
    case_id, rho, weight_exp, power = _envelope_case(spec, rho)
    times = np.asarray(times, dtype=float)
    if times.size < 3:
        raise ValueError(f"envelope fit needs at least 3 samples, got {times.size}")
    bands = np.asarray(list(bands), dtype=float)
    f_matrix = np.asarray(f_matrix, dtype=float)
    env_norms = np.asarray(env_norms, dtype=float)

    weights = 2.0 ** (bands * weight_exp)
    a_series = np.max(weights * f_matrix, axis=1)
    a_sup = np.maximum.accumulate(a_series)
    integral = _trapezoid_cumulative(times, env_norms**spec.q)

    if case_id == 1:
        b_weights = 2.0 ** (2.0 * bands * (weight_exp + 1.0))
        b_integrand = f_matrix**2
    else:
        b_weights = 2.0 ** (2.0 * bands * spec.q)
        b_integrand = f_matrix**power
    b_cum = np.vstack([
        _trapezoid_cumulative(times, b_integrand[:, i]) for i in range(f_matrix.shape[1])
    ]).T
    b_series = np.max(b_weights * b_cum, axis=1)

    offset = a_series[0] ** power + e0_u**power + e0_b**power

    roots = [
        _smallest_constant(a_sup[i] ** power, offset, integral[i], c_cap)
        for i in range(times.size)
    ]
    c_fit = max(roots)
    binding_time = float(times[int(np.argmax(roots))])
    satisfied = math.isfinite(c_fit) and c_fit <= c_cap

    return EnvelopeReport(
        case_id=case_id,
        rho=rho,
        weight_exponent=weight_exp,
        power=power,
        times=times,
        a_series=a_series,
        a_sup_series=a_sup,
        b_series=b_series,
        integral_series=integral,
        offset=offset,
        c_fit=c_fit,
        c_cap=c_cap,
        satisfied=satisfied,
        binding_time=binding_time,
    )


def envelope_check(fam: DyadicFamily, history, spec: CriterionSpec,
                   rho: float | None = None, c_cap: float = 1e6) -> EnvelopeReport:
    """Fit the Gronwall envelope for the weighted dyadic energy sup A(t).

    Case 1 (q <= 2) weights bands by 2^{k rho} with rho in (1/2, 1)
    (default 3/4) and bounds A(t)^2; case 2 (q > 2) weights by
    2^{(1-1/q)k} and bounds A(t)^{2q}.  Both use the sup-sup Besov norm of
    the velocity at regularity 2/q - 1 inside the exponential.
    """
    _envelope_case(spec, rho)  # validate rho before consuming the history
    bspec = envelope_besov_spec(spec)
    times, env_norms, f_rows = [], [], []
    e0_u = e0_b = 0.0
    for state in history:
        if not times:
            e0_u = l2_norm_spectral(state.u)
            e0_b = l2_norm_spectral(state.b)
        times.append(state.t)
        f_rows.append(band_energies(fam, state))
        env_norms.append(fam.besov_norm(state.u, bspec))
    return envelope_from_series(spec, fam.bands(), times, f_rows, env_norms,
                                e0_u, e0_b, rho=rho, c_cap=c_cap)


# ---------------------------------------------------------------------------
# Serrin-type mixed norms
# ---------------------------------------------------------------------------

@dataclass
class SerrinSeries:
    quantity: str
    p: float
    q: float
    times: np.ndarray
    integral: np.ndarray
    sup_l3: float


def serrin_norms(history, p: float, q: float, quantity: str = "u") -> SerrinSeries:
    """Mixed-norm series int_0^t ||.||_p^q dtau for u or grad u.

    Admissibility: the u-form needs 2/q + 3/p <= 1 with p >= 3; the
    gradient form needs 2/q + 3/p <= 2 with p > 3/2.  The running
    sup-in-time L^3 norm of u is always reported alongside (marginal
    family).
    """
    p = float(p)
    q = float(q)
    if quantity not in ("u", "grad_u"):
        raise ValueError(f"quantity must be 'u' or 'grad_u', got {quantity!r}")
    if not (q >= 1.0 and math.isfinite(q)):
        raise ValueError(f"inadmissible exponents: q must be finite and >= 1, got {q}")
    scaling = 2.0 / q + (0.0 if math.isinf(p) else 3.0 / p)
    if quantity == "u":
        if not (p >= 3.0 and scaling <= 1.0 + 1e-12):
            raise ValueError(f"inadmissible exponents for the u-form: p={p}, q={q}")
    else:
        if not (p > 1.5 and scaling <= 2.0 + 1e-12):
            raise ValueError(f"inadmissible exponents for the gradient form: p={p}, q={q}")

    times, vals, sup_l3 = [], [], 0.0
    for state in history:
        times.append(state.t)
        f = state.u if quantity == "u" else jacobian(state.u)
        vals.append(lp_norm(f, p))
        sup_l3 = max(sup_l3, lp_norm(state.u, 3.0))
    times = np.asarray(times)
    integral = _trapezoid_cumulative(times, np.asarray(vals) ** q)
    return SerrinSeries(quantity=quantity, p=p, q=q, times=times,
                        integral=integral, sup_l3=sup_l3)


# ---------------------------------------------------------------------------
# vorticity coherence
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoherenceEstimate:
    """Monte-Carlo estimate of the Hoelder-type vorticity coherence constant.

    ``k_estimate`` is None when no sampled point cleared the threshold
    (the distinguished empty-sample result).
    """

    k_estimate: float | None
    n_admissible: int
    n_samples: int
    radius: float
    threshold: float


def coherence_from_vorticity(w_phys: np.ndarray, grid, radius: float,
                             sample_count: int, threshold: float,
                             rng: np.random.Generator) -> CoherenceEstimate:
    """Estimate sup |w(x+y)-w(x)| / (|w(x+y)| |y|^(1/2)) over random pairs.

    Pairs are grid points x and offsets y with 0 < |y| <= radius; only
    pairs with |w(x+y)| >= threshold count.
    """
    if w_phys.ndim == grid.dims:
        w_phys = w_phys[np.newaxis]
    m = int(radius / grid.dx)
    if m < 1:
        raise ValueError(f"radius {radius:.3g} is below the grid spacing {grid.dx:.3g}")

    d = grid.dims
    collected = 0
    best = 0.0
    admissible = 0
    attempts = 0
    while collected < sample_count and attempts < 80:
        attempts += 1
        batch = max(sample_count - collected, 1)
        offs = rng.integers(-m, m + 1, size=(batch, d))
        dist = np.sqrt(np.sum(offs.astype(float) ** 2, axis=1)) * grid.dx
        ok = (dist > 0.0) & (dist <= radius)
        offs, dist = offs[ok], dist[ok]
        if offs.shape[0] == 0:
            continue
        idx = rng.integers(0, grid.n, size=(offs.shape[0], d))
        tgt = (idx + offs) % grid.n
        w_x = np.stack([w_phys[(slice(None),) + tuple(row)] for row in idx], axis=1)
        w_y = np.stack([w_phys[(slice(None),) + tuple(row)] for row in tgt], axis=1)
        mag_y = np.sqrt(np.sum(w_y**2, axis=0))
        diff = np.sqrt(np.sum((w_y - w_x) ** 2, axis=0))
        passing = mag_y >= threshold
        admissible += int(np.sum(passing))
        if np.any(passing):
            ratios = diff[passing] / (mag_y[passing] * np.sqrt(dist[passing]))
            best = max(best, float(np.max(ratios)))
        collected += offs.shape[0]

    if admissible == 0:
        return CoherenceEstimate(None, 0, collected, radius, threshold)
    return CoherenceEstimate(best, admissible, collected, radius, threshold)


def vorticity_coherence(state: MHDState, radius: float, sample_count: int,
                        threshold: float, seed: int = 0) -> CoherenceEstimate:
    """Coherence statistic of the velocity's vorticity (scalar in 2D)."""
    w = to_physical(curl(state.u))
    rng = np.random.default_rng(seed)
    return coherence_from_vorticity(w, state.grid, radius, sample_count, threshold, rng)


# ---------------------------------------------------------------------------
# per-band energy balance
# ---------------------------------------------------------------------------

def _band_nonlinear_pairing(fam: DyadicFamily, state: MHDState, k: int) -> float:
    u, b = state.u, state.b
    u_k = fam.band(u, k)
    b_k = fam.band(b, k)
    return (
        -inner_product(fam.band(advect_padded(u, u), k), u_k)
        + inner_product(fam.band(advect_padded(b, b), k), u_k)
        - inner_product(fam.band(advect_padded(u, b), k), b_k)
        + inner_product(fam.band(advect_padded(b, u), k), b_k)
    )


def projected_equation_residual(fam: DyadicFamily, history,
                                physics: PhysicsParams, k: int):
    """Residual of the band-k energy balance along a sampled trajectory.

    residual = d/dt (F_k^2 / 2) + nu ||grad u_k||^2 + eta ||grad b_k||^2
               - (paired nonlinear terms), with a central time difference;
    the dissipation pairing is evaluated exactly rather than through its
    dyadic lower bound.  Returns (interior times, residuals).
    """
    states = list(history)
    if len(states) < 3:
        raise ValueError(f"need at least 3 samples for the time derivative, got {len(states)}")
    times = np.asarray([s.t for s in states])
    f2 = np.asarray([
        fam.band_l2(s.u, k) ** 2 + fam.band_l2(s.b, k) ** 2 for s in states
    ])
    residuals = []
    for i in range(1, len(states) - 1):
        s = states[i]
        ddt = 0.5 * (f2[i + 1] - f2[i - 1]) / (times[i + 1] - times[i - 1])
        dissip = (physics.nu * grad_l2_norm_squared(fam.band(s.u, k))
                  + physics.eta * grad_l2_norm_squared(fam.band(s.b, k)))
        residuals.append(ddt + dissip - _band_nonlinear_pairing(fam, s, k))
    return times[1:-1], np.asarray(residuals)


# ---------------------------------------------------------------------------
# streaming report
# ---------------------------------------------------------------------------

class TrajectoryMonitor:
    """Accumulates criterion quantities sample by sample along a run."""

    def __init__(self, fam: DyadicFamily, spec: CriterionSpec,
                 rho: float | None = None, c_cap: float = 1e6):
        self.fam = fam
        self.spec = spec
        self.rho = rho
        self.c_cap = c_cap
        self._bspec_user = BesovSpec(spec.s, spec.p, math.inf)
        self._bspec_env = envelope_besov_spec(spec)
        self._same_norm = (
            math.isinf(spec.p) and abs(spec.s - self._bspec_env.s) < 1e-14
        )
        self.times: list[float] = []
        self.f_rows: list[np.ndarray] = []
        self.besov_user: list[float] = []
        self.besov_env: list[float] = []
        self._e0_u = 0.0
        self._e0_b = 0.0

    def observe(self, state: MHDState) -> None:
        if not self.times:
            self._e0_u = l2_norm_spectral(state.u)
            self._e0_b = l2_norm_spectral(state.b)
        self.times.append(state.t)
        self.f_rows.append(band_energies(self.fam, state))
        bu = self.fam.besov_norm(state.u, self._bspec_user)
        self.besov_user.append(bu)
        self.besov_env.append(
            bu if self._same_norm else self.fam.besov_norm(state.u, self._bspec_env)
        )

    def report(self) -> "CriterionReport":
        times = np.asarray(self.times)
        k_series = _trapezoid_cumulative(times, np.asarray(self.besov_user) ** self.spec.q)
        envelope = envelope_from_series(
            self.spec, self.fam.bands(), times, self.f_rows, self.besov_env,
            self._e0_u, self._e0_b, rho=self.rho, c_cap=self.c_cap,
        )
        return CriterionReport(
            spec=self.spec,
            bands=list(self.fam.bands()),
            times=times,
            band_energy=np.asarray(self.f_rows),
            besov=np.asarray(self.besov_user),
            criterion_integral=k_series,
            envelope=envelope,
        )


@dataclass
class CriterionReport:
    spec: CriterionSpec
    bands: list[int]
    times: np.ndarray
    band_energy: np.ndarray
    besov: np.ndarray
    criterion_integral: np.ndarray
    envelope: EnvelopeReport

    def rows(self):
        rhs = self.envelope.rhs_series()
        power = self.envelope.power
        for i, t in enumerate(self.times):
            sat = self.envelope.a_sup_series[i] ** power <= rhs[i] * (1.0 + 1e-12)
            yield {
                "t": float(t),
                "F": [float(v) for v in self.band_energy[i]],
                "besov": float(self.besov[i]),
                "K": float(self.criterion_integral[i]),
                "A": float(self.envelope.a_series[i]),
                "envelope_rhs": float(rhs[i]),
                "satisfied": bool(sat),
            }

    def write_csv(self, path) -> None:
        header = (["t"] + [f"F_{k}" for k in self.bands]
                  + ["besov", "K", "A", "envelope_rhs", "satisfied"])
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for row in self.rows():
                writer.writerow(
                    [repr(row["t"])] + [repr(v) for v in row["F"]]
                    + [repr(row["besov"]), repr(row["K"]), repr(row["A"]),
                       repr(row["envelope_rhs"]), int(row["satisfied"])]
                )

    def write_ndjson(self, path) -> None:
        with open(path, "w") as fh:
            for row in self.rows():
                t = row["t"]
                for k, v in zip(self.bands, row["F"]):
                    fh.write(json.dumps({"t": t, "name": f"F_{k}", "value": v}) + "\n")
                for name in ("besov", "K", "A", "envelope_rhs"):
                    fh.write(json.dumps({"t": t, "name": name, "value": row[name]}) + "\n")
                fh.write(json.dumps({"t": t, "name": "satisfied",
                                     "value": float(row["satisfied"])}) + "\n")
