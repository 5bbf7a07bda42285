"""Acceptance criteria, one test per criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s`.  The envelope criteria
replay a 256^2 Orszag-Tang trajectory plus refinement replicas (half the
step, double the resolution), so the module takes several minutes; every
tolerance is pinned here, nothing is deferred to calibration.
"""

import csv
import json
import math
import time
from types import SimpleNamespace

import numpy as np
import pytest

from mhdlp import (
    DyadicFamily,
    Grid,
    InitialCondition,
    MHDState,
    PhysicsParams,
    RunConfig,
    cancellation_check,
    gradient,
    ideal_invariants,
    iter_states,
    make_criterion_spec,
    random_divergence_free,
    random_field,
    step,
)
from mhdlp.cli import main
from mhdlp.fields import (
    SpectralField,
    embed_field,
    from_physical,
    grad_l2_norm_squared,
    l2_norm_spectral,
    zero_field,
)
from mhdlp.monitor import TrajectoryMonitor
from mhdlp.suites import bony_suite, identity_suite

BERNSTEIN_PQ = ((2.0, 2.0), (2.0, math.inf), (math.inf, math.inf))


def multi_indices(dims, order):
    if dims == 1:
        yield (order,)
        return
    for head in range(order + 1):
        for rest in multi_indices(dims - 1, order - head):
            yield (head,) + rest


# ---------------------------------------------------------------------------
# shared expensive runs
# ---------------------------------------------------------------------------

def run_monitored_ot(n, dt, t_max=2.0, nu=0.01):
    """One Orszag-Tang pass collecting both envelope cases and health series."""
    grid = Grid(2, n)
    fam = DyadicFamily(grid)
    physics = PhysicsParams(nu, nu)
    cfg = RunConfig(grid=grid, physics=physics, dt=dt, t_max=t_max,
                    ic=InitialCondition("orszag_tang"),
                    diag_every=max(1, round(0.01 / dt)))
    mon1 = TrajectoryMonitor(fam, make_criterion_spec(0.0, math.inf))    # q = 2
    mon2 = TrajectoryMonitor(fam, make_criterion_spec(-0.5, math.inf))   # q = 4
    ratios, low_modes, energies, dissipation, times = [], [], [], [], []
    started = time.perf_counter()
    e0_sum = None
    for i, s in iter_states(cfg):
        if i % cfg.diag_every == 0 or i == cfg.n_steps:
            mon1.observe(s)
            mon2.observe(s)
            total = l2_norm_spectral(s.u) ** 2 + l2_norm_spectral(s.b) ** 2
            ratios.append(float(np.sum(mon1.f_rows[-1] ** 2) / total))
            if e0_sum is None:
                e0_sum = l2_norm_spectral(s.u) + l2_norm_spectral(s.b)
            low_modes.append(fam.band_l2(s.u, -1) + fam.band_l2(s.b, -1))
            energies.append(total)
            dissipation.append(2.0 * nu * (grad_l2_norm_squared(s.u)
                                           + grad_l2_norm_squared(s.b)))
            times.append(s.t)
    runtime = time.perf_counter() - started
    times = np.asarray(times)
    energies = np.asarray(energies)
    dissipation = np.asarray(dissipation)
    cumulative = np.concatenate([[0.0], np.cumsum(
        0.5 * (dissipation[1:] + dissipation[:-1]) * np.diff(times))])
    budget_residual = float(np.max(np.abs(energies + cumulative - energies[0])) / energies[0])
    return SimpleNamespace(
        n=n, dt=dt, runtime=runtime,
        env1=mon1.report().envelope,
        env2=mon2.report().envelope,
        ratios=np.asarray(ratios),
        low_modes=np.asarray(low_modes),
        e0_sum=e0_sum,
        budget_residual=budget_residual,
    )


@pytest.fixture(scope="module")
def ot_base():
    return run_monitored_ot(256, 1e-3)


@pytest.fixture(scope="module")
def ot_dt_half():
    return run_monitored_ot(256, 5e-4)


@pytest.fixture(scope="module")
def ot_n512():
    return run_monitored_ot(512, 1e-3)


@pytest.fixture(scope="module")
def ideal_run():
    """Ideal 2D run at n=256, dt=5e-4, t <= 1, with health series."""
    grid = Grid(2, 256)
    fam = DyadicFamily(grid)
    cfg = RunConfig(
        grid=grid, physics=PhysicsParams(0.0, 0.0), dt=5e-4, t_max=1.0,
        ic=InitialCondition(
            "random_band",
            {"u_rms": 0.2, "b_rms": 0.1, "band_lo": 1, "band_hi": 3},
            seed=11,
        ),
    )
    first = last = None
    ratios, low_modes = [], []
    e0_sum = None
    for i, s in iter_states(cfg):
        if i % 50 == 0 or i == cfg.n_steps:
            inv = ideal_invariants(s)
            if first is None:
                first = inv
                e0_sum = l2_norm_spectral(s.u) + l2_norm_spectral(s.b)
            last = inv
            f = np.asarray([
                math.sqrt(fam.band_l2(s.u, k) ** 2 + fam.band_l2(s.b, k) ** 2)
                for k in fam.bands()
            ])
            total = l2_norm_spectral(s.u) ** 2 + l2_norm_spectral(s.b) ** 2
            ratios.append(float(np.sum(f**2) / total))
            low_modes.append(fam.band_l2(s.u, -1) + fam.band_l2(s.b, -1))
    return SimpleNamespace(first=first, last=last, ratios=np.asarray(ratios),
                           low_modes=np.asarray(low_modes), e0_sum=e0_sum)


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------

def test_criterion_1_exact_identity_suite():
    """Partition, reconstruction, orthogonality, Bony, product support."""
    started = time.perf_counter()
    results = identity_suite(n=64, dims=2, seed=0, samples=20)
    results += bony_suite(n=64, dims=2, seed=1, samples=20)
    elapsed = time.perf_counter() - started
    for res in results:
        assert res.passed, res.line()
    assert elapsed < 30.0
    worst = max(res.measured for res in results)
    print(f"\nACCEPTANCE 1: exact-identity suite PASS "
          f"(worst error {worst:.2e}, {elapsed:.1f}s)")


def test_criterion_2_bernstein_suite():
    """Direct and reverse ratios bounded by 10, stable under refinement.

    100 samples per (band, derivative order, (p, q)); the refinement
    comparison evaluates the same fields on the doubled grid.
    """
    coarse, fine = Grid(2, 64), Grid(2, 128)
    fam_c, fam_f = DyadicFamily(coarse), DyadicFamily(fine)
    rng = np.random.default_rng(0)
    max_c: dict[tuple, float] = {}
    max_f: dict[tuple, float] = {}
    for j in range(0, fam_c.j_max + 1):
        for _ in range(100):
            g = random_field(coarse, rng)
            f_c = fam_c.band(g, j)
            if l2_norm_spectral(f_c) == 0.0:
                continue
            f_f = embed_field(f_c, fine)
            for order in (0, 1, 2):
                for alpha in multi_indices(2, order):
                    for p, q in BERNSTEIN_PQ:
                        r_c = fam_c.bernstein_ratios(f_c, j, alpha, p, q)
                        r_f = fam_f.bernstein_ratios(f_f, j, alpha, p, q)
                        for key_tag, rc, rf in (
                            (("direct", order, p, q), r_c.direct, r_f.direct),
                            (("reverse", order, p, q), r_c.reverse, r_f.reverse),
                        ):
                            if rc is None or rf is None:
                                continue
                            max_c[key_tag] = max(max_c.get(key_tag, 0.0), rc)
                            max_f[key_tag] = max(max_f.get(key_tag, 0.0), rf)
    overall = max(max(max_c.values()), max(max_f.values()))
    assert overall <= 10.0
    worst_drift = max(
        abs(max_f[key] - max_c[key]) / max_c[key] for key in max_c
    )
    assert worst_drift <= 0.20
    print(f"\nACCEPTANCE 2: Bernstein suite PASS "
          f"(constant {overall:.3f} <= 10, refinement drift {worst_drift:.1%})")


def test_criterion_3_cancellation_identities():
    """Both advection pairings vanish; injected divergence grows linearly."""
    grid = Grid(2, 64)
    fam = DyadicFamily(grid)
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(50):
        u = random_divergence_free(grid, rng, k_hi=fam.k_resolved)
        b = random_divergence_free(grid, rng, k_hi=fam.k_resolved)
        for k in fam.bands():
            res = cancellation_check(fam, u, b, k)
            if res.first_scale > 0:
                worst = max(worst, abs(res.first) / res.first_scale)
            if res.second_scale > 0:
                worst = max(worst, abs(res.second) / res.second_scale)
    assert worst <= 1e-11

    u = random_divergence_free(grid, rng, k_hi=fam.k_resolved)
    pollution = fam.restrict_resolved(gradient(random_field(grid, rng)))
    pollution = pollution * (1.0 / l2_norm_spectral(pollution))
    deltas = (1e-3, 1e-2, 1e-1)
    residuals = []
    for d in deltas:
        bad = SpectralField(grid, u.data + d * pollution.data)
        res = cancellation_check(fam, bad, zero_field(grid, 2), 1)
        residuals.append(abs(res.first))
    exponent = float(np.polyfit(np.log(deltas), np.log(residuals), 1)[0])
    assert abs(exponent - 1.0) <= 0.1
    print(f"\nACCEPTANCE 3: cancellation identities PASS "
          f"(worst residual {worst:.2e}, divergence exponent {exponent:.3f})")


def test_criterion_4_commutator_estimates():
    """Pairing/majorant ratios finite over 100 samples and refinement-stable."""
    from mhdlp.paraproduct import commutator_reports

    coarse, fine = Grid(2, 64), Grid(2, 128)
    fam_c, fam_f = DyadicFamily(coarse), DyadicFamily(fine)
    rng = np.random.default_rng(3)
    max_c: dict[str, float] = {}
    max_f: dict[str, float] = {}
    for _ in range(100):
        u = random_divergence_free(coarse, rng, k_hi=fam_c.k_resolved)
        b = random_divergence_free(coarse, rng, k_hi=fam_c.k_resolved)
        uf, bf = embed_field(u, fine), embed_field(b, fine)
        for k in range(0, fam_c.j_max + 1):
            for rep in commutator_reports(fam_c, u, b, k):
                if rep.rhs > 0:
                    max_c[rep.term_id] = max(max_c.get(rep.term_id, 0.0), rep.ratio)
            for rep in commutator_reports(fam_f, uf, bf, k):
                if rep.rhs > 0:
                    max_f[rep.term_id] = max(max_f.get(rep.term_id, 0.0), rep.ratio)
    assert set(max_c) == {"I", "II+IV", "III"}
    for term, val in max_c.items():
        assert math.isfinite(val) and val > 0.0
    worst_drift = max(abs(max_f[t] - max_c[t]) / max_c[t] for t in max_c)
    assert worst_drift <= 0.25
    summary = ", ".join(f"{t}={max_c[t]:.4f}" for t in sorted(max_c))
    print(f"\nACCEPTANCE 4: commutator estimates PASS "
          f"(fitted constants {summary}; refinement drift {worst_drift:.1%})")


def test_criterion_5_solver_physics(ideal_run, ot_base):
    """Conservation, energy equality, convergence order, exact diffusion."""
    # ideal conservation at n=256, dt=5e-4, t <= 1
    first, last = ideal_run.first, ideal_run.last
    energy_drift = abs(last.energy - first.energy) / first.energy
    cross_drift = abs(last.cross_helicity - first.cross_helicity) / max(
        abs(first.cross_helicity), first.energy
    )
    assert energy_drift <= 1e-6
    assert cross_drift <= 1e-6

    # viscous energy equality along the monitored run
    assert ot_base.budget_residual <= 1e-3

    # time-stepper self-convergence
    grid = Grid(2, 64)
    physics = PhysicsParams(0.01, 0.01)
    T = 0.4

    def final(dt):
        cfg = RunConfig(grid=grid, physics=physics, dt=dt, t_max=T,
                        ic=InitialCondition("orszag_tang"))
        for _, s in iter_states(cfg):
            pass
        return s

    ref = final(T / 320)
    errs = []
    for m in (20, 40, 80):
        s = final(T / m)
        errs.append(l2_norm_spectral(s.u - ref.u) + l2_norm_spectral(s.b - ref.b))
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    assert min(orders) >= 3.8

    # single-mode diffusion is exact
    x = grid.coords
    u = from_physical(grid, np.stack([np.sin(3 * x[1]), np.zeros(grid.shape)]),
                      divergence_free=True)
    st = MHDState(u=u, b=zero_field(grid, 2), t=0.0)
    out = step(st, PhysicsParams(0.8, 0.0), 5e-3)
    decay = math.exp(-0.8 * 9.0 * 5e-3)
    diffusion_err = float(np.max(np.abs(out.u.data - decay * st.u.data)))
    assert diffusion_err <= 1e-12

    print(f"\nACCEPTANCE 5: solver physics PASS "
          f"(ideal drift {energy_drift:.2e}/{cross_drift:.2e}, "
          f"budget residual {ot_base.budget_residual:.2e}, "
          f"order {min(orders):.2f}, diffusion err {diffusion_err:.2e})")


def test_criterion_6_envelope_stability(ot_base, ot_dt_half, ot_n512):
    """Fitted Gronwall constants finite and stable under refinement."""
    assert ot_base.runtime <= 600.0
    for tag, env in (("case1", "env1"), ("case2", "env2")):
        base = getattr(ot_base, env)
        half = getattr(ot_dt_half, env)
        fine = getattr(ot_n512, env)
        assert base.satisfied and math.isfinite(base.c_fit)
        drift_dt = abs(half.c_fit - base.c_fit) / base.c_fit
        drift_n = abs(fine.c_fit - base.c_fit) / base.c_fit
        assert drift_dt <= 0.20, f"{tag}: dt-halving drift {drift_dt:.1%}"
        assert drift_n <= 0.20, f"{tag}: n-doubling drift {drift_n:.1%}"
    print(f"\nACCEPTANCE 6: envelope stability PASS "
          f"(C1={ot_base.env1.c_fit:.4f}, C2={ot_base.env2.c_fit:.4f}, "
          f"stable under dt/2 and 2n; base runtime {ot_base.runtime:.0f}s)")


def test_criterion_7_dyadic_energy_consistency(ot_base, ot_dt_half, ot_n512, ideal_run):
    """Band-energy sums track the total energy; low modes stay bounded."""
    worst_lo, worst_hi = math.inf, 0.0
    for run in (ot_base, ot_dt_half, ot_n512, ideal_run):
        worst_lo = min(worst_lo, float(np.min(run.ratios)))
        worst_hi = max(worst_hi, float(np.max(run.ratios)))
        assert np.all(run.ratios >= 1.0 / 3.0)
        assert np.all(run.ratios <= 3.0)
    # low-mode bound along the viscous runs with the energy-budget constant
    for run in (ot_base, ot_dt_half, ot_n512):
        assert np.all(run.low_modes <= math.sqrt(2.0) * run.e0_sum)
    print(f"\nACCEPTANCE 7: dyadic energy consistency PASS "
          f"(sum ratio within [{worst_lo:.3f}, {worst_hi:.3f}], low-mode bound held)")


RUN_CFG = """
grid.dims = 2
grid.n = 64
physics.nu = 0.02
physics.eta = 0.02
time.dt = 2e-3
time.t_max = 0.05
ic.kind = random_band
ic.seed = 3
ic.u_rms = 0.4
ic.b_rms = 0.2
output.diag_every = 5
output.checkpoint_every = 5
criterion.s = 0
criterion.p = inf
"""

BLOWUP_CFG = """
grid.dims = 2
grid.n = 64
time.dt = 0.2
time.t_max = 40
time.cfl = 1.0
ic.kind = orszag_tang
ic.amplitude = 8
ic.b_amplitude = 8
output.diag_every = 5
"""


def test_criterion_8_end_to_end(tmp_path):
    """Byte-identical reruns, offline/in-run agreement, blow-up signalling."""
    cfg = tmp_path / "run.cfg"
    cfg.write_text(RUN_CFG)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["run", "--config", str(cfg), "--out", str(out1)]) == 0
    assert main(["run", "--config", str(cfg), "--out", str(out2)]) == 0
    data_files = ["report.csv", "report.ndjson", "diagnostics.ndjson"]
    data_files += sorted(p.name for p in out1.glob("*.ckpt"))
    for name in data_files:
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name

    dest = tmp_path / "analysis.csv"
    assert main(["analyze", "--glob", str(out1 / "checkpoint_*.ckpt"),
                 "--criterion", "s=0,p=inf", "--out", str(dest)]) == 0
    with open(out1 / "report.csv") as fh:
        run_rows = {row["t"]: row for row in csv.DictReader(fh)}
    with open(dest) as fh:
        ana_rows = list(csv.DictReader(fh))
    assert len(ana_rows) == len(run_rows)
    worst = 0.0
    for row in ana_rows:
        ref = run_rows[row["t"]]
        for key in row:
            if key != "t":
                a, b = float(row[key]), float(ref[key])
                worst = max(worst, abs(a - b) / max(abs(b), 1.0))
    assert worst <= 1e-12

    blow_cfg = tmp_path / "blow.cfg"
    blow_cfg.write_text(BLOWUP_CFG)
    with pytest.warns(RuntimeWarning):
        code = main(["run", "--config", str(blow_cfg), "--out", str(tmp_path / "c")])
    assert code == 3
    diag = (tmp_path / "c" / "diagnostics.ndjson").read_text().splitlines()
    assert any(json.loads(line)["name"] == "blow_up_peak" for line in diag)
    print(f"\nACCEPTANCE 8: end-to-end PASS "
          f"(byte-identical reruns, offline agreement {worst:.1e}, blow-up exit 3)")
