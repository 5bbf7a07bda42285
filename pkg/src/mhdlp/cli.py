"""Batch front-end: run simulations with monitors, verify identities,
re-analyze checkpoints.

Exit-status contract: 0 ok, 2 config error, 3 blow-up, 4 I/O error;
verify suites return 1 on the first violated assertion.
"""

import argparse
import glob as globmod
import json
import math
import os
import sys
import time

from . import __version__
from .checkpoint import CheckpointError, read_checkpoint, write_checkpoint
from .config import ConfigError, parse_config
from .dyadic import DyadicFamily
from .monitor import (
    ScalarDiagnostic,
    TrajectoryMonitor,
    make_criterion_spec,
)
from .solver import BlowUpError, ideal_invariants, iter_states
from .suites import SUITES


def _diag_record(fh, t, name, value):
    fh.write(ScalarDiagnostic(t, name, float(value)).as_json() + "\n")


def cmd_run(args) -> int:
    try:
        parsed = parse_config(args.config)
        fam = DyadicFamily(parsed.run.grid)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    out_dir = args.out or "mhdlp_out"
    started = time.strftime("%Y-%m-%dT%H:%M:%S")
    outputs = []
    run = parsed.run
    monitor = TrajectoryMonitor(fam, parsed.criterion, rho=parsed.rho,
                                c_cap=parsed.c_cap)
    status = "ok"
    exit_code = 0
    try:
        os.makedirs(out_dir, exist_ok=True)
        diag_path = os.path.join(out_dir, "diagnostics.ndjson")
        bands = list(fam.bands())
        k_running = 0.0
        prev = None  # (t, besov^q) for the online criterion integral
        with open(diag_path, "w") as diag:
            outputs.append(diag_path)
            try:
                for i, state in iter_states(run):
                    is_last = i == run.n_steps
                    if i % run.diag_every == 0 or is_last:
                        monitor.observe(state)
                        inv = ideal_invariants(state)
                        t = state.t
                        _diag_record(diag, t, "energy", inv.energy)
                        _diag_record(diag, t, "cross_helicity", inv.cross_helicity)
                        _diag_record(diag, t, "magnetic_invariant", inv.magnetic_invariant)
                        f_row = monitor.f_rows[-1]
                        for k, v in zip(bands, f_row):
                            _diag_record(diag, t, f"F_{k}", float(v))
                        bq = monitor.besov_user[-1] ** parsed.criterion.q
                        if prev is not None:
                            k_running += 0.5 * (bq + prev[1]) * (t - prev[0])
                        prev = (t, bq)
                        _diag_record(diag, t, "besov", monitor.besov_user[-1])
                        _diag_record(diag, t, "K", k_running)
                    if run.checkpoint_every and (i % run.checkpoint_every == 0 or is_last):
                        ck = os.path.join(out_dir, f"checkpoint_{i:08d}.ckpt")
                        write_checkpoint(ck, state, run.physics)
                        outputs.append(ck)
            except BlowUpError as exc:
                peak = exc.peak if math.isfinite(exc.peak) else sys.float_info.max
                _diag_record(diag, exc.t, "blow_up_peak", peak)
                status = f"blow-up at t={exc.t:.6g}"
                exit_code = 3

        if len(monitor.times) >= 3:
            report = monitor.report()
            csv_path = os.path.join(out_dir, "report.csv")
            nd_path = os.path.join(out_dir, "report.ndjson")
            report.write_csv(csv_path)
            report.write_ndjson(nd_path)
            outputs.extend([csv_path, nd_path])

        manifest = {
            "config_hash": parsed.config_hash,
            "tool_version": __version__,
            "started": started,
            "finished": time.strftime("%Y-%m-%dT%H:%M:%S"),
            "status": status,
            "outputs": [os.path.basename(p) for p in outputs],
        }
        man_path = os.path.join(out_dir, "manifest.json")
        with open(man_path, "w") as fh:
            json.dump(manifest, fh, indent=2)
            fh.write("\n")
        for p in outputs:
            if not (os.path.exists(p) and os.path.getsize(p) > 0):
                print(f"I/O error: output {p} missing or empty", file=sys.stderr)
                return 4
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 4
    if exit_code:
        print(f"run aborted: {status}", file=sys.stderr)
    return exit_code


def cmd_verify(args) -> int:
    suite = SUITES[args.suite]
    results = suite(seed=args.seed, samples=args.samples)
    failed = False
    for res in results:
        print(res.line())
        if not res.passed and not failed:
            failed = True
            print(f"first violated assertion: {res.name}", file=sys.stderr)
    return 1 if failed else 0


def _parse_criterion(text: str):
    parts = dict(
        item.strip().split("=", 1) for item in text.split(",") if item.strip()
    )
    missing = {"s", "p"} - set(parts)
    if missing:
        raise ConfigError(f"--criterion needs s=<v>,p=<v>, missing {sorted(missing)}")
    s = float(parts["s"])
    p = math.inf if parts["p"].strip().lower() in ("inf", "infinity") else float(parts["p"])
    return make_criterion_spec(s, p)


def cmd_analyze(args) -> int:
    try:
        spec = _parse_criterion(args.criterion)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    paths = sorted(globmod.glob(args.glob))
    if not paths:
        print(f"no checkpoints match {args.glob!r}", file=sys.stderr)
        return 4
    try:
        loaded = [read_checkpoint(p) for p in paths]
    except (CheckpointError, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 4

    grids = {st.grid for st, _ in loaded}
    if len(grids) != 1:
        print("I/O error: checkpoints use mixed grids", file=sys.stderr)
        return 4

    states = sorted((st for st, _ in loaded), key=lambda s: s.t)
    try:
        fam = DyadicFamily(states[0].grid)
        monitor = TrajectoryMonitor(fam, spec, rho=args.rho, c_cap=args.c_cap)
        for st in states:
            monitor.observe(st)
        report = monitor.report()
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out = args.out or os.path.join(os.path.dirname(paths[0]) or ".", "analysis.csv")
    try:
        report.write_csv(out)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 4
    print(f"wrote {out} ({len(states)} states, C_fit={report.envelope.c_fit:.6g})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mhdlp",
        description="Pseudo-spectral MHD runs with dyadic regularity monitors",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate a config with monitors attached")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default=None)
    p_run.set_defaults(func=cmd_run)

    p_ver = sub.add_parser("verify", help="run a property suite at desk scale")
    p_ver.add_argument("--suite", required=True, choices=sorted(SUITES))
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.add_argument("--samples", type=int, default=20)
    p_ver.set_defaults(func=cmd_verify)

    p_an = sub.add_parser("analyze", help="recompute monitors from checkpoints")
    p_an.add_argument("--glob", required=True)
    p_an.add_argument("--criterion", required=True, help="s=<v>,p=<v>")
    p_an.add_argument("--rho", type=float, default=None)
    p_an.add_argument("--c-cap", dest="c_cap", type=float, default=1e6)
    p_an.add_argument("--out", default=None)
    p_an.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


def entry() -> None:
    sys.exit(main())
