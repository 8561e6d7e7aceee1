"""Command-line interface.

Subcommands: run (one simulation), sweep (a parameter grid), analyze (fits
and knee detection on a results CSV, with figures), couplings (print the
coupling and J tables for a geometry), hopping (the k(ell) estimate).

Exit statuses: 0 success, 1 usage, 2 validation, 3 runtime failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np

from . import io, plotting
from .analysis import (
    detect_knee,
    fit_exponential,
    fit_power_law,
    hopping_curve,
    tau_sync,
)
from .config import ConfigError, parse_config, sweep_grid_to_fields
from .lattice import (
    DIRECTIONS,
    GeometryParams,
    compute_coupling_table,
    coupling_rows,
    spin_couplings,
)
from .simulation import SimConfig, point_seed, run as run_simulation, sweep as run_sweep

EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits 2; usage errors are 1 here
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _add_override_flags(sub):
    sub.add_argument("--k", type=float, help="hopping amplitude in V0 units")
    sub.add_argument("--L", type=int, dest="length", help="lattice length (rows)")
    sub.add_argument("--N", type=int, dest="threshold", help="cluster threshold")
    sub.add_argument("--P0", type=float, dest="p0", help="reset-zone bound")
    sub.add_argument("--init", choices=("US", "SS", "RIS", "RCS"))
    sub.add_argument("--rule", choices=("LR", "GR"))
    sub.add_argument("--seed", type=int)
    sub.add_argument("--t-total", type=int, dest="t_total", help="steps")
    sub.add_argument("--eps", type=float, help="dielectric constant (output only)")


def _load(args) -> tuple:
    text = Path(args.config).read_text()
    parsed = parse_config(text)
    overrides = {name: getattr(args, name) for name in
                 ("k", "length", "threshold", "p0", "init", "rule", "seed",
                  "t_total", "eps")
                 if getattr(args, name, None) is not None}
    if overrides:
        parsed.sim = dataclasses.replace(parsed.sim, **overrides)
    table = parsed.couplings
    if table is None:
        table = compute_coupling_table(parsed.geometry or GeometryParams())
    return parsed, table


def _cmd_run(args) -> int:
    parsed, table = _load(args)
    out = Path(args.out or parsed.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = io.build_manifest(parsed.sim)
    result = run_simulation(parsed.sim, table=table)
    io.write_manifest(manifest, out / "manifest.json")
    io.write_results_csv([result], out / "results.csv", manifest, parsed.sim.eps)
    io.write_events_csv(result, out / "events.csv", manifest)
    if result.trajectory:
        io.write_trajectory_csv(result, out / "trajectory.csv", manifest)
        plotting.plot_trajectory(result.trajectory, out / "trajectory.png")
    tau = "censored (no reductions observed)" if result.censored \
        else f"{result.tau_t0!r} t0 = {result.tau_seconds!r} s (eps={parsed.sim.eps})"
    print(f"M_N = {result.m_n}, tau_N = {tau}")
    print(f"wrote {out}/results.csv, events.csv, manifest.json")
    return 0


def _cmd_sweep(args) -> int:
    parsed, table = _load(args)
    grid = sweep_grid_to_fields(parsed.sweep_grid)
    if not grid and parsed.sweep_seeds <= 1:
        print("config has no [sweep] section to execute", file=sys.stderr)
        return EXIT_VALIDATION
    # the seed axis is explicit: the same derived seeds repeat at every grid
    # point, so points differing only in physics parameters share initial states
    grid["seed"] = [point_seed(parsed.sim.seed, r) for r in range(parsed.sweep_seeds)]
    out = Path(args.out or parsed.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = io.build_manifest(parsed.sim, extra={"sweep_grid": {
        k: list(v) for k, v in grid.items()}})
    io.write_manifest(manifest, out / "manifest.json")
    results_path = out / "results.csv"
    if results_path.exists():
        results_path.unlink()
    failures = 0
    for point in run_sweep(parsed.sim, grid, table=table, derive_seeds=False):
        if point.result is None:
            failures += 1
            print(f"point {point.index} failed: {point.error}", file=sys.stderr)
            continue
        io.append_result_csv(point.result, results_path, manifest, parsed.sim.eps)
    print(f"wrote {results_path}")
    if failures:
        print(f"{failures} grid point(s) failed", file=sys.stderr)
        return EXIT_RUNTIME
    return 0


def _mean_tau_by(rows: list[dict], key: str) -> list[tuple[float, float | None]]:
    """Collapse seeds: mean tau_t0 per distinct value of `key` (None if all
    runs at that value were censored)."""
    groups: dict[float, list] = {}
    for row in rows:
        groups.setdefault(row[key], []).append(row)
    points = []
    for value in sorted(groups):
        taus = [r["tau_t0"] for r in groups[value] if not r["censored_flag"]]
        points.append((value, float(np.mean(taus)) if taus else None))
    return points


def _cmd_analyze(args) -> int:
    rows = io.read_results_csv(args.results, force=args.force)
    if not rows:
        print("no result rows found", file=sys.stderr)
        return EXIT_VALIDATION
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    mode = args.mode
    n_values = {r["N"] for r in rows}
    k_values = {r["k_over_V0"] for r in rows}
    if mode == "auto":
        mode = "knee" if len(k_values) > 1 else "laws"
    p0 = rows[0]["P0"]
    fit_range = None
    if args.nmin is not None or args.nmax is not None:
        fit_range = (args.nmin or 0.0, args.nmax or float("inf"))

    if mode == "knee":
        points = _mean_tau_by(rows, "k_over_V0")
        knee = detect_knee(points, p0, deviation_threshold=args.knee_threshold)
        io.write_xy(((k, t) for k, t in points), out / "tau_vs_k.dat",
                    comment="k_over_V0 tau_t0")
        io.write_fit_report([], out / "fits.json",
                            extras={"mode": "knee", "P0": p0, "k_a": knee})
        plotting.plot_tau_vs_k(points, p0, out / "tau_vs_k.png", knee=knee,
                               title=f"P0 = {p0}")
        print("k_a =", "none (single-body throughout)" if knee is None else repr(knee))
        return 0

    points = _mean_tau_by(rows, "N")
    fits = []
    for name, fitter in (("power", fit_power_law), ("exponential", fit_exponential)):
        if mode in (name, "laws"):
            try:
                fits.append(fitter(points, fit_range))
            except ValueError as exc:
                print(f"{name} fit skipped: {exc}", file=sys.stderr)
    io.write_xy(points, out / "tau_vs_n.dat", comment="N tau_t0")
    ts = tau_sync(rows[0]["k_over_V0"], p0) if len(k_values) == 1 else None
    io.write_fit_report(fits, out / "fits.json", extras={"mode": mode, "P0": p0})
    plotting.plot_tau_vs_n(points, fits, out / "tau_vs_n.png", tau_sync_value=ts,
                           title=f"k = {rows[0]['k_over_V0']} V0, P0 = {p0}")
    for fit in fits:
        print(f"{fit.model}: amplitude = {fit.amplitude!r} +- {fit.amplitude_err!r}, "
              f"exponent = {fit.exponent!r} +- {fit.exponent_err!r}, "
              f"rms log-residual = {fit.residual!r}")
    return 0


def _cmd_couplings(args) -> int:
    geom = GeometryParams(a_long=args.a_long, a_trans=args.a_trans,
                          pitch_up=args.pitch_up, pitch_down=args.pitch_down,
                          d=args.d)
    table = compute_coupling_table(geom)
    spins = spin_couplings(table, args.k)
    lines = ["direction,gamma,gamma_prime,R_nm,V_over_V0"]
    for row in coupling_rows(table):
        lines.append(",".join(io._fmt(x) for x in row))
    print("\n".join(lines))
    print()
    print("J per direction (hbar^-2 V0):")
    for name, j in zip(DIRECTIONS, spins.j):
        print(f"  {name:2s}  {j!r}")
    print(f"B_x = {spins.b_x!r}, B_z = {spins.b_z!r}")
    print(f"mean |dV|/(V+V) ratio = {table.mean_delta_v_ratio()!r}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "couplings.csv").write_text("\n".join(lines) + "\n")
        print(f"wrote {out}/couplings.csv")
    return 0


def _cmd_hopping(args) -> int:
    ells = np.linspace(args.lmin, args.lmax, args.num)
    curve = hopping_curve(ells, d=args.d)
    print("ell_nm k_over_V0")
    for ell, k in curve:
        print(f"{ell!r} {k!r}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        io.write_xy(curve, out / "hopping.dat", comment="ell_nm k_over_V0")
        plotting.plot_hopping_curve(curve, out / "hopping.png")
        print(f"wrote {out}/hopping.dat and hopping.png")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="mtreduce", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one simulation")
    p_run.add_argument("-c", "--config", required=True)
    p_run.add_argument("--out", help="output directory (default from config)")
    _add_override_flags(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="execute a parameter grid")
    p_sweep.add_argument("-c", "--config", required=True)
    p_sweep.add_argument("--out", help="output directory (default from config)")
    _add_override_flags(p_sweep)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_an = sub.add_parser("analyze", help="fit scaling laws / detect the knee")
    p_an.add_argument("results", nargs="+", help="results CSV file(s)")
    p_an.add_argument("--mode", choices=("auto", "power", "exponential", "laws", "knee"),
                      default="auto")
    p_an.add_argument("--out", default="analysis")
    p_an.add_argument("--nmin", type=float, help="lower fit-window bound on N")
    p_an.add_argument("--nmax", type=float, help="upper fit-window bound on N")
    p_an.add_argument("--knee-threshold", type=float, default=0.2,
                      help="relative deviation from tau_sync marking the knee")
    p_an.add_argument("--force", action="store_true",
                      help="allow mixing results from different manifests")
    p_an.set_defaults(func=_cmd_analyze)

    p_cp = sub.add_parser("couplings", help="print coupling and J tables")
    p_cp.add_argument("--a-long", type=float, default=8.0)
    p_cp.add_argument("--a-trans", type=float, default=5.0)
    p_cp.add_argument("--pitch-up", type=float, default=4.9)
    p_cp.add_argument("--pitch-down", type=float, default=-3.1)
    p_cp.add_argument("--d", type=float, default=4.0)
    p_cp.add_argument("--k", type=float, default=0.1)
    p_cp.add_argument("--out")
    p_cp.set_defaults(func=_cmd_couplings)

    p_hp = sub.add_parser("hopping", help="hydrogen-like k(ell) estimate")
    p_hp.add_argument("--lmin", type=float, default=0.5)
    p_hp.add_argument("--lmax", type=float, default=3.0)
    p_hp.add_argument("--num", type=int, default=26)
    p_hp.add_argument("--d", type=float, default=4.0)
    p_hp.add_argument("--out")
    p_hp.set_defaults(func=_cmd_hopping)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, io.MixedManifestError, ValueError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    raise SystemExit(main())
