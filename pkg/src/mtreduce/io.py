"""Result files: manifest, results/events/trajectory CSVs, fit reports.

All CSVs are locale-independent with a fixed column order and full-precision
floats (repr).  Every data file opens with comment lines embedding the
manifest hash and the dielectric constant used for the seconds conversion,
so downstream analysis can refuse to mix incompatible runs.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
from pathlib import Path

from . import __version__
from .simulation import GENERATOR_NAME, RunResult, SweepPoint

RESULT_COLUMNS = (
    "k_over_V0", "L", "P0", "N", "init", "rule", "seed", "steps", "M_N",
    "tau_t0", "tau_sec_eps1", "censored_flag", "max_norm_drift", "energy_drift",
)
EVENT_COLUMNS = ("step", "t_R_t0", "rule", "cluster_size", "outcome_alpha_fraction")
TRAJECTORY_COLUMNS = ("step", "site", "occupation")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def build_manifest(config, extra: dict | None = None) -> dict:
    """Run manifest: full configuration, PRNG identity, build identifier,
    and the hash of all of that."""
    body = {
        "config": dataclasses.asdict(config),
        "generator": GENERATOR_NAME,
        "build": f"mtreduce {__version__}",
    }
    if extra:
        body.update(extra)
    digest = hashlib.sha256(
        json.dumps(body, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()
    body["manifest_sha256"] = digest
    return body


def write_manifest(manifest: dict, path: Path) -> None:
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _header_lines(manifest: dict, eps: float) -> list[str]:
    return [
        f"# manifest_sha256={manifest['manifest_sha256']}",
        f"# eps={_fmt(float(eps))}",
    ]


def result_row(result: RunResult) -> dict:
    cfg = result.config
    return {
        "k_over_V0": cfg.k, "L": cfg.length, "P0": cfg.p0, "N": cfg.threshold,
        "init": cfg.init, "rule": cfg.rule, "seed": cfg.seed, "steps": cfg.t_total,
        "M_N": result.m_n, "tau_t0": result.tau_t0,
        "tau_sec_eps1": None if result.tau_t0 is None else result.tau_t0 * 4.571e-16,
        "censored_flag": int(result.censored),
        "max_norm_drift": result.max_norm_drift,
        "energy_drift": result.energy_drift,
    }


def write_results_csv(results: list[RunResult], path: Path, manifest: dict, eps: float) -> None:
    rows = [result_row(r) for r in results]
    with open(path, "w", newline="") as fh:
        for line in _header_lines(manifest, eps):
            fh.write(line + "\n")
        writer = csv.writer(fh)
        writer.writerow(RESULT_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in RESULT_COLUMNS])


def append_result_csv(result: RunResult, path: Path, manifest: dict, eps: float) -> None:
    """Incremental writer used by sweeps so partial results survive failures."""
    new = not path.exists()
    with open(path, "a", newline="") as fh:
        if new:
            for line in _header_lines(manifest, eps):
                fh.write(line + "\n")
            csv.writer(fh).writerow(RESULT_COLUMNS)
        row = result_row(result)
        csv.writer(fh).writerow([_fmt(row[c]) for c in RESULT_COLUMNS])


def write_events_csv(result: RunResult, path: Path, manifest: dict) -> None:
    with open(path, "w", newline="") as fh:
        for line in _header_lines(manifest, result.config.eps):
            fh.write(line + "\n")
        writer = csv.writer(fh)
        writer.writerow(EVENT_COLUMNS)
        for ev in result.events:
            writer.writerow([ev.step, _fmt(ev.time), ev.rule, ev.size,
                             _fmt(ev.alpha_fraction)])


def write_trajectory_csv(result: RunResult, path: Path, manifest: dict) -> None:
    with open(path, "w", newline="") as fh:
        for line in _header_lines(manifest, result.config.eps):
            fh.write(line + "\n")
        writer = csv.writer(fh)
        writer.writerow(TRAJECTORY_COLUMNS)
        for step, occ in result.trajectory:
            for site, value in enumerate(occ):
                writer.writerow([step, site, _fmt(float(value))])


class MixedManifestError(ValueError):
    """Input files were produced under different manifests."""


def read_results_csv(paths, force: bool = False) -> list[dict]:
    """Read one or more results CSVs back into typed row dicts.

    Refuses to mix files with different manifest hashes unless force=True.
    """
    if isinstance(paths, (str, Path)):
        paths = [paths]
    rows: list[dict] = []
    hashes: set[str] = set()
    for path in paths:
        with open(path, newline="") as fh:
            header_lines = []
            while True:
                pos = fh.tell()
                line = fh.readline()
                if line.startswith("#"):
                    header_lines.append(line.strip())
                else:
                    fh.seek(pos)
                    break
            for line in header_lines:
                if line.startswith("# manifest_sha256="):
                    hashes.add(line.split("=", 1)[1])
            for rec in csv.DictReader(fh):
                rows.append(_type_result_row(rec))
    if len(hashes) > 1 and not force:
        raise MixedManifestError(
            f"inputs carry {len(hashes)} different manifest hashes; pass force to combine")
    return rows


def _type_result_row(rec: dict) -> dict:
    out = dict(rec)
    for key in ("k_over_V0", "P0", "tau_t0", "tau_sec_eps1", "max_norm_drift", "energy_drift"):
        out[key] = float(rec[key]) if rec.get(key) not in (None, "") else None
    for key in ("L", "N", "seed", "steps", "M_N", "censored_flag"):
        out[key] = int(rec[key])
    return out


def write_fit_report(fits: list, path: Path, extras: dict | None = None) -> None:
    """Fit results as a JSON report."""
    body = {"fits": [dataclasses.asdict(f) for f in fits]}
    if extras:
        body.update(extras)
    Path(path).write_text(json.dumps(body, indent=2) + "\n")


def write_xy(pairs, path: Path, comment: str = "") -> None:
    """Two-column whitespace export (gnuplot-ready)."""
    lines = []
    if comment:
        lines.append(f"# {comment}")
    for x, y in pairs:
        lines.append(f"{_fmt(float(x))} {_fmt(float(y)) if y is not None else 'nan'}")
    Path(path).write_text("\n".join(lines) + "\n")
