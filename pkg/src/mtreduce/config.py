"""Plain-text sectioned key=value run configuration.

Grammar: `[section]` headers, `key = value` lines, `#` comments, blank lines
ignored.  Sections: [lattice], [geometry] or [couplings] (at most one; the
calibrated default geometry applies when neither is given), [dynamics],
[reduction], [run], [sweep], [output].  Unknown sections or keys are
rejected with line-numbered diagnostics.  Command-line flags override file
values.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lattice import DIRECTIONS, CouplingTable, GeometryParams
from .simulation import SimConfig

_SWEEP_KEYS = {"k": float, "N": int, "P0": float, "L": int,
               "init": str, "rule": str, "seed": int}
_SWEEP_TO_FIELD = {"k": "k", "N": "threshold", "P0": "p0", "L": "length",
                   "init": "init", "rule": "rule", "seed": "seed"}


class ConfigError(ValueError):
    """Configuration problem, with a line number when one applies."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


@dataclass
class ParsedConfig:
    """Everything a run or sweep needs: the validated SimConfig, the
    coupling source, the sweep grid, and output options."""

    sim: SimConfig
    geometry: GeometryParams | None = None
    couplings: CouplingTable | None = None
    sweep_grid: dict = field(default_factory=dict)
    sweep_seeds: int = 1
    output_dir: str = "out"


def _tokenize(text: str):
    """Yield (line_number, section, key, value) entries."""
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            yield lineno, section, None, None
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno)
        key, _, value = line.partition("=")
        if section is None:
            raise ConfigError("key=value line before any [section] header", lineno)
        yield lineno, section, key.strip(), value.strip()


_SECTIONS = {"lattice", "geometry", "couplings", "dynamics",
             "reduction", "run", "sweep", "output"}

_SCALAR_KEYS = {
    ("lattice", "L"): int,
    ("geometry", "a_long"): float,
    ("geometry", "a_trans"): float,
    ("geometry", "pitch_up"): float,
    ("geometry", "pitch_down"): float,
    ("geometry", "d"): float,
    ("dynamics", "k"): float,
    ("dynamics", "dt"): float,
    ("reduction", "P0"): float,
    ("reduction", "N"): int,
    ("reduction", "rule"): str,
    ("run", "init"): str,
    ("run", "t_total"): int,
    ("run", "seed"): int,
    ("run", "trajectory_stride"): int,
    ("run", "allow_out_of_range"): bool,
    ("sweep", "seeds"): int,
    ("output", "eps"): float,
    ("output", "dir"): str,
}


def _convert(kind, value: str, lineno: int):
    try:
        if kind is bool:
            if value.lower() in ("true", "yes", "1"):
                return True
            if value.lower() in ("false", "no", "0"):
                return False
            raise ValueError(value)
        return kind(value)
    except ValueError:
        raise ConfigError(f"cannot parse {value!r} as {kind.__name__}", lineno) from None


def parse_config(text: str) -> ParsedConfig:
    """Parse and fully validate a configuration document.

    Defaults: dt = 0.01 t0, eps = 10, rule = LR, init = RIS, t_total = 1e5
    steps, seed = 0.  The SimConfig constructor enforces the published
    parameter ranges unless [run] allow_out_of_range is set.
    """
    values: dict[tuple[str, str], object] = {}
    lines: dict[tuple[str, str], int] = {}
    coupling_rows: dict[str, np.ndarray] = {}
    sweep_grid: dict[str, list] = {}
    seen_sections: set[str] = set()

    for lineno, section, key, value in _tokenize(text):
        if section not in _SECTIONS:
            raise ConfigError(f"unknown section [{section}]", lineno)
        if key is None:
            seen_sections.add(section)
            continue
        if section == "couplings":
            if key not in DIRECTIONS:
                raise ConfigError(
                    f"unknown direction {key!r} in [couplings]; expected one of {DIRECTIONS}", lineno)
            parts = value.split()
            if len(parts) != 4:
                raise ConfigError(
                    f"direction {key} needs 4 values (V_aa V_ab V_ba V_bb), got {len(parts)}", lineno)
            coupling_rows[key] = np.array([_convert(float, p, lineno) for p in parts])
            continue
        if section == "sweep" and key != "seeds":
            if key not in _SWEEP_KEYS:
                raise ConfigError(f"unknown sweep key {key!r}", lineno)
            kind = _SWEEP_KEYS[key]
            sweep_grid[key] = [_convert(kind, p, lineno) for p in value.split()]
            continue
        if (section, key) not in _SCALAR_KEYS:
            raise ConfigError(f"unknown key {key!r} in section [{section}]", lineno)
        if (section, key) in values:
            raise ConfigError(f"duplicate key {key!r} in section [{section}]", lineno)
        values[(section, key)] = _convert(_SCALAR_KEYS[(section, key)], value, lineno)
        lines[(section, key)] = lineno

    if "geometry" in seen_sections and "couplings" in seen_sections:
        raise ConfigError("[geometry] and [couplings] are mutually exclusive")

    geometry = None
    couplings = None
    if "couplings" in seen_sections:
        missing = [d for d in DIRECTIONS if d not in coupling_rows]
        if missing:
            raise ConfigError(f"[couplings] is missing directions {missing}")
        couplings = CouplingTable(v=np.stack(
            [coupling_rows[d].reshape(2, 2) for d in DIRECTIONS]))
    elif "geometry" in seen_sections:
        try:
            geometry = GeometryParams(**{k: v for (s, k), v in values.items()
                                         if s == "geometry"})
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def get(section, key, default):
        return values.get((section, key), default)

    required = [("dynamics", "k"), ("lattice", "L"), ("reduction", "N"), ("reduction", "P0")]
    missing = [f"[{s}] {k}" for s, k in required if (s, k) not in values]
    if missing:
        raise ConfigError("missing required keys: " + ", ".join(missing))

    try:
        sim = SimConfig(
            k=get("dynamics", "k", None),
            length=get("lattice", "L", None),
            p0=get("reduction", "P0", None),
            threshold=get("reduction", "N", None),
            init=get("run", "init", "RIS"),
            rule=get("reduction", "rule", "LR"),
            t_total=get("run", "t_total", 100_000),
            dt=get("dynamics", "dt", 0.01),
            seed=get("run", "seed", 0),
            eps=get("output", "eps", 10.0),
            trajectory_stride=get("run", "trajectory_stride", 0),
            allow_out_of_range=get("run", "allow_out_of_range", False),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    return ParsedConfig(
        sim=sim,
        geometry=geometry,
        couplings=couplings,
        sweep_grid=sweep_grid,
        sweep_seeds=get("sweep", "seeds", 1),
        output_dir=get("output", "dir", "out"),
    )


def serialize_config(parsed: ParsedConfig) -> str:
    """Render a ParsedConfig back to config text; parse(serialize(p)) == p."""
    sim = parsed.sim
    out = []
    out.append("[lattice]")
    out.append(f"L = {sim.length}")
    if parsed.geometry is not None:
        g = parsed.geometry
        out.append("")
        out.append("[geometry]")
        out.append(f"a_long = {g.a_long!r}")
        out.append(f"a_trans = {g.a_trans!r}")
        out.append(f"pitch_up = {g.pitch_up!r}")
        out.append(f"pitch_down = {g.pitch_down!r}")
        out.append(f"d = {g.d!r}")
    if parsed.couplings is not None:
        out.append("")
        out.append("[couplings]")
        for d, name in enumerate(DIRECTIONS):
            row = " ".join(repr(float(x)) for x in parsed.couplings.v[d].ravel())
            out.append(f"{name} = {row}")
    out.append("")
    out.append("[dynamics]")
    out.append(f"k = {sim.k!r}")
    out.append(f"dt = {sim.dt!r}")
    out.append("")
    out.append("[reduction]")
    out.append(f"P0 = {sim.p0!r}")
    out.append(f"N = {sim.threshold}")
    out.append(f"rule = {sim.rule}")
    out.append("")
    out.append("[run]")
    out.append(f"init = {sim.init}")
    out.append(f"t_total = {sim.t_total}")
    out.append(f"seed = {sim.seed}")
    out.append(f"trajectory_stride = {sim.trajectory_stride}")
    out.append(f"allow_out_of_range = {str(sim.allow_out_of_range).lower()}")
    if parsed.sweep_grid or parsed.sweep_seeds != 1:
        out.append("")
        out.append("[sweep]")
        for key, vals in parsed.sweep_grid.items():
            out.append(f"{key} = " + " ".join(
                repr(v) if isinstance(v, float) else str(v) for v in vals))
        out.append(f"seeds = {parsed.sweep_seeds}")
    out.append("")
    out.append("[output]")
    out.append(f"eps = {sim.eps!r}")
    out.append(f"dir = {parsed.output_dir}")
    out.append("")
    return "\n".join(out)


def sweep_grid_to_fields(grid: dict[str, list]) -> dict[str, list]:
    """Translate config sweep keys (N, P0, L, ...) to SimConfig field names."""
    return {_SWEEP_TO_FIELD[k]: v for k, v in grid.items()}
