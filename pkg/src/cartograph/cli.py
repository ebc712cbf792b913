"""Configuration-driven command line front end.

Two subcommands:

``cartograph run <config.toml>``
    Build the region of the configured system, then write the region JSON
    document, a CSV table comparing reduced volumes against vertical slice
    lengths, and a schematic SVG.  ``--grid``, ``--tol``, ``--seed`` and
    ``--epsilon`` override the corresponding config keys.

``cartograph compare <a.json> <b.json>``
    Decide whether two region documents are equivalent up to a global shear
    and cut-direction flips, printing the witness when they are.

Exit codes: 0 success (or equivalent), 1 not equivalent, 2 validation error,
3 numerical failure, 4 I/O failure.  Failures also emit one machine-readable
JSON record on stderr.

Config files are TOML-style: top-level keys plus flat tables, e.g.::

    system = "coupled_m"
    epsilon = []

    [functions]
    chi = "default"
    h = "default"

    [grid]
    nx = 64
    ny = 32

    [mc]
    n_samples = 100000
    seed = 20240811

Function parameters are named built-ins or piecewise polynomials
(``{breakpoints = [...], coeffs = [[...], ...]}``) so configs stay
declarative and reproducible; identical configs produce byte-identical
outputs.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover - version dependent
    import tomli as tomllib

from .cartography import GridSpec, build_cartographic_region, partition_strips
from .errors import CartographError, ConvergenceError, DomainError, ValidationError
from .numerics import QuadratureSpec, mc_fiber_volume
from .regions import (
    CartographicRegion,
    equivalence_witness,
    region_from_json,
    region_to_json,
    slice_length,
)
from .systems import SemitoricSystem, make_system

EXIT_OK = 0
EXIT_NOT_EQUIVALENT = 1
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


@dataclass(frozen=True)
class RunConfig:
    """Validated contents of a run configuration."""

    system: str
    params: dict = field(default_factory=dict)
    epsilon: tuple[int, ...] = ()
    nx: int = 64
    ny: int = 32
    window: Optional[tuple[float, float]] = None
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    mc_samples: int = 0
    mc_seed: int = 20240811
    region_path: str = ""
    csv_path: str = ""
    svg_path: str = ""


def _parse_epsilon(value) -> tuple[int, ...]:
    if value is None:
        return ()
    if isinstance(value, str):
        tokens = [t for t in value.split(",") if t.strip()]
    else:
        tokens = list(value)
    out = []
    for t in tokens:
        if t in ("+", "+1", 1):
            out.append(1)
        elif t in ("-", "-1", -1):
            out.append(-1)
        else:
            raise ValidationError(f"cannot parse sign {t!r} (use +1/-1)")
    return tuple(out)


def parse_config(path: str | Path, overrides: Optional[dict] = None) -> RunConfig:
    """Read and validate a TOML run configuration."""
    raw_bytes = Path(path).read_bytes()
    try:
        doc = tomllib.loads(raw_bytes.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ValidationError(f"cannot parse config: {exc}") from exc
    overrides = overrides or {}

    if "system" not in doc:
        raise ValidationError("config is missing the 'system' key")
    system = str(doc["system"])
    functions = dict(doc.get("functions", {}))
    grid = dict(doc.get("grid", {}))
    quad = dict(doc.get("quadrature", {}))
    mc = dict(doc.get("mc", {}))
    outputs = dict(doc.get("outputs", {}))

    nx = int(overrides.get("nx", grid.get("nx", 64)))
    ny = int(overrides.get("ny", grid.get("ny", 32)))
    if nx < 16 or ny < 16:
        raise ValidationError("grid must be at least 16 x 16")
    window = grid.get("window")
    if window is not None:
        window = (float(window[0]), float(window[1]))
        if not window[0] < window[1]:
            raise ValidationError("grid window must be an increasing pair")

    tol = overrides.get("tol")
    abs_tol = float(tol if tol is not None else quad.get("abs_tol", 1e-10))
    rel_tol = float(tol if tol is not None else quad.get("rel_tol", 1e-10))

    eps = overrides.get("epsilon")
    epsilon = _parse_epsilon(eps if eps is not None else doc.get("epsilon", []))

    stem = Path(path).with_suffix("")
    return RunConfig(
        system=system,
        params=functions,
        epsilon=epsilon,
        nx=nx, ny=ny, window=window,
        abs_tol=abs_tol, rel_tol=rel_tol,
        mc_samples=int(mc.get("n_samples", 0)),
        mc_seed=int(overrides.get("seed", mc.get("seed", 20240811))),
        region_path=str(outputs.get("region", f"{stem}.region.json")),
        csv_path=str(outputs.get("csv", f"{stem}.volumes.csv")),
        svg_path=str(outputs.get("svg", f"{stem}.svg")),
    )


# ---------------------------------------------------------------------------
# outputs
# ---------------------------------------------------------------------------


def _fmt(v: float) -> str:
    if v == math.inf:
        return "inf"
    if v == -math.inf:
        return "-inf"
    return f"{v:.12g}"


def _volume_table(system: SemitoricSystem, region: CartographicRegion,
                  config: RunConfig, spec: QuadratureSpec) -> str:
    window = config.window if config.window is not None else system.metadata.default_window
    xs = np.linspace(window[0], window[1], config.nx + 2)[1:-1]
    skip = system.metadata.j_critical_values
    lines = ["x,reduced_volume,slice_length,abs_difference"]
    for x in xs:
        if any(abs(float(x) - c) < 1e-9 for c in skip):
            continue
        vol = system.reduced_volume(float(x), spec)
        sl = slice_length(region, float(x))
        if math.isinf(vol) and math.isinf(sl):
            diff = 0.0
        else:
            diff = abs(vol - sl)
        lines.append(f"{_fmt(float(x))},{_fmt(vol)},{_fmt(sl)},{_fmt(diff)}")
    return "\n".join(lines) + "\n"


def _svg_document(region: CartographicRegion, window: tuple[float, float]) -> str:
    """Schematic drawing: strip fills, boundary polylines, dashed cut
    half-lines, dots at focus values.  Primitive shapes only."""
    w_img, h_img, pad = 640.0, 420.0, 40.0
    finite_vals = [0.0]
    for s in region.strips:
        for x in s.probe_xs():
            for v in (s.lower.value_at(x), s.upper.value_at(x)):
                if math.isfinite(v):
                    finite_vals.append(v)
    for d in region.focus:
        finite_vals.append(d.y)
    y_lo, y_hi = min(finite_vals), max(finite_vals)
    span = max(y_hi - y_lo, 1e-9)
    y_lo -= 0.15 * span
    y_hi += 0.35 * span
    x_lo, x_hi = window

    def sx(x):
        return pad + (x - x_lo) / (x_hi - x_lo) * (w_img - 2 * pad)

    def sy(y):
        y = min(max(y, y_lo), y_hi)
        return pad + (y_hi - y) / (y_hi - y_lo) * (h_img - 2 * pad)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w_img:.0f}" '
        f'height="{h_img:.0f}" viewBox="0 0 {w_img:.0f} {h_img:.0f}">',
        f'<rect x="{pad:.1f}" y="{pad:.1f}" width="{w_img - 2 * pad:.1f}" '
        f'height="{h_img - 2 * pad:.1f}" fill="none" stroke="#999" stroke-width="1"/>',
    ]

    def poly(points, color, dashed, width=2.0):
        pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in points)
        dash = ' stroke-dasharray="6,4"' if dashed else ""
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                     f'stroke-width="{width:.1f}"{dash}/>')

    for s in region.strips:
        a = max(s.interval[0], x_lo)
        b = min(s.interval[1], x_hi)
        if b < a:
            continue
        if a == b:
            xs = [a]
        else:
            xs = list(np.linspace(a, b, 33))
        lower = [(x, s.lower.value_at(x)) for x in xs]
        upper = [(x, s.upper.value_at(x)) for x in xs]
        band = [(x, min(max(y, y_lo), y_hi)) for x, y in lower] + \
               [(x, min(max(y, y_lo), y_hi)) for x, y in reversed(upper)]
        pts = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in band)
        parts.append(f'<polygon points="{pts}" fill="#dce9f6" stroke="none"/>')
        if any(math.isfinite(y) for _, y in lower):
            poly(lower, "#1f4e8c", dashed=(s.lower_inclusion == "open"))
        if any(math.isfinite(y) for _, y in upper):
            poly(upper, "#1f4e8c", dashed=(s.upper_inclusion == "open"))

    for d in region.focus:
        y_end = y_hi if d.sign == 1 else y_lo
        poly([(d.x, d.y), (d.x, y_end)], "#b03030", dashed=True, width=1.5)
        parts.append(f'<circle cx="{sx(d.x):.2f}" cy="{sy(d.y):.2f}" r="4" fill="#b03030"/>')

    parts.append(f'<text x="{pad:.1f}" y="{h_img - 8:.1f}" font-size="12" '
                 f'fill="#333">x in [{x_lo:g}, {x_hi:g}], y in [{y_lo:.3g}, {y_hi:.3g}]</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def run(config: RunConfig) -> int:
    """Build the configured region and write the three output artifacts."""
    system = make_system(config.system, **config.params)
    spec = QuadratureSpec(abs_tol=config.abs_tol, rel_tol=config.rel_tol)
    grid = GridSpec(nx=config.nx, ny=config.ny, x_window=config.window)
    region = build_cartographic_region(system, config.epsilon, grid, spec)

    window = config.window if config.window is not None else system.metadata.default_window
    Path(config.region_path).write_text(region_to_json(region) + "\n")
    Path(config.csv_path).write_text(_volume_table(system, region, config, spec))
    Path(config.svg_path).write_text(_svg_document(region, window))

    if config.mc_samples:
        plan = partition_strips(system)
        checked = []
        for sp in plan.strips:
            a, b = sp.interval
            x = a if a == b else 0.5 * (max(a, window[0]) + min(b, window[1]))
            if any(abs(x - c) < 1e-9 for c in system.metadata.j_critical_values):
                continue
            vol = system.reduced_volume(x, spec)
            if not math.isfinite(vol):
                continue
            est = mc_fiber_volume(system, x, math.inf, config.mc_samples, config.mc_seed)
            if not est.within(vol):
                raise ConvergenceError(
                    f"Monte Carlo volume {est.value:.6g} +/- {est.stderr:.2g} at "
                    f"x={x:g} disagrees with quadrature {vol:.6g}")
            checked.append((x, est))
        for x, est in checked:
            print(f"mc check x={x:g}: {est.value:.6f} +/- {est.stderr:.6f} ({est.n_samples} samples)")

    print(f"wrote {config.region_path}, {config.csv_path}, {config.svg_path}")
    return EXIT_OK


def compare(path_a: str, path_b: str, tol: float = 1e-6) -> int:
    """Equivalence test between two serialized regions."""
    a = region_from_json(Path(path_a).read_text())
    b = region_from_json(Path(path_b).read_text())
    witness = equivalence_witness(a, b, tol)
    if witness is None:
        print("not equivalent")
        return EXIT_NOT_EQUIVALENT
    tau, signs, cut_powers = witness
    cuts = ", ".join(f"u={u} at x={x:g}" for x, u in sorted(cut_powers.items())) or "none"
    print(f"equivalent: shear k={tau.k}, translation c={tau.c:.9g}; "
          f"signs={list(signs)}; cut powers: {cuts}")
    return EXIT_OK


def _error_record(exc: Exception, code: int) -> int:
    record = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    print(json.dumps(record, sort_keys=True), file=sys.stderr)
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(prog="cartograph",
                                     description="cartographic invariants of "
                                                 "semitoric integrable systems")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="build a region from a config file")
    p_run.add_argument("config")
    p_run.add_argument("--grid", help="override grid as NXxNY, e.g. 128x64")
    p_run.add_argument("--tol", type=float, help="override quadrature tolerances")
    p_run.add_argument("--seed", type=int, help="override the Monte Carlo seed")
    p_run.add_argument("--epsilon", help="override cut signs, e.g. +,- or +1,-1")

    p_cmp = sub.add_parser("compare", help="equivalence test between two region files")
    p_cmp.add_argument("region_a")
    p_cmp.add_argument("region_b")
    p_cmp.add_argument("--tol", type=float, default=1e-6)

    args = parser.parse_args(argv)

    try:
        if args.command == "run":
            overrides = {}
            if args.grid:
                try:
                    nx, ny = args.grid.lower().split("x")
                    overrides["nx"], overrides["ny"] = int(nx), int(ny)
                except ValueError as exc:
                    raise ValidationError(f"cannot parse --grid {args.grid!r}") from exc
            if args.tol is not None:
                overrides["tol"] = args.tol
            if args.seed is not None:
                overrides["seed"] = args.seed
            if args.epsilon is not None:
                overrides["epsilon"] = args.epsilon
            config = parse_config(args.config, overrides)
            return run(config)
        return compare(args.region_a, args.region_b, args.tol)
    except (ValidationError, DomainError) as exc:
        return _error_record(exc, EXIT_VALIDATION)
    except ConvergenceError as exc:
        return _error_record(exc, EXIT_NUMERICAL)
    except CartographError as exc:
        return _error_record(exc, EXIT_NUMERICAL)
    except OSError as exc:
        return _error_record(exc, EXIT_IO)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
