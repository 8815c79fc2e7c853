"""Command-line front end.

Every subcommand reads one JSON config and writes CSV (or JSON) to the
``output`` path in the config, or to stdout.  Floats are written with 17
significant digits so reruns diff byte-for-byte; complex numbers become
``re``/``im`` column pairs and caustic nodes carry the marker ``singular``
instead of a number.

Exit codes: 0 success, 2 config error, 3 a validation check failed.
``POWERWALL_THREADS`` sets the worker count for grid evaluation.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Iterable, List, Optional, Sequence

import numpy as np

from . import __version__
from .caustics import AXES, trace_slice
from .classical_paths import enumerate_paths
from .domain import BoundaryProblem, NoPath, PathType, Potential
from .hypothesis import GridSpec, Window, opnorm_scan, scan_residual
from .neumann import NeumannQuadrature, firstbound_envelope, first_order_term
from .propagators import exact_reference, k_free, k_scl_grid
from .scl_terms import scl_term
from .validation import run_all

SINGULAR = "singular"
EXIT_OK, EXIT_CONFIG, EXIT_VALIDATION = 0, 2, 3


class ConfigError(ValueError):
    """Bad config; the message names the file and the offending line or field."""


# -- config helpers ---------------------------------------------------------------

def load_config(path: Optional[str]) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return cfg


class Fields:
    """Typed access to a config object with dotted field names in errors."""

    def __init__(self, data: Any, source: str, prefix: str = ""):
        if not isinstance(data, dict):
            raise ConfigError(f"{source}: field '{prefix or '<root>'}' must be an object")
        self.data, self.source, self.prefix = data, source, prefix

    def name(self, key: str) -> str:
        return f"{self.prefix}.{key}" if self.prefix else key

    def fail(self, key: str, msg: str):
        raise ConfigError(f"{self.source}: field '{self.name(key)}': {msg}")

    def has(self, key: str) -> bool:
        return key in self.data

    def raw(self, key: str, default: Any = ...):
        if key not in self.data:
            if default is ...:
                self.fail(key, "missing")
            return default
        return self.data[key]

    def sub(self, key: str, optional: bool = False) -> "Fields":
        val = self.raw(key, {} if optional else ...)
        return Fields(val, self.source, self.name(key))

    def number(self, key: str, default: Any = ..., positive: bool = False) -> float:
        val = self.raw(key, default)
        if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val):
            self.fail(key, f"expected a finite number, got {val!r}")
        if positive and not val > 0:
            self.fail(key, f"must be positive, got {val!r}")
        return float(val)

    def integer(self, key: str, default: Any = ..., minimum: int = 0) -> int:
        val = self.raw(key, default)
        if isinstance(val, bool) or not isinstance(val, int) or val < minimum:
            self.fail(key, f"expected an integer >= {minimum}, got {val!r}")
        return int(val)

    def boolean(self, key: str, default: Any = ...) -> bool:
        val = self.raw(key, default)
        if not isinstance(val, bool):
            self.fail(key, f"expected true or false, got {val!r}")
        return val

    def pair(self, key: str, default: Any = ...) -> tuple:
        val = self.raw(key, default)
        if (not isinstance(val, (list, tuple)) or len(val) != 2
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v) for v in val)
                or val[0] > val[1]):
            self.fail(key, f"expected [low, high] with low <= high, got {val!r}")
        return (float(val[0]), float(val[1]))

    def axis(self, key: str) -> np.ndarray:
        """A number, a list of numbers, or {"start", "stop", "num"}."""
        val = self.raw(key)
        if isinstance(val, (int, float)) and not isinstance(val, bool):
            return np.array([self.number(key)])
        if isinstance(val, list):
            if not all(isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v) for v in val):
                self.fail(key, "list entries must be finite numbers")
            return np.array(val, dtype=float)
        if isinstance(val, dict):
            f = Fields(val, self.source, self.name(key))
            start, stop = f.number("start"), f.number("stop")
            num = f.integer("num", minimum=0)
            return np.linspace(start, stop, num)
        self.fail(key, "expected a number, a list, or {start, stop, num}")


def potential_from(cfg: Fields) -> Potential:
    f = cfg.sub("potential")
    kind = f.raw("kind")
    if kind == "quadratic":
        return Potential.quadratic(f.number("omega", positive=True))
    if kind == "linear":
        return Potential.linear(f.number("k", positive=True))
    f.fail("kind", f"expected 'quadratic' or 'linear', got {kind!r}")


def thread_count() -> int:
    raw = os.environ.get("POWERWALL_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"POWERWALL_THREADS: expected a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"POWERWALL_THREADS: expected a positive integer, got {raw!r}")
    return n


def parallel_map(fn: Callable, items: Sequence) -> list:
    """Order-preserving map over a thread pool sized by POWERWALL_THREADS."""
    n = thread_count()
    if n == 1 or len(items) < 2:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# -- output -----------------------------------------------------------------------

def fmt(v) -> str:
    """17 significant digits; None -> empty; non-finite -> singular."""
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if not math.isfinite(v):
        return SINGULAR
    return "%.17g" % v


class Sink:
    """Destination named by the config's ``output`` field, or stdout."""

    def __init__(self, cfg: Fields):
        out = cfg.raw("output", None)
        if out is not None and not isinstance(out, str):
            cfg.fail("output", "expected a file path")
        self.path = out

    def write(self, text: str):
        if self.path is None:
            sys.stdout.write(text)
        else:
            with open(self.path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


# -- subcommands --------------------------------------------------------------------

PATH_COLUMNS = ("y", "x", "t", "type", "t1", "t2", "S", "A2", "maslov", "residual", "caustic")


def path_rows(bp: BoundaryProblem, p: Potential, special_speed: float = 1.0) -> List[tuple]:
    try:
        paths = enumerate_paths(bp, p, special_speed=special_speed)
    except NoPath:
        return []
    rows = []
    for path in paths:
        term = scl_term(path, p)
        special = path.path_type is PathType.B_SPECIAL
        caustic = special or term.singular
        rows.append((bp.y, bp.x, bp.t, path.path_type.value, path.t1, path.t2, term.S,
                     SINGULAR if caustic else term.A2, "" if caustic else term.maslov,
                     SINGULAR if caustic else term.residual, int(caustic)))
    return rows


def cmd_paths(cfg: Fields) -> int:
    p = potential_from(cfg)
    g = cfg.sub("grid")
    ys, xs, ts = g.axis("y"), g.axis("x"), g.axis("t")
    if np.any(ts <= 0):
        g.fail("t", "times must be positive")
    speed = cfg.number("special_speed", 1.0)
    points = [BoundaryProblem(float(y), float(x), float(t)) for y in ys for x in xs for t in ts]
    rows = [r for block in parallel_map(lambda bp: path_rows(bp, p, speed), points) for r in block]
    Sink(cfg).write(csv_text(PATH_COLUMNS, rows))
    return EXIT_OK


def cmd_propagator(cfg: Fields) -> int:
    p = potential_from(cfg)
    y = cfg.number("y")
    g = cfg.sub("grid")
    xs, ts = g.axis("x"), g.axis("t")
    if np.any(ts <= 0):
        g.fail("t", "times must be positive")
    exact = cfg.boolean("exact", False)

    def row_block(t):
        val, sing = k_scl_grid(p, xs, y, t)
        out = []
        for j, x in enumerate(xs):
            bp = BoundaryProblem(y, float(x), float(t))
            try:
                types = "+".join(q.path_type.value for q in enumerate_paths(bp, p))
            except NoPath:
                types = ""
            if sing[j]:
                row = [x, t, SINGULAR, SINGULAR, types, 1]
            else:
                row = [x, t, val[j].real, val[j].imag, types, 0]
            if exact:
                kf = complex(k_free(x, y, t))
                try:
                    kw = complex(exact_reference(p, x, y, t))
                except ZeroDivisionError:
                    kw = complex(math.nan, math.nan)
                row += [kf.real, kf.imag, kw.real, kw.imag]
            out.append(row)
        return out

    header = ["x", "t", "re", "im", "terms", "singular"]
    if exact:
        header += ["free_re", "free_im", "whole_line_re", "whole_line_im"]
    rows = [r for block in parallel_map(row_block, list(ts)) for r in block]
    Sink(cfg).write(csv_text(header, rows))
    return EXIT_OK


def cmd_caustics(cfg: Fields) -> int:
    p = potential_from(cfg)
    s = cfg.sub("slice")
    axes = s.raw("axes")
    if not (isinstance(axes, list) and len(axes) == 2 and all(a in AXES for a in axes) and axes[0] != axes[1]):
        s.fail("axes", f"expected two distinct names from {list(AXES)}, got {axes!r}")
    first, second = s.axis(axes[0]), s.axis(axes[1])
    fixed = s.number("fixed")
    try:
        pts = trace_slice(p, axes, first, second, fixed)
    except ValueError as exc:
        s.fail("fixed", str(exc))
    Sink(cfg).write(csv_text(["family", axes[0], axes[1]], ((q.family, q.first, q.second) for q in pts)))
    return EXIT_OK


def cmd_hypothesis(cfg: Fields) -> int:
    p = potential_from(cfg)
    w = cfg.sub("window")
    window = Window(w.pair("x"), w.pair("y"), w.pair("t"))
    if not window.t[0] > 0:
        w.fail("t", "times must be positive")
    g = cfg.sub("grid", optional=True)
    base = GridSpec()
    grid = GridSpec(nx=g.integer("nx", base.nx, 1), ny=g.integer("ny", base.ny, 1), nt=g.integer("nt", base.nt, 1),
                    levels=g.integer("levels", base.levels, 0), zoom_points=g.integer("zoom_points", base.zoom_points, 3))
    report = scan_residual(p, window, grid)
    if cfg.has("opnorm"):
        o = cfg.sub("opnorm")
        pairs = o.raw("pairs")
        if not isinstance(pairs, list) or not pairs:
            o.fail("pairs", "expected a non-empty list of [t, tau]")
        for i, pr in enumerate(pairs):
            if not (isinstance(pr, list) and len(pr) == 2 and all(isinstance(v, (int, float)) for v in pr)
                    and pr[0] > pr[1]):
                o.fail(f"pairs[{i}]", f"expected [t, tau] with t > tau, got {pr!r}")
        domain = o.pair("domain")
        n = o.raw("n", None)
        if n is not None:
            n = o.integer("n", minimum=2)
        opnorm_scan(p, [tuple(map(float, pr)) for pr in pairs], domain, n, report, tol=o.number("tol", 0.05))
    Sink(cfg).write(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_neumann1(cfg: Fields) -> int:
    p = potential_from(cfg)
    t = cfg.number("t", positive=True)
    xs = cfg.axis("x")
    ph = cfg.sub("phi")
    c, width, k0 = ph.number("center"), ph.number("width", positive=True), ph.number("momentum", 0.0)

    def phi(y):
        return np.exp(-((y - c) ** 2) / (4.0 * width ** 2) + 1j * k0 * y)

    q = cfg.sub("quadrature")
    quad = NeumannQuadrature(q.pair("x1_range"), q.pair("y_range"),
                             panels=q.integer("panels", 8, 1), order=q.integer("order", 8, 1),
                             outer_nodes=q.integer("outer_nodes", 48, 1), min_leg=q.number("min_leg", 0.02, True),
                             guard=q.number("guard", 1e-2), max_step=q.number("max_step", 0.05, True),
                             max_nodes=q.integer("max_nodes", 4000, 3))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = first_order_term(p, xs, t, phi, quad)
    for wmsg in caught:
        print(f"warning: {wmsg.message}", file=sys.stderr)
    Sink(cfg).write(csv_text(["x", "re", "im"], ((x, v.real, v.imag) for x, v in zip(res.x, res.value))))
    phi_norm = (2.0 * math.pi) ** 0.25 * math.sqrt(width)  # L2 norm of the unnormalised Gaussian
    summary = {"max_residual": res.max_residual, "excised_nodes": res.excised_nodes,
               "excised_weight": res.excised_weight, "cutoff_estimate": res.cutoff_estimate,
               "phi_norm": phi_norm}
    if cfg.has("bound"):
        b = cfg.sub("bound")
        summary["envelope"] = firstbound_envelope(b.number("D"), b.number("C"), t, phi_norm)
    print(json.dumps(summary, sort_keys=True), file=sys.stderr)
    return EXIT_OK


def cmd_validate(cfg: Fields) -> int:
    quick = cfg.boolean("quick", True)
    seed = cfg.integer("seed", 0)
    results = run_all(quick=quick, seed=seed)
    lines = [r.line() for r in results]
    if cfg.has("output"):
        Sink(cfg).write(json.dumps([{"name": r.name, "passed": r.passed, "samples": r.samples,
                                     "worst": r.worst, "tolerance": r.tolerance} for r in results],
                                   indent=2) + "\n")
    print("\n".join(lines))
    return EXIT_OK if all(r.passed for r in results) else EXIT_VALIDATION


COMMANDS = {
    "paths": (cmd_paths, "one row per classical path on a (y, x, t) grid"),
    "propagator": (cmd_propagator, "K_scl on an (x, t) grid at fixed y"),
    "caustics": (cmd_caustics, "caustic loci in a 2-D slice"),
    "hypothesis": (cmd_hypothesis, "residual and operator-norm scans as a JSON report"),
    "neumann1": (cmd_neumann1, "first Neumann correction for a Gaussian source"),
    "validate": (cmd_validate, "run the oracle cross-checks"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="powerwall", description="Semiclassical propagators for power walls.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("config", nargs="?" if name == "validate" else None, help="JSON config file")
        sp.add_argument("-o", "--output", help="override the config's output path")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    fn, _ = COMMANDS[args.command]
    source = args.config or "<defaults>"
    try:
        data = load_config(args.config)
        if args.output is not None:
            data["output"] = args.output
        return fn(Fields(data, source))
    except ConfigError as exc:
        print(f"powerwall: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
