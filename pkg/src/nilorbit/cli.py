"""Command-line front end: JSON experiment configs in, CSV tables out.

Subcommands mirror the library surface: ``classify`` for the growth/condition
checkers, ``window`` for common-window plans, and ``orbit``, ``weyl``,
``discrepancy``, ``obstruction``, ``average`` as drivers over the orbit and
averaging engines.  Outputs are deterministic for a fixed config, seed and
precision regardless of worker count.

Exit codes: 0 ok, 2 config error, 3 precondition error, 4 precision cap
exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import jsonschema

from . import averages as avg
from . import hardy, orbits, windows
from .hardy import HardyParseError, PreconditionError, UnrepresentableCoefficient

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PRECONDITION = 3
EXIT_PRECISION = 4

_ENTRY = {"type": ["number", "string"]}
_TEST = {
    "type": "object",
    "properties": {
        "type": {"enum": ["one", "horizontal_character", "coordinate_character", "bump"]},
        "k": {"type": "array", "items": {"type": "integer"}},
        "m": {"type": "array", "items": {"type": "integer"}},
        "coords": {"type": "array", "items": {"type": "integer"}},
    },
    "required": ["type"],
    "additionalProperties": False,
}
CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "group": {
            "type": "object",
            "properties": {
                "dim": {"type": "integer", "minimum": 2},
                "blocks": {"type": "array", "items": {"type": "integer", "minimum": 2}},
            },
            "required": ["dim"],
            "additionalProperties": False,
        },
        "generators": {"type": "array", "items": {"type": "array", "items": _ENTRY}},
        "functions": {"type": "array", "items": {"type": "string"}},
        "base_point": {"type": "array", "items": _ENTRY},
        "floor_mode": {"enum": ["real", "floor"]},
        "N_grid": {"anyOf": [{"type": "string"},
                             {"type": "array", "items": {"type": "integer", "minimum": 1}}]},
        "tests": {"type": "array", "items": _TEST},
        "declared_closure": {"enum": ["full", "undeclared"]},
        "window": {"anyOf": [{"const": "auto"},
                             {"type": "object",
                              "properties": {"gamma": {"type": ["string", "number"]}},
                              "required": ["gamma"], "additionalProperties": False}]},
        "precision": {"enum": ["double", "dd"]},
        "seed": {"type": "integer"},
        "N_cap": {"type": "integer", "minimum": 1},
        "allow_beyond_cap": {"type": "boolean"},
    },
    "required": ["group", "generators", "functions"],
    "additionalProperties": False,
}


class ConfigError(ValueError):
    pass


def parse_grid(spec) -> tuple[int, ...]:
    """Grid forms: integer list, comma list ('1e3,1e4'), or 'a:b:decade'."""
    if isinstance(spec, (list, tuple)):
        return tuple(int(x) for x in spec)
    text = str(spec)
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3 or parts[2] != "decade":
            raise ConfigError(f"grid must be values or 'a:b:decade', got {spec!r}")
        a, b = (int(float(parts[0])), int(float(parts[1])))
        if a < 1 or b < a:
            raise ConfigError(f"bad grid range {spec!r}")
        grid = []
        n = a
        while n <= b:
            grid.append(n)
            n *= 10
        return tuple(grid)
    try:
        return tuple(int(float(x)) for x in text.split(","))
    except ValueError as e:
        raise ConfigError(f"bad grid {spec!r}: {e}") from e


def load_config(path: str) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}") from e
    try:
        jsonschema.validate(doc, CONFIG_SCHEMA)
    except jsonschema.ValidationError as e:
        raise ConfigError(f"config schema violation: {e.message}") from e
    return doc


def dump_config(doc: dict) -> str:
    """Canonical serialization; re-parses to an equal document."""
    return json.dumps(doc, indent=2, sort_keys=True)


def build_orbit_config(doc: dict) -> orbits.OrbitConfig:
    dim = doc["group"]["dim"]
    blocks = tuple(doc["group"].get("blocks", [dim]))
    try:
        functions = tuple(hardy.parse(s) for s in doc["functions"])
    except HardyParseError as e:
        raise ConfigError(f"bad function expression: {e}") from e
    gens = tuple(tuple(orbits.as_entry(v) for v in g) for g in doc["generators"])
    m = sum(b * (b - 1) // 2 for b in blocks)
    base = doc.get("base_point", [0] * m)
    try:
        return orbits.OrbitConfig(
            dim=dim, blocks=blocks, generators=gens, functions=functions,
            base_point=tuple(orbits.as_entry(v) for v in base),
            floor_mode=orbits.FloorMode(doc.get("floor_mode", "real")),
            precision=doc.get("precision", "dd"),
            n_cap=doc.get("N_cap", orbits.DEFAULT_N_CAP),
            allow_beyond_cap=doc.get("allow_beyond_cap", False),
        )
    except ValueError as e:
        if isinstance(e, PreconditionError):
            raise
        raise ConfigError(str(e)) from e


def build_window(doc: dict, cfg: orbits.OrbitConfig):
    """The window plan for the config's non-polynomial parts (None if none)."""
    snp = []
    for f in cfg.functions:
        _, rest = decompose_nontrivial(f)
        if rest is not None:
            snp.append(rest)
    if not snp:
        return None
    spec = doc.get("window", "auto")
    if spec == "auto":
        return windows.find_common_window(snp)
    gamma = Fraction(str(spec["gamma"]))
    orders = []
    for f in snp:
        k = windows.order_for_power(f, gamma)
        if k is None:
            raise PreconditionError(f"t^{gamma} is not admissible for {f}")
        orders.append(k)
    plan = windows.WindowPlan(hardy.HardyExpr.monomial(1, gamma), gamma,
                              tuple(orders), tuple(snp))
    if not plan.validate():
        raise PreconditionError(f"pinned gamma {gamma} fails membership")
    return plan


def decompose_nontrivial(f):
    """(poly part, snp part or None when sub-fractional/vanishing)."""
    poly, rest = hardy.decompose(f)
    if rest.is_zero:
        return poly, None
    g = hardy.classify(rest)
    if g.is_subfractional or g.tends_to is hardy.LimitKind.ZERO:
        return poly, None
    return poly, rest


def build_experiment(doc: dict) -> avg.AverageExperiment:
    cfg = build_orbit_config(doc)
    if len(cfg.blocks) == 1 and len(cfg.generators) != 1:
        raise ConfigError("average experiments pair one generator per block")
    tests = doc.get("tests")
    if tests is None:
        tests = [{"type": "one"}] * len(cfg.generators)
    if len(tests) != len(cfg.generators):
        raise ConfigError("need one test function per factor")
    factors = []
    pos = 0
    for i, b in enumerate(cfg.blocks):
        m = b * (b - 1) // 2
        factors.append(avg.Factor(
            block_dim=b,
            generator=cfg.generators[i],
            function=cfg.functions[i],
            base=cfg.base_point[pos:pos + m],
            test=orbits.make_test_function(tests[i], m, b - 1),
        ))
        pos += m
    return avg.AverageExperiment(
        factors=tuple(factors),
        floor_mode=cfg.floor_mode,
        declared_closure=doc.get("declared_closure", "undeclared"),
        n_grid=parse_grid(doc.get("N_grid", [10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6])),
        precision=cfg.precision,
        n_cap=cfg.n_cap,
        allow_beyond_cap=cfg.allow_beyond_cap,
    )


# --------------------------------------------------------------------------
# output helpers

def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_csv(path, header: list[str], rows: list[list]) -> None:
    text = ",".join(header) + "\n"
    for row in rows:
        text += ",".join(_fmt(x) for x in row) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def emit_plot_files(out: str, header: list[str], rows: list[list]) -> None:
    """Two-column `x y` files per statistic, x = first column."""
    stem = Path(out).with_suffix("")
    for col in range(1, len(header)):
        lines = [f"{_fmt(r[0])} {_fmt(r[col])}" for r in rows if r[col] != ""]
        Path(f"{stem}.{header[col]}.xy").write_text("\n".join(lines) + "\n")


# --------------------------------------------------------------------------
# subcommands

def cmd_classify(args) -> int:
    header = ["expression", "P1", "witness_epsilon", "P2", "P2_limit",
              "tends_to", "degree", "sublinear", "subfractional",
              "strongly_nonpolynomial", "mod1_class", "usable"]
    rows = []
    for text in args.expr:
        f = hardy.parse(text)
        p1 = hardy.check_P1(f)
        p2 = hardy.check_P2(f)
        g = hardy.classify(f)
        try:
            m = hardy.classify_mod1(f)
            mod1 = m.case.value
            usable = True
        except PreconditionError:
            mod1 = "unusable"
            usable = False
        rows.append([str(f), p1.holds, p1.witness_epsilon if p1.holds else "",
                     p2.holds, p2.limit_float() if p2.holds else "",
                     g.tends_to.value, g.polynomial_growth_degree, g.is_sublinear,
                     g.is_subfractional, g.is_strongly_nonpolynomial, mod1, usable])
    write_csv(args.out, header, rows)
    return EXIT_OK


def cmd_window(args) -> int:
    doc = load_config(args.config)
    cfg = build_orbit_config(doc)
    plan = build_window(doc, cfg)
    if plan is None:
        raise PreconditionError("config has no strongly non-polynomial parts to window")
    header = ["function", "order_k", "lower_exp", "lower_logexp",
              "upper_exp", "upper_logexp", "gamma", "member"]
    rows = []
    for f, k in zip(plan.inputs, plan.orders):
        b = windows.class_bounds(f, k)
        rows.append([str(f), k, str(b.lower[0]), str(b.lower[1]),
                     str(b.upper[0]), str(b.upper[1]), str(plan.gamma),
                     windows.member(plan.L, f, k)])
    write_csv(args.out, header, rows)
    if args.emit_plot and args.out:
        emit_plot_files(args.out, header, rows)
    return EXIT_OK


def _grid(args, doc) -> tuple[int, ...]:
    if args.N is not None:
        return parse_grid(args.N)
    return parse_grid(doc.get("N_grid", [10 ** 3, 10 ** 4, 10 ** 5, 10 ** 6]))


def cmd_orbit(args) -> int:
    doc = load_config(args.config)
    cfg = build_orbit_config(doc)
    N = max(_grid(args, doc))
    header = (["n"] + [f"coord_{i + 1}" for i in range(cfg.coords_dim)]
              + [f"horiz_{i + 1}" for i in range(cfg.horiz_dim)])
    sink = open(args.out, "w") if args.out else sys.stdout
    try:
        sink.write(",".join(header) + "\n")
        for ns, coords, horiz in orbits.iter_sample_chunks(cfg, 1, N, args.workers):
            lines = []
            for i in range(len(ns)):
                cells = ([str(int(ns[i]))] + [repr(float(x)) for x in coords[i]]
                         + [repr(float(x)) for x in horiz[i]])
                lines.append(",".join(cells))
            sink.write("\n".join(lines) + "\n")
    finally:
        if args.out:
            sink.close()
    return EXIT_OK


def _frequencies(args, doc, cfg) -> list[tuple[int, ...]]:
    if args.m:
        return [tuple(int(x) for x in args.m.split(","))]
    out = []
    for t in doc.get("tests", []):
        if t["type"] == "horizontal_character":
            out.append(tuple(t["k"]))
    if not out:
        raise ConfigError("no frequency given: pass --m or add horizontal_character tests")
    return out


def cmd_weyl(args) -> int:
    doc = load_config(args.config)
    cfg = build_orbit_config(doc)
    freqs = _frequencies(args, doc, cfg)
    header = ["N", "statistic", "value"]
    rows = []
    for m in freqs:
        label = "k" + "_".join(str(x) for x in m)
        for N in _grid(args, doc):
            s = orbits.weyl_sum(cfg, m, N, args.workers)
            rows.append([N, f"weyl_re_{label}", s.real])
            rows.append([N, f"weyl_im_{label}", s.imag])
            rows.append([N, f"weyl_abs_{label}", abs(s)])
    write_csv(args.out, header, rows)
    if args.emit_plot and args.out:
        _plot_by_statistic(args.out, rows)
    return EXIT_OK


def _plot_by_statistic(out: str, rows: list[list]) -> None:
    stem = Path(out).with_suffix("")
    by_stat: dict[str, list] = {}
    for N, stat, val in rows:
        by_stat.setdefault(stat, []).append((N, val))
    for stat, pts in by_stat.items():
        Path(f"{stem}.{stat}.xy").write_text(
            "\n".join(f"{n} {_fmt(v)}" for n, v in pts) + "\n")


def cmd_discrepancy(args) -> int:
    doc = load_config(args.config)
    cfg = build_orbit_config(doc)
    grid_res = args.grid or (8 if cfg.coords_dim >= 3 else 16)
    header = ["N", "statistic", "value"]
    rows = []
    for N in _grid(args, doc):
        d = orbits.orbit_discrepancy(cfg, N, grid_res, args.workers)
        rows.append([N, f"box_discrepancy_g{grid_res}", d])
    write_csv(args.out, header, rows)
    if args.emit_plot and args.out:
        _plot_by_statistic(args.out, rows)
    return EXIT_OK


def cmd_obstruction(args) -> int:
    doc = load_config(args.config)
    cfg = build_orbit_config(doc)
    plan = build_window(doc, cfg)
    header = ["N", "statistic", "value"]
    rows = []
    for N in _grid(args, doc):
        r = orbits.obstruction_search(cfg, plan, N, args.Mmax)
        rows.append([N, "min_cinfty_norm", r.min_norm])
        for j, kj in enumerate(r.argmin):
            rows.append([N, f"argmin_k{j + 1}", kj])
    write_csv(args.out, header, rows)
    if args.emit_plot and args.out:
        _plot_by_statistic(args.out, rows)
    return EXIT_OK


def cmd_average(args) -> int:
    doc = load_config(args.config)
    exp = build_experiment(doc)
    grid = parse_grid(args.grid) if args.grid else exp.n_grid
    series = avg.convergence_series(exp, grid, args.workers)
    header = ["N", "re(A_N)", "im(A_N)", "re(limit)", "im(limit)", "abs_err", "cauchy_inc"]
    rows = []
    for r in series.rows:
        rows.append([
            r.N, r.value.real, r.value.imag,
            r.limit.real if r.limit is not None else "",
            r.limit.imag if r.limit is not None else "",
            r.abs_err if r.abs_err is not None else "",
            r.cauchy_increment if r.cauchy_increment is not None else "",
        ])
    write_csv(args.out, header, rows)
    if args.emit_plot and args.out:
        emit_plot_files(args.out, header, rows)
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="nilorbit",
        description="Growth calculus and equidistribution diagnostics on nilmanifolds")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", help="run the (P1)/(P2) checkers on expressions")
    c.add_argument("expr", nargs="+")
    c.add_argument("--out", default=None)
    c.set_defaults(fn=cmd_classify)

    for name, fn, extra in [
        ("window", cmd_window, ()),
        ("orbit", cmd_orbit, ("N", "workers")),
        ("weyl", cmd_weyl, ("N", "workers", "m")),
        ("discrepancy", cmd_discrepancy, ("N", "workers", "grid")),
        ("obstruction", cmd_obstruction, ("N", "Mmax")),
        ("average", cmd_average, ("grid", "workers")),
    ]:
        s = sub.add_parser(name)
        s.add_argument("config")
        s.add_argument("--out", default=None)
        s.add_argument("--emit-plot", action="store_true", dest="emit_plot")
        if "N" in extra:
            s.add_argument("--N", default=None, help="grid: list '1e3,1e4' or 'a:b:decade'")
        if "grid" in extra and name == "discrepancy":
            s.add_argument("--grid", type=int, default=None, help="boxes per axis")
        if "grid" in extra and name == "average":
            s.add_argument("--grid", default=None, help="N grid, e.g. '1e3:1e6:decade'")
        if "workers" in extra:
            s.add_argument("--workers", type=int, default=1)
        if "m" in extra:
            s.add_argument("--m", default=None, help="frequency vector '1,0,0,1'")
        if "Mmax" in extra:
            s.add_argument("--Mmax", type=int, default=3)
            s.add_argument("--workers", type=int, default=1)
        s.set_defaults(fn=fn)
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, HardyParseError, UnrepresentableCoefficient) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except orbits.PrecisionCapError as e:
        print(f"precision cap: {e}", file=sys.stderr)
        return EXIT_PRECISION
    except (PreconditionError, windows.WindowSearchError) as e:
        print(f"precondition error: {e}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
