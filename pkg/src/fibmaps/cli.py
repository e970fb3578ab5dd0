"""Command-line entry point: ``fibmaps <verb> [options]``.

Exit status: 0 success, 1 dynamics or invariant failure, 2 usage error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from . import report as rpt
from .complexext import (ComplexExtension, figure1_report, julia_set, puzzle_hierarchy,
                         rescale_piece)
from .conjugacy import conjugacy_report, smoothness_diagnostic
from .errors import DynamicsError
from .numerics import GOLDEN, PrecisionContext
from .renorm import build_hierarchy, scaling_table
from .thurston import MarkedTriple, iterate_to_fixed_point
from .unimodal import Family, family_by_name, format_real, locate_fibonacci_parameter

log = logging.getLogger("fibmaps")

FAMILIES = ("quadratic", "cubic")
PARTNERS = ("quadratic", "cubic", "affine")
# kneading depth beyond the number of renormalization levels
PARAMETER_MARGIN = 4
SHALLOW_DEPTH = 5


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    family: str = "quadratic"
    epsilon: float = 0.01
    depth: int = 12
    precision: int | None = None
    start_level: int = 4
    budget: int = 100_000
    out: str = "out"
    seed: int = 0
    gamma0: float = -0.5
    tol: float = 1e-30
    partner: str = "cubic"
    partner_epsilon: float = 0.01
    fit_from: int = 8

    def validate(self, command: str) -> None:
        if self.family not in FAMILIES:
            raise UsageError(f"unknown family {self.family!r}")
        if self.partner not in PARTNERS:
            raise UsageError(f"unknown partner {self.partner!r}")
        for name in ("depth", "start_level", "budget"):
            if getattr(self, name) <= 0:
                raise UsageError(f"{name} must be positive")
        if self.precision is not None and self.precision < 32:
            raise UsageError("precision must be at least 32 bits")
        if command == "figure1" and self.depth < self.start_level + 2:
            raise UsageError("figure1 needs depth >= start-level + 2")
        if not self.tol > 0:
            raise UsageError("tol must be positive")

    def bits(self) -> int:
        if self.precision is not None:
            return self.precision
        return auto_precision(self.depth)


def auto_precision(depth: int) -> int:
    if depth <= 11:
        return 128
    if depth <= 16:
        return 256
    return 512


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError(f"config {path}: expected a JSON object")
    known = {f.name for f in fields(RunConfig)}
    data = {k.replace("-", "_"): v for k, v in data.items()}
    unknown = sorted(set(data) - known)
    if unknown:
        raise UsageError(f"config {path}: unknown keys {unknown}")
    return data


def make_config(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config)
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            cfg[f.name] = v
    return RunConfig(**cfg)


# ------------------------------------------------------------------ commands

def _family(cfg: RunConfig) -> Family:
    return family_by_name(cfg.family, cfg.epsilon)


def _warn_shallow(depth: int) -> None:
    if depth < SHALLOW_DEPTH:
        log.warning("depth %d is shallow: the bracket is wide and the map only loosely Fibonacci", depth)


def _hierarchy(family: Family, levels: int, ctx: PrecisionContext, timings: dict):
    t0 = time.perf_counter()
    par = locate_fibonacci_parameter(family, levels + PARAMETER_MARGIN, ctx)
    timings["parameter"] = time.perf_counter() - t0
    f = par.make_map(family, ctx)
    t0 = time.perf_counter()
    hier = build_hierarchy(f, levels)
    timings["hierarchy"] = time.perf_counter() - t0
    return par, hier


def cmd_find_parameter(cfg: RunConfig, out: Path, timings: dict) -> list[Path]:
    _warn_shallow(cfg.depth)
    ctx = PrecisionContext(cfg.bits())
    t0 = time.perf_counter()
    par = locate_fibonacci_parameter(_family(cfg), cfg.depth, ctx)
    timings["parameter"] = time.perf_counter() - t0
    doc = {
        "family": cfg.family,
        "epsilon": cfg.epsilon if cfg.family == "cubic" else None,
        "depth": cfg.depth,
        "bits": par.bits,
        "value": format_real(par.value, ctx),
        "bracket": [format_real(par.bracket[0], ctx), format_real(par.bracket[1], ctx)],
        "width": par.width,
        "certificate": par.certificate,
    }
    print(f"t = {format_real(par.value, ctx, 30)}  bracket width {par.width:.3e}")
    return [rpt.write_json(out / "parameter.json", doc)]


def cmd_renorm(cfg: RunConfig, out: Path, timings: dict) -> list[Path]:
    _warn_shallow(cfg.depth)
    ctx = PrecisionContext(cfg.bits())
    par, hier = _hierarchy(_family(cfg), cfg.depth, ctx, timings)
    fit_from = min(cfg.fit_from, max(1, cfg.depth - 2))
    table = scaling_table(hier, fit_from=fit_from)
    rows = [(r.n, r.mu, r.ratio1, r.ratio3, r.time_central, r.time_side, r.sigma_side) for r in table.rows]
    paths = [rpt.write_csv(out / "scaling.csv",
                           ["n", "mu", "ratio1", "ratio3", "time_central", "time_side", "sigma_side"], rows)]
    summary = {
        "levels": hier.depth,
        "parameter": format_real(par.value, ctx),
        "bits": ctx.bits,
        "properties": "ok",
        "fit_range": list(table.fit_range),
        "slope": table.slope,
        "constant": table.constant,
    }
    paths.append(rpt.write_json(out / "renorm_summary.json", summary))
    paths += rpt.plot_scaling(table, out / "scaling")
    print(f"{hier.depth} levels, properties (i)-(iii) hold; slope {table.slope:.5f} over n = {table.fit_range}")
    return paths


def cmd_thurston(cfg: RunConfig, out: Path, timings: dict) -> list[Path]:
    ctx = PrecisionContext(cfg.precision or 128)
    t0 = time.perf_counter()
    try:
        run = iterate_to_fixed_point(MarkedTriple(cfg.gamma0, ctx), tol=cfg.tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    timings["iterate"] = time.perf_counter() - t0
    rows = [(k, format_real(g, ctx), r) for k, g, r in run.table()]
    paths = [rpt.write_csv(out / "thurston.csv", ["k", "gamma", "contraction_ratio"], rows)]
    paths += rpt.plot_thurston(run, out / "thurston")
    print(f"converged in {run.steps} steps to {format_real(run.limit.gamma, ctx, 25)}")
    return paths


def cmd_figure1(cfg: RunConfig, out: Path, timings: dict) -> list[Path]:
    if cfg.family != "quadratic":
        raise UsageError("figure1 uses the exact extension and needs --family quadratic")
    ctx = PrecisionContext(cfg.bits())
    _, hier = _hierarchy(_family(cfg), cfg.depth, ctx, timings)
    t0 = time.perf_counter()
    F = ComplexExtension(hier.f, "exact")
    pieces = puzzle_hierarchy(F, hier, cfg.start_level, cfg.depth)
    rescaled = [(p.level, rescale_piece(p)) for p in pieces[1:]]
    timings["pieces"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    julia = julia_set(-1, budget=cfg.budget, seed=cfg.seed)
    rep = figure1_report(rescaled, julia, samples=cfg.budget)
    timings["hausdorff"] = time.perf_counter() - t0
    piece_rows = [(z.real, z.imag, level) for level, poly in rescaled for z in poly.points]
    paths = [
        rpt.write_csv(out / "pieces.csv", ["re", "im", "level"], piece_rows),
        rpt.write_csv(out / "julia.csv", ["re", "im"], zip(julia.real, julia.imag)),
        rpt.write_csv(out / "hausdorff.csv",
                      ["level", "hausdorff", "piece_to_julia", "julia_to_piece", "spacing", "diameter"],
                      [(r.level, r.hausdorff, r.piece_to_julia, r.julia_to_piece, r.spacing, r.diameter)
                       for r in rep.rows]),
    ]
    paths += rpt.plot_figure1(rescaled[-1:], julia, GOLDEN, out / "figure1")
    paths += rpt.plot_figure1(rescaled, julia, GOLDEN, out / "figure1_levels")
    print(f"Hausdorff distances {['%.4f' % d for d in rep.distances]}; "
          f"longest decreasing run {rep.longest_decreasing_run}")
    return paths


def _partner(cfg: RunConfig, hier, ctx: PrecisionContext, timings: dict):
    if cfg.partner == "affine":
        t0 = time.perf_counter()
        h = build_hierarchy(hier.f.conjugate(0.5, 0.1, name="affine"), cfg.depth)
        timings["partner"] = time.perf_counter() - t0
        return h
    fam = family_by_name(cfg.partner, cfg.partner_epsilon)
    sub = {}
    _, h = _hierarchy(fam, cfg.depth, ctx, sub)
    timings.update({f"partner_{k}": v for k, v in sub.items()})
    return h


def cmd_conjugacy(cfg: RunConfig, out: Path, timings: dict) -> list[Path]:
    _warn_shallow(cfg.depth)
    ctx = PrecisionContext(cfg.bits())
    _, hier = _hierarchy(_family(cfg), cfg.depth, ctx, timings)
    hier_t = _partner(cfg, hier, ctx, timings)
    t0 = time.perf_counter()
    rep = conjugacy_report(hier, hier_t)
    diag = smoothness_diagnostic(rep, hier, hier_t)
    timings["diagnostics"] = time.perf_counter() - t0
    smooth = {
        "ratio_distortion": [{"n": n, "length": L, "value": v} for n, L, v in diag.ratio_distortion],
        "multiplier_shadowing": [{"length": L, "value": a, "value_t": b} for L, a, b in diag.multiplier_shadowing],
        "rho": [{"n": n, "eps": e, "rho": r, "difference": d} for n, e, r, d in diag.rho],
        "slopes": diag.slopes,
        "equivariance_failures": rep.equivariance_failures,
        "monotone": rep.monotone,
    }
    paths = [rpt.write_json(out / "conjugacy.json", rep.to_json_dict()),
             rpt.write_json(out / "smoothness.json", smooth)]
    paths += rpt.plot_conjugacy(rep, out / "conjugacy")
    worst = max((m for _, m in rep.qs), default=float("nan"))
    print(f"{len(rep.pairs)} matched points, max qs ratio {worst:.6f}, tau {rep.tau:.6f}")
    return paths


COMMANDS = {
    "find-parameter": cmd_find_parameter,
    "renorm": cmd_renorm,
    "thurston": cmd_thurston,
    "figure1": cmd_figure1,
    "conjugacy": cmd_conjugacy,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
    common.add_argument("--family", choices=FAMILIES)
    common.add_argument("--epsilon", type=float, help="perturbation size of the cubic family")
    common.add_argument("--depth", type=int, help="kneading depth (find-parameter) or number of levels")
    common.add_argument("--precision", type=int, help="working precision in bits (default: from depth)")
    common.add_argument("--start-level", dest="start_level", type=int, help="first puzzle level m")
    common.add_argument("--budget", type=int, help="Julia-set points and boundary samples")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int)
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="fibmaps", description="Fibonacci unimodal maps: parameters, "
                                "renormalization, pull-back iteration, puzzle pieces and conjugacies.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("find-parameter", parents=[common], help="locate the Fibonacci parameter")
    r = sub.add_parser("renorm", parents=[common], help="scaling table of the return-map hierarchy")
    r.add_argument("--fit-from", dest="fit_from", type=int)
    t = sub.add_parser("thurston", parents=[common], help="pull-back iteration on marked triples")
    t.add_argument("--gamma0", type=float)
    t.add_argument("--tol", type=float)
    sub.add_parser("figure1", parents=[common], help="puzzle pieces against the Julia set of z^2-1")
    c = sub.add_parser("conjugacy", parents=[common], help="conjugacy diagnostics between two maps")
    c.add_argument("--partner", choices=PARTNERS)
    c.add_argument("--partner-epsilon", dest="partner_epsilon", type=float)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        cfg = make_config(args)
        cfg.validate(args.command)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"fibmaps: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, TypeError) as exc:
        code = 3 if isinstance(exc, OSError) else 2
        print(f"fibmaps: error: {exc}", file=sys.stderr)
        return code

    out = Path(cfg.out)
    timings: dict = {}
    t0 = time.perf_counter()
    try:
        out.mkdir(parents=True, exist_ok=True)
        paths = COMMANDS[args.command](cfg, out, timings)
        timings["total"] = time.perf_counter() - t0
        rpt.write_manifest(out, args.command, asdict(cfg), paths, timings)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"fibmaps: error: {exc}", file=sys.stderr)
        return 2
    except DynamicsError as exc:
        print(f"fibmaps: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"fibmaps: I/O error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
