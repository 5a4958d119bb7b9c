"""Command-line front end.

    compnorm <command> --symbol spec.json --out table.csv [--format csv|json]
             [--rel-tol R] [--max-panels N] [--schedule-depth K] [--seed S]

Exit status: 0 success, 2 invalid input, 3 quadrature did not converge
(the table is still written, with converged=false rows).
"""

from __future__ import annotations

import argparse
import cmath
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import estimators as est
from . import functionals as fn
from .quadrature import QuadConfig, monte_carlo_disk
from .spec_io import SelfMapError, SymbolSpecError, parse_symbol
from .symbols import Blaschke, EvaluationError, UnsupportedSymbolError, comp_second_derivative, valency_counts

log = logging.getLogger("compnorm")

COMMANDS = ("kappa", "sweep", "essnorm", "blaschke-check", "valency-map", "carleson", "lemma1", "ntprofile", "mc-check")

EXIT_OK, EXIT_INVALID, EXIT_NONCONVERGED = 0, 2, 3


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    symbol_path: Path
    output_path: Path
    output_format: str = "csv"
    quad: QuadConfig = field(default_factory=lambda: QuadConfig(rel_tol=1e-5, abs_tol=1e-12))
    schedule_depth: int | None = None
    alpha: complex = 0.5 + 0j
    angles: int | None = None
    grid: int = 50
    samples: int = 1_000_000
    xi: complex = 1 + 0j
    seed: int = 0

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if not self.symbol_path.is_file():
            raise ConfigError(f"symbol file not found: {self.symbol_path}")
        if self.output_format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        if abs(self.alpha) >= 1:
            raise ConfigError("--alpha must lie in the open unit disk")
        if self.schedule_depth is not None and not 1 <= self.schedule_depth <= 13:
            raise ConfigError("--schedule-depth must lie in 1..13")
        if self.grid < 2 or self.samples < 1000:
            raise ConfigError("--grid must be >= 2 and --samples >= 1000")


# ---------------------------------------------------------------- output


@dataclass
class Table:
    command: str
    columns: list
    rows: list
    summary: str
    converged: bool = True


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        f = float(v)
        return f if math.isfinite(f) else _fmt(f)
    return v


def write_table(table: Table, path: Path, fmt: str) -> None:
    schema = f"{table.command}/v1"
    if fmt == "csv":
        lines = [f"#schema={schema}", ",".join(table.columns)]
        lines += [",".join(_fmt(v) for v in row) for row in table.rows]
        text = "\n".join(lines) + "\n"
    else:
        doc = {
            "schema": schema,
            "columns": table.columns,
            "rows": [{c: _json_value(v) for c, v in zip(table.columns, row)} for row in table.rows],
            "summary": table.summary,
        }
        text = json.dumps(doc, indent=2) + "\n"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


# ---------------------------------------------------------------- commands


def _cmd_kappa(psi, cfg: RunConfig) -> Table:
    r = fn.kappa(psi, cfg.alpha, cfg.quad)
    row = [cfg.alpha.real, cfg.alpha.imag, r.value, r.error_estimate, r.panels_used, r.converged]
    return Table("kappa", ["alpha_re", "alpha_im", "kappa", "error", "panels", "converged"], [row],
                 f"kappa={r.value:.17g}", r.converged)


def _cmd_sweep(psi, cfg: RunConfig) -> Table:
    depth = cfg.schedule_depth or 6
    radii = [1 - 2.0**-k for k in range(1, depth + 1)]
    sw = est.boundedness_profile(psi, radii, cfg.angles or 16, cfg.quad)
    rows = [[p.alpha.real, p.alpha.imag, abs(p.alpha), p.value, p.error, p.converged] for p in sw.points]
    best = sw.sup
    return Table("sweep", ["alpha_re", "alpha_im", "radius", "value", "error", "converged"], rows,
                 f"sup={best.value:.17g} at alpha={best.alpha.real:.6g}{best.alpha.imag:+.6g}i",
                 all(p.converged for p in sw.points))


def _cmd_essnorm(psi, cfg: RunConfig) -> Table:
    sched = est.default_schedule(max(3, cfg.schedule_depth or 13))
    e = est.essential_norm_proxy(psi, sched, cfg.angles or 64, cfg.quad)
    rows = [[s, v, err, th] for s, v, err, th in zip(e.schedule, e.tail_sups, e.errors, e.argmax_angles)]
    for line in e.diagnostics.splitlines():
        log.info(line)
    return Table("essnorm", ["s", "tail_sup", "error", "argmax_angle"], rows,
                 f"proxy={e.proxy:.17g} settled={e.converged}", e.quadrature_converged)


def _cmd_blaschke_check(psi, cfg: RunConfig) -> Table:
    if not isinstance(psi, Blaschke):
        raise ConfigError("blaschke-check needs a blaschke symbol")
    n_ang = cfg.angles or 8
    rows = []
    for r in (0.3, 0.6, 0.9):
        for j in range(n_ang):
            a = r * cmath.exp(2j * math.pi * j / n_ang)
            rows.append([a.real, a.imag, est.blaschke_cov_check(psi, a)])
    worst = max(row[2] for row in rows)
    return Table("blaschke-check", ["alpha_re", "alpha_im", "discrepancy"], rows, f"max_discrepancy={worst:.17g}")


def _cmd_valency_map(psi, cfg: RunConfig) -> Table:
    xs = np.linspace(-1, 1, cfg.grid)
    X, Y = np.meshgrid(xs, xs, indexing="xy")
    Z = (X + 1j * Y).ravel()
    Z = Z[np.abs(Z) < 1 - 1e-9]
    counts = valency_counts(psi, Z)
    rows = [[z.real, z.imag, int(c)] for z, c in zip(Z, counts)]
    lo, hi = (int(counts.min()), int(counts.max())) if counts.size else (0, 0)
    return Table("valency-map", ["z_re", "z_im", "count"], rows, f"count range [{lo}, {hi}] over {len(rows)} points")


def _cmd_carleson(psi, cfg: RunConfig) -> Table:
    depth = cfg.schedule_depth or 6
    cache = fn._ValencyCache(psi)
    rows, best, best_arc = [], -math.inf, None
    for arc in fn.dyadic_arcs(depth):
        v = fn.carleson_ratio(psi, arc, None, cache)
        rows.append([arc.center_angle, arc.length, v])
        if v > best * (1 + 1e-12):
            best, best_arc = v, arc
    return Table("carleson", ["center_angle", "length", "ratio"], rows,
                 f"sup={best:.17g} at arc center={best_arc.center_angle:.6g} length={best_arc.length:.6g}")


def _cmd_lemma1(psi, cfg: RunConfig) -> Table:
    scan = est.lemma1_scan(psi, est.DEFAULT_R_GRID)
    rows = [[r.r, r.mass, r.ratio, r.error, r.converged] for r in scan]
    c0 = min(r.ratio for r in scan)
    return Table("lemma1", ["r", "mass", "ratio", "error", "converged"], rows, f"min_ratio={c0:.17g}",
                 all(r.converged for r in scan))


def _cmd_ntprofile(psi, cfg: RunConfig) -> Table:
    depth = min(cfg.schedule_depth or 4, 6)
    prof = est.nt_profile(psi, cfg.xi, [10**k for k in range(1, depth + 1)])
    rows = []
    for step in prof.steps:
        for j, (b, z, t) in enumerate(zip(step.betas, prof.zetas, step.ratios)):
            rows.append([step.m, j, b.real, b.imag, z.real, z.imag, t])
    return Table("ntprofile", ["m", "j", "beta_re", "beta_im", "zeta_re", "zeta_im", "ratio"], rows,
                 f"n={prof.n} t={prof.t:.17g}")


def _cmd_mc_check(psi, cfg: RunConfig) -> Table:
    a = cfg.alpha
    q = fn.kappa(psi, a, cfg.quad)
    mc, se = monte_carlo_disk(lambda z: np.abs(comp_second_derivative(a, psi, z)), cfg.samples, cfg.seed)
    zscore = abs(q.value - mc) / se if se > 0 else (0.0 if abs(q.value - mc) <= 1e-12 else math.inf)
    row = [a.real, a.imag, q.value, q.error_estimate, mc, se, zscore, zscore <= 3, q.converged]
    return Table("mc-check",
                 ["alpha_re", "alpha_im", "quad_value", "quad_error", "mc_value", "mc_std_error", "z_score", "agree", "converged"],
                 [row], f"quad={q.value:.17g} mc={mc:.17g} z={zscore:.3g}", q.converged)


_DISPATCH = {
    "kappa": _cmd_kappa,
    "sweep": _cmd_sweep,
    "essnorm": _cmd_essnorm,
    "blaschke-check": _cmd_blaschke_check,
    "valency-map": _cmd_valency_map,
    "carleson": _cmd_carleson,
    "lemma1": _cmd_lemma1,
    "ntprofile": _cmd_ntprofile,
    "mc-check": _cmd_mc_check,
}


def run(config: RunConfig) -> int:
    """Execute one command; returns the process exit status."""
    try:
        config.validate()
        psi = parse_symbol(config.symbol_path)
        table = _DISPATCH[config.command](psi, config)
    except (ConfigError, SymbolSpecError, SelfMapError, UnsupportedSymbolError, est.NormalizationError,
            est.TrajectoryError, EvaluationError, TypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    write_table(table, config.output_path, config.output_format)
    print(f"{config.command}: {table.summary}")
    return EXIT_OK if table.converged else EXIT_NONCONVERGED


def _complex_arg(text: str) -> complex:
    parts = text.split(",")
    try:
        if len(parts) == 1:
            return complex(parts[0].replace("i", "j"))
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected RE,IM or a complex literal, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="compnorm", description=__doc__.split("\n\n")[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--symbol", required=True, type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--format", default="csv", choices=("csv", "json"))
    p.add_argument("--rel-tol", type=float, default=1e-5)
    p.add_argument("--max-panels", type=int, default=40000)
    p.add_argument("--schedule-depth", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--alpha", type=_complex_arg, default=0.5 + 0j, help="RE,IM")
    p.add_argument("--xi", type=_complex_arg, default=1 + 0j, help="boundary point for ntprofile")
    p.add_argument("--angles", type=int, default=None)
    p.add_argument("--grid", type=int, default=50)
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        quad = QuadConfig(rel_tol=args.rel_tol, abs_tol=1e-12, max_panels=args.max_panels)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    config = RunConfig(
        command=args.command,
        symbol_path=args.symbol,
        output_path=args.out,
        output_format=args.format,
        quad=quad,
        schedule_depth=args.schedule_depth,
        alpha=args.alpha,
        angles=args.angles,
        grid=args.grid,
        samples=args.samples,
        xi=args.xi,
        seed=args.seed,
    )
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
