"""Command-line front end.

Subcommands:
  minimize    descend from the configured seeding, write field + defect report
  sweep       warm-started ladder over a decreasing epsilon schedule + slope fit
  analyze     re-run defect detection on a stored mesh/field snapshot
  upperbound  energy of the seeded test field against the log-law reference
  renorm      renormalized-energy table for candidate defect configurations

Exit codes: 0 success, 2 bad configuration, 3 numerical failure,
4 topology audit failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import defects as defects_mod
from .config import Config, load_config
from .energy import Assembly, eval_energy, local_energy
from .errors import (
    ClusterOverflowError,
    ConfigError,
    DegeneratePointError,
    DivergenceError,
    FitError,
    InconsistentIndexError,
    NonIntegerWindingError,
    NormalizationError,
    OutOfBandError,
    ParameterError,
    ResolutionError,
    SeedSeparationError,
    TopologyAuditError,
    TopologyError,
    UnsupportedDomainError,
)
from .mesh import load_field, load_mesh, save_field, save_mesh, triangulate
from .minimizer import MinimizeResult, continuation_minimize, init_field, minimize
from .renorm import compare_configs, fit_expansion, w_boundary, w_interior

logger = logging.getLogger(__name__)

_CONFIG_ERRORS = (ConfigError, ParameterError, SeedSeparationError, UnsupportedDomainError)
_TOPOLOGY_ERRORS = (
    TopologyError,
    TopologyAuditError,
    NonIntegerWindingError,
    InconsistentIndexError,
)
_NUMERICAL_ERRORS = (
    DivergenceError,
    ResolutionError,
    NormalizationError,
    ClusterOverflowError,
    DegeneratePointError,
    OutOfBandError,
    FitError,
    np.linalg.LinAlgError,
)


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])


def _write_defects(path: Path, report) -> None:
    header = ["kind", "center_x", "center_y", "scale", "charge", "loop_radius"]
    rows = [
        (r.kind, float(r.center[0]), float(r.center[1]), r.scale, r.charge, r.loop_radius)
        for r in report.records
    ]
    # audit footer reuses the columns: declared degree, interior sum, boundary sum, pass flag
    rows.append(
        (
            "identity",
            float(report.declared_degree),
            float(report.sum_interior),
            float(report.sum_boundary),
            int(report.identity_ok),
            0.0,
        )
    )
    _write_csv(path, header, rows)


def _write_trace(path: Path, result: MinimizeResult) -> None:
    _write_csv(
        path,
        ["iter", "total", "dirichlet", "potential", "penalty", "residual"],
        result.trace,
    )


def _energy_row(params, eb, result=None):
    row = [params.epsilon, params.s, params.mode, eb.dirichlet, eb.potential, eb.penalty, eb.total]
    if result is not None:
        row += [result.residual, result.iterations, int(result.converged)]
    return row


def _run_minimize(cfg: Config, out: Path, n_seeds: int, quiet: bool) -> int:
    if len(cfg.epsilons) != 1:
        raise ConfigError("minimize needs a single energy.epsilon (use sweep for ladders)")
    eps = cfg.epsilons[0]
    domain = cfg.build_domain()
    data = cfg.build_data(domain)
    mesh = triangulate(domain, cfg.h_for(eps))
    asm = Assembly(mesh, data)
    params = cfg.params(eps)

    runs = []
    for k in range(n_seeds):
        rng = np.random.default_rng(cfg.rng_seed + k)
        u0 = init_field(asm, params, cfg.seeds, rng=rng)
        result = minimize(asm, u0, params, cfg.minimize)
        report = defects_mod.analyze(
            asm, result.u, params, lam=cfg.lam, max_merges=cfg.max_merges
        )
        runs.append((result, report))

    for k, (result, report) in enumerate(runs):
        sub = out if n_seeds == 1 else out / f"run{k:03d}"
        sub.mkdir(parents=True, exist_ok=True)
        save_mesh(sub / "mesh.txt", mesh)
        save_field(sub / "field.txt", result.u)
        _write_trace(sub / "trace.csv", result)
        _write_csv(
            sub / "energy.csv",
            ["epsilon", "s", "mode", "dirichlet", "potential", "penalty", "total",
             "residual", "iterations", "converged"],
            [_energy_row(params, result.energy, result)],
        )
        _write_defects(sub / "defects.csv", report)
        if not quiet:
            print(
                f"run {k}: E={result.energy.total:.6f} iters={result.iterations} "
                f"residual={result.residual:.3e} defects="
                f"{report.n_interior}i+{report.n_boundary}b identity_ok={report.identity_ok}"
            )
    if n_seeds > 1:
        rows = [
            [k, r.energy.total, r.iterations, int(r.converged),
             rep.n_interior, rep.n_boundary, int(rep.identity_ok)]
            for k, (r, rep) in enumerate(runs)
        ]
        _write_csv(
            out / "summary.csv",
            ["run", "total", "iterations", "converged", "n_interior", "n_boundary", "identity_ok"],
            rows,
        )
    return 0


def _run_sweep(cfg: Config, out: Path, quiet: bool) -> int:
    if len(cfg.epsilons) < 2:
        raise ConfigError("sweep needs a decreasing list in energy.epsilon")
    domain = cfg.build_domain()
    rng = np.random.default_rng(cfg.rng_seed)
    t0 = time.time()
    rungs = continuation_minimize(
        domain,
        cfg.build_data,
        cfg.epsilons,
        cfg.params(cfg.epsilons[0]),
        cfg.seeds,
        cfg.h_for,
        cfg.minimize,
        rng=rng,
    )
    wall = time.time() - t0

    reports = []
    for rung in rungs:
        reports.append(
            defects_mod.analyze(
                rung.assembly, rung.result.u, rung.params,
                lam=cfg.lam, max_merges=cfg.max_merges,
            )
        )
    fit = fit_expansion(cfg.epsilons, [r.result.energy.total for r in rungs])

    rows = []
    for rung, rep in zip(rungs, reports):
        eb = rung.result.energy
        rows.append(
            [rung.params.epsilon, rung.params.s, rung.params.mode,
             cfg.h_for(rung.params.epsilon), rung.mesh.n_vertices,
             eb.dirichlet, eb.potential, eb.penalty, eb.total,
             rep.n_interior, rep.n_boundary, rep.sum_interior, rep.sum_boundary,
             int(rep.identity_ok), rung.result.residual, rung.result.iterations,
             int(rung.result.converged), fit.slope, fit.intercept, fit.max_residual,
             wall]
        )
    _write_csv(
        out / "sweep.csv",
        ["epsilon", "s", "mode", "h", "n_vertices",
         "dirichlet", "potential", "penalty", "total",
         "n_interior", "n_boundary", "sum_d", "sum_D",
         "identity_ok", "residual", "iterations", "converged",
         "slope", "intercept", "fit_max_residual", "wall_time"],
        rows,
    )
    if cfg.snapshots:
        for k, rung in enumerate(rungs):
            save_mesh(out / f"mesh_{k:03d}.txt", rung.mesh)
            save_field(out / f"field_{k:03d}.txt", rung.result.u)
        _write_defects(out / "defects.csv", reports[-1])
    if not quiet:
        print(f"sweep: slope={fit.slope:.6f} intercept={fit.intercept:.6f} "
              f"max_residual={fit.max_residual:.3e} ({wall:.1f}s)")
    return 0


def _run_analyze(cfg: Config, out: Path, quiet: bool) -> int:
    mesh_path = out / "mesh.txt"
    field_path = out / "field.txt"
    if not mesh_path.exists() or not field_path.exists():
        raise ConfigError(f"no mesh.txt/field.txt snapshot under {out}")
    if len(cfg.epsilons) != 1:
        raise ConfigError("analyze needs a single energy.epsilon")
    domain = cfg.build_domain()
    data = cfg.build_data(domain)
    mesh = load_mesh(mesh_path)
    u = load_field(field_path)
    if len(u) != mesh.n_vertices:
        raise ConfigError("field snapshot does not match the mesh snapshot")
    asm = Assembly(mesh, data)
    params = cfg.params(cfg.epsilons[0])
    report = defects_mod.analyze(asm, u, params, lam=cfg.lam, max_merges=cfg.max_merges)
    _write_defects(out / "defects.csv", report)
    if not quiet:
        for r in report.records:
            print(f"{r.kind} at ({r.center[0]:+.4f},{r.center[1]:+.4f}) charge={r.charge}")
        print(f"identity_ok={report.identity_ok}")
    return 0


def _run_upperbound(cfg: Config, out: Path, quiet: bool) -> int:
    domain = cfg.build_domain()
    data = cfg.build_data(domain)
    rows = []
    for eps in cfg.epsilons:
        mesh = triangulate(domain, cfg.h_for(eps))
        asm = Assembly(mesh, data)
        params = cfg.params(eps)
        u = init_field(asm, params, cfg.seeds)
        eb = eval_energy(asm, u, params)
        ref = np.pi * params.s * abs(data.degree) * abs(np.log(eps))
        row = [eps, params.s, params.mode, eb.total, ref, eb.total - ref]
        for t_seed, _ in cfg.seeds.boundary:
            q = domain.boundary_point(t_seed)
            row.append(local_energy(asm, u, params, q, 4.0 * eps**params.s).total)
        for x, y, _ in cfg.seeds.interior:
            row.append(local_energy(asm, u, params, (x, y), 4.0 * eps).total)
        rows.append(row)
    n_loc = len(cfg.seeds.boundary) + len(cfg.seeds.interior)
    header = ["epsilon", "s", "mode", "energy", "reference", "gap"] + [
        f"local_{j}" for j in range(n_loc)
    ]
    _write_csv(out / "upperbound.csv", header, rows)
    if not quiet:
        for row in rows:
            print(f"eps={row[0]:g}: E={row[3]:.6f} ref={row[4]:.6f} gap={row[5]:+.6f}")
    return 0


def _run_renorm(cfg: Config, out: Path, quiet: bool) -> int:
    domain = cfg.build_domain()
    data = cfg.build_data(domain)
    candidates = []
    for p in cfg.renorm_points:
        candidates.append(("interior", p))
    for t1, t2 in cfg.renorm_pairs:
        candidates.append(
            ("boundary", (domain.boundary_point(t1), domain.boundary_point(t2)))
        )
    if not candidates:
        raise ConfigError("renorm needs interior_points and/or boundary_pairs")
    mesh = triangulate(domain, cfg.renorm_h)
    asm = Assembly(mesh, data)
    rows = compare_configs(asm, candidates)
    _write_csv(
        out / "renorm.csv",
        ["rank", "kind", "description", "w", "caveat"],
        [[i, r["kind"], r["description"], r["w"], r["caveat"]] for i, r in enumerate(rows)],
    )
    if cfg.renorm_grid:
        k = cfg.renorm_grid
        ts = [2.0 * np.pi * j / k for j in range(1, k)]
        grid_rows = [
            [t, w_boundary(domain.boundary_point(0.0), domain.boundary_point(t))]
            for t in ts
        ]
        _write_csv(out / "wgrid.csv", ["separation", "w"], grid_rows)
    if not quiet:
        for i, r in enumerate(rows):
            print(f"{i}: {r['description']} W={r['w']:.6f}")
        print(rows[0]["caveat"])
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="boojum",
        description="minimize planar anchored-field energies and audit their defects",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    specs = {
        "minimize": "descend from the configured seeding",
        "sweep": "warm-started descending-epsilon ladder with slope fit",
        "analyze": "re-run defect detection on a stored snapshot",
        "upperbound": "test-field energy against the log-law reference",
        "renorm": "renormalized-energy comparison of defect configurations",
    }
    for name, help_text in specs.items():
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", required=True, help="YAML run configuration")
        sp.add_argument("--out", default="out", help="output directory")
        sp.add_argument("--quiet", action="store_true", help="suppress progress output")
        if name == "minimize":
            sp.add_argument(
                "--seeds", type=int, default=1,
                help="number of independent initializations (random base)",
            )
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "minimize":
            return _run_minimize(cfg, out, args.seeds, args.quiet)
        if args.command == "sweep":
            return _run_sweep(cfg, out, args.quiet)
        if args.command == "analyze":
            return _run_analyze(cfg, out, args.quiet)
        if args.command == "upperbound":
            return _run_upperbound(cfg, out, args.quiet)
        return _run_renorm(cfg, out, args.quiet)
    except _CONFIG_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except _TOPOLOGY_ERRORS as e:
        print(f"topology audit failure: {e}", file=sys.stderr)
        return 4
    except _NUMERICAL_ERRORS as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
