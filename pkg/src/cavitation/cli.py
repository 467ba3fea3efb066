"""Command line harness for the two worked examples and the incompressible table.

Exit codes: 0 success, 2 configuration error, 3 solver non-convergence or a
failed invariant.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys


from . import plots, solver
from .config import PRESETS, ExperimentConfig, RunManifest
from .errors import ConfigError, NumericalError

log = logging.getLogger("cavitation")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 2, 3

_DEFAULT_PRESET = {"incompressible": "example2"}


def _tag(lam, eps):
    return f"lam{lam:g}_eps{eps:g}"


def _write_table(path, rows, fields):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fields, extrasaction="ignore")
        w.writeheader()
        for row in rows:
            w.writerow({k: (f"{v:.17g}" if isinstance(v, float) else v) for k, v in row.items()})
    return path


def _write_keyvals(path, items):
    with open(path, "w") as fh:
        for k, v in items.items():
            fh.write(f"{k}={v!r}\n" if isinstance(v, float) else f"{k}={v}\n")
    return path


def _write_bundle(m, b, man, out, prefix="solve"):
    base = os.path.join(out, f"{prefix}_{_tag(b.lam, b.eps)}")
    man.add(base + ".csv")
    b.to_csv(base + ".csv", m)
    man.add(base + "_that.csv")
    _write_table(base + "_that.csv",
                 [{"R": R, "That": t} for R, t in zip(b.field.R, b.that_profile)], ["R", "That"])
    man.add(base + ".meta")
    b.write_metadata(base + ".meta")
    return base


def cmd_solve(cfg, out):
    m = cfg.material()
    eps = cfg.eps_list[-1]
    man = RunManifest("solve", cfg.hash())
    b = solver.solve_punctured(m, cfg.lam, eps, cfg.tol_bc, predictor=cfg.predictor,
                               **cfg.solver_kwargs())
    base = _write_bundle(m, b, man, out)
    man.rows.append(b.metadata())
    if cfg.emit_plots:
        man.add(plots.plot_profiles([base + ".csv"], base + ".svg"))
    print(f"lambda={b.lam:g} eps={b.eps:g} cavity={b.cavity:.6f} "
          f"energy={b.energy.modified:.6f} status={b.status}")
    return man


def cmd_sweep(cfg, out):
    m = cfg.material()
    man = RunManifest("sweep-eps", cfg.hash())
    res = solver.eps_sweep(m, cfg.lam, cfg.eps_list, tol_bc=cfg.tol_bc,
                           predictor=cfg.predictor, **cfg.solver_kwargs())
    profiles = []
    for b in res.bundles:
        if b is not None:
            profiles.append(_write_bundle(m, b, man, out) + ".csv")
    fields = ["eps", "cavity", "energy", "sup_dist_affine", "sup_dist_prev", "sup_dist_final",
              "status"]
    for row in res.rows:
        if row["eps"] in res.errors:
            row["status"] = res.errors[row["eps"]]
    table = man.add(os.path.join(out, f"sweep_lam{cfg.lam:g}.csv"))
    _write_table(table, res.rows, fields)
    man.rows.extend(res.rows)
    if cfg.emit_plots and profiles:
        labels = [f"eps={b.eps:g}" for b in res.bundles if b is not None]
        man.add(plots.plot_profiles(profiles, table[:-4] + "_r.svg", labels))
        man.add(plots.plot_profiles(profiles, table[:-4] + "_That.svg", labels, column="That"))
    for row in res.rows:
        print(f"eps={row['eps']:<8g} cavity={row['cavity']:.6f} energy={row['energy']:.6f} "
              f"sup_affine={row['sup_dist_affine']:.3e} {row['status']}")
    if res.errors and len(res.errors) == len(cfg.eps_list):
        raise NumericalError(f"every solve failed: {res.errors}")
    return man


def cmd_critical(cfg, out):
    m = cfg.material()
    man = RunManifest("critical", cfg.hash())
    c = solver.critical_lambda(m)
    info = {"lambda_c": c.lambda_c, "omega_star": c.omega_star,
            "integral_check": c.integral_check, "bar_lambda": c.bar_lambda}
    _write_keyvals(man.add(os.path.join(out, "critical.txt")), info)
    prof = man.add(os.path.join(out, "critical_profile.csv"))
    _write_table(prof, [{"R": x, "r": y} for x, y in zip(*c.samples())], ["R", "r"])
    man.rows.append(info)
    print(" ".join(f"{k}={v:.10g}" for k, v in info.items()))
    return man


def cmd_incompressible(cfg, out):
    man = RunManifest("incompressible", cfg.hash())
    if not cfg.C_list:
        raise ConfigError("run.C_list is empty")
    mat = cfg.material()
    eps = cfg.eps_list[-1]
    D = mat.vol.D
    rows, bundles = solver.incompressible_study(
        cfg.C_list, lam=cfg.lam, eps=eps, n=cfg.n, kappa=cfg.kappa, D=D,
        delta_exp=cfg.delta_exp, tol_bc=cfg.tol_bc, **cfg.solver_kwargs())
    table = man.add(os.path.join(out, "incompressible_table.csv"))
    _write_table(table, rows, ["C", "energy", "cavity", "sup_dist_inc", "status"])
    for C, b in zip(cfg.C_list, bundles):
        if b is not None:
            _write_bundle(cfg.material(C=C), b, man, out, prefix=f"incompressible_C{C:g}")
    e_inc = solver.incompressible_energy(cfg.lam, cfg.n, cfg.kappa, D)
    cav_inc = float(solver.incompressible_profile(0.0, cfg.lam, cfg.n))
    _write_keyvals(man.add(os.path.join(out, "incompressible.txt")),
                   {"energy_inc": e_inc, "cavity_inc": cav_inc, "lambda": cfg.lam, "eps": eps})
    man.rows.extend(rows)
    if cfg.emit_plots:
        man.add(plots.plot_table(table, "C", "energy", table[:-4] + ".svg", logx=True))
    for row in rows:
        print(f"C={row['C']:<6g} energy={row['energy']:.6f} sup_inc={row['sup_dist_inc']:.3e}")
    print(f"incompressible energy={e_inc:.6f} cavity={cav_inc:.6f}")
    if any(b is None for b in bundles):
        raise NumericalError("some incompressible-limit solves failed; see the table")
    return man


def cmd_check(cfg, out):
    m = cfg.material()
    eps = cfg.eps_list[-1]
    man = RunManifest("check", cfg.hash())
    b = solver.solve_punctured(m, cfg.lam, cfg.eps_list[-1], cfg.tol_bc,
                               predictor=cfg.predictor, **cfg.solver_kwargs())
    checks = solver.check_invariants(m, b)
    lines = [c.line() for c in checks]
    path = man.add(os.path.join(out, f"check_{_tag(cfg.lam, eps)}.txt"))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    print("\n".join(lines))
    man.rows.extend({"name": c.name, "value": c.value, "limit": c.limit, "passed": c.passed}
                    for c in checks)
    if not all(c.passed for c in checks):
        man.write(out)
        raise NumericalError("invariant check failed")
    return man


COMMANDS = {
    "solve": (cmd_solve, "solve one punctured-ball problem"),
    "sweep-eps": (cmd_sweep, "solve a decreasing list of puncture radii"),
    "critical": (cmd_critical, "critical boundary displacement lambda_c"),
    "incompressible": (cmd_incompressible, "penalty-law table approaching incompressibility"),
    "check": (cmd_check, "solve and evaluate the bundle invariants"),
}


def build_parser():
    p = argparse.ArgumentParser(prog="cavitation", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", help="key = value config file")
        s.add_argument("--preset", choices=sorted(PRESETS),
                       help=f"base preset (default {_DEFAULT_PRESET.get(name, 'example1')})")
        s.add_argument("--lambda", dest="lam", help="outer radius r(1)")
        s.add_argument("--eps", help="puncture radius, or comma list for sweep-eps")
        s.add_argument("--C-list", dest="C_list", help="comma list of penalty constants")
        s.add_argument("--nodes", help="mesh nodes")
        s.add_argument("--out", help="output directory")
        s.add_argument("--emit-plots", action="store_true", default=None)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    func = COMMANDS[args.command][0]
    overrides = {
        "run.lambda": args.lam,
        "run.eps_list": args.eps,
        "run.C_list": args.C_list,
        "run.mesh.nodes": args.nodes,
        "output.directory": args.out,
        "output.emit_plots": "true" if args.emit_plots else None,
    }
    try:
        cfg = ExperimentConfig.load(args.config, args.preset or _DEFAULT_PRESET.get(
            args.command, "example1"), overrides)
        out = cfg.directory
        os.makedirs(out, exist_ok=True)
        man = func(cfg, out)
        man.write(out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
