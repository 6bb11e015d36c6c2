"""Command-line entry points.

Subcommands: validate-potential, pressure-ed, pressure-mf, game, gap,
kac-sweep, plot-data, selftest.  Exit codes: 0 success, 2 configuration
error, 3 accuracy error, 4 capacity error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

import numpy as np

from . import fock, game, quasifree, sweep
from .config import config_hash, parse_config
from .errors import AccuracyError, CapacityError, ConfigError
from .lattice import LatticeBox
from .potentials import GridSpec, PlainGaussian, cone_check, poisson_sum
from .store import ResultStore, emit_plot_data

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ACCURACY = 3
EXIT_CAPACITY = 4


def _apply_tolerance_overrides(cfg, spec: str | None):
    if not spec:
        return cfg
    try:
        overrides = json.loads(spec)
    except json.JSONDecodeError as err:
        raise ConfigError([f"--tolerance-overrides is not valid JSON: {err}"]) from None
    known = {"quadrature_tol", "gap_tol", "xtol", "degeneracy_window"}
    unknown = set(overrides) - known
    if unknown:
        raise ConfigError([f"unknown tolerance override {k!r}" for k in sorted(unknown)])
    if "quadrature_tol" in overrides:
        cfg.quadrature = dataclasses.replace(cfg.quadrature, tol=float(overrides["quadrature_tol"]))
    opt_updates = {}
    if "gap_tol" in overrides:
        opt_updates["tol_gap"] = float(overrides["gap_tol"])
    if "xtol" in overrides:
        opt_updates["xtol"] = float(overrides["xtol"])
    if "degeneracy_window" in overrides:
        opt_updates["degeneracy_window"] = float(overrides["degeneracy_window"])
    if opt_updates:
        cfg.optimizer = dataclasses.replace(cfg.optimizer, **opt_updates)
    return cfg


def _load(args):
    cfg = parse_config(args.config)
    cfg = _apply_tolerance_overrides(cfg, getattr(args, "tolerance_overrides", None))
    return cfg


def _emit(payload):
    print(json.dumps(payload, indent=2, sort_keys=True))


def cmd_validate_potential(args) -> int:
    cfg = _load(args)
    reports = {}
    for role, pot in (("plus", cfg.f_plus), ("minus", cfg.f_minus)):
        if pot is None:
            continue
        report = cone_check(pot, grid=GridSpec())
        reports[role] = {"family": pot.family, **report.as_dict()}
    if not reports:
        raise ConfigError(["no potentials declared in configuration"])
    _emit(reports)
    return EXIT_OK


def cmd_pressure_ed(args) -> int:
    cfg = _load(args)
    rows = []
    for beta in cfg.beta_list:
        for L in cfg.L_list:
            box = LatticeBox(cfg.dimension, L, cfg.boundary)
            mp = cfg.model_params(beta)
            op = fock.build_kac_hamiltonian(mp, box, cfg.dimension_cap)
            obs = fock.gibbs_observables(op, beta)
            rows.append({
                "beta": beta, "L": L,
                "gamma_minus": mp.gamma_minus, "gamma_plus": mp.gamma_plus,
                "boundary": cfg.boundary,
                "pressure": obs.pressure, "density": obs.density,
            })
    _emit({"pressure_ed": rows})
    return EXIT_OK


def cmd_pressure_mf(args) -> int:
    cfg = _load(args)
    rows = []
    for beta in cfg.beta_list:
        mf = cfg.meanfield_params(beta)
        for L in cfg.L_list:
            box = LatticeBox(cfg.dimension, L, cfg.boundary)
            op = fock.build_meanfield_hamiltonian(mf, box, cfg.dimension_cap)
            obs = fock.gibbs_observables(op, beta)
            rows.append({
                "beta": beta, "L": L,
                "eta_plus": mf.eta_plus, "eta_minus": mf.eta_minus,
                "pressure": obs.pressure, "density": obs.density,
            })
    _emit({"pressure_mf": rows})
    return EXIT_OK


def cmd_game(args) -> int:
    cfg = _load(args)
    chash = config_hash(cfg)
    store = ResultStore(args.out or cfg.output_dir) if (args.out or args.dump_grid) else None
    results = {}
    for beta in cfg.beta_list:
        mf = cfg.meanfield_params(beta)
        result = game.solve_game(mf, cfg.quadrature, cfg.optimizer)
        payload = result.as_dict()
        if args.dump_grid:
            lo_m, hi_m = cfg.optimizer.c_minus_box
            lo_p, hi_p = cfg.optimizer.c_plus_box
            grid_rows = []
            for cm in np.linspace(lo_m, hi_m, cfg.optimizer.grid_points):
                for cp in np.linspace(lo_p, hi_p, cfg.optimizer.grid_points):
                    val = game.payoff(mf, game.GamePoint(cm, cp), cfg.quadrature)
                    grid_rows.append((float(cm), float(cp), float(val)))
            payload["grid"] = grid_rows
            if store:
                store.write_game_grid(grid_rows)
        results[str(beta)] = payload
        if store:
            store.write_game_result(beta, payload, chash)
    _emit({"game": results, "config_hash": chash})
    return EXIT_OK


def cmd_gap(args) -> int:
    cfg = _load(args)
    chash = config_hash(cfg)
    store = ResultStore(args.out or cfg.output_dir) if args.out else None
    rows = []
    for beta in cfg.beta_list:
        mf = cfg.meanfield_params(beta)
        start = game.GamePoint(
            min(0.3, cfg.optimizer.c_minus_box[1]),
            min(np.sqrt(mf.eta_plus), cfg.optimizer.c_plus_box[1]),
        )
        sol = game.solve_gap_fixed_point(mf, start, cfg.quadrature,
                                         damping=0.5, opt=cfg.optimizer)
        rows.append({
            "beta": beta, "c_minus": sol.c_minus, "c_plus": sol.c_plus,
            "residual": sol.residual, "iterations": sol.iterations,
            "converged": sol.converged, "config_hash": chash,
        })
    if store:
        store.append_gap_rows(rows)
    _emit({"gap": rows})
    return EXIT_OK


def cmd_kac_sweep(args) -> int:
    cfg = _load(args)
    chash = config_hash(cfg)
    store = ResultStore(args.out or cfg.output_dir)
    summary = {}
    for beta in cfg.beta_list:
        plan = cfg.sweep_plan(beta)
        failures: list = []
        records = sweep.run_sweep(plan, store=store, threads=args.threads,
                                  config_hash=chash, failures=failures)
        mf = cfg.meanfield_params(beta)
        game_result = game.solve_game(mf, cfg.quadrature, cfg.optimizer)
        report = sweep.limit_report(records, game_result, plan)
        summary[str(beta)] = {
            "records": len(records),
            "failures": [{"key": list(k), "error": msg} for k, msg in failures],
            "limit_report": report.as_dict(),
        }
        store.write_manifest(
            f"sweep_manifest_beta_{beta:g}",
            {"config_hash": chash, "beta": beta, "order": plan.order,
             "L_list": list(plan.L_list),
             "gamma_minus": list(plan.gamma_minus_schedule),
             "gamma_plus": list(plan.gamma_plus_schedule),
             "limit_report": report.as_dict()},
        )
    _emit({"kac_sweep": summary, "config_hash": chash, "out": store.out_dir})
    return EXIT_OK


def cmd_plot_data(args) -> int:
    cfg = _load(args)
    store = ResultStore(args.out or cfg.output_dir)
    paths = emit_plot_data(args.kind, store, args.out)
    _emit({"written": paths})
    return EXIT_OK


def cmd_selftest(args) -> int:
    """Fast oracle suite: CAR algebra, two-mode trace, Poisson identity."""
    from .lattice import MeanFieldParams, discrete_laplacian

    checks = []

    basis = fock.FockBasis(LatticeBox(1, 0, "periodic"), dimension_cap=256)
    basis2 = fock.FockBasis(LatticeBox(1, 1, "open"), dimension_cap=256)
    car = max(fock.car_max_violation(basis), fock.car_max_violation(basis2))
    checks.append(("CAR relations (1 and 3 sites)", car, 1e-14))

    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(200):
        eps = rng.uniform(-8, 8)
        gap = rng.uniform(0, 4) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        beta = rng.uniform(0.1, 20.0)
        block = quasifree.BdGBlock(k=(0.0,), epsilon_tilde=eps, gap=gap)
        closed = quasifree.per_k_log_trace(block, beta)
        h4 = np.zeros((4, 4), dtype=complex)
        h4[1, 1] = h4[2, 2] = eps
        h4[3, 3] = 2 * eps
        h4[3, 0] = -np.conj(gap)
        h4[0, 3] = -gap
        ev = np.linalg.eigvalsh(h4)
        oracle = float(np.log(np.sum(np.exp(-beta * (ev - ev.min())))) - beta * ev.min())
        worst = max(worst, abs(closed - oracle))
    checks.append(("two-mode closed form vs 4-state trace", worst, 1e-12))

    p = PlainGaussian(width=1.0, d=1)
    lhs, rhs = poisson_sum(p, 0.5, np.zeros(1))
    checks.append(("Poisson summation, gaussian gamma=0.5", abs(lhs - rhs), 1e-10))

    mf = MeanFieldParams(beta=2.0, hopping=discrete_laplacian(1),
                         eta_plus=1.0, eta_minus=1.0)
    ed = fock.build_approximating_hamiltonian(mf, 0.3, 0.2, LatticeBox(1, 1, "periodic"))
    dual = abs(fock.pressure(ed, mf.beta) - quasifree.finite_grid_pressure(mf, 0.3, 0.2, 1))
    checks.append(("ED / momentum duality (L=1)", dual, 1e-10))

    failed = False
    for name, value, tol in checks:
        ok = value <= tol
        failed |= not ok
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {value:.3e} (tol {tol:g})")
    if failed:
        raise AccuracyError("selftest failed")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kaclab",
        description="Kac-scaled lattice fermions: ED pressures, mean-field games, sweeps",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, needs_config=True, **extra_flags):
        p = sub.add_parser(name)
        if needs_config:
            p.add_argument("--config", required=True, help="experiment JSON file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--tolerance-overrides", default=None,
                       help='JSON, e.g. {"quadrature_tol": 1e-9}')
        for flag, kwargs in extra_flags.items():
            p.add_argument(flag, **kwargs)
        p.set_defaults(func=func)
        return p

    add("validate-potential", cmd_validate_potential)
    add("pressure-ed", cmd_pressure_ed)
    add("pressure-mf", cmd_pressure_mf)
    add("game", cmd_game, **{"--dump-grid": {"action": "store_true"}})
    add("gap", cmd_gap)
    add("kac-sweep", cmd_kac_sweep)
    plot = add("plot-data", cmd_plot_data)
    plot.add_argument("--kind", required=True,
                      choices=["pressure_vs_gamma", "payoff_surface", "gap_vs_beta"])
    add("selftest", cmd_selftest, needs_config=False)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        for msg in err.messages:
            print(f"config error: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    except AccuracyError as err:
        print(f"accuracy error: {err}", file=sys.stderr)
        if err.values is not None:
            print(f"partial values: {err.values}", file=sys.stderr)
        return EXIT_ACCURACY
    except CapacityError as err:
        print(f"capacity error: {err}", file=sys.stderr)
        return EXIT_CAPACITY


if __name__ == "__main__":
    sys.exit(main())
