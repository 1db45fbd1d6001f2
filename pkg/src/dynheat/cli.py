"""Batch entry point: wires run configs to module operations and emits
machine-readable artifacts.

Exit codes: 0 when the run completed and every certification in scope
passed; 1 when a certification failed; 2 on configuration or usage errors;
3 on numerical failures.  Every number written to an artifact comes from a
module operation; the CLI only aggregates.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np

from . import control as ctl
from . import logconvexity as lc
from .config import load_config
from .discretize import State, assemble_operator
from .errors import (CalibrationError, ConfigurationError, DegenerateDataError,
                     DynHeatError, FitFailureError, NumericalError,
                     ParameterError, UsageError)
from .evolve import ImpulseEvent, propagate, propagate_impulsive
from .reporting import (canonical_json, csv_text, merge_report, read_json,
                        write_text)

EXIT_OK = 0
EXIT_CERT_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _unit_random_states(grid, ops, count, seed, initial):
    """Seeded unit-norm initial states; the zero mode returns zero states."""
    if initial == "zero":
        return [State.zeros(grid) for _ in range(count)]
    rng = np.random.default_rng(seed)
    states = []
    for _ in range(count):
        v = rng.standard_normal(grid.points.shape[0])
        states.append(State(grid, v / ops.norm(v)))
    return states


def _map_members(fn, items, threads):
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _cmd_simulate(cfg, out_dir, threads):
    grid = cfg.grid()
    ops = assemble_operator(grid)
    sched = cfg.schedule()
    states = _unit_random_states(grid, ops, 1, cfg.seed, cfg.initial)
    state0 = states[0]

    if cfg.tau is not None:
        rng = np.random.default_rng((cfg.seed, 1))
        payload = rng.standard_normal(grid.omega_idx.size)
        impulse = ImpulseEvent(tau=cfg.tau, payload=payload)
        final, info = propagate_impulsive(ops, state0, impulse, sched)
        # re-run the two legs to record norms along the way
        before = replace(sched, t1=info["tau_effective"])
        after = replace(sched, t0=info["tau_effective"])
        _, rec1 = propagate(ops, state0, before, record_states=True)
        kicked = State(grid, rec1.states[-1] + ops.embed_omega(payload).values)
        _, rec2 = propagate(ops, kicked, after)
        times = np.concatenate([rec1.times, rec2.times[1:]])
        norms = np.concatenate([rec1.norms, rec2.norms[1:]])
        contraction = bool(np.all(np.diff(rec1.norms) <= 1e-12 * norms[0])
                           and np.all(np.diff(rec2.norms) <= 1e-12 * norms[0]))
        doc = {
            "scheme": sched.scheme, "dt": sched.dt, "T": sched.t1,
            "tau_effective": info["tau_effective"],
            "norm_initial": float(norms[0]),
            "norm_final": float(ops.norm(final)),
            "norm_before_kick": info["norm_before_kick"],
            "norm_after_kick": info["norm_after_kick"],
            "contraction": contraction,
        }
    else:
        final, rec = propagate(ops, state0, sched)
        times, norms = rec.times, rec.norms
        contraction = bool(np.all(np.diff(norms) <= 1e-12 * norms[0]))
        doc = {
            "scheme": sched.scheme, "dt": sched.dt, "T": sched.t1,
            "tau_effective": None,
            "norm_initial": float(norms[0]),
            "norm_final": float(ops.norm(final)),
            "norm_before_kick": None, "norm_after_kick": None,
            "contraction": contraction,
        }

    write_text(os.path.join(out_dir, "trajectory.csv"),
               csv_text(["t", "norm"], np.column_stack([times, norms])))
    write_text(os.path.join(out_dir, "simulate.json"), canonical_json(doc))
    return EXIT_OK if doc["contraction"] else EXIT_CERT_FAILED


def _cmd_observe(cfg, out_dir, threads):
    grid = cfg.grid()
    ops = assemble_operator(grid)
    sched = cfg.schedule()
    params = cfg.weight_params()

    if cfg.initial == "zero":
        raise ConfigurationError(
            "ensemble.initial = zero cannot drive an observation ensemble")
    states = lc.diverse_ensemble(ops, cfg.ensemble_count, cfg.seed, sched)
    traces = _map_members(lambda st: lc.run_trace(ops, params, st, sched),
                          states, threads)

    C = lc.fit_bound_constant(traces)
    bound_violations = sum(lc.count_bound_violations(tr, C) for tr in traces)

    rng = np.random.default_rng((cfg.seed, 2))
    interp_violations = 0
    n_times = traces[0].t.size
    for tr in traces:
        triples = []
        while len(triples) < 10:
            i1, i2, i3 = sorted(rng.choice(n_times, size=3, replace=False))
            if i1 < i2 <= i3:
                triples.append((int(i1), int(i2), int(i3)))
        recs = lc.interpolation_check(tr.t, tr.normF2, params, C, triples)
        interp_violations += sum(1 for r in recs if not r.passed)

    fit = lc.fit_observability_constants(ops, sched, states)
    steps = lc.step_constants(grid.domain, params, C, cfg.ell)

    doc = {
        "C0": params.C0, "C": C, "ell": steps.ell,
        "M_ell": steps.M_ell, "D_ell": steps.D_ell,
        "sign_lhs": steps.sign_lhs, "sign_ok": steps.sign_ok,
        "beta": fit.beta, "mu": fit.mu, "K": fit.K,
        "K1": fit.K1, "K2": fit.K2,
        "M1": fit.M1, "M2": fit.M2, "delta": fit.delta,
        "log_G": fit.log_G, "n_members": fit.n_members,
        "bound_violations": int(bound_violations),
        "interpolation_violations": int(interp_violations),
    }
    write_text(os.path.join(out_dir, "frequency_trace.csv"),
               csv_text(["t", "normF2", "N", "Q", "bound"], traces[0].rows()))
    write_text(os.path.join(out_dir, "constants.json"), canonical_json(doc))
    # the sign condition is reported, not certified: it is a property of the
    # configured chain length, not of the run
    passed = bound_violations == 0 and interp_violations == 0
    return EXIT_OK if passed else EXIT_CERT_FAILED


def _cmd_commutator_check(cfg, out_dir, threads):
    domain = cfg.domain()
    params = cfg.weight_params()
    t_check = 0.5 * params.T
    if domain.kind == "interval":
        n0 = cfg.grid_args["n"]
        resolutions = [n0, 2 * n0, 4 * n0]
        center = [domain.interval_center]
        width = 0.3 * abs(cfg.domain_args["b"] - cfg.domain_args["a"])
    else:
        nr0, nt0 = cfg.grid_args["nr"], cfg.grid_args["ntheta"]
        resolutions = [(nr0, nt0), (2 * nr0, 2 * nt0), (4 * nr0, 4 * nt0)]
        center = list(domain.center)
        width = 0.55 * domain.radius
    family = lc.InteriorBump(center=center, width=width)
    rep = lc.commutator_identity_check(domain, params, t_check, family,
                                       resolutions)

    res_labels = [str(r) if domain.kind == "interval" else f"{r[0]}x{r[1]}"
                  for r in rep.resolutions]
    rows = [[res_labels[i], rep.spacings[i], rep.lhs[i], rep.rhs[i],
             rep.rel_residual[i]] for i in range(len(res_labels))]
    write_text(os.path.join(out_dir, "commutator_residuals.csv"),
               csv_text(["resolution", "spacing", "lhs", "rhs", "rel_residual"],
                        rows))
    monotone = bool(np.all(np.diff(rep.rel_residual) < 0.0))
    doc = {
        "t": t_check, "family_width": family.width,
        "resolutions": res_labels,
        "rel_residuals": list(rep.rel_residual),
        "orders": list(rep.orders),
        "monotone": monotone,
    }
    write_text(os.path.join(out_dir, "commutator.json"), canonical_json(doc))
    return EXIT_OK if monotone else EXIT_CERT_FAILED


def _cmd_control(cfg, out_dir, threads):
    grid = cfg.grid()
    ops = assemble_operator(grid)
    sched = cfg.schedule()
    if cfg.tau is None:
        raise ConfigurationError("missing config key: impulse.tau")
    eps = cfg.eps_list[0]
    prob = ctl.ControlProblem(tau=cfg.tau, eps=eps, kappa=cfg.kappa,
                              cg_tol=cfg.cg_tol, cg_maxit=cfg.cg_maxit)
    psi0 = _unit_random_states(grid, ops, 1, cfg.seed, cfg.initial)[0]

    if cfg.kappa is None:
        cal = ctl.calibrate_kappa(ops, prob, sched, [psi0])
        result = cal.results[0]
    else:
        result = ctl.synthesize(ops, prob, sched, psi0)

    write_text(os.path.join(out_dir, "control_result.json"),
               canonical_json(result.summary()))
    return EXIT_OK if result.certified else EXIT_CERT_FAILED


def _cmd_cost_study(cfg, out_dir, threads):
    grid = cfg.grid()
    ops = assemble_operator(grid)
    sched = cfg.schedule()
    if cfg.tau is None:
        raise ConfigurationError("missing config key: impulse.tau")
    prob = ctl.ControlProblem(tau=cfg.tau, eps=cfg.eps_list[0],
                              cg_tol=cfg.cg_tol, cg_maxit=cfg.cg_maxit)
    psi0s = _unit_random_states(grid, ops, cfg.ensemble_count, cfg.seed,
                                cfg.initial)

    constants = None
    constants_path = os.path.join(out_dir, "constants.json")
    if os.path.exists(constants_path):
        doc = read_json(constants_path)
        constants = lc.ObservabilityFit(
            beta=doc["beta"], log_G=doc["log_G"], mu=doc["mu"], K=doc["K"],
            K1=doc["K1"], K2=doc["K2"], M1=doc["M1"], M2=doc["M2"],
            delta=doc["delta"], T=sched.t1, n_members=doc["n_members"])

    study = ctl.cost_study(ops, prob, sched, list(cfg.eps_list), psi0s,
                           constants=constants)
    rows = [[r.eps, r.sup_cost, r.kappa, r.passes] for r in study.rows]
    write_text(os.path.join(out_dir, "cost_study.csv"),
               csv_text(["eps", "sup_cost", "kappa", "passes"], rows))
    slope = None if not np.isfinite(study.slope) else study.slope
    doc = {
        "rows": [{"eps": r.eps, "sup_cost": r.sup_cost, "kappa": r.kappa,
                  "passes": r.passes} for r in study.rows],
        "slope": slope,
        "delta_fitted": study.delta_fitted,
        "all_certified": study.all_certified,
        "nondecreasing": study.nondecreasing,
    }
    write_text(os.path.join(out_dir, "cost_study.json"), canonical_json(doc))
    passed = study.all_certified and study.nondecreasing
    return EXIT_OK if passed else EXIT_CERT_FAILED


def _cmd_report(cfg, out_dir, threads):
    report = merge_report(out_dir)
    write_text(os.path.join(out_dir, "report.json"), canonical_json(report))
    return EXIT_OK if report["all_passed"] else EXIT_CERT_FAILED


_COMMANDS = {
    "simulate": _cmd_simulate,
    "observe": _cmd_observe,
    "commutator-check": _cmd_commutator_check,
    "control": _cmd_control,
    "cost-study": _cmd_cost_study,
    "report": _cmd_report,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dynheat",
        description="Heat flow with dynamic boundary conditions: propagation, "
                    "log-convexity certification, impulsive control synthesis.")
    parser.add_argument("subcommand", choices=sorted(_COMMANDS))
    parser.add_argument("--config", help="path to the run-config file")
    parser.add_argument("--out", help="artifact directory (default from config)")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the ensemble seed")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads for ensemble members")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.subcommand == "report" and args.config is None:
            cfg = None
            out_dir = args.out
            if out_dir is None:
                raise ConfigurationError("report needs --out or --config")
        else:
            if args.config is None:
                raise ConfigurationError(f"{args.subcommand} needs --config")
            cfg = load_config(args.config)
            if args.seed is not None:
                cfg.seed = args.seed
            out_dir = args.out or cfg.out_dir or "."
        if args.threads < 1:
            raise ConfigurationError(f"--threads must be >= 1, got {args.threads}")
        os.makedirs(out_dir, exist_ok=True)
        return _COMMANDS[args.subcommand](cfg, out_dir, args.threads)
    except (ConfigurationError, UsageError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, CalibrationError, FitFailureError,
            DegenerateDataError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except DynHeatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
