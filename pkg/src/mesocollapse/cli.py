"""Command-line interface.

Exit codes: 0 success, 2 usage error, 3 no physical solution, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
import warnings

import numpy as np

from . import __version__, correlators, csl, gkls, inference, kernels, qmupl, stochastic
from ._common import Eigen, Target
from .errors import GuardViolation, InfeasiblePhysicsError, NumericalError, PerturbativeWarning
from .mesons import SPECIES_ORDER, Species, load_dataset

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_NUMERICAL = 0, 2, 3, 4


class UsageError(ValueError):
    pass


# --- formatting --------------------------------------------------------------


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if hasattr(x, "value") and isinstance(x.value, str):
        return x.value
    return str(x)


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if hasattr(x, "value") and isinstance(x.value, str):
        return x.value
    return x


def render_csv(header, rows, manifest) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(x) for x in row])
    buf.write("# manifest\n")
    for key in sorted(manifest):
        buf.write(f"# {key} = {json.dumps(_jsonable(manifest[key]), sort_keys=True)}\n")
    return buf.getvalue()


def render_json(header, rows, manifest) -> str:
    doc = {
        "schema": "mesocollapse.table/1",
        "manifest": _jsonable(manifest),
        "columns": list(header),
        "rows": [[_jsonable(x) for x in row] for row in rows],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def emit(args, header, rows, params, seed=None):
    manifest = {
        "subcommand": args.command,
        "tool_version": __version__,
        "parameters": params,
    }
    if getattr(args, "_dataset", None) is not None:
        ds = args._dataset
        manifest["dataset_version"] = ds.version
        with open(ds.path, "rb") as fh:
            manifest["dataset_sha256"] = hashlib.sha256(fh.read()).hexdigest()
    if seed is not None:
        manifest["seed"] = seed
    text = (render_json if getattr(args, "format", "csv") == "json" else render_csv)(header, rows, manifest)
    if args.output == "-":
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


# --- argument helpers ----------------------------------------------------------


def parse_grid(text: str) -> list[float]:
    try:
        a, b, n = text.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like a:b:n, got {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError("grid needs at least one point")
    return [float(x) for x in np.linspace(a, b, n)]


def _dataset(args):
    if getattr(args, "_dataset", None) is None:
        args._dataset = load_dataset(args.dataset)
    return args._dataset


def _species_list(args):
    if args.species is None:
        return list(SPECIES_ORDER)
    return [Species.parse(args.species)]


def _masses(args, meson):
    if args.masses == "inferred":
        m = inference.solve_masses(meson, inference.Scenario.INVERTED).require()
        return m.m_L.value, m.m_H.value
    try:
        m_L, m_H = (float(x) for x in args.masses.split(":"))
    except ValueError:
        raise UsageError("--masses must be 'inferred' or '<m_L>:<m_H>'") from None
    if not 0 < m_L < m_H:
        raise UsageError("--masses needs 0 < m_L < m_H")
    return m_L, m_H


def _time_grid(args, meson):
    t_max = args.t_max if args.t_max is not None else 5.0 / meson.gamma_L.value
    if t_max <= 0 or args.n_times < 2:
        raise UsageError("--t-max must be positive and --n-times >= 2")
    return [float(x) for x in np.linspace(0.0, t_max, args.n_times)]


# --- subcommands -------------------------------------------------------------


def cmd_probabilities(args):
    meson = _dataset(args).params(args.species)
    masses = _masses(args, meson)
    m0 = inference.resolve_m0(args.m0, meson)
    ts = _time_grid(args, meson)
    params = {"species": meson.species.value, "model": args.model, "theta0": args.theta0, "m0": m0,
              "masses": list(masses), "t": [ts[0], ts[-1], len(ts)]}
    rows = []
    if args.model == "qmupl":
        if args.alpha_lambda is None:
            raise UsageError("--alpha-lambda is required for --model qmupl")
        p = qmupl.QmuplParams(lam=args.alpha_lambda, alpha=1.0, m0=m0, theta0=args.theta0)
        params["alpha_lambda"] = args.alpha_lambda
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", PerturbativeWarning)
            for t in ts:
                rows.append([
                    t,
                    qmupl.prob_mass_qmupl(p, meson, masses, Eigen.L, Eigen.L, t),
                    qmupl.prob_mass_qmupl(p, meson, masses, Eigen.H, Eigen.H, t),
                    qmupl.prob_flavor_qmupl(p, meson, masses, Target.SAME, t),
                    qmupl.prob_flavor_qmupl(p, meson, masses, Target.CONJUGATE, t),
                    qmupl.qmupl_valid(p, masses, t),
                ])
        header = ["t", "P_LL", "P_HH", "P_same", "P_conj", "validity_flag"]
    else:
        if args.lam is None or args.form is None:
            raise UsageError("--lambda and --form are required for --model csl")
        p = csl.CslParams(csl.resolve_lambda(args.lam), m0, args.theta0, args.inverted)
        params.update(lambda_csl=p.lambda_csl, form=args.form, inverted=args.inverted)
        for t in ts:
            ps = csl.prob_flavor_csl(p, meson, masses, Target.SAME, t, args.form)
            pc = csl.prob_flavor_csl(p, meson, masses, Target.CONJUGATE, t, args.form)
            rows.append([
                t,
                csl.prob_mass_csl(p, meson, masses, Eigen.L, Eigen.L, t, args.form),
                csl.prob_mass_csl(p, meson, masses, Eigen.H, Eigen.H, t, args.form),
                ps,
                pc,
                csl.asymmetry(p, meson, masses, t),
            ])
        header = ["t", "P_LL", "P_HH", "P_same", "P_conj", "A"]
    emit(args, header, rows, params)


def cmd_asymmetry(args):
    meson = _dataset(args).params(args.species)
    masses = _masses(args, meson)
    m0 = inference.resolve_m0(args.m0, meson)
    ts = _time_grid(args, meson)
    p = csl.CslParams(csl.resolve_lambda(args.lam), m0, args.theta0, args.inverted)
    rows = [
        [t,
         csl.prob_flavor_csl(p, meson, masses, Target.SAME, t, "exponential"),
         csl.prob_flavor_csl(p, meson, masses, Target.CONJUGATE, t, "exponential"),
         csl.asymmetry(p, meson, masses, t)]
        for t in ts
    ]
    params = {"species": meson.species.value, "lambda_csl": p.lambda_csl, "m0": m0, "theta0": args.theta0,
              "inverted": args.inverted, "masses": list(masses), "t": [ts[0], ts[-1], len(ts)]}
    emit(args, ["t", "P_same", "P_conj", "A"], rows, params)


def cmd_correlators(args):
    rows = []
    for th in args.theta0_grid:
        for kind in correlators.Kind:
            exact = correlators.closed_form(kind, th)(args.t)
            est = correlators.oracle_c_integrals(kind, 1 - th, args.n_steps, args.n_samples, args.t, args.seed,
                                                 workers=args.workers)
            z = (est.mean - exact) / est.stderr if est.stderr > 0 else 0.0
            rows.append([kind.value, th, float(exact), est.mean, est.stderr, z])
    params = {"theta0_grid": args.theta0_grid, "t": args.t, "n_steps": args.n_steps, "n_samples": args.n_samples,
              "diag_weight": "1 - theta0"}
    emit(args, ["kind", "theta0", "closed_form", "oracle_mean", "oracle_stderr", "z_score"], rows, params,
         seed=args.seed)


def cmd_masses(args):
    ds = _dataset(args)
    rows = []
    for s in _species_list(args):
        m = inference.solve_masses(ds.params(s), args.scenario)
        if not m.feasible:
            raise InfeasiblePhysicsError(f"{s.value}: no positive mass solution ({m.reason})")
        rows.append([s.value, args.scenario, m.m_L.value, m.m_L.err_plus, m.m_L.err_minus,
                     m.m_H.value, m.m_H.err_plus, m.m_H.err_minus])
    header = ["species", "scenario", "m_L", "m_L_err_plus", "m_L_err_minus", "m_H", "m_H_err_plus", "m_H_err_minus"]
    emit(args, header, rows, {"species": [r[0] for r in rows], "scenario": args.scenario})


def cmd_estimate_lambda(args):
    ds = _dataset(args)
    rows = []
    m0s = {}
    for s in _species_list(args):
        meson = ds.params(s)
        m0 = m0s[s.value] = inference.resolve_m0(args.m0, meson)
        for th in args.theta0_grid:
            est = inference.lambda_estimated(meson, m0, th).lam
            rows.append([s.value, th, est.value, est.err_plus, est.err_minus])
    emit(args, ["species", "theta0", "lambda", "err_plus", "err_minus"], rows,
         {"m0": m0s, "m0_choice": args.m0, "theta0_grid": args.theta0_grid})


def cmd_table1(args):
    rows = [[r.species.value, *r.values()] for r in inference.table1(_dataset(args))]
    emit(args, ["species", *inference.TABLE1_COLUMNS], rows, {"scenario": "inverted"})


def cmd_figure1(args):
    ds = _dataset(args)
    data = inference.figure1_data(ds, args.m0, args.theta0_grid, include_errors=not args.no_errors)
    rows = [[r.species.value, r.theta0, r.lam, r.lam_plus, r.lam_minus] for r in data]
    params = {"m0_choice": args.m0, "theta0_grid": args.theta0_grid, "include_errors": not args.no_errors}
    emit(args, ["species", "theta0", "lambda", "lambda_plus", "lambda_minus"], rows, params)


def cmd_simulate(args):
    cfg = stochastic.SimConfig(
        lambda_eff=args.lambda_eff, m_L=args.m_light, m_H=args.m_heavy, m0=args.m0,
        gamma_L=args.gamma_light, gamma_H=args.gamma_heavy, dt=args.dt, t_max=args.t_max,
        n_traj=args.n_traj, seed=args.seed, scheme=args.scheme, record_every=args.record_every,
        workers=args.workers,
    )
    runner = stochastic.run_trajectories if args.mode == "sde" else stochastic.run_kicks
    results = runner(cfg, args.observables)
    rows = []
    for name in args.observables:
        est = results[name]
        for t, m, e in zip(est.times, est.mean, est.stderr):
            rows.append([name, float(t), float(m), float(e)])
    params = {k: getattr(cfg, k) for k in ("lambda_eff", "m_L", "m_H", "m0", "gamma_L", "gamma_H", "dt", "t_max",
                                           "n_traj", "scheme", "record_every")}
    params.update(mode=args.mode, observables=args.observables, kernel_backend=kernels.BACKEND)
    emit(args, ["observable", "t", "mean", "stderr"], rows, params, seed=args.seed)


def cmd_gkls(args):
    meson = _dataset(args).params(args.species)
    masses = _masses(args, meson)
    m0 = inference.resolve_m0(args.m0, meson)
    p = csl.CslParams(csl.resolve_lambda(args.lam), m0, args.theta0, args.inverted)
    gen = gkls.GklsGenerators.from_csl(p, meson, masses)
    ts = _time_grid(args, meson)
    hist = gkls.evolve(gen, gkls.BlockDensity.flavor(args.initial), ts)
    rows = [[h.t, h.p_same(), h.p_conj(), h.trace(), h.min_eigenvalue()] for h in hist]
    params = {"species": meson.species.value, "lambda_csl": p.lambda_csl, "m0": m0, "theta0": args.theta0,
              "inverted": args.inverted, "masses": list(masses), "initial": args.initial,
              "t": [ts[0], ts[-1], len(ts)]}
    emit(args, ["t", "P_same", "P_conj", "trace", "min_eig"], rows, params)


# --- parser --------------------------------------------------------------------


def _add_common(p):
    p.add_argument("--output", "-o", default="-", help="output file, '-' for stdout (default)")
    p.add_argument("--dataset", default=None, help="dataset JSON (default: $MESOCOLLAPSE_DATASET or bundled)")


def _add_physics(p, lam=True):
    p.add_argument("--species", required=True, choices=[s.value for s in Species])
    p.add_argument("--m0", required=True, help="reference mass: nucleon, rest, or a value in s^-1")
    p.add_argument("--theta0", required=True, type=float, help="equal-time step value theta(0) in [0, 1]")
    p.add_argument("--masses", required=True, help="'inferred' (inverted scenario) or '<m_L>:<m_H>' in s^-1")
    if lam:
        p.add_argument("--lambda", dest="lam", required=True, help="collapse rate: adler, grw, or a value in s^-1")
    p.add_argument("--inverted", action="store_true", help="use m0/m instead of m/m0")
    p.add_argument("--t-max", type=float, default=None, help="end time in s (default 5/Gamma_L)")
    p.add_argument("--n-times", type=int, default=101)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mesocollapse", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("probabilities", help="transition probabilities (QMUPL series or CSL)")
    _add_common(p)
    p.add_argument("--model", required=True, choices=["qmupl", "csl"])
    _add_physics(p, lam=False)
    p.add_argument("--lambda", dest="lam", default=None, help="CSL rate: adler, grw, or a value in s^-1")
    p.add_argument("--form", choices=["series", "exponential"], default=None, help="CSL form")
    p.add_argument("--alpha-lambda", type=float, default=None, help="QMUPL product alpha*lambda")
    p.set_defaults(func=cmd_probabilities)

    p = sub.add_parser("asymmetry", help="flavour asymmetry A(t) for CSL")
    _add_common(p)
    _add_physics(p)
    p.set_defaults(func=cmd_asymmetry)

    p = sub.add_parser("correlators", help="closed-form vs Monte Carlo noise correlator integrals")
    _add_common(p)
    p.add_argument("--theta0-grid", type=parse_grid, default=parse_grid("0:1:5"))
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--n-steps", type=int, default=256)
    p.add_argument("--n-samples", type=int, default=4096)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_correlators)

    p = sub.add_parser("masses", help="absolute masses from widths and mass difference")
    _add_common(p)
    p.add_argument("--species", default=None, choices=[s.value for s in Species], help="default: all")
    p.add_argument("--scenario", required=True, choices=[s.value for s in inference.Scenario])
    p.set_defaults(func=cmd_masses)

    p = sub.add_parser("estimate-lambda", help="collapse rate implied by the measured widths")
    _add_common(p)
    p.add_argument("--species", default=None, choices=[s.value for s in Species], help="default: all")
    p.add_argument("--m0", required=True, help="nucleon, rest, or a value in s^-1")
    p.add_argument("--theta0-grid", type=parse_grid, required=True, help="a:b:n")
    p.set_defaults(func=cmd_estimate_lambda)

    p = sub.add_parser("table1", help="widths, mass difference and inferred masses for all species")
    _add_common(p)
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("figure1", help="implied collapse rate versus theta(0)")
    _add_common(p)
    p.add_argument("--m0", required=True, help="nucleon, rest, or a value in s^-1")
    p.add_argument("--theta0-grid", type=parse_grid, default=parse_grid("0:0.45:10"))
    p.add_argument("--no-errors", action="store_true")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=cmd_figure1)

    p = sub.add_parser("simulate", help="stochastic trajectories or random-kick ensembles")
    _add_common(p)
    p.add_argument("--mode", required=True, choices=["sde", "kicks"])
    p.add_argument("--scheme", choices=sorted(stochastic.SCHEMES), default="exact_phase")
    p.add_argument("--lambda-eff", type=float, required=True)
    p.add_argument("--m-light", type=float, required=True)
    p.add_argument("--m-heavy", type=float, required=True)
    p.add_argument("--m0", type=float, required=True)
    p.add_argument("--gamma-light", type=float, required=True)
    p.add_argument("--gamma-heavy", type=float, required=True)
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--t-max", type=float, required=True)
    p.add_argument("--n-traj", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--observables", nargs="+", choices=stochastic.OBSERVABLES,
                   default=["P_same", "P_conj", "P_LL", "P_HH", "coherence_mag"])
    p.add_argument("--record-every", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("gkls", help="master-equation evolution of the surviving/decayed density matrix")
    _add_common(p)
    _add_physics(p)
    p.add_argument("--initial", choices=["same", "conjugate"], default="same")
    p.set_defaults(func=cmd_gkls)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        args.func(args)
    except InfeasiblePhysicsError as exc:
        print(f"mesocollapse: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (NumericalError, FloatingPointError, ArithmeticError) as exc:
        print(f"mesocollapse: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (UsageError, GuardViolation, ValueError, KeyError, OSError) as exc:
        print(f"mesocollapse: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
