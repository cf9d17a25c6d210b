"""Command-line front end.

Subcommands
-----------
build-model  network file -> model file (plant, cost, network)
sweep        gamma homotopy with per-gamma margins; writes tables and gains
analyze      modes, disk margins, remote-channel delay margins, pattern grid
simulate     time-domain trajectories with optional delayed channels
polish       re-optimize a gain on its own sparsity pattern

Every table is tab-separated with a header row and 12 significant digits.
Files are written atomically.  Exit codes: 0 success, 2 input error,
3 no successful solve, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import grid_model as gm
from . import loop_analysis as la
from . import sparse_h2 as sh
from .matrix_equations import MatrixEquationError, solve_care
from .modelio import GainRecord, ModelFormatError, atomic_write_text, dumps_model, load_model

log = logging.getLogger("sparsewac")

EXIT_OK, EXIT_INPUT, EXIT_NO_SOLVE, EXIT_NUMERIC = 0, 2, 3, 4
DEFAULT_SEED = 20160712
OUTDIR_ENV = "SPARSEWAC_OUTDIR"
DEFAULT_OUTDIR = "sparsewac-out"

_ADMM_FLAGS = ("rho", "primal_tol", "dual_tol", "max_iters", "reweight_steps",
               "polish_tol", "polish_max_iters")


class InputError(Exception):
    pass


class NoSolveError(Exception):
    pass


# --- formatting ----------------------------------------------------------------------

def fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.12g" % float(x)


def table_text(header, rows):
    lines = ["\t".join(header)]
    lines += ["\t".join(fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _write(outdir, name, text):
    path = os.path.join(outdir, name)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    atomic_write_text(path, text)
    return path


# --- configuration -------------------------------------------------------------------

def _apply_config(args, parser):
    """Values from ``--config`` replace the corresponding flags."""
    if not getattr(args, "config", None):
        return args
    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise InputError(f"config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"config line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(cfg, dict):
        raise InputError("config: expected a JSON object")
    known = set(vars(args)) - {"func", "config", "command"}
    for key, val in cfg.items():
        dest = key.replace("-", "_")
        if dest not in known:
            raise InputError(f"config: unknown option {key!r} for {args.command}")
        setattr(args, dest, val)
    return args


def _outdir(args):
    out = args.outdir or os.environ.get(OUTDIR_ENV) or DEFAULT_OUTDIR
    os.makedirs(out, exist_ok=True)
    return out


def _admm_options(args):
    kw = {k: getattr(args, k) for k in _ADMM_FLAGS if getattr(args, k, None) is not None}
    try:
        return sh.AdmmOptions(**kw)
    except (TypeError, ValueError) as exc:
        raise InputError(f"ADMM options: {exc}") from None


def gamma_schedule(gmin, gmax, count, spacing="log", explicit=None):
    """Gamma values from ``(min, max, count, spacing)`` or an explicit list."""
    if explicit:
        vals = np.array(sorted(float(v) for v in explicit))
        if np.any(vals < 0) or np.any(np.diff(vals) <= 0):
            raise InputError("gammas must be nonnegative and distinct")
        return vals
    count = int(count)
    if count < 1:
        raise InputError("gamma count must be >= 1")
    if not 0 <= gmin <= gmax:
        raise InputError("gamma range needs 0 <= min <= max")
    if count == 1:
        if gmin != gmax:
            raise InputError("a single gamma needs min == max")
        return np.array([float(gmin)])
    if gmin == gmax:
        raise InputError("count > 1 needs min < max")
    if spacing == "log":
        if gmin <= 0:
            raise InputError("log spacing needs min > 0")
        return np.logspace(np.log10(gmin), np.log10(gmax), count)
    if spacing == "lin":
        return np.linspace(gmin, gmax, count)
    raise InputError(f"unknown spacing {spacing!r}")


def _load(path, need=("plant",)):
    mf = load_model(path)
    for sec in need:
        if getattr(mf, sec) is None:
            raise ModelFormatError(os.fspath(path), f"no {sec} section")
    return mf


def _gain_for(args, mf):
    """Gain from ``--gain``, else the model's own gain section, else zero."""
    p, n = mf.plant.p, mf.plant.n
    if getattr(args, "gain", None):
        g = _load(args.gain, need=("gain",)).gain
    elif mf.gain is not None:
        g = mf.gain
    else:
        return np.zeros((p, n)), "zero gain"
    K = np.asarray(g.K, dtype=float)
    if K.shape != (p, n):
        raise InputError(f"gain is {K.shape[0]}x{K.shape[1]}, plant needs {p}x{n}")
    return K, args.gain or "model gain section"


# --- subcommands ---------------------------------------------------------------------

def cmd_build_model(args):
    mf = _load(args.network, need=("network",))
    net = mf.network
    actuated = _int_csv(args.actuated) if args.actuated else mf.actuated
    try:
        plant = gm.linearize_swing(net, actuated, b1_policy=args.b1)
        if args.cost == "average":
            cost = gm.build_cost_average(plant, args.ell, args.m, args.eps, args.r)
        else:
            if mf.partition is None:
                raise InputError("two-area cost needs network.areas")
            cost = gm.build_cost_two_area(plant, mf.partition, net.M, args.ell, args.m,
                                          args.eps, args.r)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    out = args.output or os.path.join(_outdir(args), "model.json")
    d = os.path.dirname(os.path.abspath(out))
    os.makedirs(d, exist_ok=True)
    atomic_write_text(out, dumps_model(plant=plant, cost=cost, network=net,
                                       actuated=actuated, partition=mf.partition))
    print(f"model\t{out}")
    print(f"states\t{plant.n}\ninputs\t{plant.p}\nnoise_inputs\t{plant.q}")
    print(f"cost\t{json.dumps(cost.provenance, sort_keys=True)}")
    return EXIT_OK


SUMMARY_HEADER = ["index", "gamma", "J", "degradation_pct", "card", "card_offblock",
                  "phase_margin_deg", "alpha", "iterations", "converged", "ok"]
MARGIN_HEADER = ["index", "gamma", "alpha", "omega_min", "phase_margin_deg",
                 "gain_reduction", "gain_amplification"]


def cmd_sweep(args):
    mf = _load(args.model, need=("plant", "cost"))
    plant, cost = mf.plant, mf.cost
    gammas = gamma_schedule(args.gamma_min, args.gamma_max, args.gamma_count,
                            args.gamma_spacing, args.gammas)
    opts = _admm_options(args)
    res = sh.gamma_sweep(plant, cost, gammas, opts)
    outdir = _outdir(args)
    rows, mrows = [], []
    n_ok = 0
    for k, r in enumerate(res.records):
        pm = alpha = float("nan")
        if r.ok:
            n_ok += 1
            try:
                mr = la.disk_margins(plant, r.gain.K)
                pm, alpha = mr.phase_margin, mr.alpha
                mrows.append([k, r.gamma, mr.alpha, mr.omega_min, mr.phase_margin,
                              mr.gain_reduction, mr.gain_amplification])
            except sh.UnstableClosedLoopError as exc:
                log.warning("gamma=%g: %s", r.gamma, exc)
        tag = f"gamma_{k:03d}"
        _write(outdir, f"gains/{tag}.json",
               dumps_model(gain=GainRecord(r.gain.K, r.gain.pattern, r.gain.weights, r.gamma)))
        _write(outdir, f"patterns/{tag}.txt",
               f"gamma\t{fmt(r.gamma)}\n" + sh.render_pattern(r.gain.K, plant.labels) + "\n")
        rows.append([k, r.gamma, r.J, 100.0 * r.degradation, r.card, r.card_offblock,
                     pm, alpha, r.iterations, r.converged, r.ok])
        if not r.ok:
            print(f"# gamma {fmt(r.gamma)} failed: {r.message}", file=sys.stderr)
    _write(outdir, "summary.tsv", table_text(SUMMARY_HEADER, rows))
    _write(outdir, "margins.tsv", table_text(MARGIN_HEADER, mrows))
    print("gamma\tcard\tdegradation_pct\tphase_margin_deg")
    for row in rows:
        print("\t".join(fmt(v) for v in (row[1], row[4], row[3], row[6])))
    print(f"# outputs in {outdir}", file=sys.stderr)
    if n_ok == 0:
        raise NoSolveError("no gamma value produced a solution")
    return EXIT_OK


MODE_HEADER = ["index", "real", "imag", "damping", "frequency_hz", "dominant_state"]


def _mode_rows(Acl):
    rows = []
    for k, m in enumerate(la.mode_report(Acl).modes):
        dom = int(np.argmax(m.participation))
        rows.append([k, m.eigenvalue.real, abs(m.eigenvalue.imag), m.damping, m.frequency, dom])
    return rows


def cmd_analyze(args):
    mf = _load(args.model)
    plant = mf.plant
    K, src = _gain_for(args, mf)
    outdir = _outdir(args)
    Acl = plant.A - plant.B2 @ K
    mode_text = table_text(MODE_HEADER, _mode_rows(Acl))
    _write(outdir, "modes.tsv", mode_text)
    print(f"# gain: {src}")
    print("# modes")
    print(mode_text, end="")
    print("# margins")
    try:
        mr = la.disk_margins(plant, K)
        margin_text = "\n".join(mr.lines()) + "\n"
    except sh.UnstableClosedLoopError as exc:
        margin_text = f"diagnostic\t{exc}; margins need a stabilizing gain\n"
        mr = None
    _write(outdir, "margins.txt", margin_text)
    print(margin_text, end="")
    if mr is not None and all(g >= 0 for g in plant.labels.generator_of_state):
        _, K_rem = sh.decompose_gain(K, plant.labels)
        drows = []
        for i, j in zip(*np.nonzero(np.abs(K_rem) > sh.CARD_TOL)):
            dm = la.delay_margin_single_channel(plant, K, (i, j))
            drows.append([i, j, K[i, j], dm.phase_margin, dm.delay_margin, dm.crossover])
        dtext = table_text(["input", "state", "gain", "phase_margin_deg", "delay_margin_s",
                            "crossover_rad_s"], drows)
        _write(outdir, "remote_channels.tsv", dtext)
        print("# remote channels")
        print(dtext, end="")
    pattern = sh.render_pattern(K, plant.labels) + "\n"
    _write(outdir, "pattern.txt", pattern)
    print("# pattern")
    print(pattern, end="")
    return EXIT_OK


def _parse_delay(spec):
    try:
        i, j, T = spec.split(",") if isinstance(spec, str) else spec
        return int(i), int(j), float(T)
    except (ValueError, TypeError):
        raise InputError(f"delay {spec!r}: expected input,state,seconds") from None


def _initial_state(args, plant, K):
    spec = args.x0
    if spec in (None, "zero"):
        return np.zeros(plant.n)
    if isinstance(spec, list):
        x0 = np.asarray(spec, dtype=float)
    elif isinstance(spec, str) and spec.startswith("mode:"):
        which, _, matrix = spec[5:].partition(":")
        A = plant.A if matrix in ("", "open") else plant.A - plant.B2 @ K
        try:
            x0 = la.eigvec_initial_state(A, int(which))
        except (ValueError, IndexError) as exc:
            raise InputError(f"x0: {exc}") from None
        return args.x0_scale * x0
    else:
        try:
            x0 = np.array([float(v) for v in str(spec).split(",")])
        except ValueError:
            raise InputError(f"x0 {spec!r}: expected zero, mode:K[:open|closed] or numbers") from None
    if x0.size != plant.n:
        raise InputError(f"x0 has {x0.size} entries, plant has {plant.n} states")
    return args.x0_scale * x0


def cmd_simulate(args):
    mf = _load(args.model)
    plant = mf.plant
    K, _ = _gain_for(args, mf)
    delayed = [_parse_delay(d) for d in (args.delay or [])]
    for i, j, _T in delayed:
        if not (0 <= i < plant.p and 0 <= j < plant.n):
            raise InputError(f"delayed channel ({i},{j}) outside the {plant.p}x{plant.n} gain")
    try:
        scen = la.SimScenario(horizon=args.horizon, step=args.step,
                              x0=_initial_state(args, plant, K), noise_std=args.noise_std,
                              delayed=delayed, pade_order=args.pade_order, seed=args.seed)
        tr = la.simulate(plant, K, scen)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    outdir = _outdir(args)
    path = _write(outdir, args.output, table_text(tr.header(), tr.rows()))
    print(f"trajectory\t{path}")
    print(f"steps\t{tr.t.size}\nstates\t{tr.x.shape[1]}\ndelay_states\t{tr.x.shape[1] - tr.n_plant}")
    print(f"final_state_norm\t{fmt(np.linalg.norm(tr.x[-1]))}")
    return EXIT_OK


def cmd_polish(args):
    mf = _load(args.model, need=("plant", "cost"))
    K, src = _gain_for(args, mf)
    if src == "zero gain":
        raise InputError("polish needs a gain (--gain or a gain section)")
    g = _load(args.gain, need=("gain",)).gain if args.gain else mf.gain
    pattern = g.pattern if g.pattern is not None else np.abs(K) > sh.CARD_TOL
    opts = _admm_options(args)
    gain, info = sh.polish(mf.plant, mf.cost, pattern, K, opts, return_info=True)
    J0 = sh.h2_cost(mf.plant, mf.cost, solve_care(mf.plant.A, mf.plant.B2,
                                                     mf.cost.Q, mf.cost.R)[1])
    out = args.output or os.path.join(_outdir(args), "polished_gain.json")
    os.makedirs(os.path.dirname(os.path.abspath(out)), exist_ok=True)
    atomic_write_text(out, dumps_model(gain=GainRecord(gain.K, gain.pattern, g.weights, g.gamma)))
    print(f"gain\t{out}")
    print(f"J\t{fmt(info['J'])}\ndegradation_pct\t{fmt(100 * (info['J'] - J0) / J0)}")
    print(f"card\t{gain.card}\nconverged\t{fmt(bool(info['converged']))}")
    return EXIT_OK


def _int_csv(s):
    if isinstance(s, list):
        return [int(v) for v in s]
    try:
        return [int(v) for v in str(s).split(",") if v.strip()]
    except ValueError:
        raise InputError(f"expected comma-separated integers, got {s!r}") from None


# --- parser ----------------------------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="sparsewac",
                                description="Sparse wide-area control design for swing-equation models.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, model=True):
        if model:
            sp.add_argument("model", help="model file (JSON)")
        sp.add_argument("--outdir", help=f"output directory (default ${OUTDIR_ENV} or {DEFAULT_OUTDIR})")
        sp.add_argument("--config", help="JSON file whose keys replace the flags of the same name")
        sp.add_argument("--seed", type=int, default=DEFAULT_SEED)

    def admm(sp):
        g = sp.add_argument_group("solver options")
        g.add_argument("--rho", type=float)
        g.add_argument("--primal-tol", type=float)
        g.add_argument("--dual-tol", type=float)
        g.add_argument("--max-iters", type=int)
        g.add_argument("--reweight-steps", type=int)
        g.add_argument("--polish-tol", type=float)
        g.add_argument("--polish-max-iters", type=int)

    b = sub.add_parser("build-model", help="linearize a network into a plant and cost")
    b.add_argument("network", help="file with a network section")
    b.add_argument("-o", "--output", help="model file to write (default OUTDIR/model.json)")
    b.add_argument("--actuated", help="comma-separated generator indices with actuators")
    b.add_argument("--b1", choices=("input", "frequency"), default="input")
    b.add_argument("--cost", choices=("average", "two-area"), default="average")
    b.add_argument("--ell", type=float, default=2.0)
    b.add_argument("--m", type=float, default=2.0)
    b.add_argument("--eps", type=float, default=0.1)
    b.add_argument("--r", type=float, default=1.0)
    common(b, model=False)
    b.set_defaults(func=cmd_build_model)

    s = sub.add_parser("sweep", help="gamma homotopy with polishing and margins")
    common(s)
    s.add_argument("--gamma-min", type=float, default=1e-4)
    s.add_argument("--gamma-max", type=float, default=1.0)
    s.add_argument("--gamma-count", type=int, default=40)
    s.add_argument("--gamma-spacing", choices=("log", "lin"), default="log")
    s.add_argument("--gammas", type=float, nargs="+", help="explicit schedule")
    admm(s)
    s.set_defaults(func=cmd_sweep)

    a = sub.add_parser("analyze", help="modes, margins and pattern of a gain")
    common(a)
    a.add_argument("--gain", help="gain file (default: model gain section, else K = 0)")
    a.set_defaults(func=cmd_analyze)

    m = sub.add_parser("simulate", help="linear time-domain simulation")
    common(m)
    m.add_argument("--gain")
    m.add_argument("--horizon", type=float, default=20.0)
    m.add_argument("--step", type=float, default=0.01)
    m.add_argument("--noise-std", type=float, default=0.0)
    m.add_argument("--x0", default="zero", help="zero | mode:K[:open|closed] | comma list")
    m.add_argument("--x0-scale", type=float, default=1.0)
    m.add_argument("--delay", action="append", help="input,state,seconds (repeatable)")
    m.add_argument("--pade-order", type=int, default=2, choices=(1, 2, 3))
    m.add_argument("-o", "--output", default="trajectory.tsv", help="name inside OUTDIR")
    m.set_defaults(func=cmd_simulate)

    q = sub.add_parser("polish", help="re-optimize a gain on its sparsity pattern")
    common(q)
    q.add_argument("--gain")
    q.add_argument("-o", "--output")
    admm(q)
    q.set_defaults(func=cmd_polish)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        _apply_config(args, parser)
        return args.func(args)
    except (InputError, ModelFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FileNotFoundError as exc:
        print(f"error: {exc.filename}: file not found", file=sys.stderr)
        return EXIT_INPUT
    except NoSolveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_SOLVE
    except (MatrixEquationError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
