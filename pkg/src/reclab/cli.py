"""Command-line front end.

Every subcommand prints a two-column table (times with 9 significant
digits, large bounds as powers of ten) unless ``--format json`` or
``--format csv`` is given.  ``--output PATH`` also writes the JSON (or the
CSV name/value rows) to PATH.

Exit codes: 0 success, 2 precondition error, 3 horizon exhausted.

A ``--config FILE`` of flat ``key = value`` lines supplies defaults; flags
given on the command line win.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from typing import Optional, Sequence

from . import bounds as bnd
from .bounds import Bound, BoundError
from .ensembles import (EnsembleConfig, dimension_sweep, proximity_probability, run_ensemble)
from .geometry import Flavor, build_phase_net, covering_check, diagonal_diamond_distance
from .scenarios import ScenarioError, qutrit_sweep
from .spectral import StateError, load_state, moments
from .timing import CrossingQuery, QueryError, Status, find_exit, find_recurrences

EXIT_OK, EXIT_PRECONDITION, EXIT_HORIZON = 0, 2, 3

CSV_HELP = """\
ensemble --csv columns: trial_id, seed, d, m_mean, m_second_moment, m_variance,
m_fourth_central, m_eps_star, m_lipschitz, w_mean, w_second, w_variance, w_fourth,
w_exit, t_exit, exit_status, mt_lower, thm2_upper, t_rec, rec_horizon, rec_censored,
monotone_ok, d_eff, d_supp, probe_distance, evaluations
"""


class UsageError(ValueError):
    pass


def fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, Bound):
        if v.overflow or v.log10 > 9:
            return f"10^{v.log10:.6f}"
        return f"{v.value:.9g}"
    if isinstance(v, float):
        return f"{v:.9g}"
    if isinstance(v, (list, tuple)):
        return ",".join(fmt(x) for x in v)
    return str(v)


def table(rows) -> str:
    rows = [(str(k), fmt(v)) for k, v in rows]
    w = max((len(k) for k, _ in rows), default=0)
    return "".join(f"{k.ljust(w)}  {v}\n" for k, v in rows)


_PHASE = re.compile(r"([-+]?)((?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)?\*?(pi)?(?:/(\d+\.?\d*))?")


def parse_phase(tok: str) -> float:
    """Parse '0.3', 'pi', '-pi/2', '2pi', '3*pi/4'."""
    t = tok.replace(" ", "")
    m = _PHASE.fullmatch(t)
    if not t or not m or (m.group(2) is None and m.group(3) is None):
        raise UsageError(f"cannot parse phase {tok!r}")
    sign, coef, pi, den = m.groups()
    v = (float(coef) if coef else 1.0) * (math.pi if pi else 1.0)
    if den:
        v /= float(den)
    return -v if sign == "-" else v


def parse_phases(s: str) -> list[float]:
    return [parse_phase(t) for t in s.split(",") if t.strip()]


def parse_family(s: str) -> Optional[float]:
    if s == "uniform":
        return None
    if s.startswith("eta:"):
        return float(s[4:])
    raise UsageError(f"unknown family {s!r}; use uniform or eta:<value>")


def parse_range(s: str) -> list[int]:
    a, _, b = s.partition("..")
    if not b:
        raise UsageError("--dim-sweep takes a..b")
    return list(range(int(a), int(b) + 1))


def read_config(path) -> dict:
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, val = line.partition("=")
            if not sep:
                raise UsageError(f"bad config line {line!r}")
            val = val.strip().strip('"')
            try:
                out[key.strip().replace("-", "_")] = json.loads(val)
            except json.JSONDecodeError:
                out[key.strip().replace("-", "_")] = val
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="reclab", description="Exit and recurrence times of pure-state unitary dynamics.",
                                epilog=CSV_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, state=True, eps=True):
        if state:
            sp.add_argument("--state", help="state file (.json or .csv)")
        if eps:
            sp.add_argument("--epsilon", type=float)
        sp.add_argument("--format", choices=["table", "json", "csv"], default="table")
        sp.add_argument("--output", help="write machine-readable output here")
        sp.add_argument("--config", help="flat key = value defaults file")
        return sp

    common(sub.add_parser("moments", help="energy moments and eps*"), eps=False)
    for name in ("exit", "recur"):
        sp = common(sub.add_parser(name, help=f"certified {name} search"))
        sp.add_argument("--dt-min", type=float)
        sp.add_argument("--refine-tol", type=float)
        sp.add_argument("--t-max", type=float)
        sp.add_argument("--k", type=int, default=1)
    sp = common(sub.add_parser("bounds", help="closed-form bound table"))
    sp.add_argument("--k", type=int)
    sp.add_argument("--t-exit", type=float, help="exit time fed to recurrence bounds")
    sp.add_argument("--t-exit-2eps", type=float)
    sp.add_argument("--measure", action="store_true", help="measure t_exit(eps) and t_exit(2 eps) with the solver")
    sp.add_argument("--particles", type=int, help="n for the non-interacting bound")
    common(sub.add_parser("finite", help="finiteness criterion for the exit time"))

    sp = common(sub.add_parser("cover-check", help="sampled covering check of a phase net"), state=False)
    sp.add_argument("--dim", type=int)
    sp.add_argument("--flavor", choices=["state", "unitary"], default="state")
    sp.add_argument("--samples", type=int, default=100_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--base", help="state file giving the torus weights")

    sp = common(sub.add_parser("diamond", help="distance of two diagonal unitaries"), state=False, eps=False)
    sp.add_argument("--theta", type=parse_phases)
    sp.add_argument("--theta-prime", type=parse_phases)

    sp = common(sub.add_parser("ensemble", help="random-Hamiltonian Monte Carlo"), state=False)
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--dim", type=int)
    g.add_argument("--dim-sweep", type=parse_range)
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--family", default="uniform")
    sp.add_argument("--probe-t", type=float)
    sp.add_argument("--rec-horizon", type=float)
    sp.add_argument("--csv", help="per-trial CSV path")

    sp = common(sub.add_parser("proximity", help="P(D(psi_0, psi_t) < eps) over random spectra"), state=False)
    sp.add_argument("--dim", type=int)
    sp.add_argument("--t", type=float, default=1.0)
    sp.add_argument("--trials", type=int, default=100_000)
    sp.add_argument("--seed", type=int, default=0)

    sp = common(sub.add_parser("scenario", help="canned scenarios"), state=False)
    sp.add_argument("name", choices=["qutrit"])
    sp.add_argument("--ratio", type=float, action="append")
    sp.add_argument("--horizon", type=float)
    return p


def _need(args, *names):
    for n in names:
        if getattr(args, n, None) is None:
            raise UsageError(f"--{n.replace('_', '-')} is required for {args.command}")


def _state(args):
    _need(args, "state")
    return load_state(args.state)


def _cmd_moments(args):
    m = moments(_state(args))
    return m.to_json(), list(m.to_json().items()), EXIT_OK


def _query(args):
    return CrossingQuery(args.epsilon, dt_min=args.dt_min, t_max=args.t_max,
                         refine_tol=args.refine_tol, k=args.k)


def _cert_rows(c):
    return [("t_exit", c.t_exit), ("recurrences", c.recurrences), ("miss_tol", c.miss_tol),
            ("status", c.status.value), ("evaluations", c.evaluations)]


def _cmd_exit(args):
    _need(args, "epsilon")
    c = find_exit(_state(args), _query(args))
    code = EXIT_HORIZON if c.status is Status.HORIZON else EXIT_OK
    return c.to_json(), _cert_rows(c), code


def _cmd_recur(args):
    _need(args, "epsilon")
    if args.k < 1:
        raise UsageError("--k must be >= 1 for recur")
    c = find_recurrences(_state(args), _query(args))
    code = EXIT_HORIZON if c.status is Status.HORIZON else EXIT_OK
    return c.to_json(), _cert_rows(c), code


def _cmd_bounds(args):
    _need(args, "epsilon")
    state = _state(args)
    eps = args.epsilon
    t_exit, t2 = args.t_exit, args.t_exit_2eps
    if args.measure:
        c = find_exit(state, CrossingQuery(eps))
        t_exit = c.t_exit if t_exit is None else t_exit
        if t2 is None and 2 * eps < 1:
            t2 = find_exit(state, CrossingQuery(2 * eps)).t_exit
    if t2 is None and args.k is not None and 2 * eps < 1:
        m = moments(state)
        if m.variance > 0:
            t2 = bnd.exit_upper(2 * eps, m)
    rep = bnd.bound_report(state, eps, t_exit=t_exit, t_exit_2eps=t2, k=args.k, n_particles=args.particles)
    return rep.to_json(), rep.rows(), EXIT_OK


def _cmd_finite(args):
    _need(args, "epsilon")
    f = bnd.finiteness(_state(args), args.epsilon)
    out = {"finite": f.finite, "infimum": f.infimum, "threshold": f.threshold, "caveat": f.caveat}
    return out, list(out.items()), EXIT_OK


def _cmd_cover(args):
    _need(args, "epsilon")
    base = load_state(args.base) if args.base else None
    d = args.dim if args.dim is not None else (base.dim if base else None)
    if d is None:
        raise UsageError("--dim or --base is required for cover-check")
    net = build_phase_net(args.epsilon, d, Flavor(args.flavor), base=base)
    res = covering_check(net, args.samples, args.seed)
    rows = [("net_resolution", net.n), ("net_size_log10", net.log10_size), ("scale", net.scale),
            *res.to_json().items()]
    return res.to_json(), rows, EXIT_OK


def _cmd_diamond(args):
    _need(args, "theta", "theta_prime")
    if len(args.theta) != len(args.theta_prime):
        raise UsageError("--theta and --theta-prime need equal lengths")
    v = diagonal_diamond_distance(args.theta, args.theta_prime)
    return {"distance": v}, [("distance", v)], EXIT_OK


def _write_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)


def _cmd_ensemble(args):
    _need(args, "epsilon")
    eta = parse_family(args.family)
    if args.dim_sweep:
        summaries, fit = dimension_sweep(args.dim_sweep, args.epsilon, args.trials, args.seed,
                                         rec_horizon=args.rec_horizon)
        out = {"summaries": {str(d): s.to_json() for d, s in summaries.items()}, "scaling": fit.to_json()}
        records = [r for s in summaries.values() for r in s.records]
        rows = [(f"median_log_t_rec[d={d}]", m) for d, m in zip(fit.dims, fit.medians)]
        rows += [("slope", fit.slope), ("ci95", list(fit.ci)), ("positive", fit.positive)]
    else:
        _need(args, "dim")
        cfg = EnsembleConfig(d=args.dim, epsilon=args.epsilon, trials=args.trials, seed=args.seed,
                             eta=eta, t_probe=args.probe_t, rec_horizon=args.rec_horizon)
        s = run_ensemble(cfg)
        out = s.to_json()
        records = s.records
        rows = [(k, v) for k, v in out.items() if k != "config" and not isinstance(v, dict)]
        rows += [(f"t_exit_{k}", v) for k, v in s.t_exit_quantiles.items()]
        rows += [(f"t_rec_{k}", v) for k, v in s.t_rec_quantiles.items()]
    if args.csv:
        _write_csv(args.csv, [r.row() for r in records])
    return out, rows, EXIT_OK


def _cmd_proximity(args):
    _need(args, "epsilon", "dim")
    est = proximity_probability(args.dim, args.epsilon, args.t, args.trials, args.seed)
    out = est.to_json()
    rows = [(k, v) for k, v in out.items()]
    return out, rows, EXIT_OK


def _cmd_scenario(args):
    eps = args.epsilon if args.epsilon is not None else 0.1
    ratios = args.ratio or [1e2, 1e3, 1e4]
    reports, mono = qutrit_sweep(eps, ratios, args.horizon)
    out = {"reports": [r.to_json() for r in reports], "monotone": mono}
    rows = []
    for r in reports:
        rows += [(f"t_exit[ratio={r.ratio:g}]", r.certificate.t_exit),
                 (f"n_recurrences[ratio={r.ratio:g}]", len(r.recurrences)),
                 (f"max_gap[ratio={r.ratio:g}]", r.max_gap),
                 (f"max_gap/t_exit[ratio={r.ratio:g}]", r.gap_ratio)]
    rows.append(("gap_ratio_monotone", mono))
    return out, rows, EXIT_OK


COMMANDS = {
    "moments": _cmd_moments,
    "exit": _cmd_exit,
    "recur": _cmd_recur,
    "bounds": _cmd_bounds,
    "finite": _cmd_finite,
    "cover-check": _cmd_cover,
    "diamond": _cmd_diamond,
    "ensemble": _cmd_ensemble,
    "proximity": _cmd_proximity,
    "scenario": _cmd_scenario,
}


def _parse(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        cfg = read_config(args.config)
        sp = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sp._actions}
        unknown = set(cfg) - known
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        sp.set_defaults(**cfg)
        args = parser.parse_args(argv)
    return args


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default, allow_nan=False)


def _json_default(o):
    if isinstance(o, Bound):
        return o.to_json()
    if hasattr(o, "item"):
        return o.item()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _clean(obj):
    """Replace non-finite floats (e.g. overflowing bounds) so output stays strict JSON."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return "overflow" if obj > 0 else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def run_cli(argv: Optional[Sequence[str]] = None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _parse(argv)
        out, rows, code = COMMANDS[args.command](args)
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code) if isinstance(exc.code, int) else EXIT_PRECONDITION
    except (UsageError, StateError, QueryError, BoundError, ScenarioError, ValueError, OSError) as exc:
        print(f"reclab {argv[0] if argv else ''}: error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    out = _clean(out)
    text = _dump_json(out) + "\n"
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "value"])
        w.writerows((k, fmt(v)) for k, v in rows)
        machine = buf.getvalue()
    else:
        machine = text
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(machine)
    if args.format == "table":
        stdout.write(table(rows))
        if args.command in ("exit", "recur"):
            stdout.write(text)
    else:
        stdout.write(machine)
    return code


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
