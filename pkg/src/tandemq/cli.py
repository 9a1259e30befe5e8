"""Command-line surface.

Subcommands: exact, approx, simulate, sweep, charsurf, ld-rate, verify, fit.
Rates come from --lambda/--mu1/--mu2[/--mu3] or a JSON config file
{"lambda": r, "mu": [r, ...]}; explicit flags override the config.  Exit
codes: 0 success, 1 verification failure, 2 usage error, 3 numerical
non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import charsurface as cs
from . import harmonic as hm
from . import report as rp
from .errors import NotConvergedError, TandemError
from .exactsolve import solve_overflow_grid
from .model import Rates, WalkKind, to_corner_frame
from .montecarlo import Estimate, SimConfig, simulate_hit, simulate_overflow

USAGE_ERROR = 2
VERIFY_FAIL = 1
NO_CONVERGENCE = 3

DEFAULT_RATES = Rates(0.1, (0.4, 0.5))


class CliError(Exception):
    def __init__(self, message: str, code: int = USAGE_ERROR):
        super().__init__(message)
        self.code = code


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--lambda", dest="lam", type=float, help="arrival weight")
    p.add_argument("--mu1", type=float, help="service weight, station 1")
    p.add_argument("--mu2", type=float, help="service weight, station 2")
    p.add_argument("--mu3", type=float, help="service weight, station 3 (optional)")
    p.add_argument("--config", help="JSON config path with lambda/mu")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--seed", type=int, default=0)


def _rates(args) -> Rates:
    lam, mu = None, None
    if args.config:
        with open(args.config) as fh:
            obj = json.load(fh)
        lam = obj.get("lambda")
        mu = list(obj.get("mu", []))
    if args.lam is not None:
        lam = args.lam
    if args.mu1 is not None or args.mu2 is not None or args.mu3 is not None:
        base = mu if mu else [DEFAULT_RATES.mu[0], DEFAULT_RATES.mu[1]]
        while len(base) < 2:
            base.append(0.0)
        if args.mu1 is not None:
            base[0] = args.mu1
        if args.mu2 is not None:
            base[1] = args.mu2
        if args.mu3 is not None:
            base = base[:2] + [args.mu3]
        mu = base
    if lam is None and mu is None:
        return DEFAULT_RATES
    if lam is None:
        lam = DEFAULT_RATES.lam
    if not mu:
        mu = list(DEFAULT_RATES.mu)
    try:
        return Rates(lam, tuple(mu))
    except ValueError as e:
        raise CliError(str(e))


def _point(text: str, dims: int | None = None) -> tuple[int, ...]:
    try:
        p = tuple(int(c) for c in text.split(","))
    except ValueError:
        raise CliError(f"cannot parse point {text!r}; expected e.g. 1,0")
    if dims is not None and len(p) != dims:
        raise CliError(f"point {text!r} must have {dims} coordinates")
    return p


def _emit(args, text: str):
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _fmt(v: float) -> str:
    return rp.FLOAT_FMT % v


def cmd_exact(args) -> int:
    r = _rates(args)
    x = _point(args.x, 2)
    grid = solve_overflow_grid(r, args.n, tol=args.tol, max_sweeps=args.max_sweeps)
    _emit(args, _fmt(grid.value(x)) + "\n")
    return 0


def cmd_approx(args) -> int:
    r = _rates(args)
    if args.y is not None:
        y = _point(args.y)
    else:
        if args.n is None:
            raise CliError("approx needs --n together with --x (or use --y)")
        y = to_corner_frame(args.n, _point(args.x))
    _emit(args, _fmt(hm.hit_prob(r, y)) + "\n")
    return 0


def cmd_simulate(args) -> int:
    r = _rates(args)
    start = _point(args.start, 2)
    if args.walk == "x":
        if args.n is None:
            raise CliError("queue-length simulation needs --n")
        cfg = SimConfig(
            r, WalkKind.CONSTRAINED_X, start, args.paths, args.seed, buffer_n=args.n
        )
        est = simulate_overflow(cfg)
    else:
        cfg = SimConfig(
            r,
            WalkKind.LIMIT_Y,
            start,
            args.paths,
            args.seed,
            escape_gap=args.escape_gap,
        )
        est = simulate_hit(cfg)
    _emit(args, est.to_json() + "\n")
    return 0


def cmd_sweep(args) -> int:
    r = _rates(args)
    rows = rp.sweep(r, args.n, stride=args.stride, tol=args.tol, max_sweeps=args.max_sweeps)
    if args.format == "json":
        _emit(args, rp.sweep_to_json(rows) + "\n")
    else:
        _emit(args, rp.sweep_to_csv(rows))
    return 0


def cmd_charsurf(args) -> int:
    r = _rates(args)
    grid = np.linspace(args.alpha_min, args.alpha_max, args.points)
    pts = cs.real_section(r, [float(a) for a in grid])
    if args.format == "json":
        _emit(args, json.dumps([{"alpha": a, "beta": b} for a, b in pts]) + "\n")
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["alpha", "beta"])
        for a, b in pts:
            w.writerow([_fmt(a), _fmt(b)])
        _emit(args, buf.getvalue())
    return 0


def cmd_ld_rate(args) -> int:
    r = _rates(args)
    try:
        x = tuple(float(c) for c in args.x.split(","))
    except ValueError:
        raise CliError(f"cannot parse point {args.x!r}")
    rep = rp.ld_rate(r, x)
    _emit(args, json.dumps(rep.to_json_dict()) + "\n")
    return 0


def cmd_verify(args) -> int:
    r = _rates(args)
    rep = rp.verify(r, seed=args.seed)
    _emit(args, rep.to_json() + "\n")
    return 0 if rep.passed else VERIFY_FAIL


def cmd_fit(args) -> int:
    r = _rates(args).normalized()
    basis: list[hm.BasisElement] = []
    if args.betas:
        for tok in args.betas.split(","):
            basis.append(complex(float(tok)))
    else:
        basis.append(r.rho[1])  # the pair that matches constant boundary data
    if not args.no_corner_bracket:
        basis.append(hm.bracket(r.rho[0], (r.rho[0],)))
    samples = [(k, k) for k in range(args.samples)]
    fit = hm.fit_boundary(r, basis, lambda y: args.target, samples)
    out = {
        "weights": [[w.real, w.imag] for w in fit.weights],
        "max_boundary_error": fit.max_boundary_error,
        "points_used": fit.points_used,
    }
    _emit(args, json.dumps(out) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="tandemq",
        description="Buffer-overflow probabilities of tandem queues, three ways",
    )
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("exact", help="solve the simplex system and print one value")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--x", required=True, help="start point, e.g. 1,0")
    sp.add_argument("--tol", type=float, default=1e-12)
    sp.add_argument("--max-sweeps", type=int, default=10**6)
    _add_common(sp)
    sp.set_defaults(fn=cmd_exact)

    sp = sub.add_parser("approx", help="closed-form limit value")
    sp.add_argument("--n", type=int)
    sp.add_argument("--x", help="queue-frame point, combined with --n")
    sp.add_argument("--y", help="corner-frame point, e.g. 59,0")
    _add_common(sp)
    sp.set_defaults(fn=cmd_approx)

    sp = sub.add_parser("simulate", help="Monte Carlo estimate")
    sp.add_argument("--walk", choices=("x", "y"), default="x")
    sp.add_argument("--n", type=int, help="buffer size (x walk)")
    sp.add_argument("--escape-gap", type=int, default=40, help="truncation gap (y walk)")
    sp.add_argument("--start", required=True, help="start point, e.g. 1,0")
    sp.add_argument("--paths", type=int, default=100000)
    _add_common(sp)
    sp.set_defaults(fn=cmd_simulate)

    sp = sub.add_parser("sweep", help="exact vs closed form over the simplex")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--stride", type=int, default=1)
    sp.add_argument("--tol", type=float, default=1e-12)
    sp.add_argument("--max-sweeps", type=int, default=10**6)
    _add_common(sp)
    sp.set_defaults(fn=cmd_sweep)

    sp = sub.add_parser("charsurf", help="real section of the characteristic surface")
    sp.add_argument("--alpha-min", type=float, default=0.02)
    sp.add_argument("--alpha-max", type=float, default=1.3)
    sp.add_argument("--points", type=int, default=257)
    _add_common(sp)
    sp.set_defaults(fn=cmd_charsurf)

    sp = sub.add_parser("ld-rate", help="large-deviations decay report")
    sp.add_argument("--x", required=True, help="scaled start, e.g. 0.3,0.2")
    _add_common(sp)
    sp.set_defaults(fn=cmd_ld_rate)

    sp = sub.add_parser("verify", help="run the invariant suite")
    _add_common(sp)
    sp.set_defaults(fn=cmd_verify)

    sp = sub.add_parser("fit", help="least-squares boundary fit")
    sp.add_argument("--betas", help="comma-separated real betas for pair basis elements")
    sp.add_argument("--samples", type=int, default=50)
    sp.add_argument("--target", type=float, default=1.0)
    sp.add_argument(
        "--no-corner-bracket",
        action="store_true",
        help="drop the self-conjugate bracket from the basis",
    )
    _add_common(sp)
    sp.set_defaults(fn=cmd_fit)

    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code
    except NotConvergedError as e:
        print(f"error: {e}", file=sys.stderr)
        return NO_CONVERGENCE
    except (TandemError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
