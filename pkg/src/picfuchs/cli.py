"""``picfuchs`` command-line front end.

Every subcommand prints one JSON document (schema ``pf/1``) on stdout, except
``periods`` which prints CSV.  With ``--out DIR`` the same artifact is also
written to ``DIR/<command>.json`` (or ``periods.csv``).

Exit codes: 0 success, 2 precondition or input error (a JSON error document
is printed on stdout), 1 internal failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import traceback

import numpy as np

from . import __version__
from .critgeom import bounded_interval, kappa_estimate, real_root_span, recenter_min_norm, uni_crit
from .errors import ParseError, PFError
from .forms import format_poly, parse_poly
from .normalization import (is_balanced, is_regular_at_infinity, make_balanced, make_quasimonic,
                            nonhomogeneity, normalization_report)
from .pfsystem import (closedness_defect, derive_doubly_hyperelliptic, derive_hyperelliptic,
                       derive_redundant, derive_redundant_unbalanced, eigen_residuals, extend_block,
                       fuchsianize, hyperelliptic_potential, witness_defect)
from .validate import (critical_points, oval_window, ode_residual, period_samples, period_table)

SCHEMA = "pf/1"
DEFAULT_TOL = 1e-6


def _num(v):
    if v is None or isinstance(v, (bool, str)):
        return v
    if isinstance(v, complex):
        return [v.real, v.imag] if v.imag else v.real
    try:
        return float(v)
    except TypeError:
        return str(v)


def _ham(args):
    if not getattr(args, "ham", None):
        raise PFError("--ham is required for this command")
    return parse_poly(args.ham, args.backend)


def _potential(args):
    """Univariate potential from ``--poly`` or from a hyperelliptic ``--ham``."""
    if getattr(args, "poly", None):
        return parse_poly(args.poly, args.backend).univariate("x")
    H = _ham(args)
    p = hyperelliptic_potential(H)
    if p is None:
        raise PFError("Hamiltonian is not of the form y^2/2 + p(x)")
    return p


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_check(args):
    H = _ham(args)
    rep = normalization_report(H).to_dict()
    rep.update({"command": "check", "hamiltonian": format_poly(H), "degree": H.degree,
                "n": H.degree - 1, "nonhomogeneity": _num(nonhomogeneity(H)),
                "balanced": bool(rep["regular"] and is_balanced(H))})
    return rep


def cmd_normalize(args):
    H = _ham(args)
    if not is_regular_at_infinity(H):
        raise PFError("not regular at infinity")
    Hq, lam = make_quasimonic(H, args.mode)
    out = {"schema": SCHEMA, "command": "normalize", "input": format_poly(H),
           "quasimonic": format_poly(Hq), "quasimonic_scale": _num(lam), "mode": args.mode}
    Hb, mu = make_balanced(Hq)
    # levels of the balanced Hamiltonian are lam * mu^-(n+1) times the original ones
    out.update({"balanced": format_poly(Hb), "balance_scale": _num(mu),
                "level_factor": _num(lam / mu ** Hb.degree)})
    return out


def _derive(args, H=None):
    kind = args.kind
    if kind == "hyperelliptic":
        return derive_hyperelliptic(_potential(args))
    if kind == "doubly":
        if not (args.poly and args.qpoly):
            raise PFError("--kind doubly needs --poly and --qpoly")
        p = parse_poly(args.poly, args.backend).univariate("x")
        q = parse_poly(args.qpoly, args.backend).univariate("y")
        return derive_doubly_hyperelliptic(p, q, monic=not args.non_monic)
    H = _ham(args) if H is None else H
    if kind == "redundant":
        return derive_redundant(H)
    if kind == "unbalanced":
        c = None if args.c is None else parse_poly(args.c, args.backend).coeff(0, 0)
        return derive_redundant_unbalanced(H, c)
    if kind == "fuchsianized":
        lambdas = [complex(v) for v in args.lambdas.split(",")] if args.lambdas else []
        return fuchsianize(H, lambdas)
    raise PFError("unknown kind %r" % kind)


def cmd_derive(args):
    sys_ = _derive(args)
    if args.block is not None:
        return extend_block(sys_, args.block).to_dict()
    d = sys_.to_dict(include_etas=args.etas)
    d["command"] = "derive"
    return d


def _default_range(p, oval):
    lo, hi = oval_window(p, oval)
    if math.isinf(hi):
        w = max(1.0, abs(lo))
        return lo + 0.1 * w, lo + 2.0 * w
    w = hi - lo
    return lo + 0.05 * w, lo + 0.95 * w


def cmd_verify(args):
    sys_ = _derive(args)
    out = {"schema": SCHEMA, "command": "verify", "kind": args.kind, "nu": sys_.nu,
           "witness_defect": _num(witness_defect(sys_)),
           "closedness_defect": _num(closedness_defect(sys_)),
           "achieved": _num(sys_.cert.get("achieved")), "bound": _num(sys_.cert.get("bound"))}
    tol = args.tol if args.tol is not None else DEFAULT_TOL
    ok = out["witness_defect"] <= 1e-9 and out["closedness_defect"] <= 1e-9
    if args.kind == "hyperelliptic":
        p = [complex(v).real for v in _potential(args)]
        t0, t1 = (args.t_min, args.t_max) if args.t_min is not None else _default_range(p, args.oval)
        ts = np.linspace(t0, t1, args.samples)
        res = ode_residual(sys_, period_samples(p, ts, args.oval, sys_.nu))
        out.update({"samples": args.samples, "t_range": [t0, t1], "ode_residual": res})
        ok = ok and res <= tol
    elif sys_.provenance != "doubly":
        loc = critical_points(sys_.hamiltonian)
        er = eigen_residuals(sys_, [(x, y) for x, y, _ in loc.points]) if loc.points else [0.0]
        out.update({"eigen_residual": max(er), "critical_multiplicity": loc.total_multiplicity})
        ok = ok and max(er) <= 1e-7
    out["tolerance"] = tol
    out["ok"] = bool(ok)
    return out


def cmd_periods(args):
    p = [complex(v).real for v in _potential(args)]
    if args.t_min is None:
        t0, t1 = _default_range(p, args.oval)
    else:
        t0, t1 = args.t_min, args.t_max if args.t_max is not None else args.t_min
    return period_table(p, t0, t1, args.count, args.oval)


def cmd_critgeom(args):
    what = args.what
    if what == "kappa":
        est = kappa_estimate(_ham(args))
        d = est.to_dict()
    else:
        if not args.poly:
            raise PFError("--poly is required for critgeom %s" % what)
        p = parse_poly(args.poly, "float").univariate("x")
        if what == "roots":
            d = uni_crit(p).to_dict()
        elif what == "recenter":
            d = recenter_min_norm(p).to_dict()
            d["schema"] = SCHEMA
        else:
            d = {"schema": SCHEMA, "interval_length": bounded_interval(p), "root_span": real_root_span(p),
                 "bound": 4.0}
    d["command"] = "critgeom"
    d["what"] = what
    return d


# ---------------------------------------------------------------------------
# plumbing
# ---------------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--backend", choices=("float", "rational"), default="float",
                        help="coefficient arithmetic (default: float)")
    common.add_argument("--tol", type=float, default=None,
                        help="residual tolerance for verify (default: %g)" % DEFAULT_TOL)
    common.add_argument("--out", default=None, help="directory for the artifact file")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized parts (default: 0)")

    ap = argparse.ArgumentParser(prog="picfuchs", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version="picfuchs " + __version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="regularity and normalization report")
    p.add_argument("--ham", required=True)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("normalize", parents=[common], help="make quasimonic, then balanced")
    p.add_argument("--ham", required=True)
    p.add_argument("--mode", choices=("scalar", "dilation"), default="scalar")
    p.set_defaults(func=cmd_normalize)

    for name, fn, hlp in (("derive", cmd_derive, "derive a Picard-Fuchs system"),
                          ("verify", cmd_verify, "derive and check a system")):
        p = sub.add_parser(name, parents=[common], help=hlp)
        p.add_argument("--ham")
        p.add_argument("--poly", help="potential p(x) (hyperelliptic/doubly kinds)")
        p.add_argument("--qpoly", help="q(y) for --kind doubly")
        p.add_argument("--non-monic", action="store_true", help="allow non-monic p, q for --kind doubly")
        p.add_argument("--kind", default="redundant",
                       choices=("redundant", "unbalanced", "hyperelliptic", "doubly", "fuchsianized"))
        p.add_argument("--c", help="dilation bound for --kind unbalanced")
        p.add_argument("--lambdas", help="comma separated values for --kind fuchsianized")
        if name == "derive":
            p.add_argument("--block", type=int, default=None, metavar="D",
                           help="extend to the block system for degree D")
            p.add_argument("--etas", action="store_true", help="include the witness 1-forms")
        else:
            p.add_argument("--samples", type=int, default=20)
            p.add_argument("--t-min", type=float, default=None)
            p.add_argument("--t-max", type=float, default=None)
            p.add_argument("--oval", type=int, default=0)
        p.set_defaults(func=fn)

    p = sub.add_parser("periods", parents=[common], help="CSV of hyperelliptic periods")
    p.add_argument("--ham")
    p.add_argument("--poly")
    p.add_argument("--t-min", type=float, default=None)
    p.add_argument("--t-max", type=float, default=None)
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--oval", type=int, default=0)
    p.set_defaults(func=cmd_periods)

    p = sub.add_parser("critgeom", parents=[common], help="univariate critical value geometry")
    p.add_argument("what", choices=("roots", "recenter", "chebyshev", "kappa"))
    p.add_argument("--poly")
    p.add_argument("--ham")
    p.set_defaults(func=cmd_critgeom)
    return ap


def error_document(exc):
    err = {"type": type(exc).__name__, "kind": getattr(exc, "kind", "internal"), "message": str(exc)}
    if isinstance(exc, ParseError) and exc.span is not None:
        err["span"] = list(exc.span)
        err["text"] = exc.text
    return {"schema": SCHEMA, "error": err}


def _emit(args, result, stdout):
    if hasattr(result, "to_csv"):
        text = result.to_csv()
        fname = "periods.csv"
    else:
        text = json.dumps(result, indent=2, sort_keys=True) + "\n"
        fname = "%s.json" % args.command
    stdout.write(text)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, fname), "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    ap = build_parser()
    args = ap.parse_args(argv)
    np.random.seed(args.seed)
    try:
        result = args.func(args)
    except PFError as exc:
        stdout.write(json.dumps(error_document(exc), indent=2, sort_keys=True) + "\n")
        return 2
    except Exception as exc:  # noqa: BLE001 - reported as an internal failure
        doc = error_document(exc)
        doc["error"]["traceback"] = traceback.format_exc()
        stderr.write(json.dumps(doc, indent=2) + "\n")
        return 1
    _emit(args, result, stdout)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
