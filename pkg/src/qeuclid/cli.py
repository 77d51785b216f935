"""``qeuclid`` command line: normalize expressions, run verification suites, numeric demos.

Exit codes: 0 all checks passed, 1 some check failed, 2 usage, configuration or IO error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from fractions import Fraction

from .report import EXIT_OK, EXIT_USAGE, VerifyReport

VERBS = (
    "normalize",
    "verify",
    "tensors",
    "hodge",
    "laplacian",
    "d",
    "delta",
    "integrate",
    "stokes",
    "hermiticity",
    "action",
    "harmonics",
)


class UsageError(Exception):
    pass


def atomic_write(path: str, text: str) -> None:
    """Write via a temporary file in the target directory and rename into place."""
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".qeuclid-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _report_csv(rep: VerifyReport) -> str:
    rows = [
        [c.check_id, c.status, c.anchor, json.dumps(c.details, default=str), json.dumps(c.counterexample, default=str)]
        for c in rep.checks
    ]
    return _csv_text(["check_id", "status", "anchor", "details", "counterexample"], rows)


def parse_family(text: str | None) -> dict:
    """``n=3,j=0[,k=2,m=0,l=0,I=0]``."""
    out = {"n": 3, "j": Fraction(0), "k": 2, "m": 0, "l": 0, "I": 0}
    if not text:
        return out
    for item in text.split(","):
        if "=" not in item:
            raise UsageError(f"bad --family item {item!r}; expected key=value")
        key, val = (t.strip() for t in item.split("=", 1))
        if key not in out:
            raise UsageError(f"unknown --family key {key!r}; choose from {', '.join(out)}")
        try:
            out[key] = Fraction(val) if key == "j" else int(val)
        except ValueError:
            raise UsageError(f"bad value for {key}: {val!r}") from None
    if out["n"] < 1 or out["k"] < 1:
        raise UsageError("--family needs n >= 1 and k >= 1")
    return out


def _family_wave(args):
    from .quadrature import WaveFunction
    from .radial import RadialFn

    fam = parse_family(args.family)
    f = RadialFn.rational(fam["n"], fam["j"], fam["k"], fam["m"])
    return WaveFunction.harmonic(fam["l"], fam["I"], f, args.N), fam


def _measure(args):
    from .quadrature import Measure

    if args.q is None:
        raise UsageError(f"{args.verb} needs --q")
    try:
        return Measure.parse(args.measure, args.q)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _expr(args):
    from .calculus import parse
    from .ncalg import get_rules

    if not args.expr:
        raise UsageError(f"{args.verb} needs an expression")
    return parse(args.expr, args.N, get_rules(args.N))


def _expr_result(args, pairs) -> tuple[int, dict]:
    payload = {"verb": args.verb, "N": args.N, "input": args.expr}
    payload.update({k: str(v) for k, v in pairs})
    return EXIT_OK, payload


# -- verbs ---------------------------------------------------------------------------


def cmd_normalize(args):
    from .ncalg import get_rules, normal_order

    return _expr_result(args, [("normal_form", normal_order(_expr(args), get_rules(args.N)))])


def cmd_d(args):
    from .calculus import exterior_d
    from .ncalg import get_rules

    return _expr_result(args, [("d", exterior_d(_expr(args), get_rules(args.N)))])


def _hodge_data(args):
    from .calculus import hodge_data

    if args.N > 4:
        raise UsageError("the Hodge map is supported for N <= 4")
    return hodge_data(args.N)


def cmd_hodge(args):
    from .calculus import hodge

    return _expr_result(args, [("hodge", hodge(_expr(args), _hodge_data(args)))])


def cmd_delta(args):
    from .calculus import codifferential

    return _expr_result(args, [("delta", codifferential(_expr(args), _hodge_data(args)))])


def cmd_laplacian(args):
    from .calculus import laplacians

    lhs, rhs, delta = laplacians(_expr(args), _hodge_data(args))
    code, payload = _expr_result(args, [("d_delta_plus_delta_d", lhs), ("minus_q2_dd_L2", rhs), ("Delta", delta)])
    payload["identity_holds"] = lhs == rhs
    return code, payload


def cmd_tensors(args):
    from .structure import build_structure

    try:
        pack = build_structure(args.N)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    data = json.loads(pack.to_json())
    if args.format == "csv":
        rows = [[t["name"], " ".join(map(str, e["idx"])), e["val"]] for t in data for e in t["entries"]]
        return EXIT_OK, _csv_text(["tensor", "idx", "val"], rows)
    return EXIT_OK, data


def cmd_harmonics(args):
    from .harmonics import harmonics_json

    if args.N != 3:
        raise UsageError("harmonics are supported for N = 3")
    return EXIT_OK, harmonics_json(args.N, args.lmax)


def cmd_verify(args):
    from .suites import SUITES, run_suite

    if not args.suite:
        raise UsageError(f"verify needs --suite ({', '.join(SUITES)} or all)")
    names = list(SUITES) if args.suite == "all" else [args.suite]
    for name in names:
        if name not in SUITES:
            raise UsageError(f"unknown suite {name!r}; choose from {', '.join(SUITES)} or all")
    limits = {"structure": 6, "calculus": 4, "hodge": 4, "confluence": 4}
    for name in names:
        if args.N > limits.get(name, 3):
            raise UsageError(f"suite {name} supports N <= {limits.get(name, 3)}")
    kw = {"N": args.N}
    if args.q is not None:
        kw["q"] = args.q
    reports = [run_suite(name, **kw) for name in names]
    if len(reports) == 1:
        rep = reports[0]
    else:
        rep = VerifyReport("all", metadata={"suites": {r.suite: r.metadata for r in reports}})
        for r in reports:
            for c in r.checks:
                c.check_id = f"{r.suite}/{c.check_id}"
            rep.extend(r)
    return rep.exit_code, rep


def cmd_integrate(args):
    from .quadrature import integrate

    m = _measure(args)
    wf, fam = _family_wave(args)
    if args.format == "csv":
        import numpy as np

        from .quadrature import _jackson_window
        from .radial import y_grid

        f0 = wf.l0()
        if m.kind == "jackson":
            n0, n1, _ = _jackson_window(f0, m, args.N)
            y = (np.arange(n0, n1 + 1) + m.beta) * np.log(m.q)
        else:
            y = y_grid(m.q, -20.0, 20.0)
        vals = f0.on_log_grid(y, m.q)
        return EXIT_OK, _csv_text(["y", "re", "im"], [[f"{a:.17g}", f"{v.real:.17g}", f"{v.imag:.17g}"] for a, v in zip(y, vals)])
    try:
        res = integrate(wf, m)
    except Exception as exc:
        raise UsageError(f"integral not defined: {exc}") from None
    return EXIT_OK, {
        "function": str(wf),
        "family": {k: str(v) for k, v in fam.items()},
        "measure": m.to_json(),
        "value": [res.value.real, res.value.imag],
        "error": res.error,
        "meta": res.meta,
    }


def cmd_stokes(args):
    from .quadrature import stokes_check
    from .structure import labels

    m = _measure(args)
    wf, _ = _family_wave(args)
    alphas = labels(args.N) if args.alpha is None else [args.alpha]
    rep = VerifyReport("stokes", metadata={"N": args.N, "measure": m.to_json(), "f": str(wf)})
    for a in alphas:
        sub = stokes_check(wf, a, m)
        for c in sub.checks:
            c.check_id = f"stokes[a={a}]"
        rep.extend(sub)
    return rep.exit_code, rep


def cmd_hermiticity(args):
    from .suites import hermiticity_battery, hermiticity_family

    m = _measure(args)
    fam = parse_family(args.family)
    beta = m.beta if m.kind == "jackson" else 0.0
    funcs = hermiticity_family(args.N, beta, fam["n"], fam["j"])
    rep = hermiticity_battery(funcs, m, args.N, tolerance=args.tolerance)
    rep.metadata["family"] = {"n": fam["n"], "j": str(fam["j"])}
    rep.metadata["functions"] = [str(f) for f in funcs]
    return rep.exit_code, rep


def cmd_action(args):
    from .quadrature import kinetic_action

    m = _measure(args)
    wf, _ = _family_wave(args)
    out = kinetic_action(wf, args.mass, m)
    out.update({"function": str(wf), "M": args.mass, "measure": m.to_json()})
    return EXIT_OK, out


HANDLERS = {name: globals()[f"cmd_{name}"] for name in VERBS}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qeuclid", description=__doc__.splitlines()[0])
    p.add_argument("verb", choices=VERBS)
    p.add_argument("expr", nargs="?", help="expression for normalize/d/delta/hodge/laplacian")
    p.add_argument("--N", type=int, default=3)
    p.add_argument("--q", type=float, default=None, help="numeric value of q")
    p.add_argument("--measure", default="jackson:beta=0", help="uniform | jackson:beta=0|0.5[,r0=..][,window=..]")
    p.add_argument("--suite", help="verification suite name or 'all'")
    p.add_argument("--family", help="radial family, e.g. n=3,j=0,k=2,m=0,l=0,I=0")
    p.add_argument("--alpha", type=int, default=None, help="derivative label for stokes")
    p.add_argument("--mass", "--M", type=float, default=0.0, dest="mass")
    p.add_argument("--lmax", type=int, default=3)
    p.add_argument("--tolerance", type=float, default=1e-6)
    p.add_argument("--out", help="write the artifact here (atomically)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    return p


def _render(payload, fmt: str) -> str:
    if isinstance(payload, str):
        return payload
    if isinstance(payload, VerifyReport):
        return _report_csv(payload) if fmt == "csv" else payload.to_json() + "\n"
    if fmt == "csv":
        return _csv_text(["key", "value"], [[k, json.dumps(v, default=str)] for k, v in payload.items()])
    return json.dumps(payload, indent=2, default=str) + "\n"


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    from .ncalg import ExpressionError
    from .parser import ParseError
    from .radial import RadialError

    if args.N < 3:
        print("error: N must be at least 3", file=sys.stderr)
        return EXIT_USAGE
    try:
        code, payload = HANDLERS[args.verb](args)
    except (UsageError, ParseError, ExpressionError, RadialError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = _render(payload, args.format)
    if args.out:
        try:
            atomic_write(args.out, text)
        except OSError as exc:
            print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
            return EXIT_USAGE
    if isinstance(payload, VerifyReport):
        for line in payload.summary_lines():
            print(line)
        print(f"{payload.suite}: {'PASS' if payload.passed else 'FAIL'}")
    elif not args.out:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
