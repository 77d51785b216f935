"""Named verification batteries; each returns a :class:`VerifyReport`."""

from __future__ import annotations

import math
import random
import time
from fractions import Fraction

import numpy as np

from .calculus import (
    exterior_d,
    hodge,
    hodge_data,
    lambda_consistency,
    laplacians,
    monomials,
    xi_basis,
)
from .coeff import ONE, Q, FieldElem, qpow
from .ncalg import (
    XI,
    NCExpr,
    check_confluence,
    get_rules,
    letter,
    normal_order,
    parse_expr,
    r_squared,
)
from .parser import ParseError
from .report import VerifyReport
from .star import star_map
from .structure import build_structure, eigenvalues, verify_structure

__all__ = ["SUITES", "run_suite", "GOLDEN_RELATIONS", "GOLDEN_CORPUS"]


def _timed(fn):
    def wrapper(*args, **kw):
        t0 = time.perf_counter()
        rep = fn(*args, **kw)
        rep.metadata["seconds"] = round(time.perf_counter() - t0, 3)
        return rep

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


# -- structure -----------------------------------------------------------------------


@_timed
def structure_suite(N: int = 3, **_) -> VerifyReport:
    pack = build_structure(N)
    rep = verify_structure(pack)
    rep.suite = "structure"
    rep.metadata["N"] = N
    ev = eigenvalues(N)
    expected = {"s": Q, "a": -Q.inverse(), "t": qpow(1 - N)}
    rep.add(
        "eigenvalues",
        "Rhat = q P_s - q^-1 P_a + q^(1-N) P_t",
        ev == expected,
        details={k: str(v) for k, v in ev.items()},
    )
    return rep


# -- golden relations ----------------------------------------------------------------

GOLDEN_RELATIONS = [
    ("x-x0", "x^- x^0 = q x^0 x^-", "x[-1]*x[0] - q*x[0]*x[-1]"),
    ("x0x+", "x^0 x^+ = q x^+ x^0", "x[0]*x[1] - q*x[1]*x[0]"),
    ("[x-,x+]", "[x^-, x^+] = (q^(1/2) - q^(-1/2)) x^0 x^0", "x[-1]*x[1] - x[1]*x[-1] - (s^4 - s^-4)*x[0]^2"),
    ("xi-xi0", "q xi^- xi^0 + xi^0 xi^- = 0", "q*xi[-1]*xi[0] + xi[0]*xi[-1]"),
    ("xi0xi+", "q xi^0 xi^+ + xi^+ xi^0 = 0", "q*xi[0]*xi[1] + xi[1]*xi[0]"),
    ("xi-xi+", "xi^- xi^+ + xi^+ xi^- = 0", "xi[-1]*xi[1] + xi[1]*xi[-1]"),
    ("xi-^2", "(xi^-)^2 = 0", "xi[-1]^2"),
    ("xi+^2", "(xi^+)^2 = 0", "xi[1]^2"),
    ("xi0^2", "(xi^0)^2 - (q^(1/2) - q^(-1/2)) xi^- xi^+ = 0", "xi[0]^2 - (s^4 - s^-4)*xi[-1]*xi[1]"),
]

GOLDEN_STAR = [
    ("star_x-", "(x^-)* = q^(1/2) x^+", "x[-1]", "s^4*x[1]"),
    ("star_x0", "(x^0)* = x^0", "x[0]", "x[0]"),
    ("star_x+", "(x^+)* = q^(-1/2) x^-", "x[1]", "s^-4*x[-1]"),
]


@_timed
def golden_suite(N: int = 3, **_) -> VerifyReport:
    rep = VerifyReport("golden", metadata={"N": 3})
    rules = get_rules(3)
    for cid, anchor, text in GOLDEN_RELATIONS:
        nf = normal_order(parse_expr(text, 3), rules)
        rep.add(cid, anchor, nf.is_zero(), details={"relation": text, "normal_form": str(nf)})
    for cid, anchor, text, image in GOLDEN_STAR:
        got = star_map(parse_expr(text, 3), 3)
        want = parse_expr(image, 3)
        rep.add(cid, anchor, got == want, details={"star": str(got), "expected": image})
    r2 = normal_order(r_squared(3), rules)
    printed = normal_order(parse_expr("s^4*x[1]*x[-1] + x[0]*x[0] + s^-4*x[-1]*x[1]", 3), rules)
    rep.add("metric", "r^2 = q^(1/2) x^+ x^- + x^0 x^0 + q^(-1/2) x^- x^+", r2 == printed, details={"r2": str(r2)})
    return rep


# -- confluence ----------------------------------------------------------------------


@_timed
def confluence_suite(N: int = 3, max_len: int = 4, samples: int = 200, sample_len: int = 6, **_) -> VerifyReport:
    return check_confluence(get_rules(N), max_len=max_len, samples=samples, sample_len=sample_len)


# -- calculus ------------------------------------------------------------------------


def _random_poly(rng: random.Random, N: int, max_degree: int) -> NCExpr:
    out = NCExpr(N=N)
    for _ in range(rng.randint(1, 4)):
        deg = rng.randint(0, max_degree)
        mono = rng.choice(monomials(N, deg))
        out = out + mono * FieldElem.rational(rng.randint(-3, 3) or 1)
    return out


@_timed
def hodge_suite(N: int = 3, **_) -> VerifyReport:
    data = hodge_data(N)
    rules = data.rules
    rep = VerifyReport("hodge", metadata={"N": N, "c_p": [str(c) for c in data.c], "convention": data.convention})
    vol = tuple(letter(XI, a) for a in build_structure(N).labels)
    one = hodge(NCExpr.scalar(ONE, N), data)
    (word, coeff), = one.terms.items() if len(one.terms) == 1 else ((None, None),)
    ok = word is not None and word[:N] == vol and coeff.at_classical() == ONE
    rep.add("star_one", "*1 = dV (top form, d^N x at q = 1)", ok, details={"*1": str(one)})
    bad = []
    for p in range(N + 1):
        for w in xi_basis(N, p):
            form = NCExpr.word(w, N=N)
            twice = hodge(hodge(form, data), data)
            if twice != normal_order(form, rules):
                bad.append({"form": str(form), "**": str(twice)})
    rep.add("star_squared", "** = id on every basis p-form", not bad, counterexample=bad[:3])
    classical = [c.at_classical() for c in data.c]
    expected = [FieldElem.rational(Fraction(1, math.factorial(N - p))) for p in range(N + 1)]
    rep.add(
        "c_p_classical",
        "c_p(q=1) = 1/(N-p)!",
        classical == expected,
        details={"c_p(1)": [str(c) for c in classical]},
    )
    return rep


@_timed
def calculus_suite(N: int = 3, samples: int = 50, seed: int = 0, **_) -> VerifyReport:
    rules = get_rules(N)
    data = hodge_data(N)
    rep = VerifyReport("calculus", metadata={"N": N, "samples": samples, "seed": seed})
    rng = random.Random(seed)
    bad_d2, bad_leib = [], []
    for _ in range(samples):
        f = _random_poly(rng, N, 4)
        g = _random_poly(rng, N, 2)
        d2 = exterior_d(exterior_d(f, rules), rules)
        if not d2.is_zero():
            bad_d2.append({"f": str(f), "d d f": str(d2)})
        fg = normal_order(f * g, rules)
        lhs = exterior_d(fg, rules)
        rhs = normal_order(exterior_d(f, rules) * g + f * exterior_d(g, rules), rules)
        if lhs != rhs:
            bad_leib.append({"f": str(f), "g": str(g), "difference": str(normal_order(lhs - rhs, rules))})
    rep.add("d_squared", "d^2 = 0", not bad_d2, details={"samples": samples}, counterexample=bad_d2[:2])
    rep.add("leibniz", "d(fg) = (df) g + f (dg)", not bad_leib, details={"samples": samples}, counterexample=bad_leib[:2])
    rep.extend(hodge_suite(N))
    # Laplacian identity on functions of degree <= 4 and on basis forms times low monomials
    bad_lap, bad_delta = [], []
    count = 0
    for deg in range(5):
        for f in monomials(N, deg):
            count += 1
            lhs, rhs, delta = laplacians(f, data)
            if lhs != rhs:
                bad_lap.append({"f": str(f), "lhs": str(lhs), "rhs": str(rhs)})
            # on degree-d functions L^2 acts as q^(-2d), so the two Laplacians differ by q^(2-2d-N)
            if rhs != delta * qpow(2 - 2 * deg - N):
                bad_delta.append({"f": str(f), "rhs": str(rhs), "Delta f": str(delta)})
    form_deg = 2 if N == 3 else 1
    for p in range(1, N + 1):
        for w in xi_basis(N, p):
            for deg in range(form_deg + 1):
                for mono in monomials(N, deg):
                    count += 1
                    f = NCExpr.word(w, N=N) * mono
                    lhs, rhs, _ = laplacians(f, data)
                    if lhs != rhs:
                        bad_lap.append({"f": str(f), "lhs": str(lhs), "rhs": str(rhs)})
    rep.add(
        "laplacian_identity",
        "(d delta + delta d) f = -q^2 (d.d) L^2 f",
        not bad_lap,
        details={"forms": count},
        counterexample=bad_lap[:2],
    )
    rep.add(
        "laplacian_delta",
        "-q^2 (d.d) L^2 f = q^(2-2d-N) Delta f with Delta = -q^N d.d, f of degree d",
        not bad_delta,
        counterexample=bad_delta[:2],
    )
    rep.extend(lambda_consistency(rules, max_degree=3))
    return rep


# -- harmonics, radial, integration ----------------------------------------------------


@_timed
def harmonics_suite(N: int = 3, lmax: int = 4, max_degree: int = 6, **_) -> VerifyReport:
    from .calculus import act
    from .harmonics import Q0, angular_pairing, build_Vl, decompose, gram_matrix, nu_prime_eigenvalue, nu_tilde_pow
    from .ncalg import dot_dd

    rules = get_rules(N)
    rep = VerifyReport("harmonics", metadata={"N": N, "lmax": lmax, "q0": Q0})
    dims = {l: len(build_Vl(N, l)) for l in range(lmax + 1)}
    rep.add("dimensions", "dim V_l = 2l + 1", all(d == 2 * l + 1 for l, d in dims.items()), details={"dims": dims})
    bad = [h.label for l in range(lmax + 1) for h in build_Vl(N, l) if not act(dot_dd(N), h.poly, rules).is_zero()]
    rep.add("harmonicity", "d.d S_l^I = 0", not bad, counterexample=bad)
    worst = max(float(np.max(np.abs(gram_matrix(N, l, Q0, True) - np.eye(2 * l + 1)))) for l in range(lmax + 1))
    rep.add("gram_identity", "<S_l^I, S_l^J> = delta^IJ at q0", worst < 1e-10, details={"max_deviation": worst})
    cross = []
    for l in range(lmax):
        for l2 in range(l + 1, lmax):
            for a in build_Vl(N, l):
                for b in build_Vl(N, l2):
                    if not angular_pairing(a.poly, b.poly, N).is_zero():
                        cross.append((a.label, b.label))
    rep.add("level_orthogonality", "<S_l, S_l'> = 0 for l != l'", not cross, counterexample=cross[:3])
    notpos = [h.label for l in range(lmax + 1) for h in build_Vl(N, l) if not h.norm2.eval_numeric(Q0).real > 0]
    rep.add("t_dot_t", "level-0 part of S* S = (positive) r^(2l)", not notpos, counterexample=notpos)
    bad = []
    count = 0
    for deg in range(max_degree + 1):
        for m in monomials(N, deg):
            count += 1
            if decompose(m, N).reconstruct() != normal_order(m, rules):
                bad.append(str(m))
    rep.add("reconstruct", "f = sum_l sum_I S_l^I f_{l,I}(r)", not bad, details={"polynomials": count}, counterexample=bad[:3])
    bad = []
    for l in range(lmax + 1):
        ev = nu_prime_eigenvalue(l, N)
        if ev != qpow(Fraction(-l * (l + N - 2), 4)) or ev * nu_prime_eigenvalue(l, N, -1) != ONE:
            bad.append(l)
    rep.add("nu_prime", "nu' S_l^I = q^(-l(l+N-2)/4) S_l^I", not bad, counterexample=bad)
    e = decompose(parse_expr("x[-1]*x[0]*x[1] + x[0]^2 + 1", N), N)
    back = nu_tilde_pow(nu_tilde_pow(e, 2), -2)
    rep.add("nu_tilde_inverse", "nu~'^k nu~'^-k = id", back.components == e.components)
    const = nu_tilde_pow(decompose(NCExpr.scalar(ONE, N), N), 4).components.get((0, 0, 0))
    rep.add("nu_tilde_constant", "nu~'^4 1 = q^(-N^2/4)", const == qpow(Fraction(-N * N, 4)), details={"value": str(const)})
    return rep


@_timed
def radial_suite(N: int = 3, q: float = 1.2, **_) -> VerifyReport:
    from .radial import (
        RadialFn,
        derive_radial_constants,
        monomial_window,
        nu_multiplier_numeric,
        nu_multiplier_samples,
        polynomial_crosscheck,
        radial_induction_report,
    )

    rep = radial_induction_report(N)
    rep.suite = "radial"
    rep.extend(polynomial_crosscheck(N, 6))
    rc = derive_radial_constants(N)
    bad = []
    for n in (1, 3, 6):
        for j in (0, Fraction(1, 2)):
            f = RadialFn.rational(n, j)
            df = f.qdiff(rc)
            if df.pole_lattices() != f.pole_lattices():
                bad.append({"f": str(f), "Df": str(df)})
    rep.add("family_closure", "poles of D f stay on q^(j+beta) e^(i pi (2k+1)/n)", not bad, counterexample=bad)
    worst = 0.0
    for l in range(3):
        for m in (-2, 0, 1, 2):
            s = nu_multiplier_numeric(RadialFn.monomial(m), -2, q, N, l, window=monomial_window(m, N, l, q))
            mid = np.abs(s.y) < 1
            exact = q ** ((l + m + N / 2) ** 2 / 2)
            worst = max(worst, float(np.max(np.abs(s.values[mid] / np.exp(m * s.y[mid]) - exact))) / exact)
    rep.add("multiplier_monomials", "nu~'^-2 r^m = q^((m+N/2)^2/2) r^m on S_0", worst < 1e-6, details={"max_rel": worst})
    f = RadialFn.rational(3)
    s = nu_multiplier_numeric(f, -2, q, N)
    w = s.weighted.real
    positive = bool(np.all(w > -s.error)) and bool(np.all(w[np.abs(w) > 10 * s.error] > 0))
    rep.add("multiplier_positive", "nu~'^-2 (1/(1+r^3)) > 0", positive, details={"min": float(w.min()), "error": s.error})
    back = nu_multiplier_samples(s, 2, q, N)
    orig = f.on_log_grid(s.y, q, N / 2)
    dev = float(np.max(np.abs(back.weighted - orig)))
    rep.add("multiplier_inverse", "nu~'^2 nu~'^-2 f = f", dev <= back.error, details={"deviation": dev, "error": back.error})
    rep.metadata.update(rc.to_json())
    return rep


def _stokes_family(N: int):
    from .quadrature import WaveFunction
    from .radial import RadialFn

    return [
        WaveFunction.harmonic(1, I, RadialFn.rational(6)) for I in range(3)
    ] + [
        WaveFunction.harmonic(1, 0, RadialFn.rational(3, j=1, k=2)) + WaveFunction.harmonic(1, 2, RadialFn.rational(3, k=2)),
        WaveFunction.harmonic(2, 2, RadialFn.rational(3, k=3)),
    ]


@_timed
def stokes_suite(N: int = 3, qs=(0.9, 1.2), **_) -> VerifyReport:
    from .quadrature import Measure, WaveFunction, integrate, jackson_sum, stokes_check
    from .radial import RadialFn

    rep = VerifyReport("stokes", metadata={"N": N, "q": list(qs)})
    for q in qs:
        for measure in [Measure("jackson", q, 0.0), Measure("jackson", q, 0.5), Measure("uniform", q)]:
            for i, f in enumerate(_stokes_family(N)):
                for a in build_structure(N).labels:
                    sub = stokes_check(f, a, measure)
                    for c in sub.checks:
                        c.check_id = f"stokes[q={q},{measure.kind},beta={measure.beta},f{i},a={a}]"
                    rep.extend(sub)
    const = stokes_check(WaveFunction.harmonic(0, 0, RadialFn.monomial(0)), 0, Measure("jackson", 1.2))
    ok = const.checks[0].status == "inapplicable"
    rep.add("stokes_gate", "f = 1 does not decay faster than 1/r^(N-1): inapplicable", ok)
    f0 = RadialFn.rational(6)
    for q in qs:
        m = Measure("jackson", q, 0.0)
        base = jackson_sum(f0, m, N, -60, 60)
        shifted = jackson_sum(f0.dilate(1), m, N, -61, 59)
        rel = abs(shifted - base * q ** (-N)) / abs(base)
        rep.add(
            f"lattice_shift[q={q}]",
            "int f(q r) = q^-N int f(r) (Jackson, window shifted by one step)",
            rel < 1e-14,
            details={"rel_err": rel},
        )
        tele = jackson_sum(f0, m, N, -59, 61) - base
        edge = jackson_sum(f0, m, N, 61, 61) - jackson_sum(f0, m, N, -60, -60)
        rep.add(
            f"telescoping[q={q}]",
            "shifting the window changes the sum by its boundary terms",
            abs(tele - edge) <= 1e-15 * abs(base),
            details={"difference": abs(tele - edge)},
        )
        a = integrate(WaveFunction.harmonic(0, 0, f0), m).value
        b = integrate(WaveFunction.harmonic(0, 0, f0), Measure("jackson", q, 0.0, -120, 120)).value
        rep.add(f"truncation[q={q}]", "Jackson sum stable under doubling the window", abs(a - b) <= 1e-8 * abs(a))
    return rep


def hermiticity_family(N: int = 3, beta: float = 0.0, n: int = 3, j: int = 0):
    """Four admissible test functions with poles on the beta lattice; ``n`` sets the pole order."""
    from .quadrature import WaveFunction
    from .radial import RadialFn

    j = Fraction(j) - (Fraction(1, 2) if beta else 0)
    R = lambda k, jj, m=0: RadialFn.rational(n, jj, math.ceil(3 * k / n), m)
    return [
        WaveFunction.harmonic(0, 0, R(2, j), N) + WaveFunction.harmonic(1, 1, R(2, j + 1), N),
        WaveFunction.harmonic(1, 2, R(2, j), N) + WaveFunction.harmonic(0, 0, R(3, j - 1), N),
        WaveFunction.harmonic(1, 0, R(3, j, 1), N) + WaveFunction.harmonic(2, 2, R(3, j), N),
        WaveFunction.harmonic(0, 0, RadialFn.rational(1, j, 4), N) + WaveFunction.harmonic(2, 1, R(3, j + 1), N),
    ]


def hermiticity_battery(fam, m, N: int = 3, tolerance: float = 1e-6) -> VerifyReport:
    """All pairs ``i < k`` for every p^alpha and Delta, plus Gram positivity, under one measure."""
    from .quadrature import gram_positivity, hermiticity_check

    tag_m = f"beta={m.beta}" if m.kind == "jackson" else "uniform"
    rep = VerifyReport("hermiticity", metadata={"N": N, "measure": m.to_json()})
    for i in range(len(fam)):
        for k in range(i + 1, len(fam)):
            for op, alphas in (("momentum", range(1, N + 1)), ("laplacian", (None,))):
                for a in alphas:
                    sub = hermiticity_check(fam[i], fam[k], op, m, alpha=a or 1, tolerance=tolerance)
                    for c in sub.checks:
                        tag = f"p{a}" if op == "momentum" else "Delta"
                        c.check_id = f"hermiticity[{tag_m},{tag},({i},{k})]"
                    rep.extend(sub)
    _, lam = gram_positivity(fam, m)
    rep.add(f"gram_positive[{tag_m}]", "(psi, psi) > 0: Gram matrix positive-definite", lam > 0, details={"min_eigenvalue": lam})
    return rep


@_timed
def hermiticity_suite(N: int = 3, q: float = 1.2, n: int = 3, j: int = 0, measures=None, **_) -> VerifyReport:
    from .quadrature import Measure, WaveFunction, hermiticity_check
    from .radial import RadialFn

    measures = measures or [Measure("jackson", q, 0.0), Measure("jackson", q, 0.5)]
    rep = VerifyReport("hermiticity", metadata={"N": N, "q": q, "family": {"n": n, "j": j}})
    for m in measures:
        rep.extend(hermiticity_battery(hermiticity_family(N, m.beta, n, j), m, N))
    m0 = Measure("jackson", q, 0.0)
    base = hermiticity_family(N)[0]
    off = WaveFunction.harmonic(1, 1, RadialFn.rational(3, Fraction(1, 4), 2), N)
    sub = hermiticity_check(base, off, "momentum", m0)
    rep.add(
        "off_lattice_gate",
        "poles off r_jk = q^(j+beta) e^(i pi (2k+1)/n): inapplicable",
        sub.checks[0].status == "inapplicable",
        details=sub.checks[0].details,
    )
    sub = hermiticity_check(base, WaveFunction.harmonic(1, 1, RadialFn.rational(2, 0, 2), N), "momentum", m0)
    rep.add(
        "n_divides_N_gate",
        "n | N required: inapplicable otherwise",
        sub.checks[0].status == "inapplicable",
        details=sub.checks[0].details,
    )
    return rep


# -- parser --------------------------------------------------------------------------

GOLDEN_CORPUS = [
    "x[-1]*x[0]",
    "x[0]^2",
    "q*x[0]*x[-1]",
    "(s^4 - s^-4)*x[0]^2",
    "xi[-1]*xi[1]",
    "(1 + q^-1)*x[0]*d[0]",
    "x[-1]*x[1]*d[1]*L^-2",
    "-2*xi[-1]*x[0]^3*d[0]^2",
    "q^-3*x[1] - i*x[-1]",
    "(q^2 + q + 1)/(q^2 - 1)*d[-1]*d[1]",
    "3/2*x[0] + 1",
    "1",
    "0",
]


@_timed
def parser_suite(N: int = 3, **_) -> VerifyReport:
    from .calculus import parse

    rules = get_rules(N)
    rep = VerifyReport("parser", metadata={"N": N, "corpus": len(GOLDEN_CORPUS)})
    bad = []
    for text in GOLDEN_CORPUS:
        e = parse_expr(text, N)
        printed = str(e)
        again = parse_expr(printed, N)
        if again != e or str(again) != printed:
            bad.append({"text": text, "printed": printed, "reprinted": str(again)})
        nf = normal_order(e, rules)
        if parse_expr(str(nf), N) != nf:
            bad.append({"text": text, "normal_form": str(nf)})
    rep.add("round_trip", "print(parse(t)) = t' with parse(t') = parse(t)", not bad, counterexample=bad[:3])
    vac = parse("d[0](1)", N, rules)
    rep.add("vacuum", "d_a(1) = 0", vac.is_zero(), details={"d[0](1)": str(vac)})
    xi0 = normal_order(parse_expr("xi[0]^2", N), rules)
    want = normal_order(parse_expr("(s^4 - s^-4)*xi[-1]*xi[1]", N), rules)
    rep.add("xi0_square", "(xi^0)^2 = (q^(1/2) - q^(-1/2)) xi^- xi^+", xi0 == want, details={"normal_form": str(xi0)})
    try:
        parse_expr("x[5]", N)
        pos = None
    except ParseError as exc:
        pos = (exc.line, exc.column)
    rep.add("unknown_index", "x[5] is rejected with its position", pos == (1, 1), details={"position": pos})
    try:
        parse_expr("x[0] +* x[1]", N)
        pos = None
    except ParseError as exc:
        pos = (exc.line, exc.column)
    rep.add("syntax_error", "syntax errors carry line and column", pos is not None, details={"position": pos})
    return rep


SUITES = {
    "structure": structure_suite,
    "golden": golden_suite,
    "confluence": confluence_suite,
    "hodge": hodge_suite,
    "calculus": calculus_suite,
    "harmonics": harmonics_suite,
    "radial": radial_suite,
    "stokes": stokes_suite,
    "hermiticity": hermiticity_suite,
    "parser": parser_suite,
}


def run_suite(name: str, **kw) -> VerifyReport:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    return SUITES[name](**kw)
