"""Differential calculus on top of the rewriting engine: d, epsilon, Hodge map, Laplacians."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .coeff import ONE, Q, ZERO, FieldElem, qpow
from .ncalg import (
    D,
    LAM,
    LAM_INV,
    XI,
    X,
    ExpressionError,
    NCExpr,
    RuleSet,
    dot_dd,
    get_rules,
    letter,
    normal_order,
    parse_expr,
    r_squared,
    species,
    word_str,
)
from .report import VerifyReport

__all__ = [
    "act",
    "project",
    "d_operator",
    "exterior_d",
    "EpsilonTensor",
    "epsilon",
    "HodgeData",
    "solve_cp",
    "hodge",
    "hodge_data",
    "codifferential",
    "laplacians",
    "lambda_operator",
    "lambda_consistency",
    "xi_basis",
    "parse",
    "HodgeError",
]


class HodgeError(RuntimeError):
    pass


def _has(word, sp) -> bool:
    return any(species(a) == sp for a in word)


def project(e: NCExpr, rules: RuleSet) -> NCExpr:
    """Apply an element to 1: normal-order, kill words ending in d, drop trailing L^k."""
    out: dict = {}
    for w, c in normal_order(e, rules).terms.items():
        if _has(w, D):
            continue
        w = tuple(a for a in w if a not in (LAM, LAM_INV))
        out[w] = out.get(w, ZERO) + c
    return NCExpr(out, rules.N)


def act(op: NCExpr, f: NCExpr, rules: RuleSet) -> NCExpr:
    """Action of the operator ``op`` on the form ``f`` (a polynomial form, no d letters)."""
    if any(_has(w, D) for w in f.terms):
        raise ExpressionError("act needs a polynomial form; the argument contains d letters")
    return project(op * f, rules)


def d_operator(N: int) -> NCExpr:
    """``d = xi^a d_a``."""
    from .structure import labels

    return NCExpr({(letter(XI, a), letter(D, a)): ONE for a in labels(N)}, N)


def exterior_d(f: NCExpr, rules: RuleSet) -> NCExpr:
    return act(d_operator(rules.N), f, rules)


def xi_degrees(e: NCExpr) -> set[int]:
    return {sum(1 for a in w if species(a) == XI) for w in e.terms}


def xi_basis(N: int, p: int) -> list[tuple]:
    """Normal-ordered basis monomials of degree p in the xi's (strictly ascending words)."""
    from .structure import labels

    return [tuple(letter(XI, a) for a in combo) for combo in itertools.combinations(labels(N), p)]


# -- epsilon -------------------------------------------------------------------------


@dataclass(frozen=True)
class EpsilonTensor:
    N: int
    entries: dict  # N-tuple of labels -> FieldElem, zeros omitted
    volume: tuple  # ascending top word

    def __getitem__(self, idx) -> FieldElem:
        return self.entries.get(tuple(idx), ZERO)


def epsilon(N: int, rules: RuleSet | None = None) -> EpsilonTensor:
    """Coefficients of ``xi^{a1}...xi^{aN} = eps^{a1...aN} vol`` obtained by reduction."""
    rules = rules or get_rules(N)
    (vol,) = xi_basis(N, N)
    entries = {}
    for idx in itertools.product(rules.pack.labels, repeat=N):
        nf = normal_order(NCExpr.word([letter(XI, a) for a in idx], N=N), rules)
        stray = [w for w in nf.terms if w != vol]
        if stray:
            raise HodgeError(f"xi-word {idx} reduces to non-top monomials {[word_str(w) for w in stray]}")
        c = nf.coefficient(vol)
        if not c.is_zero():
            entries[idx] = c
    return EpsilonTensor(N, entries, vol)


# -- Hodge map -----------------------------------------------------------------------


@dataclass
class HodgeData:
    N: int
    c: list  # c_p, p = 0..N
    eps: EpsilonTensor
    images: dict  # basis xi-word -> *(xi-word), normal-ordered
    convention: str
    rules: RuleSet

    @property
    def dV(self) -> NCExpr:
        return self.images[()]


CONVENTIONS = ("head-right", "head-left", "tail-right", "tail-left")


def _lowered_eps(eps: EpsilonTensor, pack, A: tuple, p: int, convention: str) -> dict:
    """``eps_{b_N ... b_{p+1}}^{a_1 ... a_p}`` as a map (b_{p+1}, ..., b_N) -> value.

    ``convention`` is "tail-left"/"tail-right" (lower the last N-p slots with
    g_{cb} or g_{bc}) or "head-left"/"head-right" (lower slots placed first, in
    reversed order).
    """
    N = eps.N
    where, side = convention.split("-")
    out: dict = {}
    for idx, v in eps.entries.items():
        if where == "tail":
            if idx[:p] != A:
                continue
            free = idx[p:]  # gamma_{p+1} .. gamma_N
        else:
            if idx[N - p :] != A:
                continue
            free = tuple(reversed(idx[: N - p]))
        coeff = v
        betas = []
        for gmm in free:
            b = -gmm
            coeff = coeff * (pack.g(gmm, b) if side == "left" else pack.g(b, gmm))
            betas.append(b)
        key = tuple(betas)
        out[key] = out.get(key, ZERO) + coeff
    return {k: v for k, v in out.items() if not v.is_zero()}


def _raw_images(N: int, eps: EpsilonTensor, rules: RuleSet, convention: str) -> dict:
    """``*(xi^A)`` without the factor c_p, for every basis monomial."""
    pack = rules.pack
    images = {}
    for p in range(N + 1):
        lam = (LAM,) * (2 * p - N) if 2 * p >= N else (LAM_INV,) * (N - 2 * p)
        pref = qpow(Fraction(-N * (2 * p - N), 2))
        for word in xi_basis(N, p):
            A = tuple(a - letter(XI, 0) for a in word)
            acc = NCExpr(N=N)
            for betas, v in _lowered_eps(eps, pack, A, p, convention).items():
                w = tuple(letter(XI, b) for b in betas) + lam
                acc = acc + NCExpr.word(w, pref * v, N)
            images[word] = normal_order(acc, rules)
    return images


def _square_ratio(N: int, raw: dict, rules: RuleSet, p: int):
    """*(*) on degree p with c = 1; returns the scalar if it is a multiple of the identity."""
    ratio = None
    for word in xi_basis(N, p):
        twice = _apply_images(raw, raw[word], rules)
        expected_words = {word}
        if set(twice.terms) != expected_words:
            return None
        r = twice.coefficient(word)
        if ratio is None:
            ratio = r
        elif r != ratio:
            return None
    return ratio


def _apply_images(images: dict, e: NCExpr, rules: RuleSet, scale=None) -> NCExpr:
    out = NCExpr(N=rules.N)
    for w, c in normal_order(e, rules).terms.items():
        k = 0
        while k < len(w) and species(w[k]) == XI:
            k += 1
        head, tail = w[:k], w[k:]
        img = images[head] * NCExpr.word(tail, c, rules.N)
        if scale is not None:
            img = img * scale[k]
        out = out + img
    return normal_order(out, rules)


def _laplacian_parts(form: NCExpr, raw: "HodgeData"):
    """(d delta f, delta d f, -q^2 (d.d) L^2 f) with every c_p set to 1."""
    rules = raw.rules
    a = exterior_d(codifferential(form, raw), rules)
    b = codifferential(exterior_d(form, rules), raw)
    lam2 = NCExpr.word((LAM, LAM), N=raw.N)
    rhs = act(dot_dd(raw.N) * lam2, form, rules) * (-(Q * Q))
    return a, b, rhs


def solve_cp(
    N: int, eps: EpsilonTensor | None = None, rules: RuleSet | None = None, convention: str = "head-right"
) -> HodgeData:
    """Solve the normalizations c_p.

    ``*^2 = id`` fixes the products c_p c_{N-p}; requiring d delta + delta d to
    equal -q^2 (d.d) L^2 on one test form per degree fixes c_p c_{N+1-p}.  The
    two chains determine every c_p from one square root, whose sign is chosen
    so that c_p(q=1) = 1/(N-p)!.
    """
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown lowering convention {convention!r}; choose from {', '.join(CONVENTIONS)}")
    rules = rules or get_rules(N)
    eps = eps or epsilon(N, rules)
    raw_images = _raw_images(N, eps, rules, convention)
    raw = HodgeData(N, [ONE] * (N + 1), eps, raw_images, convention, rules)

    pair: dict = {}  # frozenset({a, b}) -> c_a c_b
    for p in range(0, N // 2 + 1):
        ratio = _square_ratio(N, raw_images, rules, p)
        if ratio is None:
            raise HodgeError(f"*^2 is not proportional to the identity on degree {p} (N={N}, convention {convention})")
        pair[(p, N - p)] = ratio.inverse()

    X = {}
    for p in range(0, N):
        known = X.get(p, ZERO)
        solved = False
        for word in xi_basis(N, p):
            for mono in [NCExpr.word((), N=N)] + monomials(N, 1) + monomials(N, 2):
                form = NCExpr.word(word, N=N) * mono
                a, b, rhs = _laplacian_parts(form, raw)
                w = next((w for w in b.terms), None)
                if w is None:
                    continue
                X[p + 1] = (rhs.coefficient(w) - known * a.coefficient(w)) / b.coefficient(w)
                solved = True
                break
            if solved:
                break
        if not solved:
            raise HodgeError(f"no test form of degree {p} constrains c_{p + 1} c_{N - p} (N={N})")
    for p, v in X.items():
        pair[(p, N + 1 - p)] = v

    c: list = [None] * (N + 1)
    m = N // 2 if N % 2 == 0 else (N + 1) // 2
    root = pair[(m, m)].sqrt()
    if root is None:
        raise HodgeError(f"c_{m}^2 = {pair[(m, m)]} has no square root in the coefficient field")
    if root.eval_numeric(1.0).real < 0:
        root = -root
    c[m] = root
    pending = dict(pair)
    while pending:
        progress = False
        for (a, b), v in list(pending.items()):
            if c[a] is not None and c[b] is None:
                c[b] = v / c[a]
            elif c[b] is not None and c[a] is None:
                c[a] = v / c[b]
            elif c[a] is None:
                continue
            elif c[a] * c[b] != v:
                raise HodgeError(f"inconsistent normalization constraints at c_{a} c_{b}")
            del pending[(a, b)]
            progress = True
        if not progress:
            raise HodgeError("normalization constraints do not connect every degree")
    images = {w: img * c[len(w)] for w, img in raw_images.items()}
    return HodgeData(N, c, eps, images, convention, rules)


@lru_cache(maxsize=None)
def hodge_data(N: int, convention: str = "head-right") -> HodgeData:
    return solve_cp(N, convention=convention)


def hodge(f: NCExpr, data: HodgeData) -> NCExpr:
    """H-bilinear extension: ``*(xi^A h) = *(xi^A) h``; f must have a single xi-degree."""
    nf = normal_order(f, data.rules)
    if len(xi_degrees(nf)) > 1:
        raise ExpressionError(f"hodge needs a form of pure degree, got degrees {sorted(xi_degrees(nf))}")
    return _apply_images(data.images, nf, data.rules)


# -- coderivative and Laplacians -----------------------------------------------------


def codifferential(f: NCExpr, data: HodgeData) -> NCExpr:
    """``delta f = -* d * f`` on polynomial forms (each map followed by evaluation on 1)."""
    rules = data.rules
    inner = project(hodge(f, data), rules)
    return -project(hodge(exterior_d(inner, rules), data), rules)


def codifferential_element(f: NCExpr, data: HodgeData) -> NCExpr:
    """Element-level ``delta f = -*(d f *)`` with d acting by left multiplication in the algebra."""
    rules = data.rules
    return -hodge(normal_order(d_operator(data.N) * hodge(f, data), rules), data)


def laplacians(f: NCExpr, data: HodgeData) -> tuple[NCExpr, NCExpr, NCExpr]:
    """Return ((d delta + delta d) f, -q^2 (d.d) L^2 f, -q^N (d.d) f), all evaluated on 1."""
    rules = data.rules
    N = data.N
    dd = dot_dd(N)
    lhs = exterior_d(codifferential(f, data), rules) + codifferential(exterior_d(f, rules), data)
    lam2 = NCExpr.word((LAM, LAM), N=N)
    rhs = act(dd * lam2, f, rules) * (-(Q * Q))
    delta = act(dd, f, rules) * (-(Q**N))
    return lhs, rhs, delta


# -- dilatation ----------------------------------------------------------------------


def lambda_operator(N: int) -> NCExpr:
    """``1 + (q^2-1) x^a d_a + q^{N-2}(q^2-1)^2/(1+q^{N-2})^2 r^2 d.d``."""
    from .structure import labels

    q2m1 = Q * Q - ONE
    qn2 = Q ** (N - 2)
    euler = NCExpr({(letter(X, a), letter(D, a)): ONE for a in labels(N)}, N)
    k = qn2 * q2m1 * q2m1 / ((ONE + qn2) * (ONE + qn2))
    return NCExpr.scalar(ONE, N) + euler * q2m1 + (r_squared(N) * dot_dd(N)) * k


def monomials(N: int, degree: int) -> list[NCExpr]:
    from .structure import labels

    return [
        NCExpr.word(tuple(letter(X, a) for a in combo), N=N)
        for combo in itertools.combinations_with_replacement(labels(N), degree)
    ]


def lambda_consistency(rules: RuleSet, max_degree: int = 3) -> VerifyReport:
    N = rules.N
    rep = VerifyReport("lambda", metadata={"N": N, "max_degree": max_degree})
    Dop = lambda_operator(N)
    lam_m2 = NCExpr.word((LAM_INV, LAM_INV), N=N)
    bad = []
    checked = 0
    for deg in range(max_degree + 1):
        for f in monomials(N, deg):
            checked += 1
            lhs = act(Dop, f, rules)
            rhs = act(lam_m2, f, rules)
            if lhs != rhs:
                bad.append({"f": str(f), "D f": str(lhs), "L^-2 f": str(rhs)})
    rep.add(
        "action_on_monomials",
        "act(1 + (q^2-1) x^a d_a + q^(N-2)(q^2-1)^2/(1+q^(N-2))^2 r^2 d.d, f) = act(L^-2, f)",
        not bad,
        details={"monomials": checked},
        counterexample=bad[:5],
    )
    from .structure import labels

    for sp, factor, name, anchor in (
        (X, Q * Q, "commutes_x", "D x^a = q^2 x^a D"),
        (D, (Q * Q).inverse(), "commutes_d", "D d_a = q^-2 d_a D"),
    ):
        bad = []
        for a in labels(N):
            g = NCExpr.gen({X: "x", D: "d"}[sp], a, N)
            res = normal_order(Dop * g - g * Dop * factor, rules)
            if not res.is_zero():
                bad.append({"index": a, "residual": str(res)})
        rep.add(name, anchor, not bad, counterexample=bad[:3])
    return rep


def parse(text: str, N: int = 3, rules: RuleSet | None = None) -> NCExpr:
    """Parse with ``op(arg)`` read as the action of op on arg."""
    rules = rules or get_rules(N)
    return parse_expr(text, N, apply=lambda op, arg: act(op, arg, rules))
