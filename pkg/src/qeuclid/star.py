"""Star structure on coordinates, derivatives and d, and the real coordinate basis.

The weight nu'^{+-2} is kept as an inert symbol; its action is only ever
evaluated through the diagonal representation in :mod:`qeuclid.harmonics`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .coeff import I, ONE, ZERO, FieldElem
from .linalg import solve
from .ncalg import (
    D,
    EXTD,
    NU2,
    NU2INV,
    X,
    ExpressionError,
    NCExpr,
    get_rules,
    letter,
    normal_order,
    r_squared,
    species,
)
from .structure import build_structure

__all__ = ["star_map", "RealBasis", "real_basis", "nu2", "nu2_inv", "dext", "upper_d"]

NU2_L = letter(NU2)
NU2INV_L = letter(NU2INV)
EXTD_L = letter(EXTD)


def nu2(N=None) -> NCExpr:
    return NCExpr.word((NU2_L,), N=N)


def nu2_inv(N=None) -> NCExpr:
    return NCExpr.word((NU2INV_L,), N=N)


def dext(N=None) -> NCExpr:
    return NCExpr.word((EXTD_L,), N=N)


def upper_d(N: int, a: int) -> NCExpr:
    """``d^a = g^{ab} d_b``."""
    pack = build_structure(N)
    return NCExpr({(letter(D, b),): pack.ginv(a, b) for b in pack.labels}, N)


def _cancel_nu(word: tuple) -> tuple:
    out: list = []
    for a in word:
        if out and {out[-1], a} == {NU2_L, NU2INV_L}:
            out.pop()
        else:
            out.append(a)
    return tuple(out)


def _letter_star(a: int, N: int) -> NCExpr:
    pack = build_structure(N)
    sp = species(a)
    if sp == X:
        i = a - letter(X, 0)
        return NCExpr({(letter(X, j),): pack.g(j, i) for j in pack.labels if not pack.g(j, i).is_zero()}, N)
    if sp == D:
        # d_k = g_{kl} d^l and (d^l)* = -nu^-2 (g_{jl} d^j) nu^2
        k = a - letter(D, 0)
        inner: dict = {}
        for l in pack.labels:
            gkl = pack.g(k, l)
            if gkl.is_zero():
                continue
            for j in pack.labels:
                gjl = pack.g(j, l)
                if gjl.is_zero():
                    continue
                for m in pack.labels:
                    v = pack.ginv(j, m)
                    if v.is_zero():
                        continue
                    w = (NU2INV_L, letter(D, m), NU2_L)
                    inner[w] = inner.get(w, ZERO) - gkl.conj() * gjl * v
        return NCExpr(inner, N)
    if sp == NU2 or sp == NU2INV:
        return NCExpr.word((a,), N=N)
    if sp == EXTD:
        return NCExpr.word((NU2_L, EXTD_L, NU2INV_L), -ONE, N)
    raise ExpressionError("the star map is implemented on x, d_a, nu'^{+-2} and the exterior derivative only")


def star_map(e: NCExpr, N: int | None = None) -> NCExpr:
    """Antilinear antihomomorphism: reverse each word, conjugate coefficients, star each letter."""
    N = N or e.N or 3
    out = NCExpr(N=N)
    cache: dict = {}
    for w, c in e.terms.items():
        term = NCExpr.scalar(c.conj(), N)
        for a in reversed(w):
            if a not in cache:
                cache[a] = _letter_star(a, N)
            term = term * cache[a]
        out = out + term
    return NCExpr(_merge(out), N)


def _merge(e: NCExpr) -> dict:
    acc: dict = {}
    for w, c in e.terms.items():
        w2 = _cancel_nu(w)
        acc[w2] = acc.get(w2, ZERO) + c
    return acc


@dataclass(frozen=True)
class RealBasis:
    """``x^alpha = V[alpha][i] x^i`` with ``(x^alpha)* = x^alpha`` and ``r^2 = x^a g'_{ab} x^b``."""

    N: int
    V: list  # rows alpha = 1..N, columns ordered by structure labels
    g_prime: list  # N x N symmetric
    labels: tuple

    def coordinate(self, alpha: int) -> NCExpr:
        """Real coordinate ``x^alpha`` (alpha = 1..N) in the standard letters."""
        row = self.V[alpha - 1]
        return NCExpr({(letter(X, i),): v for i, v in zip(self.labels, row)}, self.N)

    def upper_derivative(self, alpha: int) -> NCExpr:
        """``d^alpha = V[alpha][i] d^i`` in terms of lower-index standard derivatives."""
        row = self.V[alpha - 1]
        acc = NCExpr(N=self.N)
        for i, v in zip(self.labels, row):
            if not v.is_zero():
                acc = acc + upper_d(self.N, i) * v
        return acc

    def metadata(self) -> dict:
        return {
            "V": [[str(v) for v in row] for row in self.V],
            "g_prime": [[str(v) for v in row] for row in self.g_prime],
        }


def real_basis(N: int = 3) -> RealBasis:
    """Pairs ``x^{-k} + g_{k,-k} x^k`` and ``i(x^{-k} - g_{k,-k} x^k)``, plus ``x^0`` for odd N."""
    pack = build_structure(N)
    labs = pack.labels
    rows = []
    for k in sorted(a for a in labs if a > 0):
        gk = pack.g(k, -k)
        re = [ONE if i == -k else gk if i == k else ZERO for i in labs]
        im = [I if i == -k else -(I * gk) if i == k else ZERO for i in labs]
        rows.extend([re, im])
    if 0 in labs:
        rows.append([ONE if i == 0 else ZERO for i in labs])
    rules = get_rules(N)
    coords = [NCExpr({(letter(X, i),): v for i, v in zip(labs, row)}, N) for row in rows]
    # solve r^2 = sum_{a<=b} h_ab (x^a x^b + x^b x^a)/2 for symmetric g'
    unknowns = [(a, b) for a in range(N) for b in range(a, N)]
    columns: dict = {}
    for col, (a, b) in enumerate(unknowns):
        sym = coords[a] * coords[b] + coords[b] * coords[a]
        half = normal_order(sym, rules) * FieldElem.rational(Fraction(1, 2))
        for w, v in half.terms.items():
            columns.setdefault(w, {})[col] = v
    target = normal_order(r_squared(N), rules)
    words = set(columns) | set(target.terms)
    eq_rows = [columns.get(w, {}) for w in words]
    rhs = [target.coefficient(w) for w in words]
    sol = solve(eq_rows, rhs, list(range(len(unknowns))))
    if sol is None:
        raise ExpressionError(f"r^2 is not a symmetric quadratic form in the real coordinates (N={N})")
    g_prime = [[ZERO] * N for _ in range(N)]
    for col, (a, b) in enumerate(unknowns):
        v = sol.get(col, ZERO)
        g_prime[a][b] = v
        g_prime[b][a] = v
    return RealBasis(N, rows, g_prime, labs)
