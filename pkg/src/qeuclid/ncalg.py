"""Noncommutative rewriting engine for the algebra generated by xi, x, d and L^{+-1}.

A word is a tuple of integer letters ``species * 64 + index + 32``.  Integer
order on letters is (species, index) order, which is also the canonical order
of the normal form: xi-letters, then x, then d, then a power of L.
"""

from __future__ import annotations

import itertools
import random
import sys
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .coeff import ONE, ZERO, FieldElem, Q, as_field, eval_scalar_ast
from .linalg import rref
from .parser import ParseError, parse_ast
from .report import VerifyReport
from .structure import StructurePack, build_structure, labels

__all__ = [
    "XI",
    "X",
    "NU2",
    "NU2INV",
    "EXTD",
    "D",
    "L",
    "LINV",
    "letter",
    "species",
    "index",
    "NCExpr",
    "RuleSet",
    "RewriteError",
    "ExpressionError",
    "derive_rules",
    "get_rules",
    "normal_order",
    "mul",
    "is_normal",
    "check_confluence",
    "parse_expr",
    "r_squared",
    "dot_dd",
    "x_lower",
]

XI, X, D, L, LINV = 0, 1, 2, 3, 4
# inert symbols used only by the star map: nu'^2, nu'^-2 and the exterior derivative d
NU2, NU2INV, EXTD = 5, 6, 7
SPECIES_NAMES = {XI: "xi", X: "x", D: "d"}
_SYMBOL_NAMES = {NU2: "nu2", NU2INV: "nu2^-1", EXTD: "dext"}
_OFFSET = 32

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))


def letter(sp: int, idx: int = 0) -> int:
    return sp * 64 + idx + _OFFSET


def species(a: int) -> int:
    return a >> 6


def index(a: int) -> int:
    return (a & 63) - _OFFSET


LAM = letter(L)
LAM_INV = letter(LINV)


class RewriteError(RuntimeError):
    pass


class ExpressionError(ValueError):
    pass


def _letter_str(a: int) -> str:
    sp = species(a)
    if sp == L:
        return "L"
    if sp == LINV:
        return "L^-1"
    if sp in _SYMBOL_NAMES:
        return _SYMBOL_NAMES[sp]
    return f"{SPECIES_NAMES[sp]}[{index(a)}]"


def word_str(word: tuple) -> str:
    parts = []
    for a, run in itertools.groupby(word):
        k = len(list(run))
        sp = species(a)
        if sp == LINV:
            parts.append(f"L^-{k}")
        elif sp in _SYMBOL_NAMES:
            parts.extend([_letter_str(a)] * k)
        elif k == 1:
            parts.append(_letter_str(a))
        else:
            parts.append(f"{_letter_str(a)}^{k}")
    return "*".join(parts)


def _is_simple_coeff(text: str) -> bool:
    body = text[1:] if text.startswith("-") else text
    body = body.replace("^-", "^")
    return not any(ch in body for ch in " +-/()")


class NCExpr:
    """Finite sum ``coeff * word``; products concatenate words without reordering."""

    __slots__ = ("terms", "N")

    def __init__(self, terms=None, N: int | None = None):
        out = {}
        for w, c in (terms or {}).items():
            if not c.is_zero():
                out[tuple(w)] = c
        self.terms: dict[tuple, FieldElem] = out
        self.N = N

    @classmethod
    def scalar(cls, c, N=None) -> "NCExpr":
        return cls({(): as_field(c)}, N)

    @classmethod
    def word(cls, word: Iterable[int], coeff=ONE, N=None) -> "NCExpr":
        return cls({tuple(word): as_field(coeff)}, N)

    @classmethod
    def gen(cls, name: str, idx: int = 0, N=None) -> "NCExpr":
        sp = {"xi": XI, "x": X, "d": D, "L": L}[name]
        if N is not None and sp != L and idx not in labels(N):
            raise ExpressionError(f"index {idx} is not a label for N={N}")
        return cls.word((letter(sp, idx),), N=N)

    def _n(self, other: "NCExpr"):
        if self.N is not None and other.N is not None and self.N != other.N:
            raise ExpressionError(f"mixing N={self.N} and N={other.N}")
        return self.N if self.N is not None else other.N

    def _coerce(self, other):
        if isinstance(other, NCExpr):
            return other
        c = as_field(other)
        if c is NotImplemented:
            return NotImplemented
        return NCExpr.scalar(c, self.N)

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out.get(w, ZERO) + c
        return NCExpr(out, self._n(other))

    __radd__ = __add__

    def __neg__(self):
        return NCExpr({w: -c for w, c in self.terms.items()}, self.N)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, NCExpr):
            out: dict = {}
            for w1, c1 in self.terms.items():
                for w2, c2 in other.terms.items():
                    w = w1 + w2
                    out[w] = out.get(w, ZERO) + c1 * c2
            return NCExpr(out, self._n(other))
        c = as_field(other)
        if c is NotImplemented:
            return c
        return NCExpr({w: v * c for w, v in self.terms.items()}, self.N)

    def __rmul__(self, other):
        c = as_field(other)
        if c is NotImplemented:
            return c
        return NCExpr({w: c * v for w, v in self.terms.items()}, self.N)

    def __pow__(self, k: int):
        if k < 0:
            raise ExpressionError("negative powers are only defined for L")
        out = NCExpr.scalar(ONE, self.N)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, NCExpr):
            other = self._coerce(other)
            if other is NotImplemented:
                return False
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def is_zero(self) -> bool:
        return not self.terms

    def is_scalar(self) -> bool:
        return all(w == () for w in self.terms)

    def scalar_part(self) -> FieldElem:
        return self.terms.get((), ZERO)

    def coefficient(self, word) -> FieldElem:
        return self.terms.get(tuple(word), ZERO)

    def map_coeffs(self, fn) -> "NCExpr":
        return NCExpr({w: fn(c) for w, c in self.terms.items()}, self.N)

    def filter(self, pred) -> "NCExpr":
        return NCExpr({w: c for w, c in self.terms.items() if pred(w)}, self.N)

    def count(self, sp: int) -> set[int]:
        """Set of per-word letter counts of one species."""
        return {sum(1 for a in w if species(a) == sp) for w in self.terms}

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda t: (len(t[0]), t[0]))

    def __str__(self):
        if not self.terms:
            return "0"
        pieces = []
        for w, c in self.sorted_terms():
            text = str(c)
            neg = False
            if text.startswith("-") and _is_simple_coeff(text):
                neg, text = True, text[1:]
            if not w:
                body = text if _is_simple_coeff(text) else f"({text})"
            elif text == "1":
                body = word_str(w)
            else:
                body = (text if _is_simple_coeff(text) else f"({text})") + "*" + word_str(w)
            if not pieces:
                pieces.append(("-" if neg else "") + body)
            else:
                pieces.append((" - " if neg else " + ") + body)
        return "".join(pieces)

    def __repr__(self):
        return f"NCExpr({str(self)!r})"


# -- rules ---------------------------------------------------------------------------


def _measure(word: tuple):
    inversions = sum(1 for i, a in enumerate(word) for b in word[i + 1 :] if species(a) > species(b))
    return (len(word), inversions, word)


@dataclass
class RuleSet:
    N: int
    pack: StructurePack
    rules: dict[tuple[int, int], list[tuple[FieldElem, tuple]]]
    provenance: dict[tuple[int, int], str]
    dxi_convention: str = "left"
    _memo: dict = field(default_factory=lambda: {"leftmost": {}, "rightmost": {}}, repr=False)

    def is_redex(self, a: int, b: int) -> bool:
        return (a, b) in self.rules

    def alphabet(self, species_set=(XI, X, D, L, LINV)) -> list[int]:
        out = []
        for sp in species_set:
            if sp in (L, LINV):
                out.append(letter(sp))
            else:
                out.extend(letter(sp, i) for i in labels(self.N))
        return out

    def rule_expr(self, a: int, b: int) -> NCExpr:
        return NCExpr({w: c for c, w in self.rules[(a, b)]}, self.N)

    def clear_cache(self):
        for memo in self._memo.values():
            memo.clear()


def _within_species(pack: StructurePack, sp: int) -> dict:
    """Direct the quadratic relations of one species: descending products -> ascending."""
    Lb = pack.labels
    Pa = pack.projectors["a"]
    rows = []
    if sp == X:
        for a, b in itertools.product(Lb, repeat=2):
            rows.append({(g, d): Pa[(a, b, g, d)] for g, d in itertools.product(Lb, repeat=2)})
        bad = [(g, d) for g, d in itertools.product(Lb, repeat=2) if g > d]
    elif sp == XI:
        for a, b in itertools.product(Lb, repeat=2):
            rows.append(
                {
                    (g, d): (ONE if (a, b) == (g, d) else ZERO) - Pa[(a, b, g, d)]
                    for g, d in itertools.product(Lb, repeat=2)
                }
            )
        bad = [(g, d) for g, d in itertools.product(Lb, repeat=2) if g >= d]
    elif sp == D:
        # P_a^{ab}_{gd} d_b d_a = 0 for each (g, d); the word is (b, a)
        for g, d in itertools.product(Lb, repeat=2):
            rows.append({(b, a): Pa[(a, b, g, d)] for a, b in itertools.product(Lb, repeat=2)})
        bad = [(g, d) for g, d in itertools.product(Lb, repeat=2) if g > d]
    else:
        raise ValueError(sp)
    rows = [{k: v for k, v in r.items() if not v.is_zero()} for r in rows]
    good = [(g, d) for g, d in itertools.product(Lb, repeat=2) if (g, d) not in set(bad)]
    reduced, pivots = rref(rows, bad + good)
    if len(pivots) != len(bad) or set(pivots) != set(bad):
        name = {X: "x", XI: "xi", D: "d"}[sp]
        raise RewriteError(
            f"N={pack.N}, species {name}: descending products not solvable "
            f"(rank {len(pivots)}, {len(bad)} descending products)"
        )
    out = {}
    for row, p in zip(reduced, pivots):
        rhs = []
        for col, v in row.items():
            if col == p:
                continue
            rhs.append((-v, (letter(sp, col[0]), letter(sp, col[1]))))
        out[(letter(sp, p[0]), letter(sp, p[1]))] = rhs
    return out


def derive_rules(pack: StructurePack, dxi_convention: str = "left") -> RuleSet:
    """Directed rewrite rules for all length-2 patterns that are not in canonical order.

    ``dxi_convention`` selects how d^a = g^{ab} d_b is read ("left": g^{ab} d_b,
    "right": d_b g^{ba}) when converting the upper-index d-xi relation.
    """
    N = pack.N
    Lb = pack.labels
    R = pack.rhat
    qinv = Q.inverse()
    rules: dict = {}
    prov: dict = {}

    def put(a, b, rhs, tag):
        acc: dict = {}
        for c, w in rhs:
            acc[w] = acc.get(w, ZERO) + c
        rules[(a, b)] = [(c, w) for w, c in sorted(acc.items()) if not c.is_zero()]
        prov[(a, b)] = tag

    # x^g xi^a = q Rhat^{ga}_{bd} xi^b x^d
    for g, a in itertools.product(Lb, repeat=2):
        rhs = [(Q * R[(g, a, b, d)], (letter(XI, b), letter(X, d))) for b, d in itertools.product(Lb, repeat=2)]
        put(letter(X, g), letter(XI, a), [t for t in rhs if not t[0].is_zero()], "x xi = q Rhat xi x")

    # d_a x^b = delta + q Rhat^{bg}_{ad} x^d d_g
    for a, b in itertools.product(Lb, repeat=2):
        rhs = [(ONE, ())] if a == b else []
        for g, d in itertools.product(Lb, repeat=2):
            v = R[(b, g, a, d)]
            if not v.is_zero():
                rhs.append((Q * v, (letter(X, d), letter(D, g))))
        put(letter(D, a), letter(X, b), rhs, "d x = delta + q Rhat x d")

    # d^g xi^a = q^-1 Rhat^{ga}_{bd} xi^b d^d, rewritten for lower-index d
    gl, gu = pack.g_lower, pack.g_upper
    for m, a in itertools.product(Lb, repeat=2):
        rhs = []
        for g in Lb:
            lo = gl[(m, g)] if dxi_convention == "left" else gl[(g, m)]
            if lo.is_zero():
                continue
            for b, d in itertools.product(Lb, repeat=2):
                v = R[(g, a, b, d)]
                if v.is_zero():
                    continue
                for lam in Lb:
                    up = gu[(d, lam)] if dxi_convention == "left" else gu[(lam, d)]
                    if not up.is_zero():
                        rhs.append((lo * qinv * v * up, (letter(XI, b), letter(D, lam))))
        put(letter(D, m), letter(XI, a), rhs, "d xi = q^-1 Rhat xi d")

    for sp, tag in ((X, "P_a x x = 0"), (XI, "(P_s + P_t) xi xi = 0"), (D, "P_a d d = 0")):
        for key, rhs in _within_species(pack, sp).items():
            put(key[0], key[1], rhs, tag)

    # dilatation
    for i in Lb:
        put(LAM, letter(X, i), [(qinv, (letter(X, i), LAM))], "L x = q^-1 x L")
        put(LAM, letter(D, i), [(Q, (letter(D, i), LAM))], "L d = q d L")
        put(LAM, letter(XI, i), [(ONE, (letter(XI, i), LAM))], "L xi = xi L")
        put(LAM_INV, letter(X, i), [(Q, (letter(X, i), LAM_INV))], "L^-1 x = q x L^-1")
        put(LAM_INV, letter(D, i), [(qinv, (letter(D, i), LAM_INV))], "L^-1 d = q^-1 d L^-1")
        put(LAM_INV, letter(XI, i), [(ONE, (letter(XI, i), LAM_INV))], "L^-1 xi = xi L^-1")
    put(LAM, LAM_INV, [(ONE, ())], "L L^-1 = 1")
    put(LAM_INV, LAM, [(ONE, ())], "L^-1 L = 1")

    for (a, b), rhs in rules.items():
        lhs_m = _measure((a, b))
        for _, w in rhs:
            if not _measure(w) < lhs_m:
                raise RewriteError(f"rule {word_str((a, b))} -> {word_str(w)} does not decrease the measure")
    return RuleSet(N, pack, rules, prov, dxi_convention)


_RULE_CACHE: dict = {}


def get_rules(N: int, dxi_convention: str = "left") -> RuleSet:
    key = (N, dxi_convention)
    if key not in _RULE_CACHE:
        _RULE_CACHE[key] = derive_rules(build_structure(N), dxi_convention)
    return _RULE_CACHE[key]


# -- normal ordering -----------------------------------------------------------------


def is_normal(word: tuple, rules: RuleSet) -> bool:
    return not any((word[i], word[i + 1]) in rules.rules for i in range(len(word) - 1))


def _reduce_word(word: tuple, rules: RuleSet, strategy: str) -> dict:
    memo = rules._memo[strategy]
    hit = memo.get(word)
    if hit is not None:
        return hit
    table = rules.rules
    positions = range(len(word) - 1)
    if strategy == "rightmost":
        positions = reversed(positions)
    pos = next((i for i in positions if (word[i], word[i + 1]) in table), None)
    if pos is None:
        out = {word: ONE}
    else:
        out = {}
        head, tail = word[:pos], word[pos + 2 :]
        for c, rhs in table[(word[pos], word[pos + 1])]:
            for w, v in _reduce_word(head + rhs + tail, rules, strategy).items():
                prev = out.get(w)
                out[w] = c * v if prev is None else prev + c * v
        out = {w: v for w, v in out.items() if not v.is_zero()}
    memo[word] = out
    return out


def normal_order(e: NCExpr, rules: RuleSet, strategy: str = "leftmost") -> NCExpr:
    if e.N is not None and e.N != rules.N:
        raise ExpressionError(f"expression for N={e.N} reduced with rules for N={rules.N}")
    out: dict = {}
    for w, c in e.terms.items():
        for ww, v in _reduce_word(w, rules, strategy).items():
            out[ww] = out.get(ww, ZERO) + c * v
    return NCExpr(out, rules.N)


def mul(*factors: NCExpr, rules: RuleSet) -> NCExpr:
    """Normal-ordered product."""
    acc = NCExpr.scalar(ONE, rules.N)
    for f in factors:
        acc = normal_order(acc * f, rules)
    return acc


def check_confluence(
    rules: RuleSet,
    max_len: int = 4,
    samples: int = 200,
    sample_len: int = 6,
    species_set=(XI, X, D, L, LINV),
    seed: int = 0,
) -> VerifyReport:
    """Compare leftmost and rightmost reduction on all short words and random longer ones."""
    rep = VerifyReport("confluence", metadata={"N": rules.N, "max_len": max_len, "samples": samples})
    alphabet = rules.alphabet(species_set)
    mismatches = []
    count = 0
    for n in range(1, max_len + 1):
        for w in itertools.product(alphabet, repeat=n):
            count += 1
            if _reduce_word(w, rules, "leftmost") != _reduce_word(w, rules, "rightmost"):
                mismatches.append(word_str(w))
    rep.add(
        "exhaustive",
        "leftmost and rightmost normal forms agree",
        not mismatches,
        details={"words": count, "mismatches": len(mismatches)},
        counterexample={"words": mismatches[:10]},
    )
    rng = random.Random(seed)
    bad = []
    for _ in range(samples):
        w = tuple(rng.choice(alphabet) for _ in range(sample_len))
        if _reduce_word(w, rules, "leftmost") != _reduce_word(w, rules, "rightmost"):
            bad.append(word_str(w))
    rep.add(
        "sampled",
        "leftmost and rightmost normal forms agree",
        not bad,
        details={"words": samples, "length": sample_len, "mismatches": len(bad)},
        counterexample={"words": bad[:10]},
    )
    return rep


# -- common elements -----------------------------------------------------------------


def x_lower(N: int, a: int) -> NCExpr:
    """``x_a = g_{ab} x^b``."""
    pack = build_structure(N)
    return NCExpr({(letter(X, b),): pack.g(a, b) for b in pack.labels}, N)


def r_squared(N: int) -> NCExpr:
    """``r^2 = x^a g_{ab} x^b``."""
    pack = build_structure(N)
    return NCExpr({(letter(X, a), letter(X, b)): v for (a, b), v in pack.g_lower.items()}, N)


def dot_dd(N: int) -> NCExpr:
    """``d.d = g^{ab} d_b d_a``."""
    pack = build_structure(N)
    return NCExpr({(letter(D, b), letter(D, a)): v for (a, b), v in pack.g_upper.items()}, N)


# -- parsing ---------------------------------------------------------------------------


def _eval_ast(node, N: int, apply: Callable | None) -> NCExpr:
    kind = node[0]
    if kind in ("num", "sym"):
        return NCExpr.scalar(eval_scalar_ast(node), N)
    if kind == "gen":
        _, name, idx, line, col = node
        if name != "L" and idx not in labels(N):
            raise ParseError(f"index {idx} is not a label for N={N}", line, col)
        return NCExpr.gen(name, idx, N)
    if kind == "add":
        return _eval_ast(node[1], N, apply) + _eval_ast(node[2], N, apply)
    if kind == "sub":
        return _eval_ast(node[1], N, apply) - _eval_ast(node[2], N, apply)
    if kind == "neg":
        return -_eval_ast(node[1], N, apply)
    if kind == "mul":
        return _eval_ast(node[1], N, apply) * _eval_ast(node[2], N, apply)
    if kind == "div":
        den = _eval_ast(node[2], N, apply)
        if not den.is_scalar() or den.is_zero():
            raise ExpressionError("division is only defined by a nonzero scalar")
        return _eval_ast(node[1], N, apply) * den.scalar_part().inverse()
    if kind == "pow":
        base, k = _eval_ast(node[1], N, apply), node[2]
        if k >= 0:
            return base**k
        if base.is_scalar() and not base.is_zero():
            return NCExpr.scalar(base.scalar_part() ** k, N)
        if base == NCExpr.word((LAM,), N=N):
            return NCExpr.word((LAM_INV,) * (-k), N=N)
        raise ExpressionError("negative powers are only defined for scalars and L")
    if kind == "apply":
        if apply is None:
            raise ExpressionError("operator application needs an action (use the calculus parser)")
        return apply(_eval_ast(node[1], N, apply), _eval_ast(node[2], N, apply))
    raise ExpressionError(f"unknown node {kind!r}")


def parse_expr(text: str, N: int = 3, apply: Callable | None = None) -> NCExpr:
    """Parse the expression grammar into a raw (not normal-ordered) NCExpr."""
    return _eval_ast(parse_ast(text), N, apply)
