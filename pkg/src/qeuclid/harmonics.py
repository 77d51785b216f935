"""Harmonic polynomials, the level decomposition f = sum S_l^I f_{l,I}(r), and the diagonal nu' action.

Harmonics are computed exactly as the kernel of d.d on homogeneous polynomials,
split by weight (sum of labels), and orthogonalized under the angular pairing.
Unit normalization is numeric: exact norms are kept and ``scale`` holds
``1/sqrt(norm2)`` at the reference value ``Q0``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .calculus import act, monomials
from .coeff import ONE, ZERO, FieldElem, qpow
from .linalg import nullspace, solve
from .ncalg import X, NCExpr, dot_dd, get_rules, index, normal_order, r_squared, species
from .star import star_map

__all__ = [
    "Q0",
    "HarmonicError",
    "Harmonic",
    "HarmonicExpansion",
    "build_Vl",
    "harmonic_basis",
    "angular_pairing",
    "gram_matrix",
    "decompose",
    "nu_prime_eigenvalue",
    "nu_tilde_factor",
    "nu_tilde_pow",
    "harmonics_json",
]

Q0 = 1.2


class HarmonicError(RuntimeError):
    pass


@dataclass(frozen=True)
class Harmonic:
    N: int
    l: int
    index: int
    weight: int
    poly: NCExpr
    norm2: FieldElem  # <S, S> under the angular pairing
    scale: float  # 1/sqrt(norm2) at Q0

    @property
    def label(self) -> str:
        return f"S_{self.l}^{self.index}"


def _weight(word) -> int:
    return sum(index(a) for a in word)


def _poly_weight(e: NCExpr) -> int:
    ws = {_weight(w) for w in e.terms}
    if len(ws) != 1:
        raise HarmonicError(f"{e} is not weight-homogeneous")
    return ws.pop()


def _to_rows(images: list[NCExpr]) -> list[dict]:
    """Matrix rows indexed by word, columns by position in ``images``."""
    rows: dict = {}
    for col, img in enumerate(images):
        for w, c in img.terms.items():
            rows.setdefault(w, {})[col] = c
    return list(rows.values())


@lru_cache(maxsize=None)
def _kernel(N: int, l: int) -> tuple:
    """Exact weight-homogeneous basis of ker(d.d) on degree-l polynomials."""
    rules = get_rules(N)
    dd = dot_dd(N)
    by_weight: dict = {}
    for m in monomials(N, l):
        (w,) = m.terms
        by_weight.setdefault(_weight(w), []).append(m)
    out = []
    for wt in sorted(by_weight):
        mons = by_weight[wt]
        images = [act(dd, m, rules) for m in mons]
        for vec in nullspace(_to_rows(images), list(range(len(mons)))):
            poly = NCExpr(N=N)
            for col, c in vec.items():
                poly = poly + mons[col] * c
            out.append(poly)
    expected = _classical_dim(N, l)
    if len(out) != expected:
        raise HarmonicError(f"harmonic solver at degree {l}: kernel rank {len(out)}, expected {expected}")
    return tuple(out)


def _classical_dim(N: int, l: int) -> int:
    total = math.comb(l + N - 1, N - 1)
    return total - (math.comb(l + N - 3, N - 1) if l >= 2 else 0)


@lru_cache(maxsize=None)
def _r2_power(N: int, k: int) -> NCExpr:
    return normal_order(r_squared(N) ** k, get_rules(N)) if k else NCExpr.scalar(ONE, N)


def _solve_degree(N: int, f: NCExpr, d: int, basis) -> dict:
    """Coefficients of the degree-d part ``f`` in ``{S r^(d-l)}``; ``basis(l)`` yields polys."""
    rules = get_rules(N)
    out: dict = {}
    parts: dict = {}
    for w, c in f.terms.items():
        parts.setdefault(_weight(w), {})[w] = c
    for wt, terms in parts.items():
        cols, images = [], []
        for l in range(d % 2, d + 1, 2):
            for i, S in enumerate(basis(l)):
                if _poly_weight(S) == wt:
                    cols.append((l, i, d - l))
                    images.append(normal_order(S * _r2_power(N, (d - l) // 2), rules))
        words = set(terms)
        for img in images:
            words |= set(img.terms)
        words = sorted(words)
        mat = []
        for w in words:
            mat.append({col: img.coefficient(w) for col, img in enumerate(images) if not img.coefficient(w).is_zero()})
        sol = solve(mat, [terms.get(w, ZERO) for w in words], list(range(len(cols))))
        if sol is None:
            raise HarmonicError(f"degree {d}, weight {wt}: polynomial not in the span of S_l r^(d-l)")
        for col, c in sol.items():
            if not c.is_zero():
                out[cols[col]] = c
    return out


def _decompose_with(N: int, f: NCExpr, basis) -> dict:
    rules = get_rules(N)
    f = normal_order(f, rules)
    by_deg: dict = {}
    for w, c in f.terms.items():
        if any(species(a) != X for a in w):
            raise HarmonicError("decompose needs a polynomial in x only")
        by_deg.setdefault(len(w), {})[w] = c
    out: dict = {}
    for d, terms in sorted(by_deg.items()):
        out.update(_solve_degree(N, NCExpr(terms, N), d, basis))
    return out


def _pairing(N: int, S: NCExpr, T: NCExpr, basis) -> FieldElem:
    deg = {len(w) for w in S.terms} | {len(w) for w in T.terms}
    total = sum(deg) if len(deg) == 2 else 2 * deg.pop()
    if total % 2:
        return ZERO
    prod = normal_order(star_map(S, N) * T, get_rules(N))
    return _decompose_with(N, prod, basis).get((0, 0, total), ZERO)


def _raw_basis(N: int):
    return lambda l: _kernel(N, l)


@lru_cache(maxsize=None)
def build_Vl(N: int, l: int) -> tuple:
    """Orthogonal basis of the level-l harmonics with exact norms."""
    if l < 0:
        raise ValueError("level must be non-negative")
    raw = _kernel(N, l)
    done: list[tuple[NCExpr, FieldElem]] = []
    for S in raw:
        v = S
        for T, n2 in done:
            c = _pairing(N, T, S, _raw_basis(N))
            if not c.is_zero():
                v = v - T * (c / n2)
        n2 = _pairing(N, v, v, _raw_basis(N))
        if n2.is_zero():
            raise HarmonicError(f"level {l}: null vector under the angular pairing")
        done.append((v, n2))
    out = []
    for i, (v, n2) in enumerate(done):
        val = n2.eval_numeric(Q0)
        if abs(val.imag) > 1e-12 * abs(val) or val.real <= 0:
            raise HarmonicError(f"level {l}: angular norm {n2} is not positive at q={Q0}")
        out.append(Harmonic(N, l, i, _poly_weight(v), v, n2, 1.0 / math.sqrt(val.real)))
    return tuple(out)


def harmonic_basis(N: int, l: int) -> tuple:
    return tuple(h.poly for h in build_Vl(N, l))


def _final_basis(N: int):
    return lambda l: harmonic_basis(N, l)


def angular_pairing(S: NCExpr, T: NCExpr, N: int = 3) -> FieldElem:
    """Coefficient of ``r^(deg S + deg T)`` in the level-0 part of ``S* T``."""
    return _pairing(N, S, T, _raw_basis(N))


def gram_matrix(N: int, l: int, q_value: float | None = None, normalized: bool = False):
    hs = build_Vl(N, l)
    G = [[angular_pairing(a.poly, b.poly, N) for b in hs] for a in hs]
    if q_value is None:
        return G
    import numpy as np

    out = np.array([[g.eval_numeric(q_value) for g in row] for row in G])
    if normalized:
        s = np.array([h.scale for h in hs])
        out = out * np.outer(s, s)
    return out


@dataclass
class HarmonicExpansion:
    """``sum coeff * S_l^I * r^m`` keyed by ``(l, I, m)``."""

    N: int
    components: dict = field(default_factory=dict)

    def reconstruct(self) -> NCExpr:
        rules = get_rules(self.N)
        out = NCExpr(N=self.N)
        for (l, i, m), c in self.components.items():
            if m % 2 or m < 0:
                raise HarmonicError(f"r^{m} is not polynomial")
            out = out + build_Vl(self.N, l)[i].poly * _r2_power(self.N, m // 2) * c
        return normal_order(out, rules)

    def levels(self) -> set[int]:
        return {l for l, _, _ in self.components}

    def __str__(self):
        if not self.components:
            return "0"
        parts = []
        for (l, i, m), c in sorted(self.components.items()):
            parts.append(f"({c})*S_{l}^{i}*r^{m}")
        return " + ".join(parts)


def decompose(f: NCExpr, N: int | None = None) -> HarmonicExpansion:
    N = N or f.N or 3
    comps = _decompose_with(N, f, _final_basis(N))
    return HarmonicExpansion(N, {k: v for k, v in comps.items() if not v.is_zero()})


def nu_prime_eigenvalue(l: int, N: int = 3, k: int = 1) -> FieldElem:
    """``nu'^k`` on level l: ``q^(-k l(l+N-2)/4)``."""
    return qpow(Fraction(-k * l * (l + N - 2), 4))


def nu_tilde_factor(l: int, m, N: int = 3, k: int = 2) -> FieldElem:
    """Eigenvalue of ``nu~'^k`` on ``S_l r^m``."""
    c = Fraction(l) + Fraction(m) + Fraction(N, 2)
    return nu_prime_eigenvalue(l, N, k) * qpow(-k * c * c / 4)


def nu_tilde_pow(e: HarmonicExpansion, k: int) -> HarmonicExpansion:
    if k % 2:
        raise ValueError("k must be even")
    comps = {key: c * nu_tilde_factor(key[0], key[2], e.N, k) for key, c in e.components.items()}
    return HarmonicExpansion(e.N, comps)


def harmonics_json(N: int = 3, lmax: int = 3) -> dict:
    levels = []
    for l in range(lmax + 1):
        hs = build_Vl(N, l)
        levels.append(
            {
                "l": l,
                "dim": len(hs),
                "basis": [
                    {"I": h.index, "weight": h.weight, "poly": str(h.poly), "norm2": str(h.norm2), "scale_q0": h.scale}
                    for h in hs
                ],
                "gram": [[str(g) for g in row] for row in gram_matrix(N, l)],
            }
        )
    return {"N": N, "q0": Q0, "levels": levels}


def all_polynomials(N: int, max_degree: int):
    """Every monomial up to ``max_degree``, for exhaustive batteries."""
    return itertools.chain.from_iterable(monomials(N, d) for d in range(max_degree + 1))
