"""SO_q(N) structure constants: braid matrix, metric, spectral projectors.

Indices use the signed labels ``-n..n`` (``0`` only for odd ``N``), with the
conjugate index of ``i`` being ``-i``.  A (2,2) tensor ``T^{ab}_{cd}`` is stored
with slots ``(a, b, c, d)`` and variance ``("u", "u", "l", "l")`` and acts as a
matrix on ``V (x) V`` with row ``(a, b)`` and column ``(c, d)``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping

from .coeff import ONE, Q, ZERO, FieldElem, qpow
from .linalg import rank
from .report import VerifyReport

__all__ = [
    "Tensor",
    "StructurePack",
    "StructureError",
    "labels",
    "build_structure",
    "spectral_projectors",
    "verify_structure",
    "lower_index",
    "raise_index",
    "eigenvalues",
]


class StructureError(ValueError):
    pass


def labels(N: int) -> tuple[int, ...]:
    if N < 3:
        raise StructureError(f"N must be >= 3, got {N}")
    n = N // 2
    if N % 2:
        return tuple(range(-n, n + 1))
    return tuple(range(-n, 0)) + tuple(range(1, n + 1))


def rho(N: int, label: int) -> Fraction:
    """Weyl-vector component for the label (half-integral for odd N)."""
    if label == 0:
        return Fraction(0)
    shift = Fraction(1, 2) if N % 2 else Fraction(1)
    sign = 1 if label > 0 else -1
    return -(label - sign * shift)


@dataclass(frozen=True)
class Tensor:
    """Multi-index array of FieldElem; zero entries are not stored."""

    N: int
    variance: tuple[str, ...]
    entries: Mapping[tuple[int, ...], FieldElem]
    name: str = ""

    def __post_init__(self):
        allowed = set(labels(self.N))
        for idx, val in self.entries.items():
            if len(idx) != len(self.variance) or not set(idx) <= allowed:
                raise StructureError(f"index {idx} outside the label set of N={self.N}")
            if val.is_zero():
                raise StructureError(f"stored zero at {idx}")

    @property
    def arity(self) -> int:
        return len(self.variance)

    def __getitem__(self, idx) -> FieldElem:
        return self.entries.get(tuple(idx), ZERO)

    def items(self):
        return self.entries.items()

    @classmethod
    def from_dict(cls, N, variance, data, name="") -> "Tensor":
        return cls(N, tuple(variance), {k: v for k, v in data.items() if not v.is_zero()}, name)

    def map(self, fn, name=None) -> "Tensor":
        return Tensor.from_dict(self.N, self.variance, {k: fn(v) for k, v in self.entries.items()}, name or self.name)

    def __add__(self, other: "Tensor") -> "Tensor":
        _same_shape(self, other)
        out = dict(self.entries)
        for k, v in other.entries.items():
            out[k] = out.get(k, ZERO) + v
        return Tensor.from_dict(self.N, self.variance, out)

    def __sub__(self, other: "Tensor") -> "Tensor":
        return self + other.scale(-ONE)

    def scale(self, c) -> "Tensor":
        return self.map(lambda v: v * c)

    def is_zero(self) -> bool:
        return not self.entries

    # (2,2) tensors as operators on V (x) V
    def matmul(self, other: "Tensor") -> "Tensor":
        if self.variance != ("u", "u", "l", "l") or other.variance != ("u", "u", "l", "l"):
            raise StructureError("matmul needs two (2,2) tensors")
        by_row: dict = {}
        for (m, n, c, d), v in other.entries.items():
            by_row.setdefault((m, n), []).append(((c, d), v))
        out: dict = {}
        for (a, b, m, n), u in self.entries.items():
            for cd, v in by_row.get((m, n), ()):
                key = (a, b) + cd
                out[key] = out.get(key, ZERO) + u * v
        return Tensor.from_dict(self.N, self.variance, out)

    def trace(self) -> FieldElem:
        acc = ZERO
        for (a, b, c, d), v in self.entries.items():
            if (a, b) == (c, d):
                acc = acc + v
        return acc

    def specialize(self, fn) -> dict:
        """Apply a scalar map (e.g. numeric evaluation) entrywise."""
        return {k: fn(v) for k, v in self.entries.items()}

    def to_json_dict(self) -> dict:
        return {
            "N": self.N,
            "name": self.name,
            "variance": list(self.variance),
            "entries": [{"idx": list(k), "val": str(v)} for k, v in sorted(self.entries.items())],
        }


def _same_shape(a: Tensor, b: Tensor):
    if a.N != b.N or a.variance != b.variance:
        raise StructureError("tensor shapes differ")


def identity22(N: int) -> Tensor:
    L = labels(N)
    return Tensor.from_dict(N, ("u", "u", "l", "l"), {(a, b, a, b): ONE for a in L for b in L}, "id")


@dataclass(frozen=True)
class StructurePack:
    N: int
    rhat: Tensor
    g_lower: Tensor
    g_upper: Tensor
    projectors: dict[str, Tensor]
    u_inv: Tensor
    eigen: dict[str, FieldElem] = field(default_factory=dict)

    @property
    def labels(self) -> tuple[int, ...]:
        return labels(self.N)

    def g(self, a: int, b: int) -> FieldElem:
        return self.g_lower[(a, b)]

    def ginv(self, a: int, b: int) -> FieldElem:
        return self.g_upper[(a, b)]

    def to_json(self) -> str:
        tensors = [self.rhat, self.g_lower, self.g_upper, self.u_inv] + [self.projectors[k] for k in "sat"]
        return json.dumps([t.to_json_dict() for t in tensors], indent=2)


def eigenvalues(N: int) -> dict[str, FieldElem]:
    return {"s": Q, "a": -Q.inverse(), "t": qpow(1 - N)}


def _rhat(N: int) -> Tensor:
    """Braid matrix from the standard orthogonal-series R-matrix, ``Rhat = flip o R``."""
    L = labels(N)
    qm = Q - Q.inverse()
    R: dict = {}

    def add(key, val):
        R[key] = R.get(key, ZERO) + val

    # R^{ik}_{jl} is the coefficient of E_ij (x) E_kl
    for i in L:
        if i != 0:
            add((i, i, i, i), Q)
            add((-i, i, -i, i), Q.inverse())
        else:
            add((0, 0, 0, 0), ONE)
        for j in L:
            if i != j and i != -j:
                add((i, j, i, j), ONE)
    for i in L:
        for j in L:
            if i > j:
                add((i, j, j, i), qm)
                add((i, -i, j, -j), -qm * qpow(rho(N, i) - rho(N, j)))
    # Rhat^{ab}_{cd} = R^{ba}_{cd}
    return Tensor.from_dict(N, ("u", "u", "l", "l"), {(b, a, c, d): v for (a, b, c, d), v in R.items()}, "rhat")


def _metric(N: int) -> tuple[Tensor, Tensor]:
    L = labels(N)
    g = {(a, -a): qpow(-rho(N, a)) for a in L}
    ginv = {(a, -a): qpow(rho(N, -a)) for a in L}
    return (
        Tensor.from_dict(N, ("l", "l"), g, "g_lower"),
        Tensor.from_dict(N, ("u", "u"), ginv, "g_upper"),
    )


def spectral_projectors(rhat: Tensor) -> dict[str, Tensor]:
    """``P_A = prod_{B != A} (Rhat - mu_B)/(mu_A - mu_B)``; requires the cubic equation."""
    N = rhat.N
    residual = _cubic_residual(rhat)
    if not residual.is_zero():
        idx, val = next(iter(sorted(residual.items())))
        raise StructureError(f"characteristic equation fails at entry {idx}: residual {val}")
    mu = eigenvalues(N)
    ident = identity22(N)
    out = {}
    for A in "sat":
        P = ident
        for B in "sat":
            if B != A:
                P = P.matmul(rhat - ident.scale(mu[B])).scale((mu[A] - mu[B]).inverse())
        out[A] = Tensor(N, P.variance, P.entries, f"P_{A}")
    return out


def _cubic_residual(rhat: Tensor) -> Tensor:
    mu = eigenvalues(rhat.N)
    ident = identity22(rhat.N)
    M = ident
    for A in "sat":
        M = M.matmul(rhat - ident.scale(mu[A]))
    return M


@lru_cache(maxsize=None)
def build_structure(N: int) -> StructurePack:
    rhat = _rhat(N)
    g_lower, g_upper = _metric(N)
    projectors = spectral_projectors(rhat)
    L = labels(N)
    u_inv = {}
    for d in L:
        for c in L:
            acc = ZERO
            for lam in L:
                acc = acc + g_upper[(lam, d)] * g_lower[(lam, c)]
            u_inv[(d, c)] = acc
    return StructurePack(
        N=N,
        rhat=rhat,
        g_lower=g_lower,
        g_upper=g_upper,
        projectors=projectors,
        u_inv=Tensor.from_dict(N, ("u", "l"), u_inv, "u_inv"),
        eigen=eigenvalues(N),
    )


# -- index gymnastics ----------------------------------------------------------

def lower_index(t: Tensor, slot: int, pack: StructurePack, side: str = "left") -> Tensor:
    """Lower an upper slot: ``g_{ab} t^b`` (side='left') or ``t^b g_{ba}`` (side='right')."""
    return _contract_metric(t, slot, pack.g_lower, "u", "l", side)


def raise_index(t: Tensor, slot: int, pack: StructurePack, side: str = "left") -> Tensor:
    """Raise a lower slot: ``g^{ab} t_b`` (side='left') or ``t_b g^{ba}`` (side='right')."""
    return _contract_metric(t, slot, pack.g_upper, "l", "u", side)


def _contract_metric(t: Tensor, slot: int, metric: Tensor, need: str, new: str, side: str) -> Tensor:
    if t.variance[slot] != need:
        raise StructureError(f"slot {slot} has variance {t.variance[slot]!r}, expected {need!r}")
    out: dict = {}
    for idx, v in t.entries.items():
        b = idx[slot]
        for (x, y), m in metric.entries.items():
            if side == "left" and y == b:
                a = x
            elif side == "right" and x == b:
                a = y
            else:
                continue
            key = idx[:slot] + (a,) + idx[slot + 1 :]
            out[key] = out.get(key, ZERO) + m * v
    variance = t.variance[:slot] + (new,) + t.variance[slot + 1 :]
    return Tensor.from_dict(t.N, variance, out, t.name)


# -- verification ----------------------------------------------------------------

def _apply3(rhat: Tensor, position: int, vec: dict) -> dict:
    """Apply Rhat on tensor factors (position, position+1) of a vector in V^{(x)3}."""
    by_col: dict = {}
    for (a, b, c, d), v in rhat.entries.items():
        by_col.setdefault((c, d), []).append(((a, b), v))
    out: dict = {}
    for idx, x in vec.items():
        cd = idx[position : position + 2]
        for ab, v in by_col.get(cd, ()):
            key = idx[:position] + ab + idx[position + 2 :]
            out[key] = out.get(key, ZERO) + v * x
    return {k: v for k, v in out.items() if not v.is_zero()}


def braid_residual(rhat: Tensor):
    """First index triple where (R12 R23 R12 - R23 R12 R23) has a nonzero column entry."""
    L = labels(rhat.N)
    for col in itertools.product(L, repeat=3):
        lhs = _apply3(rhat, 0, _apply3(rhat, 1, _apply3(rhat, 0, {col: ONE})))
        rhs = _apply3(rhat, 1, _apply3(rhat, 0, _apply3(rhat, 1, {col: ONE})))
        for key in set(lhs) | set(rhs):
            diff = lhs.get(key, ZERO) - rhs.get(key, ZERO)
            if not diff.is_zero():
                return {"row": list(key), "col": list(col), "residual": str(diff)}
    return None


def _first_nonzero(t: Tensor):
    if t.is_zero():
        return None
    idx, val = min(t.entries.items())
    return {"idx": list(idx), "residual": str(val)}


def pt_proportionality(pack: StructurePack):
    """Return (kappa, mismatch) with ``P_t^{ab}_{cd} = kappa * g^{ab} g_{cd}`` or the first mismatch."""
    Pt = pack.projectors["t"]
    L = pack.labels
    kappa = None
    for a, b, c, d in itertools.product(L, repeat=4):
        lhs = Pt[(a, b, c, d)]
        gg = pack.g_upper[(a, b)] * pack.g_lower[(c, d)]
        if gg.is_zero():
            if not lhs.is_zero():
                return None, {"idx": [a, b, c, d], "value": str(lhs)}
            continue
        ratio = lhs / gg
        if kappa is None:
            kappa = ratio
        elif ratio != kappa:
            return None, {"idx": [a, b, c, d], "ratio": str(ratio), "kappa": str(kappa)}
    return kappa, None


def verify_structure(pack: StructurePack, rhat: Tensor | None = None) -> VerifyReport:
    """Exact checks of the braid equation, cubic equation, projector algebra and P_t ~ g g."""
    rhat = pack.rhat if rhat is None else rhat
    N = pack.N
    rep = VerifyReport("structure", metadata={"N": N})
    res = braid_residual(rhat)
    rep.add("braid", "(Rhat x 1)(1 x Rhat)(Rhat x 1) = (1 x Rhat)(Rhat x 1)(1 x Rhat)", res is None, counterexample=res)

    cubic = _cubic_residual(rhat)
    rep.add(
        "characteristic",
        "(Rhat - q)(Rhat + q^-1)(Rhat - q^(1-N)) = 0",
        cubic.is_zero(),
        counterexample=_first_nonzero(cubic),
    )
    if not cubic.is_zero():
        return rep
    P = spectral_projectors(rhat)
    mu = eigenvalues(N)
    ident = identity22(N)
    total = P["s"] + P["a"] + P["t"] - ident
    rep.add("completeness", "P_s + P_a + P_t = 1", total.is_zero(), counterexample=_first_nonzero(total))
    for A in "sat":
        for B in "sat":
            prod = P[A].matmul(P[B])
            diff = prod - P[A] if A == B else prod
            rep.add(
                f"orthogonality_{A}{B}",
                "P_A P_B = delta_AB P_A",
                diff.is_zero(),
                counterexample=_first_nonzero(diff),
            )
    recon = P["s"].scale(mu["s"]) + P["a"].scale(mu["a"]) + P["t"].scale(mu["t"]) - rhat
    rep.add(
        "spectral_decomposition",
        "Rhat = q P_s - q^-1 P_a + q^(1-N) P_t",
        recon.is_zero(),
        counterexample=_first_nonzero(recon),
    )
    ranks = {}
    for A in "sat":
        rows = {}
        for (a, b, c, d), v in P[A].entries.items():
            rows.setdefault((a, b), {})[(c, d)] = v
        cols = [(c, d) for c in pack.labels for d in pack.labels]
        ranks[A] = rank(rows.values(), cols)
    expected = {"s": N * (N + 1) // 2 - 1, "a": N * (N - 1) // 2, "t": 1}
    rep.add(
        "projector_ranks",
        "rank P_t = 1, rank P_a = N(N-1)/2",
        ranks == expected,
        details={"ranks": ranks, "expected": expected},
        counterexample={"ranks": ranks},
    )
    tr = {A: str(P[A].trace()) for A in "sat"}
    rep.add("pt_trace", "tr P_t = 1", P["t"].trace().is_one(), details={"traces": tr}, counterexample={"traces": tr})
    if rhat is pack.rhat:
        kappa, mismatch = pt_proportionality(pack)
        rep.add(
            "pt_metric",
            "P_t^{ab}_{cd} ~ g^{ab} g_{cd}",
            kappa is not None,
            details={"kappa": str(kappa)},
            counterexample=mismatch,
        )
        inv = _metric_inverse_residual(pack)
        rep.add("metric_inverse", "g^{ab} g_{bc} = delta^a_c", inv is None, counterexample=inv)
    return rep


def _metric_inverse_residual(pack: StructurePack):
    L = pack.labels
    for a in L:
        for c in L:
            acc = ZERO
            for b in L:
                acc = acc + pack.g_upper[(a, b)] * pack.g_lower[(b, c)]
            want = ONE if a == c else ZERO
            if acc != want:
                return {"idx": [a, c], "value": str(acc)}
    return None


def perturbed_rhat(pack: StructurePack, idx: tuple[int, int, int, int], delta=ONE) -> Tensor:
    """Copy of Rhat with one entry shifted by ``delta`` (fault injection)."""
    data = dict(pack.rhat.entries)
    data[idx] = data.get(idx, ZERO) + delta
    return Tensor.from_dict(pack.N, pack.rhat.variance, data, "rhat_perturbed")


def classical(t: Tensor) -> Tensor:
    """Entrywise q = 1 specialization."""
    return t.map(lambda v: v.at_classical())


def tensor_from_json(data: dict) -> Tensor:
    entries = {tuple(e["idx"]): FieldElem.parse(e["val"]) for e in data["entries"]}
    return Tensor.from_dict(data["N"], tuple(data.get("variance", ())), entries, data.get("name", ""))
