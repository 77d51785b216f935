"""Integration over the quantum Euclidean space and the weighted scalar products.

The integral only sees the level-0 radial part: ``int f d^N x = int dr m(r) r^(N-1) f_0(r)``
with ``m = 1`` (uniform) or the Jackson weight on the lattice ``r0 q^n``. The scalar
product ``(phi, psi) = int phi* nu~'^-2 psi`` reduces, level by level, to

    sum_l q^{l(l+N-2)/2} sum_IJ G_IJ int m e^{Ny} conj(r^l f_I) R(r^l g_J) dy,

where ``G`` is the angular Gram matrix and ``R`` the radial Gaussian multiplier.
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate as spi

from .calculus import hodge, hodge_data, project, xi_basis
from .coeff import ONE
from .harmonics import build_Vl, decompose, nu_prime_eigenvalue
from .ncalg import XI, NCExpr, dot_dd, get_rules, index, letter
from .radial import RadialError, RadialFn, apply_partial, nu_multiplier_numeric, y_grid, _window
from .report import VerifyReport
from .star import real_basis
from .structure import build_structure, labels

__all__ = [
    "QuadratureError",
    "Measure",
    "WaveFunction",
    "FormWaveFunction",
    "Integral",
    "integrate",
    "jackson_sum",
    "stokes_check",
    "scalar_product",
    "hodge_pairing",
    "scalar_product_forms",
    "admissibility",
    "hermiticity_check",
    "kinetic_action",
    "gram_positivity",
]

UNIFORM_STEP = 0.025


class QuadratureError(RuntimeError):
    pass


# -- measures ------------------------------------------------------------------------


@dataclass(frozen=True)
class Measure:
    kind: str  # "uniform" or "jackson"
    q: float
    beta: float = 0.0
    n_min: int | None = None  # None: adaptive window
    n_max: int | None = None

    def __post_init__(self):
        if self.kind not in ("uniform", "jackson"):
            raise ValueError(f"unknown measure kind {self.kind!r}")
        if not self.q > 0:
            raise ValueError("q must be positive")
        if self.kind == "jackson":
            if self.beta not in (0.0, 0.5):
                raise ValueError("Jackson base point must be q^0 or q^(1/2)")
            if self.q == 1.0:
                raise ValueError("the Jackson lattice degenerates at q = 1")

    @property
    def r0(self) -> float:
        return self.q**self.beta

    @classmethod
    def parse(cls, text: str, q: float) -> "Measure":
        """``uniform`` or ``jackson:beta=0|0.5[,r0=...][,window=60]``; r0 must equal q^beta."""
        text = text.strip()
        if text == "uniform":
            return cls("uniform", q)
        m = re.fullmatch(r"jackson(?::(.*))?", text)
        if not m:
            raise ValueError(f"bad measure spec {text!r}")
        try:
            opts = dict(kv.split("=", 1) for kv in (m.group(1) or "").split(",") if kv)
        except ValueError:
            raise ValueError(f"bad measure options in {text!r}") from None
        r0 = opts.pop("r0", None)
        beta = float(opts.pop("beta", 0))
        if r0 is not None:
            b = math.log(float(r0)) / math.log(q)
            if "beta" not in (m.group(1) or ""):
                beta = round(2 * (b % 1)) / 2 % 1
            if abs((b - beta) - round(b - beta)) > 1e-9:
                raise ValueError(f"r0={r0} is not on the q^(Z+{beta}) lattice")
        window = opts.pop("window", None)
        if opts:
            raise ValueError(f"unknown measure options {sorted(opts)}")
        if window is None:
            return cls("jackson", q, beta)
        w = int(window)
        return cls("jackson", q, beta, -w, w)

    def to_json(self) -> dict:
        return {"kind": self.kind, "q": self.q, "beta": self.beta, "n_min": self.n_min, "n_max": self.n_max}


@dataclass
class Integral:
    value: complex
    error: float
    meta: dict = field(default_factory=dict)


# -- wave functions ------------------------------------------------------------------


class WaveFunction:
    """``sum S_l^I f_{l,I}(r)`` with the exact orthogonal harmonics of :func:`build_Vl`."""

    def __init__(self, components=None, N: int = 3):
        self.N = N
        self.components = {k: v for k, v in (components or {}).items() if not v.is_zero()}

    @classmethod
    def harmonic(cls, l: int, I: int, f: RadialFn, N: int = 3) -> "WaveFunction":
        if not 0 <= I < len(build_Vl(N, l)):
            raise ValueError(f"level {l} has no harmonic {I}")
        return cls({(l, I): f}, N)

    @classmethod
    def from_terms(cls, terms, N: int = 3) -> "WaveFunction":
        """From ``[(polynomial, RadialFn)]`` by decomposing each polynomial."""
        acc: dict = {}
        for poly, f in terms:
            if not isinstance(poly, NCExpr):
                poly = NCExpr.scalar(poly, N)
            for (l, I, m), c in decompose(poly, N).components.items():
                g = f.times_rpow(m).scale(c)
                acc[(l, I)] = acc[(l, I)] + g if (l, I) in acc else g
        return cls(acc, N)

    def __add__(self, other: "WaveFunction") -> "WaveFunction":
        acc = dict(self.components)
        for k, v in other.components.items():
            acc[k] = acc[k] + v if k in acc else v
        return WaveFunction(acc, self.N)

    def __sub__(self, other):
        return self + other.scale(-ONE)

    def scale(self, c) -> "WaveFunction":
        return WaveFunction({k: v.scale(c) for k, v in self.components.items()}, self.N)

    def is_zero(self) -> bool:
        return not self.components

    def l0(self) -> RadialFn:
        return self.components.get((0, 0), RadialFn())

    def partial(self, a: int) -> "WaveFunction":
        """``d_a`` (lower standard index)."""
        terms = []
        for (l, I), f in self.components.items():
            terms.extend(apply_partial(a, build_Vl(self.N, l)[I].poly, f, self.N))
        return WaveFunction.from_terms(terms, self.N)

    def apply_derivative(self, op: NCExpr) -> "WaveFunction":
        """Apply a combination of words in the ``d`` letters (rightmost letter acts first)."""
        out = WaveFunction(N=self.N)
        for w, c in op.terms.items():
            cur = self
            for a in reversed(w):
                cur = cur.partial(index(a))
            out = out + cur.scale(c)
        return out

    def momentum(self, alpha: int) -> "WaveFunction":
        """``p^alpha = i d^alpha`` in the real coordinate basis (alpha = 1..N)."""
        from .coeff import I as IUNIT

        return self.apply_derivative(real_basis(self.N).upper_derivative(alpha)).scale(IUNIT)

    def laplacian(self) -> "WaveFunction":
        """``Delta = -q^N d.d``."""
        from .coeff import Q

        return self.apply_derivative(dot_dd(self.N)).scale(-(Q**self.N))

    def order_at_infinity(self) -> int | None:
        return max((l + f.order_at_infinity() for (l, _), f in self.components.items()), default=None)

    def order_at_zero(self) -> int | None:
        return min((l + f.order_at_zero() for (l, _), f in self.components.items()), default=None)

    def pole_lattices(self) -> set:
        out = set()
        for f in self.components.values():
            out |= f.pole_lattices()
        return out

    def to_json(self) -> dict:
        return {"N": self.N, "components": [{"l": l, "I": I, "f": f.to_json()} for (l, I), f in sorted(self.components.items())]}

    def __str__(self):
        if not self.components:
            return "0"
        return " + ".join(f"S_{l}^{I}*[{f}]" for (l, I), f in sorted(self.components.items()))


class FormWaveFunction:
    """p-form ``sum_A xi^A a_A(x)`` over ascending xi words ``A``."""

    def __init__(self, p: int, components=None, N: int = 3):
        self.N, self.p = N, p
        self.components = {A: wf for A, wf in (components or {}).items() if not wf.is_zero()}
        for A in self.components:
            if len(A) != p:
                raise ValueError(f"component {A} is not of degree {p}")

    @classmethod
    def function(cls, wf: WaveFunction) -> "FormWaveFunction":
        return cls(0, {(): wf}, wf.N)

    def laplacian(self) -> "FormWaveFunction":
        """Componentwise, using ``d.d xi^a = q^-2 xi^a d.d``."""
        from .coeff import Q

        f = (Q**2).inverse() ** self.p
        return FormWaveFunction(self.p, {A: wf.laplacian().scale(f) for A, wf in self.components.items()}, self.N)

    def scale(self, c) -> "FormWaveFunction":
        return FormWaveFunction(self.p, {A: wf.scale(c) for A, wf in self.components.items()}, self.N)

    def pole_lattices(self) -> set:
        out = set()
        for wf in self.components.values():
            out |= wf.pole_lattices()
        return out


# -- integration ---------------------------------------------------------------------


def _check_convergent(f0: RadialFn, N: int) -> None:
    lo, hi = f0.order_at_zero(), f0.order_at_infinity()
    if lo + N <= 0 or hi + N >= 0:
        raise QuadratureError(
            f"divergent integral: r^(N-1) f_0 behaves like r^{lo + N - 1} at 0 and r^{hi + N - 1} at infinity"
        )


def jackson_sum(f0: RadialFn, m: Measure, N: int, n_min: int, n_max: int) -> complex:
    """``|q-1| sum_{n_min <= n <= n_max} (r0 q^n)^N f0(r0 q^n)`` summed in index order."""
    n = np.arange(n_min, n_max + 1)
    y = math.log(m.r0) + n * math.log(m.q)
    terms = f0.on_log_grid(y, m.q, N) * abs(m.q - 1)
    return complex(math.fsum(terms.real), math.fsum(terms.imag))


def _jackson_window(f0: RadialFn, m: Measure, N: int, tol: float = 1e-18) -> tuple[int, int, float]:
    """Smallest symmetric-ish window whose geometric tail is below ``tol`` relative."""
    lq = abs(math.log(m.q))
    a0 = f0.order_at_zero() + N
    ainf = -(f0.order_at_infinity() + N)
    extra = max((abs(float(j)) for t in f0.terms for j, _, _ in t.factors), default=0.0)
    span = -math.log(tol)
    n_lo = int(math.ceil((span / a0 + extra) / lq)) + 2
    n_hi = int(math.ceil((span / ainf + extra) / lq)) + 2
    if m.q > 1:
        return -n_lo, n_hi, lq
    return -n_hi, n_lo, lq


def integrate(f: WaveFunction, m: Measure) -> Integral:
    N = f.N
    f0 = f.l0()
    if f0.is_zero():
        return Integral(0j, 0.0, {"reason": "no level-0 component"})
    _check_convergent(f0, N)
    if m.kind == "uniform":
        lo, hi = _integrable_window(f0, N)
        parts = []
        errs = 0.0
        roundoff = False
        point = lambda y: f0.on_log_grid(np.array([y]), m.q, N)[0]
        for comp in (lambda y: point(y).real, lambda y: point(y).imag):
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always", spi.IntegrationWarning)
                val, err = spi.quad(comp, lo, hi, limit=500, epsabs=1e-16, epsrel=1e-12)
            if caught:
                # quad hit its roundoff floor; widen the estimate to double precision noise
                roundoff = True
                err = max(err, 1e-13 * spi.quad(lambda y: abs(comp(y)), lo, hi, limit=500)[0])
            parts.append(val)
            errs += err
        tail = _tail_bound(f0, m.q, N, lo, hi)
        meta = {"window": [lo, hi], "tail": tail, "roundoff_floor": roundoff}
        return Integral(complex(*parts), errs + tail, meta)
    if m.n_min is not None:
        n0, n1 = m.n_min, m.n_max
    else:
        n0, n1, _ = _jackson_window(f0, m, N)
    val = jackson_sum(f0, m, N, n0, n1)
    tail = _jackson_tail(f0, m, N, n0, n1)
    return Integral(val, tail, {"n_min": n0, "n_max": n1, "tail": tail})


def _integrable_window(f0: RadialFn, N: int, tol: float = 1e-17) -> tuple[float, float]:
    a0 = f0.order_at_zero() + N
    ainf = -(f0.order_at_infinity() + N)
    extra = max((abs(float(j)) for t in f0.terms for j, _, _ in t.factors), default=0.0) * 0.5
    span = -math.log(tol)
    return -span / a0 - extra - 2, span / ainf + extra + 2


def _tail_bound(f0: RadialFn, q: float, N: int, lo: float, hi: float) -> float:
    a0 = f0.order_at_zero() + N
    ainf = -(f0.order_at_infinity() + N)
    v_lo = abs(f0.on_log_grid(np.array([lo]), q, N)[0])
    v_hi = abs(f0.on_log_grid(np.array([hi]), q, N)[0])
    return v_lo / a0 + v_hi / ainf


def _jackson_tail(f0: RadialFn, m: Measure, N: int, n0: int, n1: int) -> float:
    """Geometric bound from the edge terms and the decay rates."""
    lq = abs(math.log(m.q))
    a0 = f0.order_at_zero() + N
    ainf = -(f0.order_at_infinity() + N)
    edge = f0.on_log_grid(math.log(m.r0) + np.array([n0, n1]) * math.log(m.q), m.q, N) * abs(m.q - 1)
    small, large = (edge[0], edge[1]) if m.q > 1 else (edge[1], edge[0])
    r_small = math.exp(-a0 * lq)
    r_large = math.exp(-ainf * lq)
    return abs(small) * r_small / (1 - r_small) + abs(large) * r_large / (1 - r_large)


def _abs_integral(f0: RadialFn, m: Measure, N: int) -> float:
    """``int m r^(N-1) |f_0|``, the scale for relative residuals."""
    if m.kind == "uniform":
        lo, hi = _integrable_window(f0, N)
        return spi.quad(lambda y: abs(f0.on_log_grid(np.array([y]), m.q, N)[0]), lo, hi, limit=500, epsrel=1e-10)[0]
    n0, n1, _ = _jackson_window(f0, m, N) if m.n_min is None else (m.n_min, m.n_max, 0)
    n = np.arange(n0, n1 + 1)
    y = math.log(m.r0) + n * math.log(m.q)
    return math.fsum(np.abs(f0.on_log_grid(y, m.q, N)) * abs(m.q - 1))


def stokes_check(f: WaveFunction, a: int, m: Measure, tolerance: float | None = None) -> VerifyReport:
    N = f.N
    tol = tolerance if tolerance is not None else (1e-8 if m.kind == "jackson" else 1e-6)
    rep = VerifyReport("stokes", metadata={"N": N, "alpha": a, "measure": m.to_json(), "f": str(f)})
    anchor = "int_q d_a f(x) d^N x = 0 for f decreasing faster than 1/r^(N-1)"
    order = f.order_at_infinity()
    if order is None or order >= -(N - 1) or f.order_at_zero() < 0:
        rep.add(
            "stokes",
            anchor,
            None,
            details={"inapplicable_reason": f"f = O(r^{order}) at infinity does not decay faster than r^-{N - 1}"},
        )
        return rep
    df = f.partial(a)
    f0 = df.l0()
    if f0.is_zero():
        rep.add("stokes", anchor, True, details={"lhs": 0.0, "rel_err": 0.0, "tolerance": tol, "note": "no level-0 part"})
        return rep
    res = integrate(df, m)
    scale = _abs_integral(f0, m, N)
    rel = abs(res.value) / scale if scale else abs(res.value)
    rep.add(
        "stokes",
        anchor,
        rel < tol,
        details={"lhs": [res.value.real, res.value.imag], "scale": scale, "rel_err": rel, "tolerance": tol, "quad_error": res.error},
        counterexample={"integral": [res.value.real, res.value.imag], "scale": scale},
    )
    return rep


# -- scalar products -----------------------------------------------------------------


def _grid_for(wfs, m: Measure, M: int, tol: float) -> np.ndarray:
    lo, hi = math.inf, -math.inf
    for wf in wfs:
        for (l, _), f in wf.components.items():
            a, b, _ = _window(f, wf.N, l, tol)
            lo, hi = min(lo, a), max(hi, b)
    if m.kind == "jackson":
        return y_grid(m.q, lo, hi, m.beta, M)
    return y_grid(m.q, lo, hi, h=UNIFORM_STEP)


def _lattice_mask(y: np.ndarray, m: Measure) -> np.ndarray:
    t = (y - math.log(m.r0)) / abs(math.log(m.q))
    return np.abs(t - np.round(t)) < 1e-6


def scalar_product(phi: WaveFunction, psi: WaveFunction, m: Measure, M: int = 8, tol: float = 1e-14) -> Integral:
    """``(phi, psi) = int phi* nu~'^-2 psi d^N x``."""
    N = phi.N
    if m.q < 1:
        raise QuadratureError(f"nu~'^-2 is an unbounded Fourier multiplier at q={m.q} < 1; use q > 1")
    if phi.is_zero() or psi.is_zero():
        return Integral(0j, 0.0)
    for wf in (phi, psi):
        for (l, _), f in wf.components.items():
            try:
                _window(f, N, l, tol)
            except RadialError as exc:
                raise QuadratureError(str(exc)) from None
    y = _grid_for((phi, psi), m, M, tol)
    if m.kind == "jackson":
        mask = _lattice_mask(y, m)
        weight = np.where(mask, abs(m.q - 1), 0.0)
    else:
        weight = np.full(y.shape, float(y[1] - y[0]))
    total = []
    err = 0.0
    per_level: dict = {}
    levels = {l for l, _ in phi.components} & {l for l, _ in psi.components}
    for l in sorted(levels):
        hs = build_Vl(N, l)
        lam = nu_prime_eigenvalue(l, N, -2).eval_numeric(m.q).real
        acc = 0j
        for (l1, J), g in sorted(psi.components.items()):
            if l1 != l:
                continue
            s = nu_multiplier_numeric(g, -2, m.q, N, l, grid=y)
            f = phi.components.get((l, J))
            if f is not None:
                # the level-l harmonics are orthogonal, so only I = J contributes
                G = hs[J].norm2.eval_numeric(m.q).real
                Phi = f.on_log_grid(y, m.q, N / 2 + l)
                integrand = np.conj(Phi) * s.weighted * weight
                v = complex(math.fsum(integrand.real), math.fsum(integrand.imag))
                acc += G * lam * v
                err += abs(G * lam) * s.error * float(np.sum(np.abs(Phi) * weight))
        per_level[l] = [acc.real, acc.imag]
        total.append(acc)
    value = complex(math.fsum(t.real for t in total), math.fsum(t.imag for t in total))
    return Integral(value, err, {"levels": per_level, "points": len(y), "measure": m.to_json()})


@lru_cache(maxsize=None)
def hodge_pairing(N: int, p: int) -> tuple:
    """``<A, B>`` with ``(xi^A)# * (xi^B) = <A, B> *1``; ``#`` conjugates xi like x.

    Returns ``(basis, matrix)`` with exact entries.
    """
    rules = get_rules(N)
    data = hodge_data(N)
    pack = build_structure(N)
    vol = tuple(letter(XI, a) for a in labels(N))
    c0 = project(hodge(NCExpr.scalar(ONE, N), data), rules).coefficient(vol)

    def sharp(word):
        out = NCExpr.scalar(ONE, N)
        for a in reversed(word):
            i = index(a)
            out = out * NCExpr({(letter(XI, j),): pack.g(j, i) for j in pack.labels if not pack.g(j, i).is_zero()}, N)
        return out

    basis = xi_basis(N, p)
    mat = []
    for A in basis:
        row = []
        for B in basis:
            img = project(sharp(A) * hodge(NCExpr.word(B, N=N), data), rules)
            row.append(img.coefficient(vol) / c0)
        mat.append(row)
    return tuple(basis), tuple(tuple(r) for r in mat)


def scalar_product_forms(alpha: FormWaveFunction, beta: FormWaveFunction, m: Measure, **kw) -> Integral:
    """``(alpha, beta) = int alpha* ^ *nu~'^-2 beta`` through the Hodge pairing of basis forms."""
    if alpha.p != beta.p:
        return Integral(0j, 0.0, {"reason": "different degrees"})
    basis, mat = hodge_pairing(alpha.N, alpha.p)
    pos = {A: i for i, A in enumerate(basis)}
    value, err = 0j, 0.0
    parts = {}
    for A, a in alpha.components.items():
        for B, b in beta.components.items():
            H = mat[pos[A]][pos[B]]
            if H.is_zero():
                continue
            h = H.eval_numeric(m.q if m.q != 1 else 1.0)
            sp = scalar_product(a, b, m, **kw) if m.q != 1 else _classical_product(a, b, m)
            value += h * sp.value
            err += abs(h) * sp.error
            parts[f"{A}|{B}"] = [sp.value.real, sp.value.imag]
    return Integral(value, err, {"components": parts})


def _classical_product(phi: WaveFunction, psi: WaveFunction, m: Measure) -> Integral:
    """q = 1: no weight, plain radial integrals level by level."""
    if m.kind != "uniform":
        raise QuadratureError("q = 1 needs the uniform measure")
    N = phi.N
    total, err = 0j, 0.0
    for (l, J), g in psi.components.items():
        f = phi.components.get((l, J))
        if f is not None:
            G = build_Vl(N, l)[J].norm2.eval_numeric(1.0).real
            prod = f.conj().multiply(g).times_rpow(2 * l)
            res = integrate(WaveFunction({(0, 0): prod}, N), Measure("uniform", 1.0))
            total += G * res.value
            err += abs(G) * res.error
    return Integral(total, err)


# -- hermiticity ---------------------------------------------------------------------


def admissibility(wf, m: Measure) -> tuple[bool, str]:
    """Pole-lattice condition for the Jackson measure: beta matches, n divides N."""
    if m.kind == "uniform":
        return True, ""
    bad = []
    for beta, n in sorted(wf.pole_lattices()):
        if wf.N % n:
            bad.append(f"n={n} does not divide N={wf.N}")
        if abs(float(beta) - m.beta) > 1e-12:
            bad.append(f"poles on the beta={beta} lattice but the measure has beta={m.beta}")
    if bad:
        return False, "; ".join(bad) + " (admissible poles: r_jk = q^(j+beta) e^(i pi (2k+1)/n))"
    return True, ""


def hermiticity_check(phi, psi, op: str, m: Measure, alpha: int = 1, tolerance: float = 1e-6, **kw) -> VerifyReport:
    """``(phi, O psi) = (O phi, psi)`` for ``O`` = ``momentum`` (p^alpha = i d^alpha) or ``laplacian``."""
    N = phi.N
    rep = VerifyReport("hermiticity", metadata={"N": N, "operator": op, "alpha": alpha, "measure": m.to_json()})
    anchor = "(phi, p^a psi) = (p^a phi, psi)" if op == "momentum" else "(phi, Delta psi) = (Delta phi, psi), Delta = -q^N d.d"
    for name, wf in (("phi", phi), ("psi", psi)):
        ok, why = admissibility(wf, m)
        if not ok:
            rep.add("hermiticity", anchor, None, details={"inapplicable_reason": f"{name}: {why}"})
            return rep
    forms = isinstance(phi, FormWaveFunction)
    if op == "momentum":
        if forms:
            raise ValueError("the momentum check is for functions")
        O = lambda w: w.momentum(alpha)
    elif op == "laplacian":
        O = lambda w: w.laplacian()
    else:
        raise ValueError(f"unknown operator {op!r}")
    sp = scalar_product_forms if forms else scalar_product
    lhs = sp(phi, O(psi), m, **kw)
    rhs = sp(O(phi), psi, m, **kw)
    scale = max(abs(lhs.value), abs(rhs.value), 1e-300)
    rel = abs(lhs.value - rhs.value) / scale
    rep.add(
        "hermiticity",
        anchor,
        rel <= tolerance,
        details={
            "lhs": [lhs.value.real, lhs.value.imag],
            "rhs": [rhs.value.real, rhs.value.imag],
            "rel_err": rel,
            "tolerance": tolerance,
            "numeric_error": (lhs.error + rhs.error) / scale,
        },
        counterexample={"lhs": [lhs.value.real, lhs.value.imag], "rhs": [rhs.value.real, rhs.value.imag]},
    )
    return rep


def gram_positivity(funcs, m: Measure, **kw) -> tuple[np.ndarray, float]:
    n = len(funcs)
    G = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            G[i, j] = scalar_product(funcs[i], funcs[j], m, **kw).value
    H = (G + G.conj().T) / 2
    return G, float(np.linalg.eigvalsh(H).min())


def kinetic_action(alpha, M: float, m: Measure, **kw) -> dict:
    """``S_k = (Delta alpha, alpha) + M^2 (alpha, alpha)`` with both summands."""
    if isinstance(alpha, WaveFunction):
        alpha = FormWaveFunction.function(alpha)
    kin = scalar_product_forms(alpha.laplacian(), alpha, m, **kw)
    mass = scalar_product_forms(alpha, alpha, m, **kw)
    value = kin.value + M * M * mass.value
    return {
        "value": value.real,
        "imag": value.imag,
        "kinetic": kin.value.real,
        "mass_term": (M * M * mass.value).real,
        "error": kin.error + M * M * mass.error,
    }
