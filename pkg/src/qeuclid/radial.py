"""Radial functions, the action of d_a on S(x) f(r), and the numeric nu~' multiplier.

A :class:`RadialFn` is a finite sum of terms ``c r^m prod_t (1 + (q^j_t r)^n_t)^(-k_t)``.
The family is closed under the q-difference quotient that appears when a
derivative is moved past a function of ``r``:

    d_a f(r) = k x_a (D f)(r) + f(sqrt(c) r) d_a,
    (D f)(r) = (f(r) - f(sqrt(c) r)) / ((1 - c) r^2),

with ``k`` and ``c`` read off from the normal form of ``d_a r^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .calculus import act
from .coeff import ONE, ZERO, FieldElem, qpow
from .ncalg import D, NCExpr, letter, get_rules, normal_order, r_squared, x_lower
from .report import VerifyReport
from .structure import labels

__all__ = [
    "RadialError",
    "RadialConstants",
    "derive_radial_constants",
    "radial_induction_report",
    "RadialTerm",
    "RadialFn",
    "apply_partial",
    "polynomial_crosscheck",
    "Sampled",
    "y_grid",
    "nu_multiplier_numeric",
    "monomial_window",
    "nu_multiplier_samples",
    "sampled_to_csv",
]


class RadialError(RuntimeError):
    pass


# -- constants -----------------------------------------------------------------------


@dataclass(frozen=True)
class RadialConstants:
    N: int
    k: FieldElem
    c: FieldElem
    shift: Fraction  # sqrt(c) = q^shift

    def to_json(self) -> dict:
        return {"N": self.N, "k_N": str(self.k), "c_N": str(self.c), "sqrt_c_exponent": str(self.shift)}


def _q_exponent(c: FieldElem) -> Fraction | None:
    """Rational exponent e with ``c = q^e``, or None."""
    if c.is_zero() or not c.is_monomial():
        return None
    cand = FieldElem.monomial(c.e)
    return Fraction(c.e, 8) if cand == c else None


@lru_cache(maxsize=None)
def derive_radial_constants(N: int) -> RadialConstants:
    rules = get_rules(N)
    r2 = normal_order(r_squared(N), rules)
    found = None
    rw, rc = next(iter(r2.terms.items()))
    for a in labels(N):
        d = NCExpr.gen("d", a, N)
        nf = normal_order(d * r_squared(N), rules)
        xa = normal_order(x_lower(N, a), rules)
        # k from the x part, c from the x x d part
        xw, xc = next(iter(xa.terms.items()))
        k = nf.coefficient(xw) / xc
        c = nf.coefficient(rw + (letter(D, a),)) / rc
        residual = normal_order(nf - xa * k - r2 * d * c, rules)
        if not residual.is_zero():
            raise RadialError(
                f"d_{a} r^2 does not fit k x_a + c r^2 d_a (N={N}); normal form {nf}; residual {residual}"
            )
        if found is None:
            found = (k, c)
        elif found != (k, c):
            raise RadialError(f"constants depend on the index: {found} vs {(k, c)} at a={a}")
    k, c = found
    e = _q_exponent(c)
    if e is None:
        raise RadialError(f"c_N = {c} is not a power of q; the dilation is not a lattice shift")
    return RadialConstants(N, k, c, e / 2)


def radial_induction_report(N: int) -> VerifyReport:
    """Check the two-step consequence ``d_a r^4 = k(1+c) x_a r^2 + c^2 r^4 d_a``."""
    rules = get_rules(N)
    rc = derive_radial_constants(N)
    rep = VerifyReport("radial_constants", metadata=rc.to_json())
    classical = (rc.k.at_classical(), rc.c.at_classical())
    rep.add(
        "classical_limit",
        "q=1: d_a r^2 = 2 x_a + r^2 d_a",
        classical == (FieldElem.rational(2), ONE),
        details={"k(1)": str(classical[0]), "c(1)": str(classical[1])},
    )
    r2 = r_squared(N)
    bad = []
    for a in labels(N):
        d = NCExpr.gen("d", a, N)
        lhs = normal_order(d * r2 * r2, rules)
        rhs = normal_order(x_lower(N, a) * r2 * (rc.k * (ONE + rc.c)) + r2 * r2 * d * (rc.c * rc.c), rules)
        if lhs != rhs:
            bad.append({"index": a, "lhs": str(lhs), "rhs": str(rhs)})
    rep.add("induction_r4", "d_a r^4 = k(1+c) x_a r^2 + c^2 r^4 d_a", not bad, counterexample=bad[:2])
    return rep


# -- the radial family ---------------------------------------------------------------


@dataclass(frozen=True)
class RadialTerm:
    coeff: FieldElem
    m: int
    factors: tuple = ()  # sorted ((j, n, k), ...): (1 + (q^j r)^n)^(-k)

    def key(self):
        return (self.m, self.factors)


def _norm_factors(factors) -> tuple:
    acc: dict = {}
    for j, n, k in factors:
        acc[(Fraction(j), int(n))] = acc.get((Fraction(j), int(n)), 0) + int(k)
    return tuple(sorted((j, n, k) for (j, n), k in acc.items() if k))


class RadialFn:
    """Finite sum of :class:`RadialTerm` (exact coefficients, numeric evaluation)."""

    __slots__ = ("terms",)

    def __init__(self, terms=()):
        acc: dict = {}
        for t in terms:
            key = (t.m, _norm_factors(t.factors))
            acc[key] = acc.get(key, ZERO) + t.coeff
        self.terms = tuple(RadialTerm(c, m, f) for (m, f), c in sorted(acc.items(), key=lambda kv: repr(kv[0])) if not c.is_zero())

    @classmethod
    def monomial(cls, m: int = 0, coeff=ONE) -> "RadialFn":
        return cls([RadialTerm(_field(coeff), m)])

    @classmethod
    def rational(cls, n: int, j=0, k: int = 1, m: int = 0, coeff=ONE) -> "RadialFn":
        """``coeff r^m / (1 + (q^j r)^n)^k``."""
        return cls([RadialTerm(_field(coeff), m, ((Fraction(j), n, k),))])

    def __add__(self, other: "RadialFn") -> "RadialFn":
        return RadialFn(self.terms + other.terms)

    def __neg__(self):
        return self.scale(-ONE)

    def __sub__(self, other):
        return self + (-other)

    def __eq__(self, other):
        return isinstance(other, RadialFn) and self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_monomial(self) -> bool:
        return len(self.terms) == 1 and not self.terms[0].factors

    def scale(self, c) -> "RadialFn":
        c = _field(c)
        return RadialFn(RadialTerm(t.coeff * c, t.m, t.factors) for t in self.terms)

    def times_rpow(self, m: int) -> "RadialFn":
        return RadialFn(RadialTerm(t.coeff, t.m + m, t.factors) for t in self.terms)

    def multiply(self, other: "RadialFn") -> "RadialFn":
        return RadialFn(
            RadialTerm(a.coeff * b.coeff, a.m + b.m, a.factors + b.factors) for a in self.terms for b in other.terms
        )

    def dilate(self, a) -> "RadialFn":
        """``r -> q^a r``."""
        a = Fraction(a)
        return RadialFn(
            RadialTerm(t.coeff * qpow(a * t.m), t.m, tuple((j + a, n, k) for j, n, k in t.factors))
            for t in self.terms
        )

    def conj(self) -> "RadialFn":
        return RadialFn(RadialTerm(t.coeff.conj(), t.m, t.factors) for t in self.terms)

    def qdiff(self, consts: RadialConstants) -> "RadialFn":
        """``(f(r) - f(sqrt(c) r)) / ((1 - c) r^2)``."""
        inv = (ONE - consts.c).inverse()
        return (self - self.dilate(consts.shift)).times_rpow(-2).scale(inv)

    # analytic data
    def _series(self, at_infinity: bool, depth: int = 16) -> dict:
        """Exact leading coefficients of the expansion at 0 (powers r^p) or at infinity."""
        out: dict = {}
        for t in self.terms:
            # at infinity: (1 + u r^n)^-k = u^-k r^-nk (1 + u^-1 r^-n)^-k
            lead = t.coeff
            base = t.m
            series = {0: ONE}
            for j, n, k in t.factors:
                u = qpow(j * n)
                if at_infinity:
                    lead = lead * u ** (-k)
                    base -= n * k
                    u = u.inverse()
                nxt: dict = {}
                for p0, c0 in series.items():
                    coef = ONE
                    for s_ in range(depth // n + 1):
                        e = p0 + s_ * n
                        if e > depth:
                            break
                        nxt[e] = nxt.get(e, ZERO) + c0 * coef
                        coef = coef * u * FieldElem.rational(Fraction(-k - s_, s_ + 1))
                series = nxt
            for p0, c0 in series.items():
                e = base - p0 if at_infinity else base + p0
                out[e] = out.get(e, ZERO) + lead * c0
        return out

    def order_at_zero(self) -> int | None:
        """Exponent of the leading power of r at 0, with exact cancellation."""
        if not self.terms:
            return None
        naive = min(t.m for t in self.terms)
        coeffs = self._series(False)
        nz = [e for e, c in coeffs.items() if not c.is_zero() and e <= naive + 16]
        return min(nz) if nz else naive + 16

    def order_at_infinity(self) -> int | None:
        """Largest growth exponent: ``f = O(r^order)`` as r -> oo, with exact cancellation."""
        if not self.terms:
            return None
        naive = max(t.m - sum(n * k for _, n, k in t.factors) for t in self.terms)
        coeffs = self._series(True)
        nz = [e for e, c in coeffs.items() if not c.is_zero() and e >= naive - 16]
        return max(nz) if nz else naive - 16

    def pole_lattices(self) -> set:
        """``(beta, n)`` for every factor; poles sit at ``q^(-j) e^{i pi (2k+1)/n}``, beta = frac(-j)."""
        return {((-j) % 1, n) for t in self.terms for j, n, k in t.factors if k > 0}

    def __call__(self, r, q_value: float):
        r = np.asarray(r, dtype=float)
        out = np.zeros(r.shape, dtype=complex)
        for t in self.terms:
            val = t.coeff.eval_numeric(q_value) * r ** float(t.m)
            for j, n, k in t.factors:
                val = val / (1.0 + (q_value ** float(j) * r) ** n) ** k
            out = out + val
        return out

    def on_log_grid(self, y, q_value: float, shift: float = 0.0):
        """``e^{shift*y} f(e^y)`` evaluated without overflow for large |y|."""
        y = np.asarray(y, dtype=float)
        out = np.zeros(y.shape, dtype=complex)
        lq = math.log(q_value)
        for t in self.terms:
            logmag = (t.m + shift) * y
            for j, n, k in t.factors:
                z = n * (float(j) * lq + y)
                logmag = logmag - k * np.logaddexp(0.0, z)
            out = out + t.coeff.eval_numeric(q_value) * np.exp(logmag)
        return out

    def to_json(self) -> list:
        return [
            {"coeff": str(t.coeff), "m": t.m, "factors": [{"j": str(j), "n": n, "k": k} for j, n, k in t.factors]}
            for t in self.terms
        ]

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for t in self.terms:
            s = f"({t.coeff})*r^{t.m}"
            for j, n, k in t.factors:
                s += f"/(1+(q^{j} r)^{n})" + (f"^{k}" if k != 1 else "")
            parts.append(s)
        return " + ".join(parts)

    __repr__ = __str__


def _field(c) -> FieldElem:
    return c if isinstance(c, FieldElem) else FieldElem.rational(c)


def apply_partial(alpha: int, poly: NCExpr, f: RadialFn, N: int | None = None) -> list:
    """``d_alpha (poly * f(r))`` as ``[(polynomial, RadialFn), ...]``."""
    N = N or poly.N or 3
    rules = get_rules(N)
    rc = derive_radial_constants(N)
    out = []
    moved = normal_order(x_lower(N, alpha) * poly * rc.k, rules)
    df = f.qdiff(rc)
    if not moved.is_zero() and not df.is_zero():
        out.append((moved, df))
    inner = act(NCExpr.gen("d", alpha, N), poly, rules)
    if not inner.is_zero():
        out.append((inner, f.dilate(rc.shift)))
    return out


def _as_polynomial(terms: list, N: int) -> NCExpr:
    """Recombine ``[(P, c r^(2j))]`` into a polynomial; only for monomial radial parts."""
    rules = get_rules(N)
    acc = NCExpr(N=N)
    for P, f in terms:
        for t in f.terms:
            if t.factors or t.m % 2 or t.m < 0:
                raise RadialError(f"radial part {f} is not a polynomial in r^2")
            acc = acc + P * (r_squared(N) ** (t.m // 2)) * t.coeff
    return normal_order(acc, rules)


def polynomial_crosscheck(N: int = 3, max_degree: int = 6) -> VerifyReport:
    """apply_partial vs direct action on every ``monomial * r^(2j)`` of total degree <= max_degree."""
    from .calculus import monomials

    rules = get_rules(N)
    rep = VerifyReport("radial_crosscheck", metadata={"N": N, "max_degree": max_degree})
    bad = []
    count = 0
    for j in range(max_degree // 2 + 1):
        r2j = normal_order(r_squared(N) ** j, rules) if j else NCExpr.scalar(ONE, N)
        for deg in range(max_degree - 2 * j + 1):
            for P in monomials(N, deg):
                for a in labels(N):
                    count += 1
                    lhs = _as_polynomial(apply_partial(a, P, RadialFn.monomial(2 * j), N), N)
                    rhs = act(NCExpr.gen("d", a, N), normal_order(P * r2j, rules), rules)
                    if lhs != rhs:
                        bad.append({"alpha": a, "psi": f"{P} * r^{2 * j}", "apply_partial": str(lhs), "act": str(rhs)})
    rep.add(
        "apply_partial_vs_act",
        "d_a f(r) = k x_a (D f)(r) + f(sqrt(c) r) d_a on polynomials",
        not bad,
        details={"cases": count},
        counterexample=bad[:3],
    )
    return rep


# -- numeric nu~' multiplier ----------------------------------------------------------


@dataclass
class Sampled:
    """Samples of a radial function on a uniform grid in ``y = ln r``."""

    y: np.ndarray
    values: np.ndarray
    error: float  # absolute, on the weighted samples
    meta: dict
    weighted: np.ndarray | None = None  # e^{(N/2+l) y} times the values

    @property
    def h(self) -> float:
        return float(self.y[1] - self.y[0])


def y_grid(q_value: float, lo: float, hi: float, beta: float = 0.0, M: int = 8, h: float | None = None) -> np.ndarray:
    """Uniform grid in y covering [lo, hi]; aligned with ``beta ln q + n ln q`` when ``h`` is None."""
    step = abs(math.log(q_value)) / M if h is None else h
    origin = beta * math.log(q_value) if h is None else 0.0
    i0 = math.floor((lo - origin) / step)
    i1 = math.ceil((hi - origin) / step)
    return origin + step * np.arange(i0, i1 + 1)


def _window(f: RadialFn, N: int, l: int, tol: float) -> tuple[float, float, float]:
    """y-window where ``e^{(N/2+l)y} r^l f`` exceeds ``tol`` relative, and the slowest decay rate."""
    a0 = f.order_at_zero() + l + N / 2
    ainf = -(f.order_at_infinity() + l + N / 2)
    if a0 <= 0 or ainf <= 0:
        raise RadialError(
            f"e^(Ny/2) r^l f is not square integrable: growth rates {a0} at 0 and {-ainf} at infinity"
        )
    span = -math.log(tol)
    # poles at |r| = q^-j shift the bulk of the function; widen by the largest such offset
    extra = max((abs(float(j)) for t in f.terms for j, _, _ in t.factors), default=0.0)
    return -span / a0 - extra, span / ainf + extra, min(a0, ainf)


def _gauss_apply(y: np.ndarray, phi: np.ndarray, var: float, tilt: float = 0.0, rate: float = 0.0):
    """Multiply the Fourier transform of ``e^{tilt y} phi`` by ``exp(-var w^2/2)``.

    Returns ``(out, error, meta)`` where ``out`` is the result divided by ``e^{tilt y}``
    and ``error`` an absolute bound on the returned samples.
    """
    step = float(y[1] - y[0])
    peak = float(np.max(np.abs(phi))) or 1.0
    boundary = float(max(abs(phi[0]), abs(phi[-1]))) / peak
    sigma = math.sqrt(abs(var))
    pad = int(math.ceil((12 * sigma + abs(var * tilt)) / step)) + 8
    n_fft = 1 << (len(y) + 2 * pad - 1).bit_length()
    buf = np.zeros(n_fft, dtype=complex)
    buf[pad : pad + len(y)] = phi
    spec = np.fft.fft(buf)
    w = 2 * math.pi * np.fft.fftfreq(n_fft, step)
    # exp(-var (w - i t)^2 / 2)
    expo = -var * (w * w - tilt * tilt) / 2 + 1j * (var * tilt * w)
    meta = {"h": step, "points": len(y), "sigma": sigma, "tilt": tilt, "boundary": boundary}
    if var >= 0:
        out = np.fft.ifft(spec * np.exp(expo))
        # tails beyond the window grow by at most exp(var a^2 / 2) under the smoothing
        error = boundary * peak * math.exp(min(50.0, 0.5 * var * rate * rate))
    else:
        # growing multiplier: keep only the band where the input spectrum is above roundoff
        mag = np.abs(spec)
        keep = mag > 1e-13 * mag.max()
        wc = float(np.min(np.abs(w[~keep]))) if (~keep).any() else math.inf
        band = np.abs(w) < wc
        amplified = np.where(band, mag * np.exp(np.where(band, expo.real, 0.0)), 0.0)
        edge = amplified[band & (np.abs(w) > 0.8 * wc)] if math.isfinite(wc) else np.zeros(1)
        if edge.size and edge.max() > 1e-3 * amplified[band].max():
            raise RadialError(
                "the Gaussian multiplier grows faster than the input spectrum decays; "
                "use q > 1 with k < 0 or q < 1 with k > 0"
            )
        out = np.fft.ifft(np.where(band, spec * np.exp(np.where(band, expo, 0.0)), 0.0))
        error = float(edge.sum()) / n_fft + boundary * peak
        meta["cutoff"] = wc
    error += 4e-16 * peak * math.sqrt(n_fft)  # roundoff
    return out[pad : pad + len(y)], float(error), meta


def nu_multiplier_numeric(
    f: RadialFn,
    k: int,
    q_value: float,
    N: int = 3,
    l: int = 0,
    *,
    grid: np.ndarray | None = None,
    M: int = 8,
    beta: float = 0.0,
    tol: float = 1e-14,
    h: float | None = None,
    window: tuple[float, float] | None = None,
) -> Sampled:
    """Radial part of ``nu~'^k (S_l f)`` divided by ``S_l`` (the level factor is not included).

    Works in ``y = ln r`` on ``psi(y) = e^{(N/2+l) y} f(e^y)``, where the multiplier is
    ``q^{k w^2/4}`` on the Fourier transform. A Laurent monomial needs an explicit
    ``window``; it is written as ``e^{t y}`` times a smooth plateau and the multiplier
    is applied to the plateau with the complex shift ``w -> w - i t``.
    """
    if k % 2:
        raise ValueError("k must be even")
    shift = N / 2 + l
    tilt, rate = 0.0, 0.0
    if window is None:
        lo, hi, rate = _window(f, N, l, tol)
    else:
        lo, hi = window
        if f.is_monomial():
            tilt = f.terms[0].m + shift
    y = y_grid(q_value, lo, hi, beta, M, h) if grid is None else np.asarray(grid, dtype=float)
    meta = {"k": k, "q": q_value, "N": N, "l": l}
    if k == 0:
        return Sampled(y, f.on_log_grid(y, q_value), 0.0, meta, f.on_log_grid(y, q_value, shift))
    phi = f.on_log_grid(y, q_value, shift - tilt)
    if window is not None:
        width = (hi - lo) / 8
        phi = phi * 0.25 * (1 + _erf((y - lo - width) / (width / 4))) * (1 - _erf((y - hi + width) / (width / 4)))
    out, error, extra = _gauss_apply(y, phi, -k * math.log(q_value) / 2, tilt, rate)
    meta.update(extra)
    weighted = out * np.exp(tilt * y)
    return Sampled(y, weighted * np.exp(-shift * y), error, meta, weighted)


def nu_multiplier_samples(s: Sampled, k: int, q_value: float, N: int = 3, l: int = 0) -> Sampled:
    """Apply ``nu~'^k`` (radial part) to already sampled data, e.g. to undo a previous call."""
    if k % 2:
        raise ValueError("k must be even")
    shift = N / 2 + l
    phi = s.weighted if s.weighted is not None else s.values * np.exp(shift * s.y)
    out, error, meta = _gauss_apply(s.y, phi, -k * math.log(q_value) / 2)
    meta.update({"k": k, "q": q_value, "N": N, "l": l})
    return Sampled(s.y, out * np.exp(-shift * s.y), error + s.error, meta, out)


def monomial_window(m: int, N: int = 3, l: int = 0, q_value: float = 1.2) -> tuple[float, float]:
    """Symmetric y-window for tapered monomials, wide against the Gaussian width."""
    c = abs(m + l + N / 2)
    sigma = math.sqrt(abs(math.log(q_value)))
    w = 12 * sigma + abs(math.log(q_value)) * c + 6
    return -w, w


def _erf(x):
    from scipy.special import erf

    return erf(x)


def sampled_to_csv(s: Sampled, path) -> None:
    """Columns y, Re f, Im f."""
    data = np.column_stack([s.y, s.values.real, s.values.imag])
    np.savetxt(path, data, delimiter=",", header="y,re,im", comments="")
