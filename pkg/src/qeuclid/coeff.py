"""Exact scalars: rational functions of a formal root ``s`` of ``q`` over Q(i).

The deformation parameter is embedded as ``q = s**8`` so that every fractional
q-power we need (down to ``q**(1/8)``) is a Laurent monomial in ``s``.

An element is stored as ``s**e * (re + i*im) / den`` with ``re``, ``im``, ``den``
rational polynomials (``flint.fmpq_poly``), ``den`` real, monic and coprime to
both ``re`` and ``im``, and neither ``den`` nor ``gcd(re, im)`` divisible by ``s``.
The real denominator of an element is unique (it generates the ideal of real
polynomials clearing it), so equality is structural.
"""

from __future__ import annotations

from fractions import Fraction
from functools import cached_property
from numbers import Rational

from flint import fmpq, fmpq_poly

from .parser import parse_ast

__all__ = [
    "ROOT_ORDER",
    "FieldElem",
    "PoleError",
    "ZERO",
    "ONE",
    "I",
    "S",
    "Q",
    "qpow",
    "qnum",
    "as_field",
]

ROOT_ORDER = 8

_P_ZERO = fmpq_poly(0)
_P_ONE = fmpq_poly(1)


class PoleError(ZeroDivisionError):
    """Raised when a numeric evaluation hits a zero of the denominator."""


def _valuation(p: fmpq_poly) -> int:
    if p.is_zero():
        return 1 << 30
    v = 0
    while p[v] == 0:
        v += 1
    return v


def _to_fmpq(x) -> fmpq:
    if isinstance(x, fmpq):
        return x
    if isinstance(x, int):
        return fmpq(x)
    if isinstance(x, Rational):
        return fmpq(x.numerator, x.denominator)
    raise TypeError(f"cannot convert {x!r} to an exact rational")


class FieldElem:
    """Immutable exact scalar ``s**e * (re + i*im) / den``."""

    __slots__ = ("e", "re", "im", "den", "__dict__")

    def __init__(self, e: int, re: fmpq_poly, im: fmpq_poly, den: fmpq_poly, *, _normalized=False):
        if not _normalized:
            e, re, im, den = _normalize(e, re, im, den)
        self.e = e
        self.re = re
        self.im = im
        self.den = den

    # -- constructors --------------------------------------------------------
    @classmethod
    def rational(cls, value) -> "FieldElem":
        value = _to_fmpq(value)
        if value == 0:
            return ZERO
        return cls(0, fmpq_poly([value]), _P_ZERO, _P_ONE, _normalized=True)

    @classmethod
    def gaussian(cls, re, im) -> "FieldElem":
        return cls(0, fmpq_poly([_to_fmpq(re)]), fmpq_poly([_to_fmpq(im)]), _P_ONE)

    @classmethod
    def monomial(cls, power: int, coeff=1) -> "FieldElem":
        """``coeff * s**power``."""
        c = _to_fmpq(coeff)
        if c == 0:
            return ZERO
        return cls(power, fmpq_poly([c]), _P_ZERO, _P_ONE, _normalized=True)

    @classmethod
    def laurent(cls, coeffs: dict[int, object]) -> "FieldElem":
        """Real Laurent polynomial ``sum c * s**k`` from ``{k: c}``."""
        coeffs = {k: _to_fmpq(c) for k, c in coeffs.items() if c != 0}
        if not coeffs:
            return ZERO
        lo = min(coeffs)
        dense = [fmpq(0)] * (max(coeffs) - lo + 1)
        for k, c in coeffs.items():
            dense[k - lo] = c
        return cls(lo, fmpq_poly(dense), _P_ZERO, _P_ONE)

    @classmethod
    def parse(cls, text: str) -> "FieldElem":
        """Parse the scalar grammar: integers, ``i``, ``s``, ``q``, ``+ - * / ^``, parentheses."""
        return eval_scalar_ast(parse_ast(text))

    # -- predicates ----------------------------------------------------------
    def is_zero(self) -> bool:
        return self.re.is_zero() and self.im.is_zero()

    def is_one(self) -> bool:
        return self.e == 0 and self.im.is_zero() and self.den.is_one() and self.re.is_one()

    def is_real(self) -> bool:
        return self.im.is_zero()

    def is_laurent(self) -> bool:
        return self.den.is_one()

    def is_monomial(self) -> bool:
        return self.den.is_one() and self.im.is_zero() and self.re.length() == 1

    def is_constant(self) -> bool:
        return self.e == 0 and self.den.is_one() and self.re.degree() <= 0 and self.im.degree() <= 0

    # -- arithmetic ----------------------------------------------------------
    def __add__(self, other):
        other = as_field(other)
        if other is NotImplemented:
            return NotImplemented
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        e = min(self.e, other.e)
        a_re, a_im = _shift(self.re, self.e - e), _shift(self.im, self.e - e)
        b_re, b_im = _shift(other.re, other.e - e), _shift(other.im, other.e - e)
        if self.den == other.den:
            return FieldElem(e, a_re + b_re, a_im + b_im, self.den)
        return FieldElem(
            e,
            a_re * other.den + b_re * self.den,
            a_im * other.den + b_im * self.den,
            self.den * other.den,
        )

    __radd__ = __add__

    def __neg__(self):
        return FieldElem(self.e, -self.re, -self.im, self.den, _normalized=True)

    def __pos__(self):
        return self

    def __sub__(self, other):
        other = as_field(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = as_field(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = as_field(other)
        if other is NotImplemented:
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return ZERO
        if self.im.is_zero() and other.im.is_zero():
            re, im = self.re * other.re, _P_ZERO
        else:
            re = self.re * other.re - self.im * other.im
            im = self.re * other.im + self.im * other.re
        e = self.e + other.e
        if self.den.is_one() and other.den.is_one():
            # product of polynomials with nonzero constant terms keeps that property
            return FieldElem(e, re, im, _P_ONE, _normalized=True)
        return FieldElem(e, re, im, self.den * other.den)

    __rmul__ = __mul__

    def inverse(self) -> "FieldElem":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero FieldElem")
        if self.im.is_zero():
            return FieldElem(-self.e, self.den, _P_ZERO, self.re)
        norm = self.re * self.re + self.im * self.im
        return FieldElem(-self.e, self.den * self.re, -(self.den * self.im), norm)

    def __truediv__(self, other):
        other = as_field(other)
        if other is NotImplemented:
            return NotImplemented
        if other.is_zero():
            raise ZeroDivisionError("division by zero FieldElem")
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = as_field(other)
        if other is NotImplemented:
            return NotImplemented
        return other * self.inverse()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inverse() ** (-k)
        result, base = ONE, self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def conj(self) -> "FieldElem":
        """Complex conjugation with ``s`` real."""
        if self.im.is_zero():
            return self
        return FieldElem(self.e, self.re, -self.im, self.den, _normalized=True)

    def sqrt(self) -> "FieldElem | None":
        """Exact square root with positive leading behaviour, or ``None`` if not a square."""
        if self.is_zero():
            return ZERO
        if not self.im.is_zero() or self.e % 2:
            return None
        try:
            num = self.re.sqrt()
            den = self.den.sqrt()
        except Exception:
            return None
        root = FieldElem(self.e // 2, num, _P_ZERO, den)
        if root.eval_numeric(1.0).real < 0:
            root = -root
        return root

    # -- comparison ----------------------------------------------------------
    def __eq__(self, other):
        other = as_field(other)
        if other is NotImplemented:
            return NotImplemented
        return (
            self.e == other.e
            and self.re == other.re
            and self.im == other.im
            and self.den == other.den
        )

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    def __hash__(self):
        return hash((self.e, tuple(self.re.coeffs()), tuple(self.im.coeffs()), tuple(self.den.coeffs())))

    def __bool__(self):
        return not self.is_zero()

    # -- evaluation ----------------------------------------------------------
    @cached_property
    def _float_coeffs(self):
        conv = lambda p: [float(c) for c in p.coeffs()]
        return conv(self.re), conv(self.im), conv(self.den)

    def eval_numeric(self, q_value: float) -> complex:
        """Evaluate at the positive real eighth root of ``q_value``."""
        if not q_value > 0:
            raise ValueError(f"q_value must be positive, got {q_value}")
        s = float(q_value) ** (1.0 / ROOT_ORDER)
        re, im, den = self._float_coeffs
        d = _horner(den, s)
        scale = max((abs(c) * s**k for k, c in enumerate(den)), default=1.0)
        if abs(d) <= 1e-13 * scale:
            raise PoleError(f"denominator vanishes at q={q_value}")
        return complex(_horner(re, s), _horner(im, s)) * s**self.e / d

    def eval_exact(self, s_value) -> tuple[Fraction, Fraction]:
        """Exact value (re, im) at a rational point ``s = s_value``; ``s_value=1`` is ``q = 1``."""
        sv = _to_fmpq(s_value)
        d = self.den(sv)
        if d == 0:
            raise PoleError(f"denominator vanishes at s={s_value}")
        factor = sv**self.e / d if self.e >= 0 else 1 / (sv ** (-self.e) * d)
        re, im = self.re(sv) * factor, self.im(sv) * factor
        return Fraction(int(re.p), int(re.q)), Fraction(int(im.p), int(im.q))

    def at_classical(self) -> "FieldElem":
        """Specialization ``q = 1`` (``s = 1``) as a constant FieldElem."""
        re, im = self.eval_exact(1)
        return FieldElem.gaussian(re, im)

    def __complex__(self):
        if not self.is_constant():
            raise TypeError("only constant FieldElems convert to complex; use eval_numeric")
        return complex(float(self.re[0]), float(self.im[0]))

    # -- printing ------------------------------------------------------------
    def __str__(self):
        num = _format_laurent(self.e, self.re, self.im)
        if self.den.is_one():
            return num
        den = _format_laurent(0, self.den, _P_ZERO)
        if not _is_single_term(self.e, self.re, self.im):
            num = f"({num})"
        return f"{num}/({den})"

    def __repr__(self):
        return f"FieldElem({str(self)!r})"


def _shift(p: fmpq_poly, k: int) -> fmpq_poly:
    return p.left_shift(k) if k else p


def _horner(coeffs, x):
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _normalize(e, re, im, den):
    if re.is_zero() and im.is_zero():
        return 0, _P_ZERO, _P_ZERO, _P_ONE
    if den.is_zero():
        raise ZeroDivisionError("zero denominator")
    if not den.is_one():
        g = den.gcd(re) if im.is_zero() else den.gcd(re.gcd(im))
        if not g.is_one():
            den, re = den / g, re / g
            if not im.is_zero():
                im = im / g
        lc = den.leading_coefficient()
        if lc != 1:
            den, re = den / lc, re / lc
            if not im.is_zero():
                im = im / lc
        v = _valuation(den)
        if v:
            den = den.right_shift(v)
            e -= v
    v = min(_valuation(re), _valuation(im))
    if v:
        re = re.right_shift(v)
        if not im.is_zero():
            im = im.right_shift(v)
        e += v
    return e, re, im, den


def _format_rational(c: fmpq) -> str:
    return str(c.p) if c.q == 1 else f"{c.p}/{c.q}"


def _format_coeff_term(re: fmpq, im: fmpq, power: int) -> tuple[str, str]:
    """Return (sign, body) for ``(re + i*im) * s**power``."""
    if power == 0:
        mono = ""
    elif power % ROOT_ORDER == 0:
        k = power // ROOT_ORDER
        mono = "q" if k == 1 else f"q^{k}"
    else:
        mono = "s" if power == 1 else f"s^{power}"
    if im == 0:
        sign = "-" if re < 0 else "+"
        mag = -re if re < 0 else re
        coeff = _format_rational(mag)
    elif re == 0:
        sign = "-" if im < 0 else "+"
        mag = -im if im < 0 else im
        coeff = "i" if mag == 1 else f"{_format_rational(mag)}*i"
    else:
        sign = "+"
        im_sign = "-" if im < 0 else "+"
        im_mag = -im if im < 0 else im
        im_txt = "i" if im_mag == 1 else f"{_format_rational(im_mag)}*i"
        coeff = f"({_format_rational(re)} {im_sign} {im_txt})"
    if not mono:
        return sign, coeff
    if coeff == "1":
        return sign, mono
    return sign, f"{coeff}*{mono}"


def _is_single_term(e, re, im) -> bool:
    nz = {k for k in range(re.length()) if re[k] != 0} | {k for k in range(im.length()) if im[k] != 0}
    return len(nz) <= 1


def _format_laurent(e: int, re: fmpq_poly, im: fmpq_poly) -> str:
    n = max(re.length(), im.length())
    parts = []
    for k in range(n - 1, -1, -1):
        a, b = re[k], im[k]
        if a == 0 and b == 0:
            continue
        parts.append(_format_coeff_term(a, b, k + e))
    if not parts:
        return "0"
    sign, body = parts[0]
    out = body if sign == "+" else f"-{body}"
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


def as_field(x):
    if isinstance(x, FieldElem):
        return x
    if isinstance(x, (int, Fraction, fmpq)):
        return FieldElem.rational(x)
    if isinstance(x, complex):
        raise TypeError("floating complex values are not exact")
    return NotImplemented


def qpow(k) -> FieldElem:
    """``q**k`` for rational ``k`` with ``8*k`` integral."""
    k = Fraction(k)
    p = k * ROOT_ORDER
    if p.denominator != 1:
        raise ValueError(f"q^{k} is not representable with root order {ROOT_ORDER}")
    return FieldElem.monomial(int(p))


def qnum(n: int, base: FieldElem | None = None) -> FieldElem:
    """Geometric q-number ``1 + base + ... + base**(n-1)`` (default base ``q``)."""
    base = Q if base is None else base
    acc, term = ZERO, ONE
    for _ in range(n):
        acc = acc + term
        term = term * base
    return acc


def eval_scalar_ast(node) -> FieldElem:
    kind = node[0]
    if kind == "num":
        return FieldElem.rational(node[1])
    if kind == "sym":
        return {"i": I, "s": S, "q": Q}[node[1]]
    if kind == "add":
        return eval_scalar_ast(node[1]) + eval_scalar_ast(node[2])
    if kind == "sub":
        return eval_scalar_ast(node[1]) - eval_scalar_ast(node[2])
    if kind in ("mul", "apply"):
        return eval_scalar_ast(node[1]) * eval_scalar_ast(node[2])
    if kind == "div":
        return eval_scalar_ast(node[1]) / eval_scalar_ast(node[2])
    if kind == "neg":
        return -eval_scalar_ast(node[1])
    if kind == "pow":
        return eval_scalar_ast(node[1]) ** node[2]
    raise ValueError(f"{node[1]!r} is not a scalar")


ZERO = FieldElem(0, _P_ZERO, _P_ZERO, _P_ONE, _normalized=True)
ONE = FieldElem(0, _P_ONE, _P_ZERO, _P_ONE, _normalized=True)
I = FieldElem(0, _P_ZERO, _P_ONE, _P_ONE, _normalized=True)
S = FieldElem.monomial(1)
Q = FieldElem.monomial(ROOT_ORDER)
