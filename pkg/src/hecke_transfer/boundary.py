"""Moebius action on the projective line and the line-model action tau_s.

Finite boundary points are ints, Fractions or floats; the point at infinity
is the singleton :data:`INF`.  The action of a group element ``h`` on
functions is

    (tau_s(h) phi)(t) = ((h^-1)'(t))^s * phi(h^-1 . t),

with the complex power of the positive weight taken as exp(s log w).
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational

import numpy as np

from .group import inverse


class _Infinity:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "INF"

    def __reduce__(self):
        return (_Infinity, ())


INF = _Infinity()


class PoleError(ArithmeticError):
    """Evaluation hit the pole of a Moebius map."""


class DomainError(ValueError):
    """A sample point lies outside a declared domain."""


def is_inf(x):
    return x is INF


def _exact(x):
    return isinstance(x, Rational)


def act(g, x):
    """Image of a boundary point under g; exact for rational input."""
    a, b, c, d = g.entries
    if x is INF:
        if c == 0:
            return INF
        return Fraction(a, c)
    den = c * x + d
    if den == 0:
        return INF
    if _exact(x):
        return Fraction(a * x + b) / den
    return (a * x + b) / den


def act_array(g, x):
    """Vectorized float action on finite points; poles map to +-inf."""
    a, b, c, d = g.entries
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return (a * x + b) / (c * x + d)


def derivative(g, t):
    """g'(t) = (ct+d)^-2 for finite t."""
    if t is INF:
        raise PoleError("derivative at infinity is not a finite number")
    den = g.c * t + g.d
    if den == 0:
        raise PoleError(f"derivative pole at t={t}")
    if _exact(t):
        return Fraction(1) / (den * den)
    return 1.0 / (den * den)


def derivative_array(g, t):
    t = np.asarray(t, dtype=float)
    den = g.c * t + g.d
    if np.any(den == 0):
        raise PoleError("derivative pole in sample array")
    return 1.0 / (den * den)


def positive_power(w, s):
    """w**s for w > 0 via exp(s log w)."""
    return np.exp(s * np.log(w))


def _lt(x, y):
    return float(x) < float(y)


class Interval:
    """Open arc of the projective line running upward from left to right.

    ``Interval(a, b)`` with finite a < b is the ordinary interval (a, b).
    An INF left end means -infinity, an INF right end means +infinity.
    Finite a > b gives the arc through infinity, (a, inf] u [-inf, b), and
    ``Interval(INF, INF)`` is the real line.
    """

    __slots__ = ("left", "right")

    def __init__(self, left, right):
        self.left = left
        self.right = right

    @classmethod
    def real_line(cls):
        return cls(INF, INF)

    def __eq__(self, other):
        return isinstance(other, Interval) and self.left == other.left and self.right == other.right

    def __hash__(self):
        return hash((repr(self.left), repr(self.right)))

    def __repr__(self):
        lo = "-inf" if self.left is INF else str(self.left)
        hi = "inf" if self.right is INF else str(self.right)
        return f"({lo}, {hi})"

    @property
    def wraps(self):
        l, r = self.left, self.right
        return l is not INF and r is not INF and not _lt(l, r)

    def is_bounded(self):
        return self.left is not INF and self.right is not INF and not self.wraps

    def contains(self, x, closed=False):
        l, r = self.left, self.right
        if x is INF:
            if self.wraps:
                return True
            return closed and (l is INF or r is INF)
        if closed and ((l is not INF and x == l) or (r is not INF and x == r)):
            return True
        above = l is INF or _lt(l, x)
        below = r is INF or _lt(x, r)
        if self.wraps:
            return above or below
        return above and below

    def contains_array(self, x, closed=False, rtol=0.0):
        """Vectorized membership for finite float samples."""
        x = np.asarray(x, dtype=float)
        l = -np.inf if self.left is INF else float(self.left)
        r = np.inf if self.right is INF else float(self.right)
        tl = rtol * max(1.0, abs(l)) if np.isfinite(l) else 0.0
        tr = rtol * max(1.0, abs(r)) if np.isfinite(r) else 0.0
        if closed:
            above, below = x >= l - tl, x <= r + tr
        else:
            above, below = x > l, x < r
        if self.wraps:
            return above | below
        return above & below

    def image(self, g):
        """The arc g.(left, right); g preserves the cyclic orientation."""
        return Interval(act(g, self.left), act(g, self.right))

    def endpoints_json(self):
        def enc(x, side):
            if x is INF:
                return "-inf" if side == 0 else "inf"
            if isinstance(x, Fraction):
                return str(x) if x.denominator != 1 else int(x.numerator)
            return x

        return [enc(self.left, 0), enc(self.right, 1)]


class FunctionEvaluator:
    """A function on a declared domain of the boundary.

    ``func`` takes a float numpy array and returns complex values.  The
    optional ``infinity_value`` is lim |x|^(2s) phi(x) as x -> infinity
    inside the domain, which is what the tau_s pole limit needs.
    """

    def __init__(self, func, domain=None, infinity_value=None, closed=True):
        self.func = func
        self.domain = Interval.real_line() if domain is None else domain
        self.infinity_value = infinity_value
        self.closed = closed

    def __call__(self, x):
        if x is INF:
            if not self.domain.contains(INF, closed=True):
                raise DomainError(f"infinity is not in the domain {self.domain}")
            if self.infinity_value is None:
                raise PoleError("pole without decay data: no value at infinity")
            return complex(self.infinity_value)
        scalar = np.ndim(x) == 0
        arr = np.atleast_1d(np.asarray(x, dtype=float))
        inside = self.domain.contains_array(arr, closed=self.closed, rtol=1e-13)
        if not np.all(inside):
            bad = arr[~inside][0]
            raise DomainError(f"sample point {bad} outside the domain {self.domain}")
        out = np.asarray(self.func(arr), dtype=complex)
        return out[0] if scalar else out

    @classmethod
    def constant(cls, value, domain=None, infinity_value=None):
        return cls(lambda x: np.full(np.shape(x), value, dtype=complex), domain, infinity_value)


def tau_apply(h, s, phi, t):
    """Evaluate (tau_s(h) phi)(t).

    ``t`` may be a float, a numpy array of floats, or :data:`INF`.  At INF the
    decay-normalized value lim |t|^(2s) (tau_s(h) phi)(t) is returned.  At the
    pole of h^-1 the limit |c|^(2s) phi_inf is used when phi carries it.
    """
    g = inverse(h)
    a, b, c, d = g.entries
    s = complex(s)
    if t is INF:
        if c == 0:
            return phi(INF)
        return positive_power(float(c * c), -s) * phi(Fraction(a, c))
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=float))
    den = c * t + d
    pole = den == 0
    out = np.empty(t.shape, dtype=complex)
    if np.any(pole):
        out[pole] = positive_power(float(c * c), s) * phi(INF)
    ok = ~pole
    if np.any(ok):
        x = (a * t[ok] + b) / den[ok]
        out[ok] = positive_power(1.0 / den[ok] ** 2, s) * phi(x)
    return out[0] if scalar else out


def tau_apply_curried(h, s, phi):
    """tau_s(h) phi as a new FunctionEvaluator on the image domain."""
    domain = phi.domain.image(h)
    inf_val = None
    try:
        inf_val = tau_apply(h, s, phi, INF)
    except (PoleError, DomainError):
        inf_val = None
    return FunctionEvaluator(lambda t: tau_apply(h, s, phi, t), domain, inf_val, phi.closed)
