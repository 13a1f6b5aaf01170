"""Exact PSL(2,Z) arithmetic and the side-pairing generators of Gamma_0(p).

Elements are stored as integer 2x2 matrices with determinant 1, normalized
so that the bottom row (c, d) is lexicographically positive.  With that
normalization two matrices represent the same element of PSL(2,Z) exactly
when their entries agree, so equality and hashing are structural.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from math import isqrt


class DeterminantError(ValueError):
    """Raised when a matrix does not have determinant one."""

    def __init__(self, det):
        super().__init__(f"determinant={det}, expected 1")
        self.determinant = det


class NotPrimeError(ValueError):
    pass


def is_prime(n):
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    for q in range(3, isqrt(n) + 1, 2):
        if n % q == 0:
            return False
    return True


def require_prime(p):
    if not isinstance(p, int) or not is_prime(p):
        raise NotPrimeError(f"{p} is not prime")
    return p


@dataclass(frozen=True)
class GroupElement:
    """An element of PSL(2,Z) in canonical sign form.

    Use :func:`make_element` to construct from arbitrary signs.
    """

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        if det != 1:
            raise DeterminantError(det)
        if not (self.c > 0 or (self.c == 0 and self.d > 0)):
            raise ValueError("bottom row not in canonical sign form; use make_element")

    def __matmul__(self, other):
        return compose(self, other)

    def __repr__(self):
        return f"[[{self.a},{self.b}],[{self.c},{self.d}]]"

    @property
    def entries(self):
        return (self.a, self.b, self.c, self.d)

    def to_array(self):
        import numpy as np

        return np.array([[self.a, self.b], [self.c, self.d]], dtype=float)

    def trace(self):
        return self.a + self.d

    def is_parabolic(self):
        return abs(self.trace()) == 2 and self != IDENTITY

    def to_json(self):
        return {"a": self.a, "b": self.b, "c": self.c, "d": self.d}

    @classmethod
    def from_json(cls, obj):
        return make_element(int(obj["a"]), int(obj["b"]), int(obj["c"]), int(obj["d"]))


def make_element(a, b, c, d):
    """Build the PSL(2,Z) element with matrix [[a,b],[c,d]] up to sign."""
    a, b, c, d = int(a), int(b), int(c), int(d)
    det = a * d - b * c
    if det != 1:
        raise DeterminantError(det)
    if c < 0 or (c == 0 and d < 0):
        a, b, c, d = -a, -b, -c, -d
    return GroupElement(a, b, c, d)


IDENTITY = GroupElement(1, 0, 0, 1)
T = GroupElement(1, 1, 0, 1)
T_INV = GroupElement(1, -1, 0, 1)


def compose(g, h):
    """Matrix product g*h, canonicalized."""
    return make_element(
        g.a * h.a + g.b * h.c,
        g.a * h.b + g.b * h.d,
        g.c * h.a + g.d * h.c,
        g.c * h.b + g.d * h.d,
    )


def inverse(g):
    return make_element(g.d, -g.b, -g.c, g.a)


def product(elements):
    out = IDENTITY
    for g in elements:
        out = compose(out, g)
    return out


def power(g, n):
    base = g if n >= 0 else inverse(g)
    out = IDENTITY
    for _ in range(abs(n)):
        out = compose(out, base)
    return out


def kprime(k, p):
    """Return k' in 1..p-1 with k*k' = -1 mod p."""
    if not 1 <= k <= p - 1:
        raise ValueError(f"index k={k} out of range 1..{p - 1}")
    return (-pow(k, -1, p)) % p


def h_element(k, p):
    """The side-pairing element h_k = [[k', -(k k'+1)/p], [p, -k]]."""
    kk = kprime(k, p)
    return make_element(kk, -(k * kk + 1) // p, p, -k)


@dataclass(frozen=True)
class GeneratorSet:
    """T together with h_1, ..., h_{p-1} and the involution k -> k'."""

    p: int
    T: GroupElement
    h: dict = field(repr=False)
    kprime: dict = field(repr=False)

    def hk(self, k):
        return self.h[k]

    def symbols(self):
        return ["T"] + [f"h{k}" for k in range(1, self.p)]

    def element(self, symbol):
        """Parse one letter such as 'T', 'T^-1', 'h3' or 'h3^-1'."""
        m = re.fullmatch(r"\s*(T|h(\d+))\s*(\^\s*(-?\d+))?\s*", symbol)
        if m is None:
            raise ValueError(f"unknown generator symbol {symbol!r}")
        if m.group(1) == "T":
            g = self.T
        else:
            k = int(m.group(2))
            if k not in self.h:
                raise ValueError(f"no generator h{k} for p={self.p}")
            g = self.h[k]
        exp = int(m.group(4)) if m.group(4) else 1
        return power(g, exp)

    def word(self, letters):
        """Evaluate a word, given as a list of symbols, left to right."""
        return product(self.element(x) for x in letters)

    def to_json(self):
        return {
            "p": self.p,
            "T": self.T.to_json(),
            "h": {str(k): g.to_json() for k, g in self.h.items()},
            "kprime": {str(k): v for k, v in self.kprime.items()},
        }


def generators(p):
    require_prime(p)
    table = {k: kprime(k, p) for k in range(1, p)}
    return GeneratorSet(p=p, T=T, h={k: h_element(k, p) for k in range(1, p)}, kprime=table)


def involution_relators(p):
    """Words h_{j'} h_j for j = 1..p-1, as lists of (symbol) letters."""
    return [[f"h{kprime(j, p)}", f"h{j}"] for j in range(1, p)]


def triple_relators(p):
    """Words h_{(k'-1)'-1} h_{k'-1} h_k for k = 1..p-2."""
    out = []
    for k in range(1, p - 1):
        a = kprime(k, p) - 1
        out.append([f"h{kprime(a, p) - 1}", f"h{a}", f"h{k}"])
    return out


def check_generators(gens):
    """Return a list of (name, ok) for the GeneratorSet invariants."""
    p = gens.p
    checks = []
    for k in range(1, p):
        kk = gens.kprime[k]
        checks.append((f"kprime involution k={k}", gens.kprime[kk] == k))
        checks.append((f"k k' = -1 mod p, k={k}", (k * kk + 1) % p == 0))
        checks.append((f"h{k} in Gamma_0(p)", gens.h[k].c % p == 0))
        checks.append((f"h{k} h{kk} = id", compose(gens.h[k], gens.h[kk]) == IDENTITY))
    checks.append(("h1 = [[p-1,-1],[p,-1]]", gens.h[1] == make_element(p - 1, -1, p, -1)))
    return checks


def check_relators(gens):
    """Evaluate both relator families; returns list of (word, ok)."""
    out = []
    for w in involution_relators(gens.p) + triple_relators(gens.p):
        out.append((w, gens.word(w) == IDENTITY))
    return out


def check_identities(gens):
    """(k'-1)'-1 = (k+1)' and h_{k'} h_{(k'-1)'} = h_{(k+1)'} for k = 1..p-2."""
    p = gens.p
    out = []
    for k in range(1, p - 1):
        a = gens.kprime[gens.kprime[k] - 1]
        b = gens.kprime[k + 1]
        out.append((f"index k={k}", a - 1 == b))
        lhs = compose(gens.h[gens.kprime[k]], gens.h[a])
        out.append((f"product k={k}", lhs == gens.h[b]))
    return out


def parabolic_element(p):
    """h_{p-1} T, which equals [[1,0],[p,1]]."""
    return compose(h_element(p - 1, p), T)
