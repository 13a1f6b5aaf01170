"""The forward boundary dynamical system (D, F) attached to Gamma_0(p).

D is the disjoint union of the sheets I_k x {k}, with I_k = (k/p, inf) for
k < p and I_p = (-inf, 0).  F is piecewise Moebius: each branch is an open
subinterval of a sheet together with a group element and a target sheet.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .boundary import INF, Interval, act
from .group import IDENTITY, T, T_INV, compose, generators, require_prime


class _NotInDomain:
    def __repr__(self):
        return "NOT_IN_DOMAIN"

    def __bool__(self):
        return False


NOT_IN_DOMAIN = _NotInDomain()


def sheet_interval(k, p):
    if k == p:
        return Interval(INF, Fraction(0))
    return Interval(Fraction(k, p), INF)


@dataclass(frozen=True)
class Branch:
    domain: Interval
    source: int
    element: object
    target: int

    def to_json(self):
        return {
            "domain": self.domain.endpoints_json(),
            "source": self.source,
            "element": self.element.to_json(),
            "target": self.target,
        }


@dataclass(frozen=True)
class DynamicalSystem:
    p: int
    branches: tuple
    intervals: tuple

    def branches_from(self, k):
        return [b for b in self.branches if b.source == k]

    def to_json(self):
        return [b.to_json() for b in self.branches]


def _branch_table(p):
    gens = generators(p)
    h = gens.h
    kp = gens.kprime
    par = compose(h[p - 1], T)
    F = Fraction
    out = [
        (Interval(INF, F(-1, p)), p, par, 1),
        (Interval(F(-1, p), F(0)), p, par, p),
        (Interval(F(0), F(1, p)), 0, compose(T_INV, h[1]), 0),
        (Interval(F(1, p), INF), 0, IDENTITY, 1),
        (Interval(F(p - 1, p), F(1)), p - 1, h[p - 1], p),
        (Interval(F(1), INF), p - 1, T_INV, 0),
    ]
    for k in range(1, p - 1):
        out.append((Interval(F(k, p), F(k + 1, p)), k, h[k + 1], kp[k + 1] + 1))
        out.append((Interval(F(k + 1, p), INF), k, IDENTITY, k + 1))
    return out


def build_system(p, validate=True):
    """Branch data for prime p; 6 + 2(p-2) branches."""
    require_prime(p)
    branches = tuple(Branch(dom, src, g, tgt) for dom, src, g, tgt in _branch_table(p))
    system = DynamicalSystem(p=p, branches=branches, intervals=tuple(sheet_interval(k, p) for k in range(p + 1)))
    if validate:
        problems = validate_system(system)
        if problems:
            raise AssertionError("; ".join(problems))
    return system


def _pole(g):
    if g.c == 0:
        return INF
    return Fraction(-g.d, g.c)


def validate_system(system):
    """Exact checks of covering, surjectivity and monotonicity.

    Returns a list of human-readable problems (empty when valid).
    """
    problems = []
    p = system.p
    for k in range(p + 1):
        sheet = system.intervals[k]
        doms = sorted((b.domain for b in system.branches_from(k)), key=lambda d: float('-inf') if d.left is INF else d.left)
        # consecutive domains must abut and the union must fill the sheet
        if not doms:
            problems.append(f"sheet {k} has no branches")
            continue
        if doms[0].left != sheet.left or doms[-1].right != sheet.right:
            problems.append(f"sheet {k}: branch domains do not reach both ends")
        gaps = 0
        for d0, d1 in zip(doms, doms[1:]):
            if d0.right != d1.left:
                problems.append(f"sheet {k}: domains {d0} and {d1} do not abut")
            gaps += 1
        if gaps > 2:
            problems.append(f"sheet {k}: more than two excluded points")
    for b in system.branches:
        img = b.domain.image(b.element)
        tgt = system.intervals[b.target]
        if {_key(img.left), _key(img.right)} != {_key(tgt.left), _key(tgt.right)}:
            problems.append(f"branch {b}: image {img} is not the target {tgt}")
        elif img != tgt:
            problems.append(f"branch {b}: image arc {img} differs from target {tgt}")
        pole = _pole(b.element)
        if pole is not INF and b.domain.contains(pole):
            problems.append(f"branch {b}: map has a pole inside the domain")
    return problems


def _key(x):
    return ("inf",) if x is INF else ("fin", x)


def apply_F(system, x, k):
    """One step of F from (x, sheet k); NOT_IN_DOMAIN at boundary points."""
    if x is INF:
        return NOT_IN_DOMAIN
    for b in system.branches_from(k):
        if b.domain.contains(x):
            return act(b.element, x), b.target
    return NOT_IN_DOMAIN


def orbit(system, x, k, n):
    """[(x, k), F(x, k), ...] with n steps, cut at the first undefined step."""
    out = [(x, k)]
    for _ in range(n):
        nxt = apply_F(system, *out[-1])
        if nxt is NOT_IN_DOMAIN:
            break
        out.append(nxt)
    return out
