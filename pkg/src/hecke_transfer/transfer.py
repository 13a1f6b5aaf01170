"""Symbolic transfer operators: matrices of formal sums of tau_s(g).

Entry (row, col) holds the group elements g with (L f)_row += tau_s(g) f_col.
The parameter s is only supplied when the operator is applied, so one object
serves the whole family.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .boundary import INF, DomainError, FunctionEvaluator, Interval, tau_apply
from .dynamics import build_system, sheet_interval
from .group import IDENTITY, T, T_INV, compose, generators, require_prime


@dataclass(frozen=True)
class SymbolicTransferOperator:
    p: int
    entries: dict
    domains: tuple

    @property
    def size(self):
        return len(self.domains)

    def row(self, r):
        return [(c, g) for (rr, c), terms in sorted(self.entries.items()) if rr == r for g in terms]

    def term_count(self):
        return sum(len(v) for v in self.entries.values())

    def normalized(self):
        """Entries as sorted tuples, for exact comparison of term multisets."""
        return {k: tuple(sorted(v, key=lambda g: g.entries)) for k, v in self.entries.items() if v}

    def same_terms(self, other):
        return self.domains == other.domains and self.normalized() == other.normalized()

    def to_json(self):
        return {
            "p": self.p,
            "entries": [
                {"row": r, "col": c, "terms": [g.to_json() for g in terms]}
                for (r, c), terms in sorted(self.entries.items())
                if terms
            ],
            "domains": [d.endpoints_json() for d in self.domains],
        }


def _operator(p, terms, domains):
    entries = {}
    for r, c, g in terms:
        entries.setdefault((r, c), []).append(g)
    return SymbolicTransferOperator(p=p, entries={k: tuple(v) for k, v in entries.items()}, domains=tuple(domains))


def build_transfer(p):
    """The four row families of the transfer operator for prime p."""
    require_prime(p)
    gens = generators(p)
    h, kp = gens.h, gens.kprime
    par = compose(h[p - 1], T)
    terms = [
        (0, 0, compose(T_INV, h[1])),
        (0, p - 1, T_INV),
        (p, p - 1, h[p - 1]),
        (p, p, par),
        (1, 0, IDENTITY),
        (1, p, par),
    ]
    for k in range(1, p - 1):
        terms.append((k + 1, k, IDENTITY))
        terms.append((k + 1, kp[k] - 1, h[kp[k]]))
    return _operator(p, terms, [sheet_interval(k, p) for k in range(p + 1)])


def transfer_from_system(system):
    """Read the operator off the branch list: branch (k -> l via g) gives tau_s(g) f_k in row l."""
    terms = [(b.target, b.source, b.element) for b in system.branches]
    return _operator(system.p, terms, system.intervals)


def alternate_domains_p3():
    F = Fraction
    return (Interval(F(0), INF), Interval(INF, F(1, 3)), Interval(INF, F(-1, 3)), Interval(INF, F(0)))


def build_transfer_alt_p3():
    """The operator for the second choice of cross section at p = 3."""
    gens = generators(3)
    h1, h2 = gens.h[1], gens.h[2]
    t_h1 = compose(T_INV, h1)
    terms = [
        (0, 0, t_h1),
        (0, 1, t_h1),
        (1, 2, T),
        (1, 2, compose(h1, T)),
        (2, 0, t_h1),
        (2, 3, IDENTITY),
        (3, 1, IDENTITY),
        (3, 3, compose(h2, T)),
    ]
    return _operator(3, terms, alternate_domains_p3())


def apply_transfer(op, s, f, x, row):
    """(L_s f)_row(x) for a list of FunctionEvaluators f; x may be an array or INF."""
    dom = op.domains[row]
    if x is INF:
        if not dom.contains(INF, closed=True):
            raise DomainError(f"infinity is not in I_{row}")
    else:
        arr = np.atleast_1d(np.asarray(x, dtype=float))
        if not np.all(dom.contains_array(arr, closed=True, rtol=1e-13)):
            raise DomainError(f"x={x} is not in the domain {dom} of row {row}")
    total = 0
    for col, g in op.row(row):
        total = total + tau_apply(g, s, f[col], x)
    return total


def apply_transfer_evaluators(op, s, f):
    """L_s f as a list of FunctionEvaluators on the operator's domains."""
    out = []
    for r in range(op.size):
        def func(x, r=r):
            return apply_transfer(op, s, f, x, r)

        try:
            inf_val = apply_transfer(op, s, f, INF, r)
        except (DomainError, ArithmeticError):
            inf_val = None
        out.append(FunctionEvaluator(func, op.domains[r], inf_val))
    return out


def p3_isomorphism_evaluators(f, s):
    """f -> (f_0, tau_s(h_2) f_2, tau_s(T^-1 h_1) f_1, f_3) as evaluators."""
    from .boundary import tau_apply_curried

    gens = generators(3)
    dom = alternate_domains_p3()
    f1 = tau_apply_curried(gens.h[2], s, f[2])
    f2 = tau_apply_curried(compose(T_INV, gens.h[1]), s, f[1])
    out = [f[0], f1, f2, f[3]]
    return [FunctionEvaluator(e.func, d, e.infinity_value) for e, d in zip(out, dom)]


def alternate_charts_p3(scale=None):
    from .spaces import Chart, default_scale

    scale = default_scale(3) if scale is None else scale
    F = Fraction
    return [Chart(F(0), 1, scale), Chart(F(1, 3), -1, scale), Chart(F(-1, 3), -1, scale), Chart(F(0), -1, scale)]


def p3_isomorphism(vec, s=None, N=None, scale=None):
    """Map a sampled p = 3 vector to the alternate domains and resample there."""
    from .spaces import sample

    if vec.p != 3 or vec.ncomp != 4:
        raise ValueError("chart mismatch: expected a p = 3 vector with four components")
    s = vec.s if s is None else complex(s)
    if s != vec.s:
        raise ValueError("chart mismatch: vector was sampled under a different s")
    ev = p3_isomorphism_evaluators(vec.evaluators(), s)
    return sample(ev, vec.N if N is None else N, s, charts=alternate_charts_p3(scale), p=3)


def pointwise_residual(op, s, f, charts, n_points=101):
    """sup over an off-node chart grid of |(I - L_s) f| in the chart frame.

    Each component k is probed at chart points strictly inside (-1, 1) and the
    residual there is weighted by |x'(u)|^s, so the measure matches the scale of
    chart-frame sample values.
    """
    from .boundary import positive_power

    u = np.cos(np.pi * (np.arange(n_points) + 0.5) / n_points)
    worst = 0.0
    for r, ch in enumerate(charts):
        x = ch.x(u)
        res = f[r](x) - apply_transfer(op, s, f, x, r)
        res = res * positive_power(ch.jacobian(u), s)
        worst = max(worst, float(np.max(np.abs(res))))
    return worst


def branch_correspondence(p):
    """True when the operator read off the branches equals the hardcoded rows."""
    return transfer_from_system(build_system(p)).same_terms(build_transfer(p))


def _integrate_on(fun, interval, points, tol=1e-13, order=20, max_panels=2048):
    """Integral over an unbounded sheet through x = a +- (1+u)/(1-u).

    Composite Gauss-Legendre in u between the chart images of ``points``;
    panels are doubled until two successive sums agree to ``tol``.
    """
    from .spaces import Chart

    if interval.left is INF:
        ch = Chart(interval.right, -1, 1.0)
    else:
        ch = Chart(interval.left, 1, 1.0)
    brk = sorted(float(ch.u(x)) for x in points if x is not INF and interval.contains(Fraction(x).limit_denominator(10**12)))
    edges = np.array([-1.0] + [b for b in brk if -1 < b < 1] + [1.0])
    xg, wg = np.polynomial.legendre.leggauss(order)

    def rule(panels):
        fine = np.concatenate([np.linspace(a, b, panels + 1)[:-1] for a, b in zip(edges, edges[1:])] + [[1.0]])
        h = np.diff(fine) / 2
        mid = (fine[:-1] + fine[1:]) / 2
        u = (mid[:, None] + h[:, None] * xg[None, :]).ravel()
        w = (h[:, None] * wg[None, :]).ravel()
        return w @ (np.asarray(fun(ch.x(u)), dtype=complex) * ch.jacobian(u))

    panels = 4
    prev = rule(panels)
    while panels < max_panels:
        panels *= 2
        cur = rule(panels)
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return cur
        prev = cur
    return cur


def bump(lo, hi):
    """Smooth function supported on [lo, hi] (exp(-1/(1-r^2)) profile)."""
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)

    def f(x):
        r = (np.asarray(x, dtype=float) - mid) / half
        out = np.zeros(r.shape)
        inside = np.abs(r) < 1
        out[inside] = np.exp(-1.0 / (1.0 - r[inside] ** 2))
        return out

    return f


def mass_balance(op, supports, weights=None):
    """(sum_k int f_k, sum_l int (L_1 f)_l) for bump components on the given supports.

    ``supports[k]`` is (lo, hi) inside I_k or None for a zero component.  At
    s = 1 the operator is the Perron-Frobenius operator of the boundary map,
    so the two totals agree.
    """
    weights = weights or [1.0] * op.size
    comps = []
    for k, sup in enumerate(supports):
        if sup is None:
            comps.append(FunctionEvaluator.constant(0.0, op.domains[k], 0.0))
        else:
            b = bump(*sup)
            w = weights[k]
            comps.append(FunctionEvaluator(lambda x, b=b, w=w: w * b(x), op.domains[k], 0.0))
    mass_in = 0.0
    for k, sup in enumerate(supports):
        if sup is not None:
            mass_in += _integrate_on(comps[k], op.domains[k], list(sup))
    mass_out = 0.0
    for r in range(op.size):
        pts = []
        for col, g in op.row(r):
            if supports[col] is not None:
                from .boundary import act

                pts += [act(g, Fraction(v).limit_denominator(10**12)) for v in supports[col]]
        mass_out += _integrate_on(lambda x, r=r: apply_transfer(op, 1.0, comps, x, r), op.domains[r], pts)
    return mass_in, mass_out
