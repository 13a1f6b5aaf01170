"""Period functions <-> parabolic 1-cocycles with c_T = 0.

A cocycle is stored on the generators T, h_1, ..., h_{p-1} as piecewise
functions on the projective line and extended to words through

    c_{gh} = tau_s(h^-1) c_g + c_h,      c_{g^-1} = -tau_s(g) c_g.

Relations are checked numerically rather than imposed, so a failing relator
shows up as a visible residual.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .boundary import INF, FunctionEvaluator, Interval, act, positive_power, tau_apply
from .group import T, T_INV, compose, generators, involution_relators, inverse, triple_relators
from .spaces import cgl_nodes, barycentric_matrix, diff_matrix, chart_for, sample, sheet_charts
from .transfer import build_transfer, pointwise_residual


class CohomologyError(ValueError):
    pass


def _as_point(b):
    return b if isinstance(b, Fraction) else Fraction(b).limit_denominator(10**12)


class PiecewiseBoundaryFunction:
    """A function on P^1(R) that is analytic away from finitely many breakpoints.

    Piece i lives on (b_{i-1}, b_i) with b_{-1} = -inf and b_n = +inf; the
    outer pieces meet at infinity, where the decay-normalized value
    lim |x|^(2s) phi(x) is used.  At a breakpoint ``side`` picks the one-sided
    value; ``at_breakpoint`` reports both.
    """

    def __init__(self, breakpoints, pieces, s, infinity_value=None):
        pts = sorted({_as_point(b) for b in breakpoints})
        if pieces is not None and len(pieces) != len(pts) + 1:
            raise ValueError("need one piece more than breakpoints")
        self.breakpoints = tuple(pts)
        self.pieces = None if pieces is None else tuple(pieces)
        self.s = complex(s)
        self._inf = infinity_value

    # evaluation -------------------------------------------------------
    def _raw(self, x, side):
        bps = np.array([float(b) for b in self.breakpoints])
        idx = np.searchsorted(bps, x, side="right" if side == "right" else "left")
        out = np.empty(x.shape, dtype=complex)
        for i in np.unique(idx):
            sel = idx == i
            out[sel] = self.pieces[i](x[sel])
        return out

    def _at_infinity(self):
        if self._inf is not None:
            return complex(self._inf)
        return complex(self.pieces[-1](INF))

    def infinity_limit(self, side):
        """Decay-normalized limit as x -> +inf (side 'right') or x -> -inf (side 'left').

        The two limits agree for a function that is smooth at infinity; for
        sampled data they differ by the matching error there.
        """
        if self.pieces is not None:
            piece = self.pieces[-1 if side == "right" else 0]
            try:
                return complex(piece(INF))
            except (ArithmeticError, ValueError, TypeError):
                pass
        return self._at_infinity()

    def __call__(self, x, side="right"):
        if x is INF:
            return self._at_infinity()
        scalar = np.ndim(x) == 0
        arr = np.atleast_1d(np.asarray(x, dtype=float))
        out = self._raw(arr, side)
        return out[0] if scalar else out

    def at_breakpoint(self, i):
        """(left value, right value) at breakpoint i."""
        b = float(self.breakpoints[i])
        return complex(self(b, side="left")), complex(self(b, side="right"))

    def piece(self, i):
        """Piece i as a FunctionEvaluator on its open interval."""
        lo = INF if i == 0 else self.breakpoints[i - 1]
        hi = INF if i == len(self.breakpoints) else self.breakpoints[i]
        mid_side = lambda x: self._piece_eval(x, i)
        inf_val = self._at_infinity() if i in (0, len(self.breakpoints)) else None
        return FunctionEvaluator(mid_side, Interval(lo, hi), inf_val)

    def _piece_eval(self, x, i):
        out = self(x, side="left")
        if i > 0:
            at_left = x == float(self.breakpoints[i - 1])
            if np.any(at_left):
                out[at_left] = self(x[at_left], side="right")
        return out

    # algebra ----------------------------------------------------------
    def __add__(self, other):
        return _Combination([self, other], [1.0, 1.0])

    def __sub__(self, other):
        return _Combination([self, other], [1.0, -1.0])

    def __neg__(self):
        return _Combination([self], [-1.0])

    def scaled(self, factor):
        return _Combination([self], [factor])

    def tau(self, g):
        """tau_s(g) applied to this function."""
        return _Tau(self, g)

    def sup(self, grid):
        return float(np.max(np.abs(self(grid))))

    @classmethod
    def zero(cls, s):
        return cls([], [FunctionEvaluator.constant(0.0, None, 0.0)], s, 0.0)


class _Combination(PiecewiseBoundaryFunction):
    def __init__(self, parts, weights):
        bps = set()
        for f in parts:
            bps.update(f.breakpoints)
        super().__init__(bps, None, parts[0].s)
        self.parts, self.weights = parts, weights

    def _raw(self, x, side):
        return sum(w * f(x, side) for f, w in zip(self.parts, self.weights))

    def _at_infinity(self):
        return sum(w * f(INF) for f, w in zip(self.parts, self.weights))


class _Tau(PiecewiseBoundaryFunction):
    def __init__(self, inner, g):
        bps = set()
        for b in inner.breakpoints:
            img = act(g, b)
            if img is not INF:
                bps.add(img)
        img_inf = act(g, INF)
        if img_inf is not INF:
            bps.add(img_inf)
        super().__init__(bps, None, inner.s)
        self.inner, self.g = inner, g

    def _raw(self, x, side):
        return tau_apply(self.g, self.s, lambda y: self.inner(y, side), x)

    def _at_infinity(self):
        return complex(tau_apply(self.g, self.s, lambda y: self.inner(y), INF))


# cocycles ---------------------------------------------------------------

_SYMBOL = re.compile(r"^(T|h(\d+))(?:\^(-?\d+))?$")


def parse_word(word, gens):
    """Expand symbols like 'T', 'T^-1', 'h2', 'h3^2' into (name, element, inverse?) letters."""
    letters = []
    for sym in word:
        m = _SYMBOL.match(str(sym).strip())
        if not m:
            raise ValueError(f"unknown generator symbol {sym!r}")
        name = m.group(1)
        if name != "T" and int(m.group(2)) not in gens.h:
            raise ValueError(f"no generator {name} for p={gens.p}")
        exp = int(m.group(3)) if m.group(3) else 1
        letters.extend([(name, exp < 0)] * abs(exp))
    return letters


@dataclass
class Cocycle:
    s: complex
    gens: object
    values: dict

    def generator_value(self, name):
        return self.values[name]

    def element(self, name):
        return T if name == "T" else self.gens.h[int(name[1:])]


def zero_cocycle(p, s):
    gens = generators(p)
    z = PiecewiseBoundaryFunction.zero(s)
    vals = {"T": z}
    vals.update({f"h{k}": z for k in gens.h})
    return Cocycle(complex(s), gens, vals)


def extend_cocycle(c, word):
    """c on the product of the word, built letter by letter from the generator values."""
    letters = parse_word(word, c.gens)
    total = PiecewiseBoundaryFunction.zero(c.s)
    for name, inv in letters:
        g = c.element(name)
        cg = c.values[name]
        if inv:
            # c_{g^-1} = -tau_s(g) c_g, and appending g^-1 applies tau_s(g)
            cg = -cg.tau(g)
            g = inverse(g)
        total = total.tau(inverse(g)) + cg
    return total


def word_element(word, gens):
    out = compose(T, T_INV)
    for name, inv in parse_word(word, gens):
        g = T if name == "T" else gens.h[int(name[1:])]
        out = compose(out, inverse(g) if inv else g)
    return out


def _cocycle_h(f, s, p, k, kp, h):
    """c_{h_k}: f_k on (k/p, inf), -tau_s(h_{k'}) f_{k'} on (-inf, k/p)."""
    fk, fkp, hkp = f[k], f[kp], h[kp]
    left = lambda x: -tau_apply(hkp, s, fkp, x)
    return PiecewiseBoundaryFunction([Fraction(k, p)], [left, fk], s, fk(INF))


def cocycle_from_period(f, threshold=1e-6):
    """The c_T = 0 cocycle attached to a sampled period function.

    Refuses vectors whose eigen-residual or junction jumps exceed
    ``threshold`` relative to their sup-norm, since the construction only
    makes sense for genuine period functions.
    """
    p = f.p
    gens = generators(p)
    ev = f.evaluators()
    norm = f.sup_norm()
    c = zero_cocycle(p, f.s)
    if norm == 0:
        return c
    res = pointwise_residual(build_transfer(p), f.s, ev, f.charts) / norm
    if res > threshold:
        raise CohomologyError(f"eigen-residual {res:.2e} above threshold {threshold:.0e}; not a period function")
    for k in range(1, p):
        c.values[f"h{k}"] = _cocycle_h(ev, f.s, p, k, gens.kprime[k], gens.h)
    jump = max(abs(np.subtract(*c.values[f"h{k}"].at_breakpoint(0))) for k in range(1, p))
    psi = psi_from_period(f)
    jump = max(jump, abs(np.subtract(*psi.at_breakpoint(0))), abs(f.eval(INF, 0) + f.eval(INF, p)))
    if jump / norm > threshold:
        raise CohomologyError(f"junction jump {jump / norm:.2e} above threshold {threshold:.0e}")
    return c


def psi_from_period(f):
    """psi = -f_0 on (0, inf) and f_p on (-inf, 0)."""
    ev = f.evaluators()
    p = f.p
    neg0 = lambda x: -ev[0](x)
    return PiecewiseBoundaryFunction([Fraction(0)], [ev[p], neg0], f.s, -ev[0](INF))


def parabolic_element(p):
    gens = generators(p)
    return compose(gens.h[p - 1], T)


def _psi_generator(p):
    gens = generators(p)
    return compose(T_INV, gens.h[1])


def parabolic_residual(c, psi, grid):
    """sup |c_{h_{p-1} T} - (tau_s(T^-1 h_1) psi - psi)| over the grid."""
    p = c.gens.p
    lhs = extend_cocycle(c, [f"h{p - 1}", "T"])
    rhs = psi.tau(_psi_generator(p)) - psi
    return float(np.max(np.abs(lhs(grid) - rhs(grid))))


def verify_parabolic(c, psi, tol=1e-6, grid=None):
    grid = sample_grid() if grid is None else grid
    res = parabolic_residual(c, psi, grid)
    return {"residual": res, "tol": tol, "passed": bool(res <= tol), "grid_size": int(len(grid))}


def sample_grid(n=200, center=0.5, width=0.5):
    """n points of the real line, dense near [0, 1] and reaching far out (tangent spacing)."""
    theta = np.pi * (np.arange(n) + 0.5) / n - np.pi / 2
    return center + width * np.tan(theta * 0.999)


# period function from a cocycle -----------------------------------------

def _evaluator_on(fn, domain, side, sign=1.0):
    # a component on (a, inf) or (-inf, 0) takes its limit at infinity from inside
    return FunctionEvaluator(lambda x: sign * fn(x, side=side), domain, sign * fn.infinity_limit(side))


def period_from_cocycle(c, psi=None, N=64, scale=None):
    """f_k = c_{h_k} on I_k, f_0 = -psi on I_0, f_p = psi on I_p.

    Without psi it is solved from c_{h_{p-1}T} = tau_s(T^-1 h_1) psi - psi.
    """
    p = c.gens.p
    if psi is None:
        psi = solve_psi(c, N, scale)
    charts = sheet_charts(p, scale)
    ev = [_evaluator_on(psi, charts[0].interval, "right", -1.0)]
    for k in range(1, p):
        ev.append(_evaluator_on(c.values[f"h{k}"], charts[k].interval, "right"))
    ev.append(_evaluator_on(psi, charts[p].interval, "left"))
    out = sample(ev, N, c.s, charts=charts, p=p)
    for k in range(1, p):
        row = _stored_row(c.values[f"h{k}"], charts[k], N, c.s)
        if row is not None:
            out.values[k] = row
    return out


def _stored_row(fn, chart, N, s):
    """Stored samples of the piece on (k/p, inf) when it is a vector component on the same grid."""
    if type(fn) is not PiecewiseBoundaryFunction:
        return None
    src = getattr(fn.pieces[-1], "source", None)
    if src is None:
        return None
    vec, k = src
    if vec.N != N or vec.s != s or vec.frame != "chart" or vec.charts[k] != chart:
        return None
    return vec.values[k].copy()


def solve_psi(c, N=64, scale=None):
    """Least-squares psi from the parabolic equation plus smoothness at 0 and infinity.

    psi is represented by two chart-frame Chebyshev pieces, on (0, inf) and on
    (-inf, 0).  Collocation rows impose tau_s(G) psi - psi = c_{h_{p-1}T}
    with G = T^-1 h_1; the equation degenerates at the fixed point 0, so value
    and first-derivative matching at 0 and at infinity close the system.
    """
    p = c.gens.p
    s = c.s
    charts = [chart_for(0, p, scale if scale is not None else 1.0 / p), chart_for(p, p, scale if scale is not None else 1.0 / p)]
    u, w = cgl_nodes(N)
    D = diff_matrix(u, w)
    G = _psi_generator(p)
    Ginv = inverse(G)
    rhs_fn = extend_cocycle(c, [f"h{p - 1}", "T"])

    def interp(x):
        """Rows giving raw psi(x) from the 2N chart-frame unknowns."""
        x = np.asarray(x, dtype=float)
        rows = np.zeros((len(x), 2 * N), dtype=complex)
        pos = x >= 0
        for j, (ch, sel) in enumerate(zip(charts, (pos, ~pos))):
            if np.any(sel):
                uu = np.clip(ch.u(x[sel]), -1, 1)
                B = barycentric_matrix(u, w, uu)
                rows[np.ix_(np.nonzero(sel)[0], np.arange(j * N, (j + 1) * N))] = (
                    positive_power(ch.jacobian(uu), -s)[:, None] * B
                )
        return rows

    def inf_row():
        # decay-normalized value at infinity read off the (0, inf) piece
        r = np.zeros(2 * N, dtype=complex)
        r[0] = positive_power(2.0 * charts[0].scale, s)
        return r

    rows, rhs = [], []
    a, b, cc, d = Ginv.entries
    for j, ch in enumerate(charts):
        uu = u[1:]
        x = ch.x(uu)
        den = cc * x + d
        pole = np.abs(den) < 1e-14
        A = np.zeros((len(x), 2 * N), dtype=complex)
        if np.any(~pole):
            y = (a * x[~pole] + b) / den[~pole]
            A[~pole] = positive_power(1.0 / den[~pole] ** 2, s)[:, None] * interp(y)
        if np.any(pole):
            A[pole] = positive_power(float(cc * cc), s) * inf_row()
        A -= interp(x)
        weight = positive_power(ch.jacobian(uu), s)
        rows.append(weight[:, None] * A)
        rhs.append(weight * rhs_fn(x))
        # u = 1 row: decay-normalized equation at infinity
        r_inf = positive_power(float(cc * cc), -s) * interp(np.array([a / cc]))[0] if cc else inf_row()
        r_inf = r_inf - inf_row()
        rows.append(r_inf[None, :] * positive_power(2.0 * ch.scale, -s))
        rhs.append(np.array([rhs_fn(INF)]) * positive_power(2.0 * ch.scale, -s))
    # smoothness: g+(-1) = g-(-1), g+'(-1) + g-'(-1) = 2 s g(-1) at zero;
    # g+(1) = g-(1), g+'(1) + g-'(1) = -2 s g(1) at infinity
    e = np.eye(N)
    lo, hi = N - 1, 0
    for node, sign in ((lo, 2.0), (hi, -2.0)):
        r = np.zeros(2 * N, dtype=complex)
        r[:N] += e[node]
        r[N:] -= e[node]
        rows.append(r[None, :])
        rhs.append(np.zeros(1))
        r = np.zeros(2 * N, dtype=complex)
        r[:N] += D[node] - 0.5 * sign * s * e[node]
        r[N:] += D[node] - 0.5 * sign * s * e[node]
        rows.append(r[None, :])
        rhs.append(np.zeros(1))
    M = np.vstack(rows)
    y = np.concatenate(rhs)
    sol, *_ = np.linalg.lstsq(M, y, rcond=None)
    gp, gm = sol[:N], sol[N:]
    from .spaces import SampledFunctionVector

    vec = SampledFunctionVector(np.vstack([gp, gm]), s, charts, p)
    fp, fm = vec.evaluator(0), vec.evaluator(1)
    return PiecewiseBoundaryFunction([Fraction(0)], [fm, fp], s, fp(INF))


# verification -----------------------------------------------------------

def relator_words(p):
    """Words h_{j'} h_j and h_{(k'-1)'-1} h_{k'-1} h_k spelling the identity."""
    return involution_relators(p) + triple_relators(p)


def antisymmetry_residual(c, grid):
    """sup over k of |c_{h_k} + tau_s(h_{k'}) c_{h_{k'}}| on the grid."""
    gens = c.gens
    worst = 0.0
    for k in range(1, gens.p):
        kp = gens.kprime[k]
        r = c.values[f"h{k}"] + c.values[f"h{kp}"].tau(gens.h[kp])
        worst = max(worst, r.sup(grid))
    return worst


def branch_residuals(f, n=200):
    """Residuals of the three eigen-equation branches used in the relator proof.

    For k = 1..p-2, on the stated half-lines:
      f_{k+1} = f_k + tau_s(h_{k'}) f_{k'-1},
      f_{(k'-1)'} = f_{(k+1)'} + tau_s(h_{k+1}) f_k,
      f_{k'} = f_{k'-1} + tau_s(h_{(k'-1)'}) f_{(k+1)'}.
    """
    p, s = f.p, f.s
    gens = generators(p)
    kp, h = gens.kprime, gens.h
    ev = f.evaluators()
    out = {}
    for k in range(1, p - 1):
        a = kp[k] - 1
        b = kp[k + 1]
        eqs = [
            (k + 1, lambda x: ev[k](x) + tau_apply(h[kp[k]], s, ev[a], x)),
            (kp[a], lambda x: ev[b](x) + tau_apply(h[k + 1], s, ev[k], x)),
            (kp[k], lambda x: ev[a](x) + tau_apply(h[kp[a]], s, ev[b], x)),
        ]
        for i, (lhs, rhs) in enumerate(eqs, start=1):
            x = Fraction(lhs, p) + 0.02 + np.tan(np.linspace(0.0, 1.5, n))
            out[f"k={k},branch{i}"] = float(np.max(np.abs(ev[lhs](x) - rhs(x))))
    return out


def fform_residuals(c, grid):
    """The relator cocycle h_{(k'-1)'-1} h_{k'-1} h_k on each of its three pieces."""
    p = c.gens.p
    out = {}
    for word in relator_words(p)[p - 1:]:
        k = int(word[-1][1:])
        val = extend_cocycle(c, word)
        pieces = {
            "above": grid[grid > (k + 1) / p],
            "middle": grid[(grid > k / p) & (grid < (k + 1) / p)],
            "below": grid[grid < k / p],
        }
        for name, pts in pieces.items():
            if len(pts):
                out[f"k={k},{name}"] = float(np.max(np.abs(val(pts))))
    return out


def verification_report(f, grid=None, threshold=1e-6):
    """JSON-ready residuals of the cocycle attached to f."""
    grid = sample_grid() if grid is None else grid
    c = cocycle_from_period(f, threshold)
    psi = psi_from_period(f)
    norm = f.sup_norm() or 1.0
    rel = {"*".join(w): extend_cocycle(c, w).sup(grid) / norm for w in relator_words(f.p)}
    back = period_from_cocycle(c, psi, f.N, f.charts[0].scale)
    roundtrip = float(np.max(np.abs(back.values - f.values))) / norm
    return {
        "p": f.p,
        "s": {"re": f.s.real, "im": f.s.imag},
        "grid": {"size": int(len(grid)), "min": float(grid.min()), "max": float(grid.max())},
        "relators": rel,
        "antisymmetry": antisymmetry_residual(c, grid) / norm,
        "parabolic": parabolic_residual(c, psi, grid) / norm,
        "branches": {k: v / norm for k, v in branch_residuals(f).items()},
        "fform": {k: v / norm for k, v in fform_residuals(c, grid).items()},
        "roundtrip": roundtrip,
    }
