"""Chebyshev discretization of function vectors on the unbounded intervals I_k.

Each component lives on a half-line with one finite end a and is pulled back
to u in [-1, 1] by the Moebius chart

    x(u) = a + sigma * scale * (1 + u) / (1 - u),

so u = -1 is the finite end and u = 1 is infinity.  Components are stored in
the chart frame, g(u) = |x'(u)|^s f(x(u)).  Functions with the decay
|f(x)| ~ |x|^(-2s) required of period functions are smooth at u = 1 in
this frame, and every tau_s term of the transfer operator becomes a Moebius
change of chart variable times the weight |A'(u)|^s.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .boundary import INF, DomainError, FunctionEvaluator, Interval, positive_power
from .group import inverse, require_prime


def cgl_nodes(N):
    """Chebyshev-Gauss-Lobatto nodes u_j = cos(pi j/(N-1)) and barycentric weights."""
    j = np.arange(N)
    u = np.cos(np.pi * j / (N - 1))
    w = (-1.0) ** j
    w[0] *= 0.5
    w[-1] *= 0.5
    return u, w


def barycentric_matrix(u, w, v):
    """Rows interpolating node values at the points v (second barycentric form)."""
    v = np.atleast_1d(np.asarray(v, dtype=float))
    diff = v[:, None] - u[None, :]
    exact = diff == 0
    diff[exact] = 1.0
    L = w[None, :] / diff
    L /= L.sum(axis=1, keepdims=True)
    hit = exact.any(axis=1)
    if np.any(hit):
        L[hit] = exact[hit].astype(float)
    return L


def diff_matrix(u, w):
    """Chebyshev differentiation matrix on the nodes u (negative-sum diagonal)."""
    N = len(u)
    du = u[:, None] - u[None, :]
    np.fill_diagonal(du, 1.0)
    D = (w[None, :] / w[:, None]) / du
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -D.sum(axis=1))
    return D


def chebyshev_coefficients(values):
    """Chebyshev coefficients of the interpolant through CGL node values."""
    values = np.asarray(values)
    N = len(values)
    ext = np.concatenate([values, values[-2:0:-1]])
    c = np.fft.fft(ext) / (N - 1)
    c = c[:N]
    c[0] /= 2
    c[-1] /= 2
    if np.isrealobj(values):
        c = c.real
    return c


def mobius(A, u):
    return (A[0, 0] * u + A[0, 1]) / (A[1, 0] * u + A[1, 1])


def mobius_derivative(A, u):
    """|A'(u)| = |det A| / (c u + d)^2."""
    return abs(np.linalg.det(A)) / (A[1, 0] * u + A[1, 1]) ** 2


@dataclass(frozen=True)
class Chart:
    """x(u) = anchor + direction * scale * (1+u)/(1-u) on u in [-1, 1]."""

    anchor: float
    direction: int
    scale: float = 1.0

    @property
    def matrix(self):
        a, sl = float(self.anchor), self.direction * self.scale
        return np.array([[sl - a, a + sl], [-1.0, 1.0]])

    @property
    def inverse_matrix(self):
        return np.linalg.inv(self.matrix)

    @property
    def interval(self):
        a = Fraction(self.anchor).limit_denominator(10**9) if not isinstance(self.anchor, Fraction) else self.anchor
        return Interval(a, INF) if self.direction > 0 else Interval(INF, a)

    def x(self, u):
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore"):
            return float(self.anchor) + self.direction * self.scale * (1 + u) / (1 - u)

    def u(self, x):
        if x is INF:
            return 1.0
        y = (np.asarray(x, dtype=float) - float(self.anchor)) * self.direction
        return (y - self.scale) / (y + self.scale)

    def jacobian(self, u):
        """|x'(u)| = 2 scale / (1-u)^2."""
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore"):
            return 2.0 * self.scale / (1 - u) ** 2

    def to_json(self):
        return {"anchor": float(self.anchor), "direction": int(self.direction), "scale": float(self.scale)}

    @classmethod
    def from_json(cls, obj):
        return cls(obj["anchor"], int(obj["direction"]), obj["scale"])


def default_scale(p):
    """Chart scale used by the spectral machinery.

    Period functions are smooth but not analytic at the cusps k/p and at
    infinity; scale 1/p balances the resolution needed at both kinds of point.
    """
    return 1.0 / p


def chart_for(k, p, scale=1.0):
    """Chart of I_k: anchor k/p going right for k < p, anchor 0 going left for k = p."""
    if not 0 <= k <= p:
        raise ValueError(f"sheet {k} out of range 0..{p}")
    if k == p:
        return Chart(Fraction(0), -1, scale)
    return Chart(Fraction(k, p), 1, scale)


def sheet_charts(p, scale=None):
    scale = default_scale(p) if scale is None else scale
    return [chart_for(k, p, scale) for k in range(p + 1)]


class SampledFunctionVector:
    """Values of (f_0, ..., f_n) at the CGL nodes of their charts.

    ``frame='chart'`` stores |x'(u)|^s f(x(u)); ``frame='raw'`` stores f(x(u))
    and is only meaningful for data that is bounded at infinity.
    """

    def __init__(self, values, s, charts, p=None, frame="chart"):
        self.values = np.array(values, dtype=complex)
        self.s = complex(s)
        self.charts = list(charts)
        self.p = p
        self.frame = frame
        if self.values.shape[0] != len(self.charts):
            raise ValueError("one row of values per chart is required")
        self.nodes, self.weights = cgl_nodes(self.N)

    @property
    def N(self):
        return self.values.shape[1]

    @property
    def ncomp(self):
        return self.values.shape[0]

    def flat(self):
        return self.values.reshape(-1)

    def copy(self, values=None):
        return SampledFunctionVector(self.values if values is None else values, self.s, self.charts, self.p, self.frame)

    def scaled(self, factor):
        return self.copy(self.values * factor)

    def sup_norm(self):
        return float(np.max(np.abs(self.values)))

    def chart_values(self, k, u):
        """Interpolated chart-frame values of component k at chart points u."""
        u = np.clip(np.atleast_1d(np.asarray(u, dtype=float)), -1.0, 1.0)
        return barycentric_matrix(self.nodes, self.weights, u) @ self.values[k]

    def eval(self, x, k):
        """f_k(x).  At x = INF the decay-normalized value lim |x|^(2s) f_k(x)."""
        ch = self.charts[k]
        if x is INF:
            g1 = self.values[k, 0]
            if self.frame == "raw":
                return g1
            return positive_power(2.0 * ch.scale, self.s) * g1
        scalar = np.ndim(x) == 0
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if not np.all(ch.interval.contains_array(x, closed=True, rtol=1e-13)):
            raise DomainError(f"point outside the closure of component {k} domain {ch.interval}")
        u = ch.u(x)
        vals = self.chart_values(k, u)
        if self.frame == "chart":
            vals = vals * positive_power(ch.jacobian(np.clip(u, -1, 1)), -self.s)
        return vals[0] if scalar else vals

    def evaluator(self, k):
        inf_val = self.eval(INF, k) if self.frame == "chart" else None
        ev = FunctionEvaluator(lambda x, k=k: self.eval(x, k), self.charts[k].interval, inf_val)
        # lets consumers restrict exactly instead of resampling
        ev.source = (self, k)
        return ev

    def evaluators(self):
        return [self.evaluator(k) for k in range(self.ncomp)]

    def spectral_tail(self, fraction=0.25):
        """Largest relative Chebyshev coefficient in the top `fraction` of modes."""
        worst = 0.0
        for k in range(self.ncomp):
            c = np.abs(chebyshev_coefficients(self.values[k]))
            scale = max(c.max(), 1e-300)
            cut = int(round(len(c) * (1 - fraction)))
            worst = max(worst, c[cut:].max() / scale)
        return worst

    def to_json(self):
        return {
            "p": self.p,
            "s": {"re": self.s.real, "im": self.s.imag},
            "N": self.N,
            "frame": self.frame,
            "charts": [c.to_json() for c in self.charts],
            "values": [[[float(z.real), float(z.imag)] for z in row] for row in self.values],
        }

    @classmethod
    def from_json(cls, obj):
        vals = np.array([[complex(re, im) for re, im in row] for row in obj["values"]])
        s = complex(obj["s"]["re"], obj["s"]["im"])
        charts = [Chart.from_json(c) for c in obj["charts"]]
        return cls(vals, s, charts, obj.get("p"), obj.get("frame", "chart"))


def sample(phis, N, s=0.0, charts=None, p=None, scale=None, frame="chart"):
    """Sample a list of FunctionEvaluators at the CGL nodes of their charts.

    The u = 1 node takes the evaluator's value at INF (its decay-normalized
    limit); in the chart frame that value is divided by (2 scale)^s.
    """
    if charts is None:
        charts = sheet_charts(p, scale)
    u, _ = cgl_nodes(N)
    s = complex(s)
    vals = np.empty((len(charts), N), dtype=complex)
    for k, (phi, ch) in enumerate(zip(phis, charts)):
        x = ch.x(u[1:])
        vals[k, 1:] = phi(x)
        vals[k, 0] = phi(INF)
        if frame == "chart":
            vals[k, 1:] *= positive_power(ch.jacobian(u[1:]), s)
            vals[k, 0] *= positive_power(2.0 * ch.scale, -s)
    return SampledFunctionVector(vals, s, charts, p, frame)


def _raw_weight(ginv, x):
    """(ginv'(x))^s base weight for the raw frame; 0 or 1 at infinity, nan at the pole."""
    a, b, c, d = ginv.entries
    out = np.empty(x.shape)
    fin = np.isfinite(x)
    den = c * x[fin] + d
    with np.errstate(divide="ignore"):
        out[fin] = np.where(den == 0, np.nan, 1.0 / np.where(den == 0, 1.0, den) ** 2)
    out[~fin] = 1.0 if c == 0 else 0.0
    return out


def term_block(element, s, row_chart, col_chart, N, frame="chart", tol=1e-12):
    """Matrix of f_col -> tau_s(element) f_col sampled on the row chart nodes."""
    u, w = cgl_nodes(N)
    ginv = inverse(element)
    A = col_chart.inverse_matrix @ ginv.to_array() @ row_chart.matrix
    with np.errstate(divide="ignore", invalid="ignore"):
        v = mobius(A, u)
    if np.any(~np.isfinite(v)) or np.any(v < -1 - tol) or np.any(v > 1 + tol):
        raise DomainError(
            f"term {element!r}: mapped sample point leaves the closed source interval {col_chart.interval}"
        )
    v = np.clip(v, -1.0, 1.0)
    if frame == "chart":
        weight = positive_power(mobius_derivative(A, u), s)
    elif s == 0:
        weight = np.ones(N)
    else:
        base = _raw_weight(ginv, row_chart.x(u))
        weight = np.zeros(N, dtype=complex)
        nz = base != 0
        weight[nz] = positive_power(base[nz], s)
    return weight[:, None] * barycentric_matrix(u, w, v)


def assemble_operator(op, s, N, charts, frame="chart"):
    """Dense collocation matrix of a SymbolicTransferOperator."""
    n = len(charts)
    s = complex(s)
    L = np.zeros((n * N, n * N), dtype=complex)
    for (row, col), terms in sorted(op.entries.items()):
        block = np.zeros((N, N), dtype=complex)
        for g in terms:
            block += term_block(g, s, charts[row], charts[col], N, frame)
        L[row * N:(row + 1) * N, col * N:(col + 1) * N] = block
    return L


def assemble_matrix(p, s, N, scale=None, frame="chart"):
    """Collocation matrix of the transfer operator for prime p, size (p+1)N."""
    from .transfer import build_transfer

    require_prime(p)
    if N < 8:
        raise ValueError("N must be at least 8")
    return assemble_operator(build_transfer(p), s, N, sheet_charts(p, scale), frame)
