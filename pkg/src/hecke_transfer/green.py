"""Poisson kernel, Green form and the cocycle integral of a Laplace eigenfunction.

For Laplace eigenfunctions u, v with the same eigenvalue the Green form

    [u, v] = u_z v dz + u v_zbar dzbar

is closed.  With v = R(t, .)^s, R(t, z) = Im(1 / (t - z)), integrating it from
g^-1.inf to inf gives the cocycle value c_g(t).
"""
from __future__ import annotations

import json
import math

import numpy as np

from .bessel import besselk, besselk_derivative
from .boundary import INF, FunctionEvaluator, Interval, act, positive_power
from .group import inverse
from .hejhal import fundamental_height

_GL_CACHE = {}


def _gauss_legendre(order):
    if order not in _GL_CACHE:
        _GL_CACHE[order] = np.polynomial.legendre.leggauss(order)
    return _GL_CACHE[order]


class HalfPlaneError(ValueError):
    pass


class DecayError(ValueError):
    pass


def _check_upper(z):
    z = np.asarray(z, dtype=complex)
    if np.any(z.imag <= 0):
        raise HalfPlaneError("point not in the upper half plane")
    return z


def poisson_kernel(t, z):
    """R(t, z) = Im(1 / (t - z)) = y / ((t - x)^2 + y^2)."""
    z = _check_upper(z)
    return z.imag / ((t - z.real) ** 2 + z.imag ** 2)


def poisson_dzbar(t, z):
    """d/dzbar R(t, z) = (i/2) / (t - zbar)^2."""
    z = _check_upper(z)
    return 0.5j / (t - np.conj(z)) ** 2


# eigenfunction models ----------------------------------------------------

class EigenfunctionModel:
    """u on the upper half plane with -y^2 (u_xx + u_yy) = s (1 - s) u.

    ``evaluate(z)`` returns (u, u_z, u_zbar) for an array of points.
    ``decays`` marks models that vanish rapidly at every cusp.
    """

    decays = False

    def __init__(self, s):
        self.s = complex(s)

    def evaluate(self, z):
        raise NotImplementedError

    def __call__(self, z):
        return self.evaluate(np.asarray(z, dtype=complex))[0]

    def __add__(self, other):
        return SumModel([self, other], [1.0, 1.0])

    def scaled(self, factor):
        return SumModel([self], [factor])


class PowerModel(EigenfunctionModel):
    """u = y^s."""

    def evaluate(self, z):
        z = _check_upper(z)
        y = z.imag
        u = positive_power(y, self.s)
        uy = self.s * u / y
        return u, -0.5j * uy, 0.5j * uy


class BesselMode(EigenfunctionModel):
    """u = sqrt(y) K_{s-1/2}(2 pi |n| y) e^{2 pi i n x}."""

    decays = True

    def __init__(self, s, n):
        super().__init__(s)
        if n == 0:
            raise ValueError("n must be nonzero")
        self.n = int(n)

    def evaluate(self, z):
        z = _check_upper(z)
        x, y = z.real, z.imag
        nu = self.s - 0.5
        k = 2 * np.pi * abs(self.n)
        K = besselk(nu, k * y)
        dK = besselk_derivative(nu, k * y)
        e = np.exp(2j * np.pi * self.n * x)
        sy = np.sqrt(y)
        u = sy * K * e
        ux = 2j * np.pi * self.n * u
        uy = e * (K / (2 * sy) + sy * k * dK)
        return u, 0.5 * (ux - 1j * uy), 0.5 * (ux + 1j * uy)


class SumModel(EigenfunctionModel):
    def __init__(self, models, weights):
        super().__init__(models[0].s)
        self.models, self.weights = list(models), list(weights)
        self.decays = all(m.decays for m in models)

    def evaluate(self, z):
        parts = [m.evaluate(z) for m in self.models]
        return tuple(sum(w * p[i] for p, w in zip(parts, self.weights)) for i in range(3))


class ZeroModel(EigenfunctionModel):
    decays = True

    def evaluate(self, z):
        z = _check_upper(z)
        zero = np.zeros(z.shape, dtype=complex)
        return zero, zero, zero


class ComposedModel(EigenfunctionModel):
    """u o g for a real Moebius map g of determinant 1."""

    def __init__(self, model, g):
        super().__init__(model.s)
        self.model = model
        self.g = g
        self.decays = model.decays

    def evaluate(self, z):
        a, b, c, d = (float(v) for v in self.g.entries)
        z = _check_upper(z)
        w = (a * z + b) / (c * z + d)
        u, uz, uzb = self.model.evaluate(w)
        dw = 1.0 / (c * z + d) ** 2
        return u, uz * dw, uzb * np.conj(dw)


def fricke_pullback(z, level, max_steps=10000):
    """Map z into the fundamental domain of Gamma_0(level) extended by the Fricke involution.

    Returns (z*, M, flips) with M z = z* for a real matrix M (determinant a
    power of the level) and flips the number of Fricke steps used.
    """
    M = np.eye(2)
    flips = 0
    w = complex(z)
    p = level
    inv_mod = {k: next(j for j in range(1, p) if (k * j + 1) % p == 0) for k in range(1, p)}
    for _ in range(max_steps):
        n = math.floor(w.real)
        if n:
            w -= n
            M = np.array([[1.0, -n], [0.0, 1.0]]) @ M
        best = w.imag * (1 + 1e-14)
        move = None
        for k, kk in inv_mod.items():
            y = w.imag / abs(p * w - k) ** 2
            if y > best:
                best, move = y, np.array([[kk, -(k * kk + 1) // p], [p, -k]], dtype=float)
        for shift in (0, 1):
            y = (w - shift).imag / (p * abs(w - shift) ** 2)
            if y > best:
                best, move = y, np.array([[0.0, -1.0], [p, -p * shift]])
        if move is None:
            return w, M, flips
        if move[0, 0] == 0:
            flips += 1
        w = (move[0, 0] * w + move[0, 1]) / (move[1, 0] * w + move[1, 1])
        M = move @ M
    raise RuntimeError("pullback did not terminate")


class FourierSum(EigenfunctionModel):
    """u = sum_{n != 0} a_n sqrt(y) K_{s-1/2}(2 pi |n| y) e^{2 pi i n x}.

    When ``level`` and ``fricke_sign`` are known the series is only summed
    above the fundamental domain: lower points are first pulled back, using
    u(z) = fricke_sign^flips u(M z) and the chain rule with
    M'(z) = det M / (c z + d)^2.
    """

    decays = True

    def __init__(self, s, coefficients, level=None, fricke_sign=None, min_height=None):
        super().__init__(s)
        self.coefficients = {int(n): complex(a) for n, a in coefficients.items() if a != 0}
        self.level = level
        self.fricke_sign = fricke_sign
        if min_height is None and level is not None:
            min_height = 0.9 * fundamental_height(level)
        self.min_height = min_height

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, str):
            with open(obj) as fh:
                obj = json.load(fh)
        s = complex(obj["s"]["re"], obj["s"]["im"])
        coeffs = {c["n"]: complex(c["a"]["re"], c["a"]["im"]) for c in obj["coefficients"]}
        return cls(s, coeffs, obj.get("level"), obj.get("fricke_sign"))

    def to_json(self):
        out = {
            "s": {"re": self.s.real, "im": self.s.imag},
            "coefficients": [{"n": n, "a": {"re": a.real, "im": a.imag}} for n, a in sorted(self.coefficients.items())],
        }
        if self.level is not None:
            out["level"] = self.level
            out["fricke_sign"] = self.fricke_sign
        return out

    def _series(self, z):
        x, y = z.real, z.imag
        nu = self.s - 0.5
        ns = np.array(sorted({abs(n) for n in self.coefficients}))
        arg = 2 * np.pi * np.outer(y, ns)
        K = besselk(nu, arg.ravel()).reshape(arg.shape)
        dK = besselk_derivative(nu, arg.ravel()).reshape(arg.shape)
        col = {n: i for i, n in enumerate(ns)}
        sy = np.sqrt(y)
        u = np.zeros(z.shape, dtype=complex)
        ux = np.zeros(z.shape, dtype=complex)
        uy = np.zeros(z.shape, dtype=complex)
        for n, a in self.coefficients.items():
            j = col[abs(n)]
            e = a * np.exp(2j * np.pi * n * x)
            term = sy * K[:, j] * e
            u += term
            ux += 2j * np.pi * n * term
            uy += e * (K[:, j] / (2 * sy) + sy * 2 * np.pi * abs(n) * dK[:, j])
        return u, 0.5 * (ux - 1j * uy), 0.5 * (ux + 1j * uy)

    def evaluate(self, z):
        z = _check_upper(z)
        shape = z.shape
        z = z.ravel()
        if not self.coefficients:
            zero = np.zeros(shape, dtype=complex)
            return zero, zero, zero
        if self.level is None:
            return tuple(v.reshape(shape) for v in self._series(z))
        w = np.empty_like(z)
        dM = np.empty_like(z)
        sign = np.empty(z.shape)
        for i, zi in enumerate(z):
            if zi.imag >= self.min_height:
                w[i], dM[i], sign[i] = zi, 1.0, 1.0
                continue
            wi, M, flips = fricke_pullback(zi, self.level)
            det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
            w[i] = wi
            dM[i] = det / (M[1, 0] * zi + M[1, 1]) ** 2
            sign[i] = float(self.fricke_sign) ** flips
        u, uz, uzb = self._series(w)
        return (
            (sign * u).reshape(shape),
            (sign * uz * dM).reshape(shape),
            (sign * uzb * np.conj(dM)).reshape(shape),
        )


def laplacian_residual(model, z, h=1e-3):
    """|-y^2 (u_xx + u_yy) - s(1-s) u| / |u| by a fourth-order finite-difference stencil."""
    z = complex(z)
    offs = np.array([-2, -1, 0, 1, 2]) * h
    wts = np.array([-1, 16, -30, 16, -1]) / (12 * h * h)
    ux = model(z + offs)
    uy = model(z + 1j * offs)
    lap = np.dot(wts, ux) + np.dot(wts, uy)
    u0 = model(np.array([z]))[0]
    s = model.s
    return abs(-z.imag ** 2 * lap - s * (1 - s) * u0) / max(abs(u0), 1e-300)


# paths and integrals -----------------------------------------------------

class PathPiece:
    """A parametrized piece r -> z(r) on [r0, r1]; r0 or r1 may be infinite."""

    def __init__(self, z, dz, r0, r1):
        self.z, self.dz, self.r0, self.r1 = z, dz, float(r0), float(r1)

    def reversed(self):
        return PathPiece(lambda r: self.z(-r), lambda r: -self.dz(-r), -self.r1, -self.r0)

    @property
    def bounded(self):
        return np.isfinite(self.r0) and np.isfinite(self.r1)


class BoundaryPath:
    """Piecewise-differentiable path in the upper half plane, possibly ending at cusps."""

    def __init__(self, pieces):
        self.pieces = list(pieces)

    def reversed(self):
        return BoundaryPath([p.reversed() for p in reversed(self.pieces)])

    def __add__(self, other):
        return BoundaryPath(self.pieces + other.pieces)

    @classmethod
    def segment(cls, z0, z1):
        z0, z1 = complex(z0), complex(z1)
        _check_upper(np.array([z0, z1]))
        return cls([PathPiece(lambda r: z0 + r * (z1 - z0), lambda r: np.full(np.shape(r), z1 - z0), 0.0, 1.0)])

    @classmethod
    def polygon(cls, points, closed=True):
        pts = list(points) + ([points[0]] if closed else [])
        out = cls([])
        for a, b in zip(pts, pts[1:]):
            out = out + cls.segment(a, b)
        return out

    @classmethod
    def vertical(cls, x, y0, y1):
        """x + i y for y from y0 to y1, parametrized by log y; y0 = 0 or y1 = inf reach the boundary."""
        x = float(x)
        r0 = -np.inf if y0 == 0 else math.log(y0)
        r1 = np.inf if y1 in (np.inf, INF) else math.log(y1)
        piece = PathPiece(lambda r: x + 1j * np.exp(r), lambda r: 1j * np.exp(r), min(r0, r1), max(r0, r1))
        if r0 > r1:
            piece = PathPiece(lambda r: x + 1j * np.exp(-r), lambda r: -1j * np.exp(-r), -r0, -r1)
        return cls([piece])

    @classmethod
    def cusp_to_infinity(cls, a):
        """The vertical geodesic from the real cusp a up to infinity."""
        return cls.vertical(a, 0, np.inf)


def _kernel_terms(s, t, z):
    """v = R(t,z)^s and v_zbar for t an array (or INF: the limit with |t|^(2s))."""
    if t is INF:
        y = z.imag[:, None]
        v = positive_power(y, s)
        return v, s * v / y * 0.5j
    t = np.atleast_1d(np.asarray(t, dtype=float))[None, :]
    zz = z[:, None]
    R = zz.imag / ((t - zz.real) ** 2 + zz.imag ** 2)
    v = positive_power(R, s)
    return v, s * v / R * 0.5j / (t - np.conj(zz)) ** 2


def green_form_pullback(u, s, t, path_piece, r):
    """[u, R(t,.)^s] pulled back along a piece: u_z v z'(r) + u v_zbar conj(z'(r))."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    z = np.atleast_1d(path_piece.z(r)).astype(complex)
    dz = np.atleast_1d(path_piece.dz(r)).astype(complex)
    _check_upper(z)
    uu, uz, _ = u.evaluate(z)
    v, vzb = _kernel_terms(complex(s), t, z)
    return uz[:, None] * v * dz[:, None] + uu[:, None] * vzb * np.conj(dz)[:, None]


def _panel_rule(f, a, b, panels, order):
    x, w = _gauss_legendre(order)
    edges = np.linspace(a, b, panels + 1)
    h = np.diff(edges) / 2
    mid = (edges[:-1] + edges[1:]) / 2
    nodes = (mid[:, None] + h[:, None] * x[None, :]).ravel()
    weights = (h[:, None] * w[None, :]).ravel()
    return weights @ f(nodes)


def _truncate(f, r_ref, direction, tol, step=0.5, max_steps=400):
    """March from r_ref until |f| stays below tol (relative to the largest value seen) for 4 steps."""
    peak = float(np.max(np.abs(f(np.array([r_ref])))))
    r = r_ref
    quiet = 0
    for _ in range(max_steps):
        r += direction * step
        val = float(np.max(np.abs(f(np.array([r])))))
        peak = max(peak, val)
        quiet = quiet + 1 if val < tol * max(peak, 1e-300) else 0
        if quiet >= 4:
            return r
    raise DecayError("integrand did not decay toward the cusp")


def _finite_reference(piece):
    lo, hi = piece.r0, piece.r1
    if np.isfinite(lo) and np.isfinite(hi):
        return 0.5 * (lo + hi)
    if np.isfinite(lo):
        return lo
    if np.isfinite(hi):
        return hi
    return 0.0


def path_integral(u, s, t, path, tol=1e-12, order=16, max_panels=4096, return_info=False):
    """Integral of [u, R(t,.)^s] along the path, for a scalar or array of t.

    Cuspidal (infinite-parameter) ends are truncated where the integrand falls
    below tol relative to its peak, which needs a decaying model.  Panels are
    doubled until two successive composite rules agree (Richardson check).
    """
    scalar = t is not INF and np.ndim(t) == 0
    nt = 1 if t is INF else np.atleast_1d(t).size
    total = np.zeros(nt, dtype=complex)
    worst = 0.0
    for piece in path.pieces:
        f = lambda r, piece=piece: green_form_pullback(u, s, t, piece, r)
        a, b = piece.r0, piece.r1
        if not piece.bounded:
            if not u.decays:
                raise DecayError("a non-decaying model cannot be integrated into a cusp")
            ref = _finite_reference(piece)
            if not np.isfinite(a):
                a = _truncate(f, ref, -1, tol)
            if not np.isfinite(b):
                b = _truncate(f, ref, +1, tol)
        panels = max(4, int(math.ceil(abs(b - a) / 0.5)))
        prev = _panel_rule(f, a, b, panels, order)
        while True:
            panels *= 2
            cur = _panel_rule(f, a, b, panels, order)
            err = float(np.max(np.abs(cur - prev)))
            scale = max(1.0, float(np.max(np.abs(cur))))
            if err <= tol * scale or panels >= max_panels:
                break
            prev = cur
        worst = max(worst, err)
        total += cur
    out = total[0] if scalar or t is INF else total
    return (out, worst) if return_info else out


def cocycle_integral(u, s, g, tol=1e-12, order=16):
    """c_g(t) = int_{g^-1.inf}^{inf} [u, R(t,.)^s] as a FunctionEvaluator on R.

    The value at INF is the decay-normalized limit lim |t|^(2s) c_g(t).
    """
    if not u.decays:
        raise DecayError("the cocycle integral needs a model decaying at the cusps")
    start = act(inverse(g), INF)
    if start is INF:
        return FunctionEvaluator.constant(0.0, Interval.real_line(), 0.0)
    path = BoundaryPath.cusp_to_infinity(float(start))

    def func(t):
        return path_integral(u, s, np.asarray(t, dtype=float), path, tol, order)

    inf_val = path_integral(u, s, INF, path, tol, order)
    return FunctionEvaluator(func, Interval.real_line(), inf_val)


def tau_on_integral(g, s, u, path, t, tol=1e-12):
    """tau_s(g) applied to t -> int_path [u, R(t,.)^s], evaluated at t."""
    from .boundary import tau_apply

    phi = FunctionEvaluator(lambda x: path_integral(u, s, x, path, tol))
    return tau_apply(g, s, phi, t)


def mobius_path(path, g, samples=None):
    """Straight segment between the images of the end points of a bounded path under g."""
    first, last = path.pieces[0], path.pieces[-1]
    z0 = complex(first.z(np.array([first.r0]))[0])
    z1 = complex(last.z(np.array([last.r1]))[0])
    a, b, c, d = (float(v) for v in g.entries)
    w0 = (a * z0 + b) / (c * z0 + d)
    w1 = (a * z1 + b) / (c * z1 + d)
    return BoundaryPath.segment(w0, w1)
