"""Detection of spectral parameters with regular 1-eigenfunctions.

For s = re_s + i t the collocation matrix L_s is stacked with the rows of the
smooth-matching conditions at the cusps k/p (between f_k and
-tau_s(h_k') f_k') and at 0 and infinity (between -f_0 and f_p).  The square
part I - L_s alone is always singular; only the stacked matrix detects
genuine period functions, through its smallest singular value.
"""
from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .group import T, compose, generators, inverse, require_prime
from .spaces import (
    SampledFunctionVector,
    barycentric_matrix,
    cgl_nodes,
    diff_matrix,
    mobius,
    mobius_derivative,
    sheet_charts,
)
from .transfer import build_transfer

GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


class NoInteriorMinimum(ValueError):
    pass


class NoKernelError(RuntimeError):
    pass


class ConfigurationError(ValueError):
    pass


def thread_count():
    try:
        n = int(os.environ.get("HTL_THREADS", "0"))
    except ValueError:
        n = 0
    return n if n > 0 else min(8, os.cpu_count() or 1)


def _translation(x0):
    return np.array([[1.0, float(x0)], [0.0, 1.0]])


def junctions(p):
    """Matching conditions as pairs of sides (component, sign, G).

    A side is the function xi -> sign * |G'(xi)|^s f_comp(G xi) near xi = 0;
    both sides of a junction must share their Taylor jets at 0.
    """
    gens = generators(p)
    out = []
    for k in range(1, p):
        P = _translation(k / p)
        out.append((f"cusp {k}/{p}", (k, 1, P), (gens.kprime[k], -1, gens.h[k].to_array() @ P)))
    P0 = _translation(0.0)
    out.append(("zero", (0, -1, P0), (p, 1, P0)))
    ginv = inverse(compose(gens.h[p - 1], T)).to_array() @ _translation(1.0 / p)
    out.append(("infinity", (0, -1, ginv), (p, 1, ginv)))
    return out


def _taylor_of_mobius(A, m):
    """Taylor coefficients at 0 of xi -> A(xi) - A(0)."""
    a, b, c, d = A.ravel()
    if d == 0:
        raise ConfigurationError("junction falls on a chart singularity")
    geo = (-c / d) ** np.arange(m + 1) / d
    num = np.zeros(m + 1)
    num[0] = b
    if m >= 1:
        num[1] = a
    ser = np.convolve(num, geo)[: m + 1]
    ser[0] = 0.0
    return ser


def _series_power(q, e, m):
    """Taylor coefficients of q(xi)^e for a series q with q[0] > 0."""
    q0 = q[0]
    r = np.asarray(q, dtype=complex) / q0
    out = np.zeros(m + 1, dtype=complex)
    out[0] = 1.0
    for n in range(1, m + 1):
        k = np.arange(1, n + 1)
        out[n] = np.sum((e * k - (n - k)) * r[k] * out[n - k]) / n
    return out * np.exp(e * np.log(q0))


class _Side:
    """s-independent data for one side of a junction."""

    def __init__(self, chart, sign, G, m, u, w, D):
        A = chart.inverse_matrix @ G
        a, b, c, d = A.ravel()
        if abs(d) < 1e-14:
            raise ConfigurationError("junction falls on a chart singularity")
        v0 = b / d
        if v0 < -1 - 1e-12 or v0 > 1 + 1e-12:
            raise ConfigurationError(f"junction point u={v0} outside the chart")
        E = barycentric_matrix(u, w, np.clip(v0, -1, 1))[0]
        dv = _taylor_of_mobius(A, m)
        coef = []
        Dj = np.eye(len(u))
        fact = 1.0
        for j in range(m + 1):
            coef.append((E @ Dj) / fact)
            Dj = D @ Dj
            fact *= j + 1
        comp = np.zeros((m + 1, len(u)))
        pw = np.zeros(m + 1)
        pw[0] = 1.0
        for j in range(m + 1):
            comp += np.outer(pw, coef[j])
            pw = np.convolve(pw, dv)[: m + 1]
        self.composed = comp
        self.sign = sign
        self.det = abs(a * d - b * c)
        self.base = np.zeros(m + 1)
        self.base[0] = abs(d)
        if m >= 1:
            self.base[1] = np.sign(d) * c
        self.m = m

    def rows(self, s):
        w = _series_power(self.base, -2 * s, self.m) * np.exp(s * np.log(self.det))
        full = np.zeros_like(self.composed, dtype=complex)
        for i in range(self.m + 1):
            full[i] = w[i::-1] @ self.composed[: i + 1]
        return self.sign * full


@dataclass
class ConstraintBlock:
    rows: np.ndarray
    labels: list

    @property
    def count(self):
        return self.rows.shape[0]

    def residuals(self, flat):
        return np.abs(self.rows @ flat)


class DiscreteFamily:
    """The collocation family s -> (L_s, C_s) for fixed p, N, m and chart scale.

    Interpolation matrices and jet data do not depend on s, so they are
    computed once and only the power weights are recomputed per s.
    """

    def __init__(self, p, N, m=3, scale=None):
        require_prime(p)
        if N < 8:
            raise ValueError("N must be at least 8")
        if m < 1:
            raise ValueError("matching order m must be at least 1")
        self.p, self.N, self.m = p, N, m
        self.charts = sheet_charts(p, scale)
        self.op = build_transfer(p)
        u, w = cgl_nodes(N)
        self.terms = []
        for (row, col), elements in sorted(self.op.entries.items()):
            for g in elements:
                A = self.charts[col].inverse_matrix @ inverse(g).to_array() @ self.charts[row].matrix
                v = mobius(A, u)
                if np.any(v < -1 - 1e-12) or np.any(v > 1 + 1e-12):
                    raise ConfigurationError(f"term {g!r} leaves its source interval")
                B = barycentric_matrix(u, w, np.clip(v, -1, 1))
                self.terms.append((row, col, np.log(mobius_derivative(A, u)), B))
        D = diff_matrix(u, w)
        self.sides = []
        self.labels = []
        for label, s1, s2 in junctions(p):
            pair = []
            for comp, sign, G in (s1, s2):
                pair.append((comp, _Side(self.charts[comp], sign, G, m, u, w, D)))
            self.sides.append(pair)
            self.labels += [f"{label} order {j}" for j in range(m + 1)]

    @property
    def size(self):
        return (self.p + 1) * self.N

    def matrix(self, s):
        N = self.N
        L = np.zeros((self.size, self.size), dtype=complex)
        for row, col, logw, B in self.terms:
            L[row * N:(row + 1) * N, col * N:(col + 1) * N] += np.exp(s * logw)[:, None] * B
        return L

    def constraints(self, s):
        N, m = self.N, self.m
        blocks = []
        for (c1, side1), (c2, side2) in self.sides:
            M = np.zeros((m + 1, self.size), dtype=complex)
            M[:, c1 * N:(c1 + 1) * N] += side1.rows(s)
            M[:, c2 * N:(c2 + 1) * N] -= side2.rows(s)
            blocks.append(M)
        C = np.vstack(blocks)
        C /= np.linalg.norm(C, axis=1, keepdims=True)
        return ConstraintBlock(C, list(self.labels))

    def stacked(self, s):
        s = complex(s)
        return np.vstack([np.eye(self.size) - self.matrix(s), self.constraints(s).rows])

    def sigma_min(self, s):
        return float(np.linalg.svd(self.stacked(s), compute_uv=False)[-1])


def build_constraints(p, s, N, m=3, scale=None):
    return DiscreteFamily(p, N, m, scale).constraints(complex(s))


def stacked_matrix(p, s, N, m=3, scale=None):
    return DiscreteFamily(p, N, m, scale).stacked(s)


def sigma_min(p, s, N, m=3, scale=None):
    return DiscreteFamily(p, N, m, scale).sigma_min(s)


def golden_section(f, a, b, tol=1e-10, max_iter=500):
    """Minimize f on [a, b] by golden-section search; returns (x, f(x)).

    Raises NoInteriorMinimum when the minimum sits at an end of the bracket.
    """
    if b < a:
        a, b = b, a
    fa, fb = f(a), f(b)
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    lo, hi = a, b
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        if fc <= fd:
            hi, d, fd = d, c, fc
            c = hi - GOLDEN * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + GOLDEN * (hi - lo)
            fd = f(d)
    x, fx = (c, fc) if fc <= fd else (d, fd)
    if fx >= min(fa, fb) or (lo == a and fa <= fx) or (hi == b and fb <= fx):
        raise NoInteriorMinimum(f"no interior minimum in [{a}, {b}]")
    return x, fx


def refine(p, N, m, t0, tol=1e-13, re_s=0.5, halfwidth=None, scale=None, family=None):
    """Golden-section refinement of a sigma_min dip around t0."""
    fam = family or DiscreteFamily(p, N, m, scale)
    hw = 0.05 if halfwidth is None else halfwidth
    return golden_section(lambda t: fam.sigma_min(complex(re_s, t)), t0 - hw, t0 + hw, tol)


@dataclass
class Candidate:
    t: float
    sigma_min: float
    t_confirm: float = float("nan")
    sigma_confirm: float = float("nan")
    shift: float = float("nan")
    deepened: bool = False
    residuals: dict = field(default_factory=dict)

    def to_json(self):
        return {
            "t": self.t,
            "sigma_min": self.sigma_min,
            "confirm": {"t": self.t_confirm, "sigma_min": self.sigma_confirm, "shift": self.shift, "deepened": self.deepened},
            "residuals": self.residuals,
        }


@dataclass
class ScanResult:
    p: int
    N: int
    m: int
    re_s: float
    N_confirm: int
    t: np.ndarray
    sigma: np.ndarray
    candidates: list

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "sigma_min", "N", "m"])
        for t, s in zip(self.t, self.sigma):
            w.writerow([f"{t:.12g}", f"{s:.10e}", self.N, self.m])
        return buf.getvalue()

    def to_json(self):
        return {
            "p": self.p,
            "N": self.N,
            "m": self.m,
            "re_s": self.re_s,
            "N_confirm": self.N_confirm,
            "candidates": [c.to_json() for c in self.candidates],
        }

    def candidate_ts(self):
        return np.array([c.t for c in self.candidates])


def preflight(N, tail=1e-8):
    """Check that entire data is resolved at N (Chebyshev tail below `tail`)."""
    u, _ = cgl_nodes(N)
    from .spaces import chebyshev_coefficients

    c = np.abs(chebyshev_coefficients(np.exp(u) * np.cos(2 * u)))
    worst = c[int(round(0.75 * N)):].max() / c.max()
    if worst > tail:
        raise ConfigurationError(f"N={N} does not resolve entire test data (tail {worst:.1e})")
    return worst


def _local_minima(sigma):
    idx = []
    for i in range(1, len(sigma) - 1):
        if sigma[i] < sigma[i - 1] and sigma[i] <= sigma[i + 1]:
            idx.append(i)
    return idx


def scan_line(p, N, m, re_s, t_lo, t_hi, steps, N_confirm=None, depth=1e-4, window=20,
              tol=1e-13, scale=None, threads=None, confirm=True, extract=True):
    """sigma_min over s = re_s + i t on a uniform t grid, with refined dips.

    A grid local minimum becomes a candidate when its refined sigma_min is at
    least four orders (``depth``) below the median of the grid values in a
    window around it.  Candidates are then re-refined at N_confirm.
    """
    if not 0 < re_s < 1:
        raise ValueError("re_s must lie strictly between 0 and 1")
    if steps < 1 or not t_hi > t_lo:
        raise ValueError("need t_hi > t_lo and steps >= 1")
    preflight(N)
    fam = DiscreteFamily(p, N, m, scale)
    t = t_lo + (t_hi - t_lo) * np.arange(steps + 1) / steps
    workers = threads or thread_count()

    def one(tt):
        try:
            return fam.sigma_min(complex(re_s, tt))
        except Exception as exc:
            raise RuntimeError(f"assembly failed at s={complex(re_s, tt)}: {exc}") from exc

    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            sigma = np.array(list(ex.map(one, t)))
    else:
        sigma = np.array([one(tt) for tt in t])
    N_confirm = N_confirm or N + 16
    fam2 = DiscreteFamily(p, N_confirm, m, scale) if confirm else None

    def examine(i):
        lo_i, hi_i = max(0, i - window), min(len(t), i + window + 1)
        med = float(np.median(sigma[lo_i:hi_i]))
        try:
            tr, sr = golden_section(lambda x: fam.sigma_min(complex(re_s, x)), t[i - 1], t[i + 1], tol)
        except NoInteriorMinimum:
            return None
        if sr > depth * med:
            return None
        cand = Candidate(t=float(tr), sigma_min=float(sr))
        if fam2 is not None:
            hw = 1e-3
            try:
                t2, s2 = golden_section(lambda x: fam2.sigma_min(complex(re_s, x)), tr - hw, tr + hw, tol)
            except NoInteriorMinimum:
                t2, s2 = float("nan"), float("nan")
            cand.t_confirm, cand.sigma_confirm = float(t2), float(s2)
            cand.shift = abs(t2 - tr)
            cand.deepened = bool(s2 <= sr)
        if extract:
            try:
                pf = extract_period_function(p, complex(re_s, cand.t_confirm if fam2 is not None else cand.t),
                                             N_confirm if fam2 is not None else N, m, scale=scale,
                                             family=fam2 if fam2 is not None else fam)
                cand.residuals = {"eigen": pf.eigen_residual, "constraints": pf.constraint_residual,
                                  "offnode": pf.offnode_residual}
            except NoKernelError:
                cand.residuals = {}
        return cand

    mins = _local_minima(sigma)
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            found = list(ex.map(examine, mins))
    else:
        found = [examine(i) for i in mins]
    cands = [c for c in found if c is not None]
    return ScanResult(p, N, m, re_s, N_confirm, t, sigma, cands)


@dataclass
class PeriodFunctionResult:
    vector: SampledFunctionVector
    sigma_min: float
    stack_norm: float
    eigen_residual: float
    constraint_residual: float
    offnode_residual: float
    singular_values: np.ndarray
    kernel: list
    unit_vector: np.ndarray

    def report(self):
        return {
            "sigma_min": self.sigma_min,
            "stack_norm": self.stack_norm,
            "eigen_residual": self.eigen_residual,
            "constraint_residual": self.constraint_residual,
            "offnode_residual": self.offnode_residual,
            "near_kernel_dimension": len(self.kernel),
            "smallest_singular_values": [float(x) for x in self.singular_values[-4:][::-1]],
        }


def _normalize(v):
    i = int(np.argmax(np.abs(v)))
    return v * (abs(v[i]) / v[i]) / abs(v[i])


def extract_period_function(p, s, N, m=3, scale=None, family=None, threshold=1e-8, kernel_ratio=1e3):
    """Near-kernel vector of the stacked system at s, normalized to unit sup-norm.

    Raises NoKernelError when sigma_min / ||stack|| exceeds `threshold`.
    The near-kernel basis holds every right singular vector whose singular
    value is within `kernel_ratio` of the smallest one and below threshold.
    """
    from .transfer import pointwise_residual

    s = complex(s)
    fam = family or DiscreteFamily(p, N, m, scale)
    A = fam.stacked(s)
    U, S, Vh = np.linalg.svd(A, full_matrices=False)
    norm = float(S[0])
    smin = float(S[-1])
    if smin / norm > threshold:
        raise NoKernelError(f"no kernel detected at s={s}: sigma_min={smin:.2e}")
    cut = max(smin * kernel_ratio, 0.0)
    kernel = [Vh[j].conj() for j in range(len(S)) if S[j] <= cut and S[j] / norm <= threshold]
    v = Vh[-1].conj()
    f = _normalize(v)
    vec = SampledFunctionVector(f.reshape(fam.p + 1, fam.N), s, fam.charts, fam.p)
    L = fam.matrix(s)
    C = fam.constraints(s).rows
    eig = float(np.max(np.abs(f - L @ f)))
    con = float(np.max(np.abs(C @ f)))
    off = pointwise_residual(fam.op, s, vec.evaluators(), fam.charts)
    return PeriodFunctionResult(vec, smin, norm, eig, con, off, S, kernel, v)


def candidates_json(result):
    return json.dumps(result.to_json(), indent=2, sort_keys=True)
