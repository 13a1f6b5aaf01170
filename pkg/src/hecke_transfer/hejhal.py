"""Desk-scale Hejhal collocation solver for Maass cusp forms on Gamma_0(p).

This is an independent check on the transfer-operator search: it shares no
code with the operator machinery beyond the Bessel routine.  Forms are split
by the Fricke involution W: z -> -1/(p z) (sign eps) and by x -> -x parity,
so each class has an expansion

    u(x + iy) = sum_{n >= 1} c_n sqrt(y) K_{iR}(2 pi n y) cs(2 pi n x),

with cs = cos (even) or sin (odd).  Point-pairing through the fundamental
domain of the group generated by Gamma_0(p) and W gives a linear system in
the c_n.  With c_1 = 1 fixed, solving it at two sample heights yields two
coefficient vectors that agree only when R is a spectral parameter.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .bessel import besselk
from .group import kprime, require_prime


def fundamental_height(p):
    """Lowest height of the fundamental domain of Gamma_0(p) extended by W."""
    require_prime(p)
    if p == 2:
        return 0.5
    if p == 3:
        return 1.0 / (2.0 * math.sqrt(3.0))
    return math.sqrt(3.0) / (2.0 * p)


def pullback(z, p, max_steps=10000):
    """Move z greedily upward by T, h_k and W; return (z*, number of W steps)."""
    flips = 0
    hs = [(k, kprime(k, p)) for k in range(1, p)]
    for _ in range(max_steps):
        z = complex(z.real - math.floor(z.real), z.imag)
        best_y = z.imag * (1 + 1e-14)
        move = None
        for k, kk in hs:
            y = z.imag / abs(p * z - k) ** 2
            if y > best_y:
                best_y, move = y, ("h", k, kk)
        for shift in (0, 1):
            w = z - shift
            y = w.imag / (p * abs(w) ** 2)
            if y > best_y:
                best_y, move = y, ("W", shift)
        if move is None:
            return z, flips
        if move[0] == "h":
            _, k, kk = move
            z = (kk * z - (k * kk + 1) // p) / (p * z - k)
        else:
            z = -1.0 / (p * (z - move[1]))
            flips += 1
    raise RuntimeError("pullback did not terminate")


@dataclass
class HejhalSolver:
    p: int
    fricke_sign: int = 1
    parity: int = 0
    digits: float = 36.0
    margin: int = 8
    heights: tuple = field(default=None)

    def __post_init__(self):
        require_prime(self.p)
        if self.fricke_sign not in (1, -1) or self.parity not in (0, 1):
            raise ValueError("fricke_sign must be +-1 and parity 0 (even) or 1 (odd)")
        y0 = fundamental_height(self.p)
        self.terms = int(math.ceil(self.digits / (2 * math.pi * y0)))
        self.points = self.terms + self.margin
        if self.heights is None:
            self.heights = (0.9 * y0, 0.75 * y0)
        self._pulled = {Y: self._pull(Y) for Y in self.heights}

    def _pull(self, Y):
        Q = self.points
        m = np.arange(1 - Q, Q + 1)
        xm = (m - 0.5) / (2 * Q)
        pts = [pullback(complex(x, Y), self.p) for x in xm]
        xs = np.array([z.real for z, _ in pts])
        ys = np.array([z.imag for z, _ in pts])
        sg = np.array([float(self.fricke_sign) ** n for _, n in pts])
        return xm, xs, ys, sg

    def _cs(self, arg):
        return np.cos(arg) if self.parity == 0 else np.sin(arg)

    def system(self, R, Y):
        """Row-scaled matrix V with V c = 0 for the coefficients of a form."""
        xm, xs, ys, sg = self._pulled[Y]
        M, Q = self.terms, self.points
        n = np.arange(1, M + 1)
        scale = math.exp(math.pi * R / 2)
        kd = math.sqrt(Y) * besselk(1j * R, 2 * np.pi * n * Y).real * scale
        kst = besselk(1j * R, (2 * np.pi * np.outer(ys, n)).ravel()).real.reshape(len(ys), M)
        kst *= np.sqrt(ys)[:, None] * scale
        B = sg[:, None] * kst * self._cs(2 * np.pi * np.outer(xs, n))
        C = self._cs(2 * np.pi * np.outer(n, xm)) / Q
        V = np.diag(kd) - C @ B
        return V / np.abs(kd)[:, None]

    def _solve(self, R, Y):
        V = self.system(R, Y)
        A = V[1:, 1:]
        sign = np.linalg.slogdet(A)[0]
        try:
            c = np.linalg.solve(A, -V[1:, 0])
        except np.linalg.LinAlgError:
            return np.full(self.terms, np.nan), 0.0
        return np.concatenate([[1.0], c]), sign

    def coefficients(self, R, Y=None):
        """c_1..c_M with c_1 = 1; NaN when the reduced system is singular."""
        return self._solve(R, self.heights[0] if Y is None else Y)[0]

    def mismatch(self, R, count=3):
        """Differences of c_2..c_{count+1} between the two sample heights."""
        return self._signed_mismatch(R, count)[0]

    def _signed_mismatch(self, R, count=3):
        c1, s1 = self._solve(R, self.heights[0])
        c2, s2 = self._solve(R, self.heights[1])
        d = c1[1:count + 1] - c2[1:count + 1]
        return d, d * s1 * s2

    def find(self, r_lo, r_hi, step=0.01, accept=1e-5):
        """Spectral parameters R in [r_lo, r_hi] for this symmetry class.

        Sign changes of each mismatch component are bracketed separately,
        since a near-double root can hide a form from a single component.
        """
        grid = np.arange(r_lo, r_hi + step / 2, step)
        # Delta times the determinant signs of both reduced systems changes
        # sign at roots only: at a pole Delta and one determinant flip together
        vals = np.array([self._signed_mismatch(R)[1] for R in grid])
        found = []
        for j in range(vals.shape[1]):
            for i in range(len(grid) - 1):
                a, b = vals[i, j], vals[i + 1, j]
                if not (np.isfinite(a) and np.isfinite(b)) or np.sign(a) == np.sign(b):
                    continue
                try:
                    r = brentq(lambda R: self._signed_mismatch(R)[1][j], grid[i], grid[i + 1], xtol=1e-12)
                except ValueError:
                    # singular reduced system inside the bracket: a pole, not a root
                    continue
                err = float(np.max(np.abs(self.mismatch(r))))
                if err < accept and all(abs(r - q) > 1e-7 for q, _ in found):
                    found.append((float(r), err))
        return sorted(found)


@dataclass(frozen=True)
class Eigenvalue:
    R: float
    fricke_sign: int
    parity: int
    mismatch: float


def hejhal_scan(p, r_lo, r_hi, step=0.01, accept=1e-5):
    """All spectral parameters in [r_lo, r_hi] over the four symmetry classes, sorted."""
    out = []
    for eps in (1, -1):
        for parity in (0, 1):
            solver = HejhalSolver(p, eps, parity)
            for R, err in solver.find(r_lo, r_hi, step, accept):
                out.append(Eigenvalue(R, eps, parity, err))
    return sorted(out, key=lambda e: e.R)


def fourier_sum_json(p, R, fricke_sign, parity):
    """Coefficients a_n (n = +-1..+-M) of sum a_n sqrt(y) K_{iR}(2 pi |n| y) e(n x).

    The even class has a_{-n} = a_n = c_n / 2, the odd class a_{+-n} = +-c_n / (2i).
    """
    solver = HejhalSolver(p, fricke_sign, parity)
    c = solver.coefficients(R)
    coeffs = []
    for n, cn in enumerate(c, start=1):
        a = cn / 2 if parity == 0 else cn / 2j
        b = a if parity == 0 else -a
        coeffs.append({"n": n, "a": {"re": float(np.real(a)), "im": float(np.imag(a))}})
        coeffs.append({"n": -n, "a": {"re": float(np.real(b)), "im": float(np.imag(b))}})
    return {
        "s": {"re": 0.5, "im": float(R)},
        "coefficients": coeffs,
        "level": p,
        "fricke_sign": fricke_sign,
        "parity": parity,
    }


def write_fourier_sum(path, p, R, fricke_sign, parity):
    with open(path, "w") as fh:
        json.dump(fourier_sum_json(p, R, fricke_sign, parity), fh, indent=1)
