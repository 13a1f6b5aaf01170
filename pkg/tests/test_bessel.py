import numpy as np
import pytest

mpmath = pytest.importorskip("mpmath")

from hecke_transfer.bessel import besselk, besselk_derivative

ORDERS = [0.0, 0.5, 1.3, 0.3 + 2j, 4.3880535632j, 9.5j, 0.2 + 20j]
X = np.array([0.1, 0.37, 1.0, 2.5, 7.0, 19.0, 60.0])


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


@pytest.mark.parametrize("nu", ORDERS)
def test_refinement_oracle(nu):
    a = besselk(nu, X)
    b = besselk(nu, X, refine=2)
    assert np.max(np.abs(a - b) / np.abs(b)) <= 1e-10


@pytest.mark.parametrize("nu", ORDERS)
def test_against_mpmath(nu):
    vals = besselk(nu, X)
    ders = besselk_derivative(nu, X)
    for x, v, d in zip(X, vals, ders):
        ref = complex(mpmath.besselk(nu, x))
        dref = complex(mpmath.diff(lambda y: mpmath.besselk(nu, y), x))
        # K_{iR}(x) is exponentially small for x << R; measure against the envelope
        scale = max(abs(ref), np.exp(-np.pi * abs(complex(nu).imag) / 2) * 1e-6)
        assert abs(v - ref) <= 1e-10 * scale
        dscale = max(abs(dref), np.exp(-np.pi * abs(complex(nu).imag) / 2) * 1e-6)
        assert abs(d - dref) <= 1e-9 * dscale


def test_half_order_closed_form():
    x = np.linspace(0.1, 30, 50)
    assert np.allclose(besselk(0.5, x), np.sqrt(np.pi / (2 * x)) * np.exp(-x), rtol=1e-12, atol=0)


def test_real_for_imaginary_order():
    assert np.max(np.abs(besselk(4.2j, X).imag)) <= 1e-12 * np.max(np.abs(besselk(4.2j, X)))


def test_scalar_and_domain():
    assert np.ndim(besselk(1.0, 2.0)) == 0
    with pytest.raises(ValueError):
        besselk(1.0, np.array([1.0, 0.0]))
