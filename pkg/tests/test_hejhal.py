import numpy as np
import pytest

from hecke_transfer.hejhal import (
    HejhalSolver,
    fourier_sum_json,
    fundamental_height,
    hejhal_scan,
    pullback,
)


def test_fundamental_height():
    assert fundamental_height(2) == 0.5
    assert fundamental_height(5) == pytest.approx(np.sqrt(3) / 10)
    with pytest.raises(ValueError):
        fundamental_height(6)


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_pullback_reaches_fundamental_domain(p):
    rng = np.random.default_rng(p)
    y0 = fundamental_height(p)
    for _ in range(30):
        z = complex(rng.uniform(-2, 2), rng.uniform(1e-3, 0.3))
        w, _ = pullback(z, p)
        assert 0 <= w.real < 1
        assert w.imag >= y0 * (1 - 1e-9)


def test_bad_class():
    with pytest.raises(ValueError):
        HejhalSolver(5, fricke_sign=2)


@pytest.mark.parametrize("R,eps,parity", [(3.0283762931, -1, 1), (4.1324042151, 1, 0), (6.8235269954, 1, 0),
                                          (7.5853184014, -1, 1)])
def test_known_forms_level5(R, eps, parity):
    solver = HejhalSolver(5, eps, parity)
    assert np.max(np.abs(solver.mismatch(R))) <= 1e-7
    assert np.max(np.abs(solver.mismatch(R + 0.01))) >= 1e-5


def test_local_search_recovers_form():
    found = HejhalSolver(5, -1, 1).find(3.0, 3.06, step=0.01)
    assert len(found) == 1
    assert abs(found[0][0] - 3.0283762931) <= 1e-8


def test_no_form_in_empty_window():
    assert hejhal_scan(5, 3.5, 3.6, step=0.02) == []


def test_fourier_sum_json_layout():
    js = fourier_sum_json(5, 3.0283762931, -1, 1)
    assert js["s"] == {"re": 0.5, "im": 3.0283762931}
    by_n = {c["n"]: complex(c["a"]["re"], c["a"]["im"]) for c in js["coefficients"]}
    assert by_n[1] == pytest.approx(-0.5j)
    assert by_n[-1] == pytest.approx(0.5j)
    assert js["level"] == 5 and js["fricke_sign"] == -1
