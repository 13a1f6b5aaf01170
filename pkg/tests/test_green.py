import numpy as np
import pytest

from hecke_transfer.boundary import INF, act, tau_apply
from hecke_transfer.cohomology import cocycle_from_period
from hecke_transfer.green import (
    BesselMode,
    BoundaryPath,
    ComposedModel,
    DecayError,
    FourierSum,
    HalfPlaneError,
    PowerModel,
    ZeroModel,
    cocycle_integral,
    green_form_pullback,
    laplacian_residual,
    mobius_path,
    path_integral,
    poisson_dzbar,
    poisson_kernel,
    tau_on_integral,
)
from hecke_transfer.group import T, generators, inverse, make_element
from hecke_transfer.hejhal import fourier_sum_json

from conftest import T3, T5

S = complex(0.5, T3)


@pytest.fixture(scope="module")
def cusp_form5():
    # the p = 5 form at T5 lies in the Fricke-odd, x-odd class
    return FourierSum.from_json(fourier_sum_json(5, T5, -1, 1))


def _models():
    return [PowerModel(S), BesselMode(S, 1), BesselMode(S, -3), PowerModel(0.3 + 2j),
            PowerModel(S) + BesselMode(S, 2).scaled(0.5j)]


def test_poisson_kernel_examples():
    assert poisson_kernel(0, 1j) == pytest.approx(1.0)
    assert poisson_kernel(1, 1j) == pytest.approx(0.5)
    with pytest.raises(HalfPlaneError):
        poisson_kernel(0, -1j)


def test_poisson_equivariance():
    rng = np.random.default_rng(0)
    g = make_element(1, 0, 1, 1)
    for _ in range(50):
        t = rng.normal()
        z = complex(rng.normal(), rng.uniform(0.1, 2))
        if abs(t + 1) < 0.05:
            continue
        gt, gz = t / (t + 1), z / (z + 1)
        lhs = poisson_kernel(t, z)
        rhs = poisson_kernel(gt, gz) / (t + 1) ** 2
        assert abs(lhs - rhs) <= 1e-12 * abs(lhs)


def test_dzbar_closed_form():
    assert poisson_dzbar(0, 1j) == pytest.approx(-0.5j)
    h = 1e-5
    for t, z in ((0.0, 1j), (0.7, -0.3 + 0.4j), (-2.0, 1.5 + 2j)):
        dx = (poisson_kernel(t, z + h) - poisson_kernel(t, z - h)) / (2 * h)
        dy = (poisson_kernel(t, z + 1j * h) - poisson_kernel(t, z - 1j * h)) / (2 * h)
        assert abs(0.5 * (dx + 1j * dy) - poisson_dzbar(t, z)) <= 1e-8


@pytest.mark.parametrize("model", _models(), ids=lambda m: type(m).__name__)
def test_laplacian(model):
    rng = np.random.default_rng(1)
    for _ in range(5):
        z = complex(rng.uniform(-1, 1), rng.uniform(0.3, 2))
        assert laplacian_residual(model, z) <= 1e-6


def test_laplacian_fourier_sum(cusp_form5):
    rng = np.random.default_rng(2)
    h0 = cusp_form5.min_height
    for _ in range(5):
        z = complex(rng.uniform(-1, 1), rng.uniform(h0 + 0.01, 1.0))
        assert laplacian_residual(cusp_form5, z) <= 1e-6


def test_fourier_sum_invariance(cusp_form5):
    z = np.array([0.13 + 0.21j, 0.41 + 0.08j, -0.3 + 0.6j, 0.05 + 0.03j])
    u = cusp_form5(z)
    for k, g in generators(5).h.items():
        assert np.max(np.abs(ComposedModel(cusp_form5, g)(z) - u)) <= 1e-9 * np.max(np.abs(u))
    assert np.max(np.abs(ComposedModel(cusp_form5, T)(z) - u)) <= 1e-12


def test_fourier_sum_json_roundtrip(cusp_form5, tmp_path):
    import json

    path = tmp_path / "form.json"
    path.write_text(json.dumps(cusp_form5.to_json()))
    v = FourierSum.from_json(str(path))
    z = np.array([0.2 + 0.5j])
    assert v(z)[0] == pytest.approx(cusp_form5(z)[0], rel=1e-14)


def test_zero_and_linearity():
    piece = BoundaryPath.segment(0.1 + 0.5j, 0.7 + 1.1j).pieces[0]
    r = np.linspace(0, 1, 7)
    assert np.all(green_form_pullback(ZeroModel(S), S, 0.3, piece, r) == 0)
    a, b = BesselMode(S, 1), PowerModel(S)
    lhs = green_form_pullback(a + b.scaled(2.0), S, 0.3, piece, r)
    rhs = green_form_pullback(a, S, 0.3, piece, r) + 2 * green_form_pullback(b, S, 0.3, piece, r)
    assert np.allclose(lhs, rhs, rtol=1e-13, atol=0)


def test_reversal():
    path = BoundaryPath.segment(0.1 + 0.5j, 0.7 + 1.1j) + BoundaryPath.segment(0.7 + 1.1j, -0.2 + 0.9j)
    u = BesselMode(S, 1)
    a = path_integral(u, S, 0.4, path)
    b = path_integral(u, S, 0.4, path.reversed())
    assert abs(a + b) <= 1e-12 * abs(a)


def test_quadrature_orders_agree():
    u = BesselMode(S, 1)
    path = BoundaryPath.segment(1 + 0.1j, 1 + 10j)
    a = path_integral(u, S, 0.3, path, order=16)
    b = path_integral(u, S, 0.3, path, order=24)
    assert abs(a - b) <= 1e-8


@pytest.mark.parametrize("model", _models()[:4], ids=lambda m: type(m).__name__)
def test_triangle_loops_close(model):
    rng = np.random.default_rng(3)
    t = np.array([0.3, -2.0, 5.0])
    for _ in range(5):
        pts = [complex(rng.uniform(-1, 1), rng.uniform(0.2, 2)) for _ in range(3)]
        loop = BoundaryPath.polygon(pts)
        val = path_integral(model, model.s, t, loop)
        # scale by perimeter times the integrand size along the loop
        per = sum(abs(b - a) for a, b in zip(pts, pts[1:] + pts[:1]))
        r = np.linspace(0, 1, 21)
        size = max(np.max(np.abs(green_form_pullback(model, model.s, t, p, r))) for p in loop.pieces)
        assert np.max(np.abs(val)) <= 1e-8 * max(per * size, 1e-300)


def test_path_independence():
    u = BesselMode(S, 2)
    a, b = 0.1 + 0.3j, 0.8 + 1.4j
    direct = path_integral(u, S, 0.25, BoundaryPath.segment(a, b))
    detour = path_integral(u, S, 0.25, BoundaryPath.polygon([a, -0.5 + 2j, b], closed=False))
    assert abs(direct - detour) <= 1e-8 * max(1.0, abs(direct))


@pytest.mark.parametrize("model", [BesselMode(S, 1), PowerModel(0.3 + 2j)], ids=["bessel", "power"])
def test_generalized_equivariance(model):
    h = make_element(2, -1, 3, -1)
    seg = BoundaryPath.segment(0.3 + 0.4j, -0.5 + 1.2j)
    t = np.array([0.1, 0.7, -3.0])
    lhs = tau_on_integral(inverse(h), model.s, model, seg, t)
    rhs = path_integral(ComposedModel(model, h), model.s, t, mobius_path(seg, inverse(h)))
    assert np.max(np.abs(lhs - rhs)) <= 1e-7 * np.max(np.abs(lhs))


def test_cusp_endpoints_need_decay():
    with pytest.raises(DecayError):
        path_integral(PowerModel(S), S, 0.3, BoundaryPath.cusp_to_infinity(0.2))
    with pytest.raises(DecayError):
        cocycle_integral(PowerModel(S), S, generators(3).h[1])


def test_cocycle_integral_trivial_cases(cusp_form5):
    c = cocycle_integral(cusp_form5, cusp_form5.s, T)
    assert c(0.3) == 0 and c(INF) == 0
    z = cocycle_integral(BesselMode(S, 1).scaled(0.0), S, generators(3).h[1])
    assert np.all(z(np.array([0.1, 2.0])) == 0)


@pytest.mark.slow
def test_cocycle_integral_is_proportional_to_period_function(cusp_form5, period5):
    f = period5.vector
    c = cocycle_from_period(f)
    gens = generators(5)
    lam = None
    for k in (1, 2):
        ci = cocycle_integral(cusp_form5, f.s, gens.h[k])
        x = np.array([-2.0, k / 5 - 0.1, k / 5 + 0.05, k / 5 + 0.3, 1.5, 4.0])
        ratio = ci(x) / c.values[f"h{k}"](x)
        lam = ratio[0] if lam is None else lam
        assert np.max(np.abs(ratio / lam - 1)) <= 1e-6
        assert abs(ci(INF) / c.values[f"h{k}"](INF) / lam - 1) <= 1e-6


@pytest.mark.slow
def test_cocycle_integral_smooth_at_start(cusp_form5):
    g = generators(5).h[1]
    c = cocycle_integral(cusp_form5, cusp_form5.s, g)
    a = float(act(inverse(g), INF))
    d = 1e-4
    j = np.arange(1, 8)
    one_sided = []
    for xs in (a - j * d, a + j * d):
        P = np.polyfit((xs - a) / d, c(xs), 6)
        one_sided.append([np.polyval(np.polyder(P, m), 0) / d**m for m in range(3)])
    one_sided = np.array(one_sided)
    jump = np.abs(one_sided[0] - one_sided[1]) / np.max(np.abs(one_sided), axis=0)
    assert np.all(jump <= 1e-4)
