import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hecke_transfer.boundary import INF, DomainError, FunctionEvaluator
from hecke_transfer.spaces import (
    SampledFunctionVector,
    assemble_matrix,
    assemble_operator,
    barycentric_matrix,
    cgl_nodes,
    chart_for,
    sample,
    sheet_charts,
)
from hecke_transfer.transfer import apply_transfer_evaluators, build_transfer


def test_chart_examples():
    ch = chart_for(0, 3)
    assert ch.x(np.array([0.0]))[0] == pytest.approx(1.0)
    assert ch.x(np.array([-1.0]))[0] == pytest.approx(0.0)
    ch = chart_for(3, 3)
    assert ch.x(np.array([-1.0]))[0] == pytest.approx(0.0)
    assert ch.x(np.array([1 - 1e-9]))[0] < -1e8
    with pytest.raises(ValueError):
        chart_for(4, 3)


@pytest.mark.parametrize("k", [0, 2, 5])
def test_chart_inverse(k):
    ch = chart_for(k, 5, 0.2)
    u = np.linspace(-1, 0.99, 50)
    assert np.allclose(ch.u(ch.x(u)), u, atol=1e-13)
    assert np.all(np.diff(ch.x(u)) * (1 if k < 5 else -1) > 0)


def test_constant_function():
    ch = sheet_charts(3, 1.0)
    # at s = 0 the decay-normalized value at infinity is the value itself
    one = [FunctionEvaluator.constant(1.0, c.interval, 1.0) for c in ch]
    v = sample(one, 24, 0.0, charts=ch, p=3, frame="raw")
    for k in range(3):
        assert np.allclose(v.eval(np.array([0.5 + k, 7.0, 100.0]), k), 1.0)


def test_off_node_accuracy():
    ch = [chart_for(0, 3, 1.0)]
    phi = FunctionEvaluator(lambda x: 1 / (1 + x**2), ch[0].interval, 1.0)
    v = sample([phi], 32, 1.0, charts=ch)
    x = np.linspace(0.01, 30, 400)
    assert np.max(np.abs(v.eval(x, 0) - phi(x))) < 1e-10
    assert v.eval(INF, 0) == pytest.approx(1.0)


def test_eval_outside_closure():
    v = sample([FunctionEvaluator.constant(1.0, chart_for(0, 3).interval, 0.0)], 16, 0, charts=[chart_for(0, 3)])
    with pytest.raises(DomainError):
        v.eval(-0.5, 0)


@settings(max_examples=50, deadline=None)
@given(st.integers(8, 64), st.integers(0, 100))
def test_polynomials_are_reproduced(N, seed):
    rng = np.random.default_rng(seed)
    u, w = cgl_nodes(N)
    c = rng.normal(size=N)
    vals = np.polynomial.chebyshev.chebval(u, c)
    v = rng.uniform(-1, 1, 37)
    exact = np.polynomial.chebyshev.chebval(v, c)
    assert np.max(np.abs(barycentric_matrix(u, w, v) @ vals - exact)) <= 1e-13 * max(1, np.abs(c).sum())
    assert np.allclose(barycentric_matrix(u, w, u) @ vals, vals, atol=1e-13 * np.abs(vals).max())


def test_resampling_is_idempotent():
    rng = np.random.default_rng(3)
    ch = sheet_charts(3)
    v = SampledFunctionVector(rng.normal(size=(4, 24)) + 1j * rng.normal(size=(4, 24)), 0.5 + 2j, ch, 3)
    w = sample(v.evaluators(), 24, v.s, charts=ch, p=3)
    assert np.max(np.abs(w.values - v.values)) < 1e-13 * v.sup_norm()


def test_json_roundtrip():
    ch = sheet_charts(2)
    v = SampledFunctionVector(np.arange(24).reshape(3, 8) * (1 + 1j), 0.5 + 1j, ch, 2)
    w = SampledFunctionVector.from_json(v.to_json())
    assert np.array_equal(w.values, v.values) and w.s == v.s and w.p == 2


def chart_entire(rng, s, charts):
    """Components whose chart-frame representative is entire in u."""
    out = []
    for ch in charts:
        c = rng.normal(size=6) + 1j * rng.normal(size=6)
        al = rng.uniform(-1, 1)

        def g(u, c=c, al=al):
            return np.polynomial.chebyshev.chebval(u, c) + np.exp(al * u)

        def f(x, ch=ch, g=g):
            u = ch.u(x)
            return g(u) * np.exp(-s * np.log(ch.jacobian(u)))

        out.append(FunctionEvaluator(f, ch.interval, complex(np.exp(s * np.log(2 * ch.scale)) * g(1.0))))
    return out


@pytest.mark.parametrize("p", [2, 3, 5, 7])
@pytest.mark.parametrize("s", [1.0, 0.5 + 5j])
@pytest.mark.parametrize("scale", [1.0, None])
def test_matrix_matches_pointwise(p, s, scale):
    rng = np.random.default_rng(p)
    N = 40
    op = build_transfer(p)
    ch = sheet_charts(p, scale)
    f = chart_entire(rng, s, ch)
    v = sample(f, N, s, charts=ch, p=p)
    L = assemble_operator(op, s, N, ch)
    w = sample(apply_transfer_evaluators(op, s, f), N, s, charts=ch, p=p)
    assert np.max(np.abs(L @ v.flat() - w.flat())) <= 1e-9 * v.sup_norm()


def test_s_zero_row_counts():
    N = 16
    L = assemble_matrix(5, 0, N)
    out = (L @ np.ones(6 * N)).reshape(6, N)
    counts = [len(build_transfer(5).row(r)) for r in range(6)]
    for r in range(6):
        assert np.allclose(out[r], counts[r])


def test_matrix_size_and_minimum_grid():
    assert assemble_matrix(3, 0.5 + 1j, 8).shape == (32, 32)
    with pytest.raises(ValueError):
        assemble_matrix(3, 0.5, 7)


def test_assembly_is_deterministic():
    a = assemble_matrix(5, 0.5 + 3j, 24)
    b = assemble_matrix(5, 0.5 + 3j, 24)
    assert np.array_equal(a, b)


def test_spectral_tail_of_entire_data():
    rng = np.random.default_rng(0)
    ch = sheet_charts(3)
    v = sample(chart_entire(rng, 0.5 + 1j, ch), 48, 0.5 + 1j, charts=ch, p=3)
    assert v.spectral_tail() <= 1e-8
