import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hecke_transfer.group import (
    IDENTITY,
    T,
    DeterminantError,
    GroupElement,
    NotPrimeError,
    check_generators,
    check_identities,
    check_relators,
    compose,
    generators,
    inverse,
    involution_relators,
    is_prime,
    kprime,
    make_element,
    parabolic_element,
    triple_relators,
)

PRIMES = [q for q in range(2, 98) if is_prime(q)]


def test_make_element_examples():
    assert make_element(1, 1, 0, 1) == T
    assert make_element(-1, 0, 0, -1) == IDENTITY
    with pytest.raises(DeterminantError, match="determinant=2"):
        make_element(1, 0, 0, 2)


def test_compose_examples():
    assert compose(T, T) == make_element(1, 2, 0, 1)
    g3 = generators(3)
    assert compose(g3.h[1], g3.h[2]) == IDENTITY
    g5 = generators(5)
    assert compose(g5.h[4], g5.h[3]) == g5.h[2]


def test_inverse_examples():
    assert inverse(T) == make_element(1, -1, 0, 1)
    assert inverse(generators(3).h[1]) == generators(3).h[2]
    assert inverse(generators(5).h[2]) == generators(5).h[2]


def test_kprime_examples():
    for p in (3, 5, 7, 11):
        assert kprime(1, p) == p - 1
    assert kprime(2, 5) == 2
    assert kprime(3, 7) == 2
    with pytest.raises(ValueError):
        kprime(0, 5)
    with pytest.raises(ValueError):
        kprime(5, 5)


def test_generator_examples():
    g3 = generators(3)
    assert g3.h[1] == make_element(2, -1, 3, -1)
    assert g3.h[2] == make_element(1, -1, 3, -2)
    assert generators(2).h[1] == make_element(1, -1, 2, -1)
    assert generators(5).h[3] == make_element(3, -2, 5, -3)
    with pytest.raises(NotPrimeError):
        generators(4)


def test_canonical_form_is_structural():
    g = make_element(2, -1, 3, -1)
    assert g == make_element(-2, 1, -3, 1)
    assert hash(g) == hash(make_element(-2, 1, -3, 1))
    with pytest.raises(ValueError):
        GroupElement(-1, 0, 0, -1)


@pytest.mark.parametrize("p", PRIMES)
def test_generator_invariants(p):
    gens = generators(p)
    assert all(ok for _, ok in check_generators(gens))


@pytest.mark.parametrize("p", PRIMES)
def test_relators_and_identities(p):
    gens = generators(p)
    assert all(ok for _, ok in check_relators(gens))
    assert all(ok for _, ok in check_identities(gens))
    assert len(involution_relators(p)) == p - 1
    assert len(triple_relators(p)) == max(p - 2, 0)


def test_relator_counts_p3():
    assert len(involution_relators(3)) == 2
    assert triple_relators(3) == [["h1", "h1", "h1"]]


@pytest.mark.parametrize("p", PRIMES)
def test_parabolic_element(p):
    g = parabolic_element(p)
    assert g == make_element(1, 0, p, 1)
    assert g.is_parabolic()


@pytest.mark.parametrize("p", [3, 5, 7, 13, 97])
def test_side_pairing_maps_circles(p):
    gens = generators(p)
    for k in range(1, p):
        a, b, c, d = gens.h[k].entries
        kk = gens.kprime[k]
        for theta in (0.3, 1.4, 2.7):
            z = k / p + np.exp(1j * theta) / p
            w = (a * z + b) / (c * z + d)
            assert abs(abs(w - kk / p) - 1 / p) < 1e-12


def test_word_parsing():
    gens = generators(5)
    assert gens.element("T^-1") == inverse(T)
    assert gens.word(["h2", "h2"]) == IDENTITY
    with pytest.raises(ValueError):
        gens.element("h7")
    with pytest.raises(ValueError):
        gens.element("S")


def test_json_roundtrip():
    g = generators(7).h[3]
    assert GroupElement.from_json(g.to_json()) == g
    assert g.to_json() == {"a": g.a, "b": g.b, "c": g.c, "d": g.d}


small = st.integers(-20, 20)


@st.composite
def elements(draw):
    letters = draw(st.lists(st.sampled_from(["T", "T^-1", "S"]), min_size=0, max_size=12))
    S = make_element(0, -1, 1, 0)
    g = IDENTITY
    for x in letters:
        g = compose(g, {"T": T, "T^-1": inverse(T), "S": S}[x])
    return g


@settings(max_examples=200, deadline=None)
@given(elements(), elements(), elements())
def test_group_axioms(g, h, k):
    assert compose(compose(g, h), k) == compose(g, compose(h, k))
    assert compose(g, inverse(g)) == IDENTITY
    assert compose(IDENTITY, g) == g
    assert g.a * g.d - g.b * g.c == 1
    assert g.c > 0 or (g.c == 0 and g.d > 0)


def test_exact_suite_runtime():
    import time

    t0 = time.perf_counter()
    for p in PRIMES:
        gens = generators(p)
        assert all(ok for _, ok in check_generators(gens) + check_identities(gens))
        assert all(ok for _, ok in check_relators(gens))
    assert time.perf_counter() - t0 < 5.0
