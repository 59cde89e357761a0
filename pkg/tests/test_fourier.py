import numpy as np
import pytest
from hypothesis import given, strategies as st

from apx.errors import AliasingError, DivergenceError, InputError, MissingFrequencyError
from apx.fourier import Multiplier, PeriodicGrid, SampledFunction, TrigPoly, analyze, apply_multiplier, synthesize
from apx.families import abs_sin_power
from apx.quadrature import fourier_series, quadrature, rule_for
from apx.weights import Weight

from oracles import SQRT_PI, abs_sin_cos_coeff


def square(p):
    """``p^2`` as a polynomial, exactly, from samples on a large enough grid."""
    g = PeriodicGrid.at_least(max(4 * p.degree + 4, 4))
    return analyze(SampledFunction(g, p(g.nodes) ** 2))


@st.composite
def polys(draw, max_degree=12):
    n = draw(st.integers(0, max_degree))
    vals = st.floats(-5, 5, allow_nan=False)
    a = draw(st.lists(vals, min_size=n, max_size=n))
    b = draw(st.lists(vals, min_size=n, max_size=n))
    return TrigPoly(draw(vals), a, b, degree=n)


# ---------------------------------------------------------------- grid

def test_grid_nodes_cover_circle_once():
    g = PeriodicGrid(16)
    x = g.nodes
    assert x[0] == -np.pi
    assert np.all(np.diff(x) > 0)
    assert np.allclose(np.diff(x), g.spacing)
    assert x[-1] + g.spacing == pytest.approx(np.pi)


@pytest.mark.parametrize("n", [0, 3, 12, 100])
def test_grid_rejects_non_powers_of_two(n):
    with pytest.raises(InputError):
        PeriodicGrid(n)


# ---------------------------------------------------------------- analyze / synthesize

def test_analyze_constant():
    g = PeriodicGrid(16)
    p = analyze(SampledFunction(g, np.ones(16)))
    assert p.a0 == pytest.approx(1.0, abs=1e-15)
    assert np.allclose(p.a, 0, atol=1e-15) and np.allclose(p.b, 0, atol=1e-15)


def test_analyze_pure_mode():
    g = PeriodicGrid(64)
    p = analyze(SampledFunction(g, np.cos(3 * g.nodes)))
    expect = np.zeros(p.degree)
    expect[2] = 1.0
    assert np.max(np.abs(p.a - expect)) < 1e-12
    assert np.max(np.abs(p.b)) < 1e-12
    assert abs(p.a0) < 1e-12


def test_analyze_abs_sin_second_coefficient():
    g = PeriodicGrid(1024)
    p = analyze(SampledFunction(g, np.abs(np.sin(g.nodes))))
    assert p.a[1] == pytest.approx(abs_sin_cos_coeff(2), abs=1e-5)
    assert p.a[1] == pytest.approx(-4 / (3 * np.pi), abs=1e-5)


def test_analyze_rejects_nonfinite():
    g = PeriodicGrid(8)
    with pytest.raises(InputError):
        SampledFunction(g, np.array([0, 1, np.nan, 0, 0, 0, 0, 0.0]))


def test_synthesize_zero_and_cos():
    g = PeriodicGrid(8)
    assert np.all(synthesize(TrigPoly.zero(2), g).values == 0)
    s = synthesize(TrigPoly(0.0, [1.0]), g)
    assert np.allclose(s.values, np.cos(g.nodes), atol=1e-15)


def test_round_trip_random_degree16(rng):
    p = TrigPoly.random(16, rng)
    q = analyze(synthesize(p, PeriodicGrid(64))).with_degree(16)
    assert max(abs(q.a0 - p.a0), np.max(np.abs(q.a - p.a)), np.max(np.abs(q.b - p.b))) < 1e-12


def test_synthesize_rejects_undersized_grid():
    with pytest.raises(AliasingError):
        synthesize(TrigPoly.mode(4), PeriodicGrid(8))


@given(polys())
def test_round_trip_property(p):
    g = PeriodicGrid.at_least(2 * p.degree + 2)
    if g.n_points < 4:
        g = PeriodicGrid(4)
    q = analyze(synthesize(p, g)).with_degree(p.degree)
    scale = 1 + max(abs(p.a0), np.max(np.abs(p.a), initial=0), np.max(np.abs(p.b), initial=0))
    assert q.allclose(p, atol=1e-12 * scale)


# ---------------------------------------------------------------- multipliers

def test_identity_multiplier():
    p = TrigPoly(1.0, [2.0, -1.0], [0.5, 3.0])
    assert apply_multiplier(p, Multiplier(np.ones(3))).allclose(p)


def test_projection_multiplier():
    p = TrigPoly(1.0, [1.0])
    out = apply_multiplier(p, Multiplier([1.0, 0.0]))
    assert out.allclose(TrigPoly(1.0, [0.0]))


def test_steklov_multiplier_on_cos_at_pi():
    v = np.pi
    m = np.ones(2, dtype=complex)
    m[1] = (np.exp(1j * v) - 1) / (1j * v)
    out = apply_multiplier(TrigPoly.mode(1), Multiplier(m))
    assert out.l2_norm() == pytest.approx(SQRT_PI * 2 / np.pi, rel=1e-13)


def test_multiplier_missing_frequency():
    with pytest.raises(MissingFrequencyError):
        apply_multiplier(TrigPoly.mode(3), Multiplier([1.0, 1.0]))


def test_multiplier_zero_frequency_must_be_real():
    with pytest.raises(InputError):
        Multiplier([1j, 1.0])


@given(polys(8), polys(8), st.floats(-3, 3), st.floats(-3, 3), st.integers(0, 2 ** 31))
def test_multiplier_is_linear(p, q, alpha, beta, seed):
    n = max(p.degree, q.degree)
    r = np.random.default_rng(seed)
    m = Multiplier(np.concatenate([[r.standard_normal()], r.standard_normal(n) + 1j * r.standard_normal(n)]))
    p, q = p.with_degree(n), q.with_degree(n)
    lhs = apply_multiplier(alpha * p + beta * q, m)
    rhs = alpha * apply_multiplier(p, m) + beta * apply_multiplier(q, m)
    assert lhs.allclose(rhs, atol=1e-12 * (1 + lhs.l2_norm()))


def test_multiplier_keeps_degree():
    p = TrigPoly.mode(5)
    out = apply_multiplier(p, Multiplier(np.full(9, 0.5)))
    assert out.degree <= p.degree


# ---------------------------------------------------------------- quadrature

def test_quadrature_constant():
    assert quadrature(TrigPoly(1.0)) == pytest.approx(2 * np.pi, abs=1e-12)


def test_quadrature_cos_squared():
    c = TrigPoly.mode(1)
    assert quadrature(square(c)) == pytest.approx(np.pi, abs=1e-10)


def test_quadrature_singular_weight():
    w = Weight.power(0.0, -0.5)
    assert quadrature(TrigPoly(1.0), w) == pytest.approx(4 * np.sqrt(np.pi), rel=1e-10)


def test_weight_rejects_nonintegrable_exponent():
    from apx.errors import WeightError
    with pytest.raises(WeightError):
        Weight.power(0.0, -1.0)


def test_graded_rule_rejects_nonintegrable_exponent():
    from apx.quadrature import graded_rule
    with pytest.raises(DivergenceError):
        graded_rule((0.0,), ((0.0, -1.2),), 0.1)


@given(polys(10))
def test_parseval_on_grid(p):
    lhs = quadrature(square(p))
    rhs = np.pi * (2 * p.a0 ** 2 + np.sum(p.a ** 2 + p.b ** 2))
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)


@given(polys(8), st.floats(-0.9, 2.0))
def test_odd_function_against_even_weight(p, alpha):
    odd = TrigPoly(0.0, np.zeros(p.degree), p.b, degree=p.degree)
    w = Weight.power(0.0, alpha)
    assert abs(quadrature(odd, w)) < 1e-10 * (1 + np.sum(np.abs(p.b)))


def test_fourier_series_of_abs_sin():
    p = fourier_series(abs_sin_power(1.0), 16)
    k = np.arange(1, 17)
    assert p.a0 == pytest.approx(2 / np.pi, abs=1e-13)
    assert np.max(np.abs(p.a - abs_sin_cos_coeff(k))) < 1e-13
    assert np.max(np.abs(p.b)) < 1e-13
