import numpy as np
import pytest
from hypothesis import given, strategies as st

from apx.errors import ClassificationError, InputError
from apx.families import abs_sin_power, vp_sawtooth
from apx.fourier import PeriodicGrid, SampledFunction, TrigPoly, synthesize
from apx.norms import NormParams, embedding_constant_C9, weighted_norm
from apx.weights import Weight

from oracles import SQRT_PI, quad_circle


@st.composite
def polys(draw, max_degree=10):
    n = draw(st.integers(1, max_degree))
    seed = draw(st.integers(0, 2 ** 31))
    return TrigPoly.random(n, np.random.default_rng(seed))


# ---------------------------------------------------------------- examples

def test_constant_l2():
    assert weighted_norm(TrigPoly(1.0), 2.0) == pytest.approx(np.sqrt(2 * np.pi), rel=1e-14)


def test_cos_l2():
    assert weighted_norm(TrigPoly.mode(1), 2.0) == pytest.approx(SQRT_PI, rel=1e-14)


def test_constant_l1_against_inverse_sqrt_weight():
    w = Weight.power(0.0, -0.5)
    assert weighted_norm(TrigPoly(1.0), 1.0, w) == pytest.approx(4 * SQRT_PI, rel=1e-12)


def test_sampled_and_poly_inputs_agree():
    p = TrigPoly(0.3, [1.0, -0.5], [0.2, 0.7])
    s = synthesize(p, PeriodicGrid(16))
    for q in (1.0, 2.0, 3.5, np.inf):
        assert weighted_norm(s, q) == pytest.approx(weighted_norm(p, q), rel=1e-12)


@pytest.mark.parametrize("alpha", [-0.5, 0.5])
@pytest.mark.parametrize("p", [1.0, 2.0, 3.0])
def test_weighted_norm_of_abs_sin_against_quad(alpha, p):
    w = Weight.power(0.0, alpha)
    expect = quad_circle(lambda x: np.abs(np.sin(x)) ** p, weight_alpha=alpha) ** (1 / p)
    assert weighted_norm(abs_sin_power(1.0), p, w) == pytest.approx(expect, rel=1e-10)


def test_sup_norm_of_poly_finds_peak_between_nodes():
    # peak of cos(x) + cos(2x) is 2 at x = 0, a node; shift it off-grid
    shift = 0.123456789
    p = TrigPoly(0.0, [np.cos(shift), np.cos(2 * shift)], [np.sin(shift), np.sin(2 * shift)])
    assert weighted_norm(p, np.inf) == pytest.approx(2.0, rel=1e-13)


def test_sup_norm_of_abs_sin():
    assert weighted_norm(abs_sin_power(1.0), np.inf) == pytest.approx(1.0, rel=1e-12)


def test_sup_norm_ignores_weight():
    p = TrigPoly.mode(3)
    assert weighted_norm(p, np.inf, Weight.power(0.0, 0.5)) == weighted_norm(p, np.inf)


def test_rejects_p_below_one():
    with pytest.raises(InputError):
        weighted_norm(TrigPoly(1.0), 0.5)


# ---------------------------------------------------------------- NormParams

def test_norm_params_exponents():
    np_ = NormParams(2.0, np.inf)
    assert np_.theta == 0.5 and np_.q_star == 1.0 and np_.q_lower_star == 1.0
    np_ = NormParams(1.0, 2.0)
    assert np_.theta == 0.5 and np_.q_star == 2.0 and np_.q_lower_star == 1.0
    np_ = NormParams(1.5, 3.0)
    assert np_.q_lower_star == 3.0


def test_norm_params_require_p_below_q():
    with pytest.raises(InputError):
        NormParams(2.0, 2.0)


# ---------------------------------------------------------------- C9

def test_c9_unit_weight_infinity():
    assert embedding_constant_C9(Weight.constant(), np.inf) == pytest.approx(2 * np.pi)


def test_c9_unit_weight_two():
    assert embedding_constant_C9(Weight.constant(), 2.0) == pytest.approx(0.39894, abs=5e-6)


def test_c9_inverse_sqrt_weight_one():
    assert embedding_constant_C9(Weight.power(0.0, -0.5), 1.0) == pytest.approx(SQRT_PI, rel=1e-12)


def test_c9_without_circle_length_fails_for_abs_sin():
    # the stated 1 < p < inf value is too small for the unnormalised L1 norm
    f = abs_sin_power(1.0)
    assert weighted_norm(f, 1.0) > embedding_constant_C9(Weight.constant(), 2.0) * weighted_norm(f, 2.0)


def test_c9_requires_admissible_weight():
    with pytest.raises(ClassificationError):
        embedding_constant_C9(Weight.power(0.0, 0.5), 1.0)


# ---------------------------------------------------------------- properties

@given(polys())
def test_normalised_norm_nondecreasing_in_p(p):
    ps = [1.0, 1.5, 2.0, 4.0, np.inf]
    vals = [(2 * np.pi) ** (-1 / q if q < np.inf else 0.0) * weighted_norm(p, q) for q in ps]
    assert all(b >= a * (1 - 1e-8) for a, b in zip(vals, vals[1:]))


@given(polys(), st.floats(-4, 4).filter(lambda c: abs(c) > 1e-3), st.floats(0.1, 10),
       st.sampled_from([1.0, 2.0, 3.0]))
def test_norm_homogeneity(p, c, s, q):
    base = Weight.power(0.0, 0.5)
    scaled_w = Weight.power(0.0, 0.5, s)
    assert weighted_norm(c * p, q, base) == pytest.approx(abs(c) * weighted_norm(p, q, base), rel=1e-12)
    assert weighted_norm(p, q, scaled_w) == pytest.approx(s ** (1 / q) * weighted_norm(p, q, base), rel=1e-12)


@pytest.mark.parametrize("p, w", [
    (2.0, Weight.constant()),
    (2.0, Weight.power(0.0, 0.5)),
    (1.0, Weight.power(0.0, -0.5)),
    (np.inf, Weight.constant()),
])
def test_embedding_chain(p, w, rng):
    # ||f||_1 <= C9 ||f||_{p,w} and ||f||_{p,w} <= ||w||_1^(1/p) ||f||_inf;
    # for 1 < p < inf the constant bounds the mean of |f|, hence the 2 pi
    fam = [abs_sin_power(1.0), abs_sin_power(2.5), vp_sawtooth(8)]
    fam += [TrigPoly.random(8, rng) for _ in range(5)] + [TrigPoly.mode(5)]
    c9 = embedding_constant_C9(w, p) * (2 * np.pi if 1 < p < np.inf else 1.0)
    l1w = weighted_norm(TrigPoly(1.0), 1.0, w)
    for f in fam:
        npw = weighted_norm(f, p, w)
        assert weighted_norm(f, 1.0) <= c9 * npw * (1 + 1e-12)
        if p < np.inf:
            assert npw <= l1w ** (1 / p) * weighted_norm(f, np.inf) * (1 + 1e-12)
