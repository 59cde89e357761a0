import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import minimize_scalar

from apx.errors import InputError, PoleError, WeightError
from apx.weights import (Weight, a_infinity_fit, average_bound, classify_weight, doubling_constant,
                         eval_weight, lower_bound_c8, muckenhoupt_constant)


def power_interval_mean(alpha, a, b):
    """Mean of ``|x|^alpha`` over ``[a, b]`` inside ``[-pi, pi]``, closed form."""
    def prim(x):
        return np.sign(x) * np.abs(x) ** (alpha + 1) / (alpha + 1)
    return (prim(b) - prim(a)) / (b - a)


# ---------------------------------------------------------------- evaluation

def test_constant_weight_is_one():
    x = np.linspace(-10, 10, 7)
    assert np.all(eval_weight(Weight.constant(), x) == 1.0)


def test_power_weight_at_pi():
    assert eval_weight(Weight.power(0.0, 0.5), np.pi) == pytest.approx(np.sqrt(np.pi), rel=1e-15)


def test_product_weight_at_two():
    w = Weight.product([(0.0, -0.25), (1.0, 0.5)])
    assert eval_weight(w, 2.0) == pytest.approx(0.84090, abs=5e-6)
    assert eval_weight(w, 2.0) == pytest.approx(2 ** -0.25, rel=1e-14)


def test_weight_is_periodic():
    w = Weight.power(0.3, 0.7)
    x = np.array([-2.0, 0.1, 1.5])
    assert np.allclose(eval_weight(w, x + 2 * np.pi), eval_weight(w, x), rtol=1e-13)


def test_pole_evaluation_raises():
    with pytest.raises(PoleError):
        eval_weight(Weight.power(0.0, -0.5), 0.0)


def test_negative_tabulated_weight_rejected():
    with pytest.raises(WeightError):
        Weight.tabulated([1.0, -1.0, 2.0])


def test_unknown_family_is_input_error():
    with pytest.raises(InputError):
        Weight.from_descriptor({"family": "gaussian"})


def test_descriptor_round_trip():
    w = Weight.product([(0.0, -0.25), (1.0, 0.5)], c=2.0)
    v = Weight.from_descriptor(w.descriptor())
    x = np.linspace(-3, 3, 11) + 0.01
    assert np.array_equal(eval_weight(v, x), eval_weight(w, x))


# ---------------------------------------------------------------- A_p constant

def test_constant_weight_a2_is_one():
    assert muckenhoupt_constant(Weight.constant(), 2.0).value == pytest.approx(1.0, abs=1e-10)


def power_a2_supremum(alpha):
    """``[|x|^alpha]_2`` by bounded scalar maximisation over the scale-free
    family ``[-a, 1]``, ``0 <= a <= 1``."""
    res = minimize_scalar(lambda a: -power_interval_mean(alpha, -a, 1.0) * power_interval_mean(-alpha, -a, 1.0),
                          bounds=(0.0, 1.0), method="bounded", options={"xatol": 1e-12})
    return -res.fun


def test_sqrt_weight_a2_matches_optimised_interval():
    oracle = power_a2_supremum(0.5)
    est = muckenhoupt_constant(Weight.power(0.0, 0.5), 2.0)
    assert est.in_class
    assert oracle * (1 - 1e-3) <= est.value <= oracle * (1 + 1e-9)
    assert est.refinement_trend == pytest.approx(1.0, abs=0.02)


def test_off_knot_singularity_matches_optimised_interval():
    est = muckenhoupt_constant(Weight.power(0.3, 0.5), 2.0)
    assert power_a2_supremum(0.5) * (1 - 2e-3) <= est.value <= power_a2_supremum(0.5) * (1 + 1e-9)


def test_dense_interval_sweep_below_supremum():
    oracle = power_a2_supremum(0.5)
    r = np.random.default_rng(7)
    ends = np.sort(r.uniform(-np.pi, np.pi, size=(4000, 2)), axis=1)
    ends = ends[ends[:, 1] - ends[:, 0] > 1e-9]
    vals = power_interval_mean(0.5, ends[:, 0], ends[:, 1]) * power_interval_mean(-0.5, ends[:, 0], ends[:, 1])
    assert np.max(vals) <= oracle * (1 + 1e-9)
    assert np.max(vals) <= muckenhoupt_constant(Weight.power(0.0, 0.5), 2.0).value * (1 + 1e-3)


def test_power_above_p_minus_one_not_in_a2():
    est = muckenhoupt_constant(Weight.power(0.0, 1.5), 2.0)
    assert not est.in_class
    assert est.value is None
    assert est.refinement_trend > 1.5


def test_a_p_rejects_p_one():
    with pytest.raises(InputError):
        muckenhoupt_constant(Weight.constant(), 1.0)


@given(st.floats(-0.9, 0.9), st.sampled_from([1.5, 2.0, 3.0]))
def test_a_p_at_least_one(alpha, p):
    if alpha >= p - 1:
        return
    est = muckenhoupt_constant(Weight.power(0.0, alpha), p)
    assert est.value >= 1.0 - 1e-9


@given(st.floats(-0.6, 0.6), st.floats(0.01, 100.0))
def test_a_p_scale_invariant(alpha, c):
    a = muckenhoupt_constant(Weight.power(0.0, alpha), 2.0).value
    b = muckenhoupt_constant(Weight.power(0.0, alpha, c), 2.0).value
    assert b == pytest.approx(a, rel=1e-10)


@given(st.floats(-0.9, 0.9), st.sampled_from([0.0, np.pi / 2, -np.pi / 4]))
def test_a_p_refinement_monotone_and_stable(alpha, x0):
    est = muckenhoupt_constant(Weight.power(x0, alpha), 2.0)
    levels = np.array(est.per_level)
    assert np.all(np.diff(levels) >= -1e-12 * levels[1:])
    assert est.refinement_trend < 1.05


# ---------------------------------------------------------------- classification

@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 4.0, np.inf])
def test_constant_weight_in_every_class(p):
    rep = classify_weight(Weight.constant(), p)
    assert rep.admissible
    assert rep.C8 == 1.0
    if rep.a_p is not None:
        assert rep.a_p["value"] == pytest.approx(1.0, abs=1e-10)


def test_inverse_sqrt_weight_in_s1():
    rep = classify_weight(Weight.power(0.0, -0.5), 1.0)
    assert rep.admissible and rep.s1["in_class"]
    assert rep.C8 == pytest.approx(np.pi ** -0.5, rel=1e-12)


def test_sqrt_weight_not_in_s1():
    rep = classify_weight(Weight.power(0.0, 0.5), 1.0)
    assert not rep.admissible
    assert rep.reason


def test_infinity_admits_only_unit_weight():
    assert not classify_weight(Weight.power(0.0, 0.5), np.inf).admissible


def test_c8_zero_for_declared_zero():
    assert lower_bound_c8(Weight.power(1.0, 0.3)) == 0.0


def test_average_bound_of_constant():
    assert average_bound(Weight.constant(2.0)).value == pytest.approx(2.0, rel=1e-10)


def test_doubling_of_constant_is_two():
    assert doubling_constant(Weight.constant()) == pytest.approx(2.0, rel=1e-10)


def test_a_infinity_fit_reports_both_variants():
    fit = a_infinity_fit(Weight.power(0.0, 0.5))
    assert set(fit) == {"containing", "contained"}
    for v in fit.values():
        assert v["C7"] >= 1.0 - 1e-9
        assert 0.5 < v["p0"] < 1.5


def test_classification_is_cached():
    w = Weight.power(0.0, 0.25)
    assert classify_weight(w, 2.0) is classify_weight(w, 2.0)
