import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from apx.approx import best_approx
from apx.errors import ConfigError, InputError
from apx.families import abs_sin_power
from apx.harness.checks import (CHECK_IDS, CheckSpec, clear_cache, dyadic_sum, estimate_decay_exponent,
                                log_integral, run_check)
from apx.harness.constants import explicit_constants
from apx.harness.report import columns, dump_json, format_value, to_csv
from apx.smoothness import SmoothnessParams, modulus
from apx.weights import Weight

from oracles import abs_sin_tail_l2

ABS_SIN = {"family": "abs_sin_power", "s": 1.0, "label": "abs_sin"}
SQRT = {"family": "power", "x0": 0.0, "alpha": 0.5}
DYADIC_V = [2.0 ** -j for j in range(2, 8)]


# ---------------------------------------------------------------- check specs

def test_unknown_check_id_rejected():
    with pytest.raises(ConfigError):
        CheckSpec("sharpness")


def test_inf_strings_parse():
    spec = CheckSpec("nikolskii", p="inf", q=2)
    assert spec.p == np.inf and spec.q == 2.0


def test_from_dict_resolves_ids():
    spec = CheckSpec.from_dict({"check_id": "jackson", "functions": ["f"], "weight": "w"}, seed=3,
                               weights={"w": SQRT}, functions={"f": {"family": "exp_sin"}})
    assert spec.weight == SQRT and spec.functions[0]["family"] == "exp_sin" and spec.seed == 3


def test_from_dict_unknown_reference():
    with pytest.raises(ConfigError):
        CheckSpec.from_dict({"check_id": "jackson", "weight": "nope"})


def test_ulyanov_rejects_q_not_above_p():
    spec = CheckSpec("ulyanov_modulus", functions=[ABS_SIN], p=2, q=2, v_list=DYADIC_V, orders={"k": 1})
    with pytest.raises(ConfigError):
        run_check(spec)


def test_nikolskii_rejects_q_above_p():
    with pytest.raises(ConfigError):
        run_check(CheckSpec("nikolskii", p=1, q=2, n_list=(4,)))


def test_ulyanov_rejects_inadmissible_weight():
    from apx.errors import ClassificationError
    spec = CheckSpec("ulyanov_modulus", functions=[ABS_SIN], weight=SQRT, p=1, q=2, v_list=DYADIC_V,
                     orders={"k": 1})
    with pytest.raises(ClassificationError):
        run_check(spec)


# ---------------------------------------------------------------- trivial examples

def test_nikolskii_equal_exponents_ratio_one():
    rep = run_check(CheckSpec("nikolskii", p=2, q=2, n_list=(4, 8, 16), params={"count": 3}))
    assert all(r["ratio"] == pytest.approx(1.0, rel=1e-14) for r in rep.rows)
    assert rep.verdict == "bounded"


def test_jackson_on_low_degree_polynomial():
    poly = {"family": "trig_poly", "a0": 1.0, "a": [0.5, 0.0, 0.2, 0.1], "b": [0.3]}
    rep = run_check(CheckSpec("jackson", functions=[poly], n_list=(4, 8, 16), orders={"r": 1}))
    assert all(r["lhs"] == pytest.approx(0.0, abs=1e-9) for r in rep.rows)
    assert all(r["ratio"] < 1e-8 for r in rep.rows)
    assert rep.verdict == "bounded"


def test_ulyanov_modulus_example():
    spec = CheckSpec("ulyanov_modulus", functions=[ABS_SIN], p=1, q=2, v_list=DYADIC_V, orders={"k": 1})
    rep = run_check(spec)
    assert rep.verdict == "bounded"
    assert np.isfinite(rep.aggregate["max_ratio"])
    assert rep.aggregate["max_slope"] <= 0.05
    for r in rep.rows:
        t, e = r["extra"]["rhs_truncated"], r["extra"]["rhs_extrapolated"]
        assert abs(e - t) <= 0.05 * e


# ---------------------------------------------------------------- explicit constants

def test_constants_unit_weight_infinity():
    assert explicit_constants(Weight.constant(), np.inf)["C1"].value == 1.0


def test_constants_unit_weight_two():
    c = explicit_constants(Weight.constant(), 2.0)
    assert c["C1"].value == pytest.approx(2 ** 0.5 * 2 * np.pi, rel=1e-9)
    assert c["C1"].value == pytest.approx(8.8858, abs=5e-5)
    assert c["C2"].value == pytest.approx(4 * np.pi * 3 ** 1.5, rel=1e-9)
    assert c["C2"].value == pytest.approx(65.297, abs=5e-4)
    assert c["C11"].value == pytest.approx(2 * np.pi ** 2)


def test_constants_carry_formulas():
    for name, c in explicit_constants(Weight.power(0.0, 0.5), 2.0).items():
        assert c.formula and np.isfinite(c.value) and c.value > 0, name


def test_constants_need_admissible_weight():
    from apx.errors import ClassificationError
    with pytest.raises(ClassificationError):
        explicit_constants(Weight.power(0.0, 0.5), 1.0)


# ---------------------------------------------------------------- decay exponent

def test_decay_exponent_exact_power():
    r = estimate_decay_exponent([(n, n ** -1.5) for n in (2, 4, 8, 16, 32, 64)])
    assert r["beta_hat"] == pytest.approx(1.5, abs=1e-10)
    assert r["residual"] < 1e-12


@given(st.floats(-3, 3), st.floats(0.01, 100))
def test_decay_exponent_recovers_power(beta, c):
    r = estimate_decay_exponent([(n, c * n ** -beta) for n in (3, 5, 9, 17, 33, 65, 129)])
    assert r["beta_hat"] == pytest.approx(beta, abs=1e-9)


def test_decay_exponent_needs_positive_values():
    with pytest.raises(InputError):
        estimate_decay_exponent([(n, 0.0) for n in range(1, 7)])
    with pytest.raises(InputError):
        estimate_decay_exponent([(n, 1.0) for n in range(1, 6)])


def test_decay_exponent_of_abs_sin_best_approximation():
    ns = (8, 16, 32, 64, 128, 256)
    got = estimate_decay_exponent([(n, best_approx(abs_sin_power(1.0), n).error) for n in ns])
    oracle = estimate_decay_exponent([(n, abs_sin_tail_l2(n)) for n in ns])
    assert got["beta_hat"] == pytest.approx(oracle["beta_hat"], abs=1e-6)
    assert got["beta_hat"] == pytest.approx(1.5, abs=0.05)


def test_decay_exponent_of_second_modulus():
    ns = (8, 16, 32, 64, 128, 256)
    vals = [modulus(abs_sin_power(1.0), SmoothnessParams(2, 1.0 / n)) for n in ns]
    assert estimate_decay_exponent(list(zip(ns, vals)))["beta_hat"] == pytest.approx(1.5, abs=0.1)


def test_sandwich_band():
    f = abs_sin_power(1.0)
    scaled = [modulus(f, SmoothnessParams(2, 1.0 / n)) * n ** 1.5 for n in (8, 16, 32, 64, 128)]
    assert max(scaled) / min(scaled) <= 10.0


# ---------------------------------------------------------------- integrals and sums

@pytest.mark.parametrize("a", [0.5, 1.0, 2.5])
def test_log_integral_of_power(a):
    # midpoint sum on the geometric grid plus the exact tail below d 2^-20
    d = 0.3
    j = np.arange(20)
    rule = np.log(2.0) * d ** a * np.sum(2.0 ** (-a * (j + 0.5))) + d ** a * 2.0 ** (-20 * a) / a
    out = log_integral(lambda t: t ** a, d)
    assert out["extrapolated"] == pytest.approx(rule, rel=1e-12)
    assert out["tail_exponent"] == pytest.approx(a, rel=1e-10)
    assert out["truncated"] < out["extrapolated"]


@pytest.mark.parametrize("a", [0.25, 0.5, 1.0])
def test_log_integral_accuracy_for_slow_powers(a):
    # int_0^d t^a dt/t = d^a / a
    d = 0.3
    assert log_integral(lambda t: t ** a, d)["extrapolated"] == pytest.approx(d ** a / a, rel=2e-2)


@pytest.mark.parametrize("s", [-1.5, -2.0, -3.0])
def test_dyadic_sum_of_power(s):
    from scipy.special import zeta
    start = 5
    exact = zeta(-s, start)
    out = dyadic_sum(lambda k: float(k) ** s, start)
    assert out["extrapolated"] == pytest.approx(exact, rel=1e-2)


def test_dyadic_sum_of_finite_sequence():
    out = dyadic_sum(lambda k: 1.0 if k < 6 else 0.0, 1)
    assert out["extrapolated"] == pytest.approx(5.0)


# ---------------------------------------------------------------- verdict logic

def test_bernstein_bounded_by_constant():
    rep = run_check(CheckSpec("bernstein", p=2, n_list=(4, 8), orders={"r": [1, 2]}, params={"count": 4}))
    assert rep.verdict == "bounded-by-paper-constant"
    assert rep.aggregate["max_ratio_over_bound"] <= 1.0
    assert rep.paper_constant


def test_operator_uniform_bounded_by_constant():
    spec = CheckSpec("operator_uniform", functions=[ABS_SIN], weight=SQRT, p=2, n_list=(4, 16),
                     params={"operators": ["steklov_T", "window_S", "vallee_poussin"]})
    rep = run_check(spec)
    assert rep.verdict == "bounded-by-paper-constant"


def test_marchaud_bounded():
    rep = run_check(CheckSpec("marchaud", functions=[ABS_SIN], v_list=DYADIC_V, orders={"k": 1}))
    assert rep.verdict == "bounded"


def test_modulus_props_bounded_by_constant():
    rep = run_check(CheckSpec("modulus_props", functions=[ABS_SIN], orders={"k": [1]}))
    assert rep.verdict == "bounded-by-paper-constant"


def test_every_check_id_has_a_runner():
    from apx.harness import checks
    for cid in CHECK_IDS:
        assert callable(checks._RUNNERS[cid])


# ---------------------------------------------------------------- determinism and reports

def test_identical_specs_give_identical_rows():
    spec = CheckSpec("stechkin_inverse", functions=[ABS_SIN], n_list=(8, 16, 32), orders={"k": [1]})
    a = run_check(spec, threads=1)
    clear_cache()
    b = run_check(spec, threads=4)
    assert to_csv(a) == to_csv(b)


def test_csv_layout():
    rep = run_check(CheckSpec("nikolskii", p=2, q=1, n_list=(4, 8), params={"count": 2}))
    text = to_csv(rep)
    header = text.splitlines()[0].split(",")
    assert header[0] == "check_id"
    assert header[header.index("lhs"):header.index("lhs") + 3] == ["lhs", "rhs", "ratio"]
    assert columns(rep) == header
    assert len(text.splitlines()) == 1 + len(rep.rows)


def test_format_value_round_trips():
    for v in (np.pi, 1e-300, -2.5e17, 0.1 + 0.2):
        assert float(format_value(v)) == v
    assert format_value(np.inf) == "inf" and format_value(np.nan) == "nan"


def test_dump_json_sorted_and_parseable():
    text = dump_json({"b": np.float64(1.5), "a": [np.inf, 2]})
    assert text.index('"a"') < text.index('"b"')
    json.loads(text)
