import numpy as np
import pytest

from energy_spaces.jets import Field2D, Jet, constant, exp, exponential, polynomial, cosine, zero
from energy_spaces.operators import (
    OperatorSpec,
    bracket,
    bracket_from_jet,
    kernel_scan,
    psi,
    psi_fn,
    schwartz_decay_check,
)
from energy_spaces.waves import ComplexWaveSlice, scenario

from conftest import matrix_functions, rel


@pytest.mark.parametrize("f, t0", matrix_functions(), ids=lambda x: getattr(x, "label", str(x)))
@pytest.mark.parametrize("p", range(4))
def test_minus_one_bracket_is_exactly_zero(f, t0, p):
    out = bracket(OperatorSpec("-", 1, p), f, t0, 5)
    assert not np.any(out.coeffs)


def test_psi_output_order():
    j = exp(Jet(0.0, [0, 1, 0, 0, 0, 0]))
    assert psi(OperatorSpec("+", 1), j).order == 4
    assert psi(OperatorSpec("+", 3), j).order == 2


def test_teager_kaiser_on_cosine_is_constant():
    A, w = 1.5, 2.0
    out = bracket(OperatorSpec("-", 2), cosine(w, A), 0.7, 4)
    assert out.value == pytest.approx(A ** 2 * w ** 2, rel=1e-14)
    np.testing.assert_allclose(out.coeffs[1:], 0, atol=1e-12)


@pytest.mark.parametrize("a", [-0.7, 0.3, 1.1])
@pytest.mark.parametrize("k", [0, 1, 2, 3, 4])
def test_plus_on_exponential(a, k):
    t = 0.4
    out = psi_fn(OperatorSpec("+", k), exponential(a), t, 3)
    expected = [2 * a ** k * np.exp(2 * a * t) * (2 * a) ** m for m in range(4)]
    assert rel(out.derivatives(), expected) <= 1e-13


def test_level_one_bracket_on_exponential():
    a, t = 0.5, 0.3
    out = bracket(OperatorSpec("+", 1, 1), exponential(a), t)
    assert out.value == pytest.approx(16 * a ** 3 * np.exp(4 * a * t), rel=1e-14)


@pytest.mark.parametrize("f, t0", matrix_functions(), ids=lambda x: getattr(x, "label", str(x)))
@pytest.mark.parametrize("sign", ["+", "-"])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_level_zero_bracket_is_psi(f, t0, sign, k):
    spec = OperatorSpec(sign, k)
    np.testing.assert_array_equal(bracket(spec, f, t0, 3).coeffs, psi_fn(spec, f, t0, 3).coeffs)


@pytest.mark.parametrize("f, t0", matrix_functions(), ids=lambda x: getattr(x, "label", str(x)))
@pytest.mark.parametrize("k", [1, 2, 3])
def test_sum_and_difference(f, t0, k):
    fj = f.jet(t0, k + 2)
    plus = psi(OperatorSpec("+", k), fj)
    minus = psi(OperatorSpec("-", k), fj)
    d = fj.derivatives()
    total = (plus + minus).value
    diff = (plus - minus).value
    assert total == pytest.approx(2 * d[1] * d[k - 1], rel=1e-12, abs=1e-14)
    assert diff == pytest.approx(2 * d[0] * d[k], rel=1e-12, abs=1e-14)


def test_axis_symmetry_under_transpose():
    field = Field2D("w", lambda r, t: exp(r * 0.3 + t * 0.7) * (r * t + 1.0))
    for sign in "+-":
        for k in (1, 2):
            a = bracket(OperatorSpec(sign, k, 0, "time"), field.slice("time", 1.2), 0.5, 2)
            b = bracket(OperatorSpec(sign, k, 0, "space"), field.transposed().slice("space", 1.2), 0.5, 2)
            np.testing.assert_allclose(a.coeffs, b.coeffs, rtol=1e-14)


def test_negative_k_rejected():
    with pytest.raises(ValueError):
        psi(OperatorSpec("+", -1), exp(Jet(0.0, [0, 1, 0])))


def test_psi_zero_needs_primitive():
    with pytest.raises(ValueError):
        psi(OperatorSpec("+", 0), exp(Jet(0.0, [0, 1, 0])))
    with pytest.raises(ValueError):
        bracket_from_jet(OperatorSpec("+", 0, 1), exp(Jet(0.0, [0, 1, 0])))


def test_sign_aliases():
    assert OperatorSpec("plus").sign == "+"
    assert OperatorSpec("minus").sign == "-"
    with pytest.raises(ValueError):
        OperatorSpec("*")


GRID = np.linspace(0.0, 100.0, 41)


@pytest.mark.parametrize("a", [0.2, -0.5])
def test_exponentials_are_in_a_minus_kernel(a):
    rep = kernel_scan(exponential(a), range(0, 4), GRID)
    assert not rep.in_s_minus
    assert ("-", 2) in rep.vanishing


def test_evanescent_slice_membership():
    f = ComplexWaveSlice(scenario(1), "time", 2.0).smooth_fn(real=True)
    rep = kernel_scan(f, range(0, 3), GRID)
    assert rep.in_s_minus
    assert all(v > rep.epsilon for key, v in rep.sups.items() if key != ("-", 1))


def test_zero_function_membership():
    rep = kernel_scan(zero(), range(0, 3), GRID)
    assert not rep.in_s_minus
    assert all(v == 0 for v in rep.sups.values())
    assert rep.as_dict()["in_s_minus"] is False


NEG = np.linspace(-100.0, 0.0, 201)


@pytest.mark.parametrize(
    "f, ok",
    [(exponential(1.0), True), (constant(1.0), False), (zero(), True), (polynomial([0, 1]), False)],
)
def test_schwartz_decay(f, ok):
    assert schwartz_decay_check(f, NEG)[0] is ok


def test_schwartz_needs_negative_points():
    with pytest.raises(ValueError):
        schwartz_decay_check(constant(1.0), np.linspace(0, 1, 5))
