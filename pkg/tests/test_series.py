from fractions import Fraction

import pytest

from conftest import random_element, random_matrix, random_scalar, random_series
from kforge.builders import build_torus_constant_dgla, build_toy3
from kforge.dgla import GradedElement
from kforge.errors import InputError
from kforge.hodge import hodge_data
from kforge.linalg import Matrix
from kforge.scalars import HALF, qi
from kforge.series import (
    GradedSeries,
    Poly,
    apply_operator,
    evaluate_series,
    series_bracket,
    series_from_json,
    series_to_json,
    substitute_linear,
)


def toy3_context():
    L, metric, _ = build_toy3()
    return L, hodge_data(L, metric)


def single_term(space, params, order, exp, q, name_coeffs):
    vec = [qi(0)] * space.dim(q)
    for name, c in name_coeffs.items():
        vec[space.names(q).index(name)] = qi(c)
    return GradedSeries(space, params, order, {tuple(exp): GradedElement(space, {q: vec})})


# -- linear operations ---------------------------------------------------------


def test_add_zero_and_cancellation():
    L, _ = toy3_context()
    s = single_term(L.space, ("t",), 3, (1,), 1, {"x": 1})
    zero = GradedSeries.zero(L.space, ("t",), 3)
    assert s + zero == s
    assert (s + s.scale(qi(-1))).is_zero()


def test_linearity_collects_coefficients():
    L, _ = toy3_context()
    tx = single_term(L.space, ("t",), 3, (1,), 1, {"x": 1})
    ty = single_term(L.space, ("t",), 3, (1,), 1, {"y": 1})
    combined = tx + ty
    assert combined == single_term(L.space, ("t",), 3, (1,), 1, {"x": 1, "y": 1})


def test_mixed_order_is_error():
    L, _ = toy3_context()
    a = GradedSeries.zero(L.space, ("t",), 3)
    b = GradedSeries.zero(L.space, ("t",), 4)
    with pytest.raises(InputError):
        a + b
    c = GradedSeries.zero(L.space, ("s",), 3)
    with pytest.raises(InputError):
        a + c


def test_constant_term_rejected():
    L, _ = toy3_context()
    x = GradedElement.basis(L.space, 1, 0)
    with pytest.raises(InputError):
        GradedSeries(L.space, ("t",), 3, {(0,): x})


# -- bracket ---------------------------------------------------------------------


def test_toy3_series_self_bracket():
    L, _ = toy3_context()
    tx = single_term(L.space, ("t",), 3, (1,), 1, {"x": 1})
    got = series_bracket(L, tx, tx)
    assert got == single_term(L.space, ("t",), 3, (2,), 2, {"u": 1})


def test_truncation_drops_high_orders():
    L, _ = toy3_context()
    high = single_term(L.space, ("t",), 2, (2,), 1, {"x": 1})
    assert series_bracket(L, high, high).is_zero()


def test_gl2_cross_parameter_bracket():
    L, _ = build_torus_constant_dgla(2, 2)
    params = ("t1", "t2")
    s1 = single_term(L.space, params, 2, (1, 0), 1, {"E12@1": 1})
    s2 = single_term(L.space, params, 2, (0, 1), 1, {"E21@2": 1})
    got = series_bracket(L, s1, s2)
    assert got == single_term(L.space, params, 2, (1, 1), 2, {"E11@12": 1, "E22@12": -1})


def test_series_bracket_agrees_with_pointwise_bracket(rng):
    # evaluation commutes with the bracket as long as nothing is truncated:
    # an independent oracle for the term-pair convolution
    L, _ = build_torus_constant_dgla(2, 2)
    params = ("a", "b")
    for _ in range(8):
        s = random_series(L.space, params, 6, rng, degree=1, terms=3, max_total=3)
        t = random_series(L.space, params, 6, rng, degree=1, terms=3, max_total=3)
        point = [random_scalar(rng, 2, 2) for _ in params]
        lhs = evaluate_series(series_bracket(L, s, t), point)
        rhs = L.bracket(evaluate_series(s, point), evaluate_series(t, point))
        assert lhs == rhs


def test_series_bracket_graded_symmetry_on_odd_coefficients(rng):
    L, _ = build_torus_constant_dgla(2, 2)
    params = ("a", "b")
    for _ in range(6):
        s = random_series(L.space, params, 4, rng, degree=1, terms=2, max_total=2)
        t = random_series(L.space, params, 4, rng, degree=1, terms=2, max_total=2)
        assert series_bracket(L, s, t) == series_bracket(L, t, s)


def test_leibniz_lifts_to_series(rng):
    L, _, _ = build_toy3()
    d = L.differential_operator()
    params = ("a",)
    for _ in range(6):
        s = random_series(L.space, params, 4, rng, degree=1, terms=2, max_total=2)
        t = random_series(L.space, params, 4, rng, degree=1, terms=2, max_total=2)
        lhs = apply_operator(d, series_bracket(L, s, t))
        rhs = series_bracket(L, apply_operator(d, s), t) - series_bracket(
            L, s, apply_operator(d, t)
        )
        assert lhs == rhs


# -- operator application -----------------------------------------------------------


def test_apply_differential_to_series():
    L, _ = toy3_context()
    ty = single_term(L.space, ("t",), 3, (1,), 1, {"y": 1})
    assert apply_operator(L.differential_operator(), ty) == single_term(
        L.space, ("t",), 3, (1,), 2, {"u": 1}
    )


def test_projector_fixes_harmonic_series():
    L, H = toy3_context()
    tx = single_term(L.space, ("t",), 3, (1,), 1, {"x": 1})
    assert apply_operator(H.projector_operator(), tx) == tx


def test_green_kills_harmonic_coefficients():
    L, H = toy3_context()
    tv = single_term(L.space, ("t",), 3, (2,), 2, {"v": 1})
    assert apply_operator(H.green_operator(), tv).is_zero()


# -- substitution ----------------------------------------------------------------


def test_substitute_identity():
    L, _ = build_torus_constant_dgla(2, 2)
    params = ("t1", "t2")
    s = single_term(L.space, params, 3, (1, 1), 2, {"E11@12": 1})
    assert substitute_linear(s, Matrix.identity(2)) == s


def test_substitute_sign_flip_on_even_power():
    L, _ = toy3_context()
    s = single_term(L.space, ("t",), 3, (2,), 2, {"u": 1})
    assert substitute_linear(s, Matrix.diagonal([-1])) == s


def test_substitute_swap_on_symmetric_monomial():
    L, _ = build_torus_constant_dgla(2, 2)
    params = ("t1", "t2")
    s = single_term(L.space, params, 3, (1, 1), 2, {"E11@12": 1})
    swap = Matrix.from_rows([[0, 1], [1, 0]])
    assert substitute_linear(s, swap) == s


def test_substitution_composition(rng):
    L, _ = build_torus_constant_dgla(2, 2)
    params = ("t1", "t2", "t3")
    for _ in range(6):
        s = random_series(L.space, params, 3, rng, degree=1, terms=3, max_total=3)
        R = random_matrix(rng, 3, 3, density=0.8)
        R2 = random_matrix(rng, 3, 3, density=0.8)
        assert substitute_linear(substitute_linear(s, R), R2) == substitute_linear(s, R @ R2)


def test_substitute_dimension_guard():
    L, _ = toy3_context()
    s = single_term(L.space, ("t",), 3, (1,), 1, {"x": 1})
    with pytest.raises(InputError):
        substitute_linear(s, Matrix.identity(2))


# -- evaluation ------------------------------------------------------------------


def test_evaluate_at_origin_is_zero():
    L, _ = toy3_context()
    s = single_term(L.space, ("t",), 3, (1,), 1, {"x": 1})
    assert evaluate_series(s, [qi(0)]).is_zero()


def test_evaluate_toy3_family_at_two():
    L, _ = toy3_context()
    alpha = single_term(L.space, ("t",), 3, (1,), 1, {"x": 1}) + single_term(
        L.space, ("t",), 3, (2,), 1, {"y": Fraction(-1, 2)}
    )
    got = evaluate_series(alpha, [qi(2)])
    expected = GradedElement(L.space, {1: [qi(2), qi(-2)]})
    assert got == expected


def test_evaluate_complex_point():
    L, _ = build_torus_constant_dgla(2, 2)
    params = ("t1", "t2")
    s = single_term(L.space, params, 3, (1, 1), 2, {"E11@12": 1})
    got = evaluate_series(s, [qi(1), qi(0, 1)])
    assert got == GradedElement.basis(L.space, 2, L.space.names(2).index("E11@12")).scale(qi(0, 1))


# -- serialization ----------------------------------------------------------------


def test_series_json_roundtrip_and_ordering(rng):
    L, _ = build_torus_constant_dgla(2, 2)
    params = ("t1", "t2")
    s = random_series(L.space, params, 4, rng, degree=1, terms=5)
    doc = series_to_json(s)
    exps = [tuple(t["exp"]) for t in doc["terms"]]
    assert exps == sorted(exps, key=lambda e: (sum(e), e))
    assert series_from_json(doc, L.space) == s


def test_series_json_rejects_constant_term():
    L, _ = toy3_context()
    doc = {
        "parameters": ["t"],
        "order": 2,
        "terms": [{"exp": [0], "degree": 1, "coeff": [["1", "0"], ["0", "0"]]}],
    }
    with pytest.raises(InputError, match="constant"):
        series_from_json(doc, L.space)


# -- scalar polynomials -------------------------------------------------------------


def test_poly_arithmetic_and_substitution():
    p = Poly(("t1", "t2"), 4, {(1, 0): qi(1), (0, 1): qi(2)})
    q = p * p
    assert q.coefficient((2, 0)) == qi(1)
    assert q.coefficient((1, 1)) == qi(4)
    assert q.coefficient((0, 2)) == qi(4)
    swap = Matrix.from_rows([[0, 1], [1, 0]])
    assert p.substitute_linear(swap) == Poly(("t1", "t2"), 4, {(0, 1): qi(1), (1, 0): qi(2)})
    assert p.evaluate([qi(3), qi(-1)]) == qi(1)
    assert p.derivative(1) == Poly(("t1", "t2"), 4, {(0, 0): qi(2)})


def test_poly_truncates_products():
    p = Poly(("t",), 2, {(2,): qi(1)})
    assert (p * p).is_zero()


def test_scale_poly_on_series():
    L, _ = toy3_context()
    s = single_term(L.space, ("t",), 3, (1,), 1, {"x": 1})
    p = Poly(("t",), 3, {(1,): qi(2)})
    assert s.scale_poly(p) == single_term(L.space, ("t",), 3, (2,), 1, {"x": 2})
