from fractions import Fraction

import pytest

from conftest import random_series
from kforge.builders import build_torus_constant_dgla, build_toy3, build_twisted_dolbeault
from kforge.dgla import GradedElement
from kforge.errors import InputError, ResourceGuardError
from kforge.hodge import hodge_data
from kforge.kuranishi import (
    elliptic_residual,
    gauge_transform,
    kuranishi_map,
    mc_residual,
    slice_residual,
    solve_kuranishi,
)
from kforge.scalars import qi
from kforge.series import GradedSeries, Poly, evaluate_series
from kforge.linalg import Matrix


def context(builder, *args):
    L, metric = builder(*args)[:2]
    return L, hodge_data(L, metric)


def named_series(space, params, order, terms):
    """terms: {exp: {(degree, name): coeff}}"""
    acc = {}
    for exp, spec in terms.items():
        comp = {}
        for (q, name), c in spec.items():
            vec = comp.setdefault(q, [qi(0)] * space.dim(q))
            vec[space.names(q).index(name)] = qi(c)
        acc[tuple(exp)] = GradedElement(space, comp)
    return GradedSeries(space, params, order, acc)


def toy3_expected_alpha(space, order):
    return named_series(
        space,
        ("t1",),
        order,
        {(1,): {(1, "x"): 1}, (2,): {(1, "y"): Fraction(-1, 2)}},
    )


# -- the solved toy family ------------------------------------------------------


@pytest.mark.parametrize("order", [3, 5, 8])
def test_toy3_family_matches_hand_recursion(order):
    # frozen from docs/toy3-derivation.md
    L, H = context(build_toy3)
    family = solve_kuranishi(L, H, order)
    assert family.parameters == ("t1",)
    assert family.alpha == toy3_expected_alpha(L.space, order)
    expected_ideal = Poly(("t1",), order, {(3,): qi(Fraction(-1, 2))})
    assert family.obstruction == (expected_ideal,)
    assert family.ideal_generators == (expected_ideal,)
    assert all(family.diagnostics().values())


def test_toy3_order_stability():
    L, H = context(build_toy3)
    families = {n: solve_kuranishi(L, H, n) for n in (3, 5, 8)}
    for low, high in ((3, 5), (3, 8), (5, 8)):
        for exp, coeff in families[low].alpha.terms.items():
            assert families[high].alpha.coefficient(exp) == coeff
        for exp, coeff in families[high].alpha.terms.items():
            if sum(exp) <= low:
                assert families[low].alpha.coefficient(exp) == coeff


def test_toy3_mc_residual_is_pure_obstruction():
    L, H = context(build_toy3)
    family = solve_kuranishi(L, H, 5)
    residual = mc_residual(L, family.alpha)
    expected = named_series(L.space, ("t1",), 5, {(3,): {(2, "v"): Fraction(-1, 2)}})
    assert residual == expected
    assert residual == family.obstruction_series()


# -- the commuting-variety family --------------------------------------------------


def commutator_polynomials(params, order):
    """Independent oracle: entries of [A1, A2] for A1 = (t1..t4), A2 = (t5..t8),
    multiplied out by hand over 2x2 index loops."""
    def var(i):
        e = [0] * 8
        e[i] = 1
        return Poly(params, order, {tuple(e): qi(1)})

    A1 = [[var(0), var(1)], [var(2), var(3)]]
    A2 = [[var(4), var(5)], [var(6), var(7)]]
    out = []
    for a in range(2):
        for b in range(2):
            acc = Poly.zero(params, order)
            for k in range(2):
                acc = acc + A1[a][k] * A2[k][b] - A2[a][k] * A1[k][b]
            out.append(acc)
    return out


def test_commuting_variety_family():
    L, H = context(build_torus_constant_dgla, 2, 2)
    family = solve_kuranishi(L, H, 6)
    assert len(family.parameters) == 8
    assert family.alpha == family.alpha.linear_part()
    expected = commutator_polynomials(family.parameters, 6)
    assert list(family.obstruction) == expected
    assert all(gen.sorted_terms() and all(sum(e) == 2 for e, _ in gen.sorted_terms())
               for gen in family.ideal_generators)
    assert all(family.diagnostics().values())
    # direct substitution reproduces the generators: the residual of the
    # linear series is exactly the obstruction injected into degree 2
    assert mc_residual(L, family.alpha) == family.obstruction_series()


def test_commuting_point_evaluation_is_flat():
    L, H = context(build_torus_constant_dgla, 2, 2)
    family = solve_kuranishi(L, H, 6)
    # A1 = diag(1,2), A2 = diag(3,4): all ideal generators vanish
    point = [qi(1), qi(0), qi(0), qi(2), qi(3), qi(0), qi(0), qi(4)]
    assert all(g.evaluate(point).is_zero() for g in family.ideal_generators)
    assert evaluate_series(mc_residual(L, family.alpha), point).is_zero()


# -- degenerate families ---------------------------------------------------------


def test_abelian_family_is_smooth():
    L, H = context(build_twisted_dolbeault, 2, qi(0))
    family = solve_kuranishi(L, H, 4)
    assert family.parameters == ("t1",)
    assert family.alpha == family.alpha.linear_part()
    assert family.ideal_generators == ()
    assert family.notice is None
    assert all(family.diagnostics().values())


def test_empty_harmonic_space_gives_trivial_family_with_notice():
    L, H = context(build_twisted_dolbeault, 2, qi(Fraction(1, 2)))
    family = solve_kuranishi(L, H, 4)
    assert family.parameters == ()
    assert family.alpha.is_zero()
    assert family.notice is not None
    assert all(family.diagnostics().values())


def test_order_below_one_rejected():
    L, H = context(build_toy3)
    with pytest.raises(InputError):
        solve_kuranishi(L, H, 0)


def test_parameter_guard(monkeypatch):
    L, H = context(build_torus_constant_dgla, 2, 3)  # 18 harmonic directions
    family = solve_kuranishi(L, H, 2)
    assert family.warnings  # above the warn threshold
    with pytest.raises(ResourceGuardError):
        solve_kuranishi(L, H, 2, max_parameters=8)
    monkeypatch.setenv("KFORGE_MAX_PARAMS", "8")
    with pytest.raises(ResourceGuardError):
        solve_kuranishi(L, H, 2)
    monkeypatch.setenv("KFORGE_MAX_PARAMS", "64")
    assert solve_kuranishi(L, H, 2).parameters[0] == "t1"


# -- the deformation map -----------------------------------------------------------


def test_map_fixes_solved_families():
    for ctx in (context(build_toy3), context(build_torus_constant_dgla, 2, 2)):
        L, H = ctx
        family = solve_kuranishi(L, H, 5)
        assert kuranishi_map(L, H, family.alpha) == family.alpha.linear_part()


def test_map_on_zero_and_on_bare_linear_term():
    L, H = context(build_toy3)
    zero = GradedSeries.zero(L.space, ("t1",), 5)
    assert kuranishi_map(L, H, zero).is_zero()
    tx = named_series(L.space, ("t1",), 5, {(1,): {(1, "x"): 1}})
    got = kuranishi_map(L, H, tx)
    expected = named_series(
        L.space, ("t1",), 5, {(1,): {(1, "x"): 1}, (2,): {(1, "y"): Fraction(1, 2)}}
    )
    assert got == expected


# -- residuals ---------------------------------------------------------------------


def test_mc_residual_constant_form_example():
    L, H = context(build_torus_constant_dgla, 2, 2)
    s = named_series(L.space, ("t",), 4, {(1,): {(1, "E12@1"): 1, (1, "E21@2"): 1}})
    got = mc_residual(L, s)
    expected = named_series(L.space, ("t",), 4, {(2,): {(2, "E11@12"): 1, (2, "E22@12"): -1}})
    assert got == expected


def test_elliptic_residual_detects_missing_correction():
    L, H = context(build_toy3)
    tx = named_series(L.space, ("t1",), 5, {(1,): {(1, "x"): 1}})
    got = elliptic_residual(L, H, tx)
    expected = named_series(L.space, ("t1",), 5, {(2,): {(1, "y"): Fraction(1, 2)}})
    assert got == expected
    family = solve_kuranishi(L, H, 5)
    assert elliptic_residual(L, H, family.alpha).is_zero()


def test_elliptic_residual_trivial_when_differential_vanishes(rng):
    L, H = context(build_torus_constant_dgla, 2, 1)  # abelian: bracket vanishes too
    s = random_series(L.space, ("a", "b"), 3, rng, degree=1)
    assert elliptic_residual(L, H, s).is_zero()


def test_slice_residual_on_solved_family():
    L, H = context(build_toy3)
    family = solve_kuranishi(L, H, 5)
    harmonic, coexact, curvature_coexact = slice_residual(L, H, family.alpha)
    assert harmonic == family.alpha.linear_part()
    assert coexact.is_zero()
    assert curvature_coexact.is_zero()


def test_slice_residual_flags_points_off_the_slice():
    L, H = context(build_toy3)
    ty = named_series(L.space, ("t1",), 5, {(1,): {(1, "y"): 1}})
    harmonic, coexact, curvature_coexact = slice_residual(L, H, ty)
    assert harmonic.is_zero()
    assert coexact.is_zero()  # no degree-0 directions to land in
    assert curvature_coexact == ty  # adjoint of t*u is t*y


def test_slice_residual_of_zero():
    L, H = context(build_toy3)
    zero = GradedSeries.zero(L.space, ("t1",), 5)
    assert all(part.is_zero() for part in slice_residual(L, H, zero))


# -- fixed-point identity ------------------------------------------------------------


@pytest.mark.parametrize(
    "maker",
    [
        lambda: context(build_toy3),
        lambda: context(build_torus_constant_dgla, 2, 2),
        lambda: context(build_torus_constant_dgla, 1, 2),
        lambda: context(build_twisted_dolbeault, 1, qi(0)),
    ],
)
def test_fixed_point_identity_per_instance(maker):
    L, H = maker()
    family = solve_kuranishi(L, H, 5)
    assert family.diagnostics()["mc_fixed_point_identity"]


# -- gauge action -----------------------------------------------------------------


def test_gauge_with_zero_parameter_is_identity(rng):
    L, H = context(build_torus_constant_dgla, 2, 2)
    s = random_series(L.space, ("a", "b"), 4, rng, degree=1)
    xi = GradedSeries.zero(L.space, ("a", "b"), 4)
    assert gauge_transform(L, xi, s) == s


def test_gauge_matches_nilpotent_conjugation_oracle():
    # xi = s*E12 acting on t*E21@1; exp(s E12) E21 exp(-s E12) by hand
    L, H = context(build_torus_constant_dgla, 2, 2)
    params = ("s", "t")
    xi = named_series(L.space, params, 3, {(1, 0): {(0, "E12"): 1}})
    target = named_series(L.space, params, 3, {(0, 1): {(1, "E21@1"): 1}})
    got = gauge_transform(L, xi, target)
    expected = named_series(
        L.space,
        params,
        3,
        {
            (0, 1): {(1, "E21@1"): 1},
            (1, 1): {(1, "E11@1"): 1, (1, "E22@1"): -1},
            (2, 1): {(1, "E12@1"): -1},
        },
    )
    assert got == expected


def test_gauge_preserves_flat_series(rng):
    # a commuting linear series solves the flatness equation exactly; every
    # gauge transform of it must as well
    L, H = context(build_torus_constant_dgla, 2, 2)
    params = ("a", "b")
    flat = named_series(
        L.space,
        params,
        4,
        {(0, 1): {(1, "E11@1"): 1, (1, "E22@1"): 2, (1, "E11@2"): 3, (1, "E22@2"): 4}},
    )
    assert mc_residual(L, flat).is_zero()
    for _ in range(5):
        xi = random_series(L.space, params, 4, rng, degree=0, terms=2)
        moved = gauge_transform(L, xi, flat)
        assert mc_residual(L, moved).is_zero()


def test_gauge_inverse_roundtrip(rng):
    L, H = context(build_torus_constant_dgla, 2, 2)
    params = ("a", "b")
    for _ in range(10):
        xi = random_series(L.space, params, 3, rng, degree=0, terms=2)
        s = random_series(L.space, params, 3, rng, degree=1, terms=3)
        assert gauge_transform(L, xi.scale(qi(-1)), gauge_transform(L, xi, s)) == s


def test_gauge_rejects_wrong_degrees():
    L, H = context(build_torus_constant_dgla, 2, 2)
    params = ("a",)
    s = named_series(L.space, params, 3, {(1,): {(1, "E12@1"): 1}})
    with pytest.raises(InputError):
        gauge_transform(L, s, s)  # xi must live in degree 0
