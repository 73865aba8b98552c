import pytest

from conftest import random_element, random_scalar
from kforge.builders import (
    build_gl2_odd_anticommutator,
    build_torus_constant_dgla,
    build_toy3,
    build_twisted_dolbeault,
)
from kforge.dgla import (
    DgLa,
    GradedElement,
    GradedOperator,
    emit_dgla,
    make_space,
    parse_dgla,
    validate_dgla,
)
from kforge.errors import InputError
from kforge.linalg import Matrix
from kforge.scalars import ONE, qi


def toy3_document():
    L, metric, _action = build_toy3()
    return emit_dgla(L, metric)


def name_index(space, q, name):
    return space.names(q).index(name)


def basis_by_name(space, q, name):
    return GradedElement.basis(space, q, name_index(space, q, name))


# -- parsing -------------------------------------------------------------------


def test_parse_toy3_document_dims():
    L = parse_dgla(toy3_document())
    assert (L.space.min_degree, L.space.max_degree) == (0, 2)
    assert L.space.dims == (0, 2, 2)
    assert L.space.names(1) == ("x", "y")


def test_parse_rejects_out_of_range_bracket_target():
    doc = toy3_document()
    # both arguments in top degree: the target degree 4 does not exist
    doc["bracket"] = doc["bracket"] + [[2, 0, 2, 0, 0, "1"]]
    with pytest.raises(InputError, match="target degree"):
        parse_dgla(doc)


def test_parse_rejects_bad_indices_with_path():
    doc = toy3_document()
    doc["bracket"] = [[1, 0, 1, 5, 0, "1"]]
    with pytest.raises(InputError, match="index 5"):
        parse_dgla(doc)
    doc = toy3_document()
    doc["differential"][1] = [["0", "0"], ["0", "0"], ["0", "0"]]
    with pytest.raises(InputError, match="differential"):
        parse_dgla(doc)


def test_parse_empty_dgla():
    L = parse_dgla({"degrees": {"min": 0, "max": 0}, "dims": [0], "basis": [[]]})
    assert L.space.total_dim() == 0
    assert validate_dgla(L).passed


def test_parse_rejects_duplicate_basis_names():
    with pytest.raises(InputError):
        parse_dgla({"degrees": {"min": 0, "max": 0}, "dims": [2], "basis": [["a", "a"]]})


def test_roundtrip_parse_emit():
    for L in (
        build_toy3()[0],
        build_torus_constant_dgla(2, 2)[0],
        build_twisted_dolbeault(1, qi(1, 1))[0],
    ):
        assert parse_dgla(emit_dgla(L)) == L


# -- validation ------------------------------------------------------------------


def test_toy3_passes_all_axioms():
    report = validate_dgla(build_toy3()[0])
    assert report.passed
    assert [c.name for c in report.checks] == [
        "d_squared_zero",
        "graded_antisymmetry",
        "graded_jacobi",
        "graded_leibniz",
    ]


def test_anticommutator_pitfall_fails_antisymmetry_with_witness():
    report = validate_dgla(build_gl2_odd_anticommutator()[0])
    anti = report.check("graded_antisymmetry")
    assert not anti.passed
    assert anti.witness == "[E11@1, E11@2] vs +[E11@2, E11@1]"
    assert anti.defect is not None and "E11@12" in anti.defect


def test_zero_bracket_zero_differential_passes():
    space = make_space(0, 1, (2, 2))
    L = DgLa(space, {}, ())
    assert validate_dgla(L).passed


def test_broken_d_squared_reported():
    space = make_space(0, 2, (1, 1, 1))
    L = DgLa(space, {0: Matrix.identity(1), 1: Matrix.identity(1)}, ())
    report = validate_dgla(L)
    check = report.check("d_squared_zero")
    assert not check.passed and check.defect is not None


def test_broken_leibniz_reported():
    # dy = u but [x, x] = u with dx = 0 forces d[x,x] = du = 0 while the
    # right-hand side stays 0; break it by making du nonzero instead.
    space = make_space(1, 3, (2, 2, 1))
    diff = {1: Matrix.from_rows([[0, 1], [0, 0]]), 2: Matrix.from_rows([[1, 0]])}
    entries = ((1, 0, 1, 0, 0, ONE),)  # [x, x] = u, nothing else
    L = DgLa(space, diff, entries)
    report = validate_dgla(L)
    assert not report.check("graded_leibniz").passed


def test_skip_jacobi_marks_skipped():
    L = build_torus_constant_dgla(2, 2)[0]
    report = validate_dgla(L, skip_jacobi=True)
    assert report.check("graded_jacobi").skipped
    assert report.passed


# -- bracket and differential -----------------------------------------------------


def test_bracket_gl2_commutator_example():
    L, _ = build_torus_constant_dgla(2, 2)
    space = L.space
    a = basis_by_name(space, 1, "E12@1")
    b = basis_by_name(space, 1, "E21@2")
    got = L.bracket(a, b)
    expected = basis_by_name(space, 2, "E11@12") - basis_by_name(space, 2, "E22@12")
    assert got == expected


def test_bracket_of_even_element_with_itself_vanishes():
    L, _ = build_torus_constant_dgla(2, 2)
    a = basis_by_name(L.space, 0, "E12") + basis_by_name(L.space, 0, "E21").scale(qi(3))
    assert L.bracket(a, a).is_zero()


def test_toy3_bracket_and_differential_fixture():
    L, _, _ = build_toy3()
    space = L.space
    x = basis_by_name(space, 1, "x")
    y = basis_by_name(space, 1, "y")
    u = basis_by_name(space, 2, "u")
    v = basis_by_name(space, 2, "v")
    assert L.bracket(x, y) == v
    assert L.bracket(x, x) == u
    assert L.bracket(y, y).is_zero()
    assert L.apply_differential(y) == u
    assert L.apply_differential(x).is_zero()


def test_differential_squared_vanishes_on_random_elements(rng):
    L, _ = build_torus_constant_dgla(2, 2)
    toy, _, _ = build_toy3()
    for algebra in (L, toy):
        for _ in range(10):
            a = random_element(algebra.space, rng)
            assert algebra.apply_differential(algebra.apply_differential(a)).is_zero()


def test_zero_differential_builder():
    L, _ = build_torus_constant_dgla(2, 2)
    a = random_element(L.space, __import__("random").Random(7))
    assert L.apply_differential(a).is_zero()


def test_bracket_bilinearity(rng):
    L, _ = build_torus_constant_dgla(2, 2)
    for _ in range(15):
        lam = random_scalar(rng)
        a = random_element(L.space, rng)
        a2 = random_element(L.space, rng)
        b = random_element(L.space, rng)
        lhs = L.bracket(a + a2.scale(lam), b)
        rhs = L.bracket(a, b) + L.bracket(a2, b).scale(lam)
        assert lhs == rhs


def naive_bracket(L, a, b):
    """Independent oracle: direct double loop over the raw constants list."""
    acc = {}
    for (p, i, q, j, k, c) in L.bracket_entries:
        av = a.component(p)[i] if L.space.dim(p) else None
        bv = b.component(q)[j] if L.space.dim(q) else None
        if av is None or bv is None or not av or not bv:
            continue
        target = p + q
        vec = acc.setdefault(target, [qi(0)] * L.space.dim(target))
        vec[k] = vec[k] + av * bv * c
    return GradedElement(L.space, acc)


def test_bracket_against_double_loop_oracle(rng):
    for L in (build_torus_constant_dgla(2, 2)[0], build_toy3()[0]):
        for _ in range(10):
            a = random_element(L.space, rng)
            b = random_element(L.space, rng)
            assert L.bracket(a, b) == naive_bracket(L, a, b)


def test_degree_one_self_bracket_pair_decomposition(rng):
    # [a, a] computed through the table equals the ordered-pair expansion
    # 2 * sum_{i<j} a_i a_j [e_i, e_j] + sum_i a_i^2 [e_i, e_i] when the
    # odd-odd constants are symmetric.
    L, _ = build_torus_constant_dgla(2, 2)
    space = L.space
    for _ in range(8):
        a = random_element(space, rng, degree=1)
        coeffs = a.component(1)
        acc = GradedElement.zero(space)
        n = space.dim(1)
        for i in range(n):
            for j in range(n):
                if i < j:
                    term = L.bracket(
                        GradedElement.basis(space, 1, i), GradedElement.basis(space, 1, j)
                    ).scale(coeffs[i] * coeffs[j] * qi(2))
                    acc = acc + term
                elif i == j:
                    acc = acc + L.bracket(
                        GradedElement.basis(space, 1, i), GradedElement.basis(space, 1, i)
                    ).scale(coeffs[i] * coeffs[i])
        assert acc == L.bracket(a, a)


def test_bracket_shape_mismatch():
    L, _ = build_torus_constant_dgla(2, 2)
    other = make_space(0, 1, (1, 1))
    with pytest.raises(InputError):
        L.bracket(GradedElement.zero(other), GradedElement.zero(other))


# -- operators ---------------------------------------------------------------------


def test_operator_compose_and_apply(rng):
    L, _, _ = build_toy3()
    d = L.differential_operator()
    dd = d.compose(d)
    a = random_element(L.space, rng)
    assert dd.apply(a).is_zero()
    ident = GradedOperator.identity(L.space)
    assert ident.compose(d) == d
    assert d.compose(ident) == d


def test_operator_shape_guard():
    L, _, _ = build_toy3()
    with pytest.raises(InputError):
        GradedOperator(L.space, 0, {1: Matrix.zeros(3, 2)})
