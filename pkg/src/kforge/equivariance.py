"""Group actions on dgLas and the equivariance certificates.

Finite groups are carried by their generator matrices per degree and can be
averaged against (closure by exact breadth-first products); positive-
dimensional symmetry enters only through derivations, for which the
finite-group statements linearize to chain-rule identities. Every check in
this module is an exact pass/fail; there are no tolerances anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .dgla import DgLa, GradedElement, GradedOperator, GradedSpace, format_element
from .errors import InputError, InternalCheckError, ResourceGuardError
from .hodge import HodgeData, MetricData, make_metric
from .kuranishi import KuranishiFamily
from .linalg import Matrix, matrix_from_json, matrix_to_json, rank, solve_linear
from .scalars import ONE, ZERO, qi
from .series import (
    GradedSeries,
    Poly,
    apply_operator,
    linear_forms_from_matrix,
    substitute_linear,
    weighted_derivative_sum,
)


@dataclass(frozen=True)
class GroupAction:
    """Finitely many invertible generators acting degree-wise."""

    space: GradedSpace
    generators: tuple[GradedOperator, ...]
    declared_orders: tuple[int, ...] | None = None

    def __post_init__(self):
        for g in self.generators:
            if g.space != self.space or g.shift != 0:
                raise InputError("generators must be degree-preserving maps on the action's space")
        if self.declared_orders is not None and len(self.declared_orders) != len(self.generators):
            raise InputError("declared orders must match the generator count")


@dataclass(frozen=True)
class InfinitesimalAction:
    """Derivations standing in for positive-dimensional symmetry."""

    space: GradedSpace
    derivations: tuple[GradedOperator, ...]

    def __post_init__(self):
        for x in self.derivations:
            if x.space != self.space or x.shift != 0:
                raise InputError("derivations must be degree-preserving maps on the action's space")


@dataclass(frozen=True)
class ConditionCheck:
    name: str
    generator: int
    passed: bool
    witness: str | None = None


@dataclass(frozen=True)
class ActionReport:
    kind: str
    checks: tuple[ConditionCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def named(self, name):
        return [c for c in self.checks if c.name == name]

    @property
    def metric_invariant(self) -> bool:
        found = self.named("metric_invariance")
        return bool(found) and all(c.passed for c in found)


def _bracket_preserved(L: DgLa, g: GradedOperator):
    """g[a, b] = [ga, gb] over all basis pairs; returns a witness or None."""
    space = L.space
    images = {
        (q, i): g.apply(GradedElement.basis(space, q, i))
        for q in space.degrees()
        for i in range(space.dim(q))
    }
    for (p, i), ga in images.items():
        for (q, j), gb in images.items():
            if not space.in_range(p + q):
                continue
            row = L.bracket_basis(p, i, q, j)
            vec = [ZERO] * space.dim(p + q)
            for k, c in row.items():
                vec[k] = c
            lhs = g.apply(GradedElement(space, {p + q: vec}))
            rhs = L.bracket(ga, gb)
            defect = lhs - rhs
            if not defect.is_zero():
                return f"[{space.name(p, i)}, {space.name(q, j)}]: defect {format_element(defect)}"
    return None


def _derivation_property(L: DgLa, x: GradedOperator):
    """x[a, b] = [xa, b] + [a, xb] over all basis pairs."""
    space = L.space
    images = {
        (q, i): x.apply(GradedElement.basis(space, q, i))
        for q in space.degrees()
        for i in range(space.dim(q))
    }
    for (p, i), xa in images.items():
        a = GradedElement.basis(space, p, i)
        for (q, j), xb in images.items():
            if not space.in_range(p + q):
                continue
            b = GradedElement.basis(space, q, j)
            row = L.bracket_basis(p, i, q, j)
            vec = [ZERO] * space.dim(p + q)
            for k, c in row.items():
                vec[k] = c
            lhs = x.apply(GradedElement(space, {p + q: vec}))
            rhs = L.bracket(xa, b) + L.bracket(a, xb)
            defect = lhs - rhs
            if not defect.is_zero():
                return f"[{space.name(p, i)}, {space.name(q, j)}]: defect {format_element(defect)}"
    return None


def validate_action(
    L: DgLa,
    metric: MetricData,
    action: GroupAction | InfinitesimalAction,
    hodge: HodgeData | None = None,
) -> ActionReport:
    """Exhaustive exact report; failures are content, never exceptions.

    For metric-invariant finite generators (and skew derivations) the
    derived commutations with the Laplacian, projector and Green operator
    are certified as well whenever Hodge data is supplied.
    """
    if action.space != L.space:
        raise InputError("action does not match the algebra's space")
    checks: list[ConditionCheck] = []
    finite = isinstance(action, GroupAction)
    kind = "finite" if finite else "infinitesimal"
    maps = action.generators if finite else action.derivations
    d = L.differential_operator()
    for gi, g in enumerate(maps):
        if finite:
            bad = None
            for q in L.space.degrees():
                if rank(g.matrix(q)) != L.space.dim(q):
                    bad = f"degree {q} block is singular"
                    break
            checks.append(ConditionCheck("invertibility", gi, bad is None, bad))
        commutes = g.compose(d) == d.compose(g)
        checks.append(
            ConditionCheck(
                "differential_commutation", gi, commutes, None if commutes else "g.d != d.g"
            )
        )
        witness = _bracket_preserved(L, g) if finite else _derivation_property(L, g)
        name = "bracket_preservation" if finite else "derivation_property"
        checks.append(ConditionCheck(name, gi, witness is None, witness))
        metric_ok = True
        metric_witness = None
        for q in L.space.degrees():
            gram = metric.gram_matrix(q)
            gq = g.matrix(q)
            if finite:
                good = gq.conjugate_transpose() @ gram @ gq == gram
            else:
                good = (gq.conjugate_transpose() @ gram + gram @ gq).is_zero()
            if not good:
                metric_ok = False
                metric_witness = f"degree {q} Gram matrix is not preserved"
                break
        checks.append(ConditionCheck("metric_invariance", gi, metric_ok, metric_witness))
        if finite and action.declared_orders is not None:
            power = GradedOperator.identity(L.space)
            for _ in range(action.declared_orders[gi]):
                power = power.compose(g)
            ok = power == GradedOperator.identity(L.space)
            checks.append(
                ConditionCheck(
                    "declared_order", gi, ok, None if ok else "generator power is not the identity"
                )
            )
        if hodge is not None:
            for name_, op in (
                ("laplacian_commutation", hodge.laplacian_operator()),
                ("projector_commutation", hodge.projector_operator()),
                ("green_commutation", hodge.green_operator()),
            ):
                ok = g.compose(op) == op.compose(g)
                checks.append(ConditionCheck(name_, gi, ok, None if ok else f"g does not commute"))
    return ActionReport(kind, tuple(checks))


def group_closure(action: GroupAction, max_group_size: int) -> list[GradedOperator]:
    """All products of generators, by exact breadth-first multiplication."""
    identity = GradedOperator.identity(action.space)
    seen = {identity: None}
    frontier = [identity]
    while frontier:
        new = []
        for elt in frontier:
            for g in action.generators:
                candidate = elt.compose(g)
                if candidate not in seen:
                    if len(seen) >= max_group_size:
                        raise ResourceGuardError(
                            f"group closure exceeds the configured bound {max_group_size}"
                        )
                    seen[candidate] = None
                    new.append(candidate)
        frontier = new
    return list(seen)


def average_metric(
    metric: MetricData, action: GroupAction, max_group_size: int = 1024
) -> MetricData:
    """Replace the metric by its exact average over the generated group.

    The output is invariant under every group element and positive definite;
    an already-invariant metric is returned unchanged (each summand equals
    the original Gram matrix).
    """
    if action.space != metric.space:
        raise InputError("action does not match the metric's space")
    elements = group_closure(action, max_group_size)
    weight = qi(Fraction(1, len(elements)))
    gram = {}
    for q in metric.space.degrees():
        total = Matrix.zeros(metric.space.dim(q), metric.space.dim(q))
        base = metric.gram_matrix(q)
        for g in elements:
            gq = g.matrix(q)
            total = total + gq.conjugate_transpose() @ base @ gq
        gram[q] = total.scale(weight)
    return make_metric(metric.space, gram)


@dataclass(frozen=True)
class HarmonicAction:
    """A generator's matrices on the harmonic degree-1 and degree-2 spaces."""

    rho1: Matrix
    rho2: Matrix


def _restrict_to_harmonics(H: HodgeData, op: GradedOperator, q: int) -> Matrix:
    h = len(H.harmonic_basis.get(q, []))
    if h == 0:
        return Matrix.zeros(0, 0)
    B = H.basis_matrix[q]
    image = op.matrix(q) @ B
    rho = H.coordinates[q] @ image
    if B @ rho != image:
        raise InternalCheckError(
            f"degree {q}: the map does not preserve the harmonic space; "
            "was the metric actually invariant?"
        )
    return rho


def induced_harmonic_action(
    H: HodgeData, action: GroupAction | InfinitesimalAction
) -> list[HarmonicAction]:
    """Restrict each generator to the harmonic spaces in degrees 1 and 2."""
    maps = action.generators if isinstance(action, GroupAction) else action.derivations
    out = []
    for g in maps:
        rho1 = _restrict_to_harmonics(H, g, 1)
        rho2 = _restrict_to_harmonics(H, g, 2)
        if isinstance(action, GroupAction):
            for q, rho in ((1, rho1), (2, rho2)):
                if rho.rows and rank(rho) != rho.rows:
                    raise InternalCheckError(f"degree {q}: restricted generator is singular")
        out.append(HarmonicAction(rho1, rho2))
    return out


@dataclass(frozen=True)
class EquivarianceCheck:
    name: str
    generator: int
    passed: bool
    witness: str | None = None


@dataclass(frozen=True)
class EquivarianceReport:
    checks: tuple[EquivarianceCheck, ...]
    max_degree_checked: int

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def _first_mismatch(lhs: GradedSeries, rhs: GradedSeries):
    exps = sorted(set(lhs.terms) | set(rhs.terms), key=lambda e: (sum(e), e))
    for exp in exps:
        if lhs.coefficient(exp) != rhs.coefficient(exp):
            return exp
    return None


def _poly_mismatch(lhs: Poly, rhs: Poly):
    exps = sorted(set(lhs.terms) | set(rhs.terms), key=lambda e: (sum(e), e))
    for exp in exps:
        if lhs.coefficient(exp) != rhs.coefficient(exp):
            return exp
    return None


def _in_linear_span(target: Poly, generators) -> bool:
    """Exact membership of a polynomial in the linear span of others."""
    if target.is_zero():
        return True
    if not generators:
        return False
    monomials = sorted(
        {e for g in generators for e in g.terms} | set(target.terms),
        key=lambda e: (sum(e), e),
    )
    index = {e: r for r, e in enumerate(monomials)}
    A = Matrix.zeros(len(monomials), len(generators))
    for j, g in enumerate(generators):
        for e, c in g.terms.items():
            A.rowdata[index[e]][j] = c
    b = [target.coefficient(e) for e in monomials]
    return solve_linear(A, b) is not None


def check_family_equivariance(family: KuranishiFamily, action: GroupAction) -> EquivarianceReport:
    """Certify that solving and symmetry commute, generator by generator.

    (i) g applied to the series equals the series at transformed parameters;
    (ii) the obstruction coordinates transform by the harmonic degree-2
    representation; (iii) the ideal generator set is carried into its own
    linear span.
    """
    if action.space != family.dgla.space:
        raise InputError("action does not match the family's space")
    induced = induced_harmonic_action(family.hodge, action)
    checks: list[EquivarianceCheck] = []
    for gi, (g, rho) in enumerate(zip(action.generators, induced)):
        lhs = apply_operator(g, family.alpha)
        rhs = substitute_linear(family.alpha, rho.rho1)
        exp = _first_mismatch(lhs, rhs)
        checks.append(
            EquivarianceCheck(
                "series_equivariance",
                gi,
                exp is None,
                None if exp is None else f"monomial {exp}",
            )
        )
        ob_ok = True
        ob_witness = None
        transformed = [p.substitute_linear(rho.rho1) for p in family.obstruction]
        for r in range(len(family.obstruction)):
            combo = Poly.zero(family.parameters, family.order)
            for s_idx, p in enumerate(family.obstruction):
                c = rho.rho2.entry(r, s_idx)
                if c:
                    combo = combo + p.scale(c)
            exp = _poly_mismatch(transformed[r], combo)
            if exp is not None:
                ob_ok = False
                ob_witness = f"coordinate {r}, monomial {exp}"
                break
        checks.append(EquivarianceCheck("obstruction_equivariance", gi, ob_ok, ob_witness))
        ideal_ok = True
        ideal_witness = None
        for gen in family.ideal_generators:
            image = gen.substitute_linear(rho.rho1)
            if not _in_linear_span(image, list(family.ideal_generators)):
                ideal_ok = False
                ideal_witness = f"image of {gen} leaves the generator span"
                break
        checks.append(EquivarianceCheck("ideal_stability", gi, ideal_ok, ideal_witness))
    return EquivarianceReport(tuple(checks), max_degree_checked=family.order)


def check_infinitesimal_equivariance(
    family: KuranishiFamily, action: InfinitesimalAction
) -> EquivarianceReport:
    """Linearized equivariance: the derivation applied to the series equals
    the parameter vector field (induced on the harmonic space) applied to it,
    and likewise for the obstruction coordinates.

    Gated on the exact operator facts the identity actually needs: the
    derivation must commute with the projector and the Green operator.
    """
    if action.space != family.dgla.space:
        raise InputError("action does not match the family's space")
    H = family.hodge
    checks: list[EquivarianceCheck] = []
    induced = induced_harmonic_action(H, action)
    for xi, (x, rho) in enumerate(zip(action.derivations, induced)):
        for name, op in (
            ("projector_commutation", H.projector_operator()),
            ("green_commutation", H.green_operator()),
        ):
            ok = x.compose(op) == op.compose(x)
            checks.append(
                EquivarianceCheck(name, xi, ok, None if ok else "derivation does not commute")
            )
        forms = linear_forms_from_matrix(family.parameters, family.order, rho.rho1)
        lhs = apply_operator(x, family.alpha)
        rhs = weighted_derivative_sum(family.alpha, forms)
        exp = _first_mismatch(lhs, rhs)
        checks.append(
            EquivarianceCheck(
                "series_chain_rule", xi, exp is None, None if exp is None else f"monomial {exp}"
            )
        )
        ob_ok = True
        ob_witness = None
        for r, p in enumerate(family.obstruction):
            euler = Poly.zero(family.parameters, family.order)
            for i, form in enumerate(forms):
                euler = euler + p.derivative(i) * form
            combo = Poly.zero(family.parameters, family.order)
            for s_idx, q in enumerate(family.obstruction):
                c = rho.rho2.entry(r, s_idx)
                if c:
                    combo = combo + q.scale(c)
            exp = _poly_mismatch(combo, euler)
            if exp is not None:
                ob_ok = False
                ob_witness = f"coordinate {r}, monomial {exp}"
                break
        checks.append(EquivarianceCheck("obstruction_chain_rule", xi, ob_ok, ob_witness))
    return EquivarianceReport(tuple(checks), max_degree_checked=family.order)


# -- serialization ----------------------------------------------------------


def parse_action(document, space: GradedSpace, path="action") -> GroupAction | InfinitesimalAction:
    if not isinstance(document, dict):
        raise InputError(f"{path}: expected a JSON object")
    kind = document.get("kind")
    if kind not in ("finite", "infinitesimal"):
        raise InputError(f"{path}.kind: expected 'finite' or 'infinitesimal'")
    key = "generators" if kind == "finite" else "derivations"
    raw = document.get(key)
    if not isinstance(raw, list) or not raw:
        raise InputError(f"{path}.{key}: expected a non-empty array")
    span = space.max_degree - space.min_degree + 1
    ops = []
    for gi, per_degree in enumerate(raw):
        if not isinstance(per_degree, list) or len(per_degree) != span:
            raise InputError(f"{path}.{key}[{gi}]: expected {span} per-degree matrices")
        blocks = {}
        for offset, mat in enumerate(per_degree):
            q = space.min_degree + offset
            blocks[q] = matrix_from_json(
                mat, space.dim(q), space.dim(q), path=f"{path}.{key}[{gi}][{offset}]"
            )
        ops.append(GradedOperator(space, 0, blocks))
    if kind == "infinitesimal":
        return InfinitesimalAction(space, tuple(ops))
    orders = document.get("orders")
    if orders is not None and (
        not isinstance(orders, list)
        or len(orders) != len(ops)
        or not all(isinstance(o, int) and o >= 1 for o in orders)
    ):
        raise InputError(f"{path}.orders: expected one positive integer per generator")
    return GroupAction(space, tuple(ops), tuple(orders) if orders is not None else None)


def emit_action(action: GroupAction | InfinitesimalAction) -> dict:
    finite = isinstance(action, GroupAction)
    maps = action.generators if finite else action.derivations
    doc = {
        "kind": "finite" if finite else "infinitesimal",
        ("generators" if finite else "derivations"): [
            [matrix_to_json(g.matrix(q)) for q in action.space.degrees()] for g in maps
        ],
    }
    if finite and action.declared_orders is not None:
        doc["orders"] = list(action.declared_orders)
    return doc
