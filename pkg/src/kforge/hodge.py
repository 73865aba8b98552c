"""Metric-dependent operators: adjoint, Laplacian, harmonic projection, Green.

Everything is built by exact linear solving so the splitting
Id = P + laplacian*G holds as a literal matrix identity in every degree.
The harmonic basis is the canonical echelon kernel basis of the Laplacian;
it is deliberately not orthonormalized (that would need square roots and
leave the field), so the projector goes through the Gram matrix of the
basis instead.
"""

from __future__ import annotations

from dataclasses import dataclass

from .dgla import DgLa, GradedOperator, GradedSpace
from .errors import InputError, InternalCheckError, MetricError
from .linalg import (
    Matrix,
    inverse,
    is_positive_definite_hermitian,
    kernel_basis,
    matrix_from_json,
    rank,
    solve_columns,
)


@dataclass(frozen=True)
class MetricData:
    """Per-degree Hermitian positive-definite Gram matrices."""

    space: GradedSpace
    gram: dict[int, Matrix]

    def gram_matrix(self, q) -> Matrix:
        got = self.gram.get(q)
        if got is not None:
            return got
        return Matrix.identity(self.space.dim(q))

    def pairing(self, q, x, y):
        """Hermitian pairing <x, y> = x^dagger . gram . y, conjugate-linear
        in the first slot."""
        gy = self.gram_matrix(q).apply(y)
        acc = None
        for a, b in zip(x, gy):
            term = a.conjugate() * b
            acc = term if acc is None else acc + term
        from .scalars import ZERO

        return acc if acc is not None else ZERO


def make_metric(space: GradedSpace, gram_by_degree=None, validate: bool = True) -> MetricData:
    """Assemble and (by default) admissibility-check a metric.

    Missing degrees default to the identity Gram.
    """
    gram = {}
    for q in space.degrees():
        M = (gram_by_degree or {}).get(q)
        if M is None:
            M = Matrix.identity(space.dim(q))
        if (M.rows, M.cols) != (space.dim(q), space.dim(q)):
            raise MetricError(
                f"metric at degree {q} has shape {M.rows}x{M.cols}, expected square of size {space.dim(q)}"
            )
        if validate:
            report = is_positive_definite_hermitian(M)
            if not report.accepted:
                raise MetricError(f"metric at degree {q} rejected: {report.witness}")
        gram[q] = M
    return MetricData(space, gram)


def identity_metric(space: GradedSpace) -> MetricData:
    return make_metric(space, validate=False)


def parse_metric(value, space: GradedSpace, path="metric") -> MetricData:
    """Decode the per-degree Gram list (dgla document key or standalone file)."""
    if isinstance(value, dict):
        value = value.get("metric")
    if value is None:
        return identity_metric(space)
    if not isinstance(value, list):
        raise InputError(f"{path}: expected an array with one Gram matrix per degree")
    span = space.max_degree - space.min_degree + 1
    if len(value) != span:
        raise InputError(f"{path}: expected {span} Gram matrices, found {len(value)}")
    gram = {}
    for offset, mat in enumerate(value):
        q = space.min_degree + offset
        gram[q] = matrix_from_json(mat, space.dim(q), space.dim(q), path=f"{path}[{offset}]")
    return make_metric(space, gram)


def metric_to_json(metric: MetricData):
    from .linalg import matrix_to_json

    return {"metric": [matrix_to_json(metric.gram_matrix(q)) for q in metric.space.degrees()]}


def adjoint_differential(L: DgLa, metric: MetricData) -> dict[int, Matrix]:
    """Metric adjoint of d, one matrix per degree q mapping q -> q-1.

    Defined by <d a, b> = <a, adjoint b>; concretely
    gram_{q-1} . adjoint_q = d_{q-1}^dagger . gram_q, solved exactly.
    """
    if metric.space != L.space:
        raise InputError("metric does not match the algebra's space")
    adjoint = {}
    for q in L.space.degrees():
        rows = L.space.dim(q - 1)
        if rows == 0:
            adjoint[q] = Matrix.zeros(0, L.space.dim(q))
            continue
        rhs = L.differential_matrix(q - 1).conjugate_transpose() @ metric.gram_matrix(q)
        solved = solve_columns(metric.gram_matrix(q - 1), rhs)
        if solved is None:
            raise MetricError(f"Gram matrix at degree {q - 1} is singular")
        adjoint[q] = solved
    return adjoint


@dataclass(frozen=True)
class HodgeData:
    """The full splitting package for one dgla + metric."""

    dgla: DgLa
    metric: MetricData
    adjoint: dict[int, Matrix]
    laplacian: dict[int, Matrix]
    harmonic_basis: dict[int, list]
    basis_matrix: dict[int, Matrix]
    coordinates: dict[int, Matrix]
    harmonic_projector: dict[int, Matrix]
    green: dict[int, Matrix]

    @property
    def space(self) -> GradedSpace:
        return self.dgla.space

    def harmonic_dims(self) -> dict[int, int]:
        return {q: len(self.harmonic_basis[q]) for q in self.space.degrees()}

    # -- operator views ------------------------------------------------------

    def differential_operator(self) -> GradedOperator:
        return self.dgla.differential_operator()

    def adjoint_operator(self) -> GradedOperator:
        return GradedOperator(self.space, -1, dict(self.adjoint))

    def laplacian_operator(self) -> GradedOperator:
        return GradedOperator(self.space, 0, dict(self.laplacian))

    def projector_operator(self) -> GradedOperator:
        return GradedOperator(self.space, 0, dict(self.harmonic_projector))

    def green_operator(self) -> GradedOperator:
        return GradedOperator(self.space, 0, dict(self.green))

    def correction_operator(self) -> GradedOperator:
        """adjoint after Green; the order-raising step of the recursion."""
        return self.adjoint_operator().compose(self.green_operator())

    def harmonic_coordinates(self, q, vector):
        """Coordinates of a ker-Laplacian vector in the harmonic basis."""
        return self.coordinates[q].apply(vector)

    # -- certification ---------------------------------------------------------

    def splitting_exact(self) -> bool:
        """Id = P + laplacian.G in every degree, exactly."""
        for q in self.space.degrees():
            n = self.space.dim(q)
            lhs = self.harmonic_projector[q] + self.laplacian[q] @ self.green[q]
            if lhs != Matrix.identity(n):
                return False
        return True

    def verify(self) -> dict[str, bool]:
        """Exact per-identity certification used by reports and tests."""
        space = self.space
        d = self.differential_operator()
        adj = self.adjoint_operator()
        green = self.green_operator()
        proj = self.projector_operator()
        out = {
            "splitting_exact": self.splitting_exact(),
            "projector_idempotent": all(
                self.harmonic_projector[q] @ self.harmonic_projector[q] == self.harmonic_projector[q]
                for q in space.degrees()
            ),
            "projector_self_adjoint": all(
                self.harmonic_projector[q].conjugate_transpose() @ self.metric.gram_matrix(q)
                == self.metric.gram_matrix(q) @ self.harmonic_projector[q]
                for q in space.degrees()
            ),
            "green_kills_harmonics": all(
                (self.green[q] @ self.harmonic_projector[q]).is_zero()
                and (self.harmonic_projector[q] @ self.green[q]).is_zero()
                for q in space.degrees()
            ),
            "green_commutes_with_differential": green.compose(d) == d.compose(green),
            "green_commutes_with_adjoint": green.compose(adj) == adj.compose(green),
            "projector_annihilates_exact": proj.compose(d) == GradedOperator.zero(self.space, 1)
            and adj.compose(proj) == GradedOperator.zero(self.space, -1),
            "green_laplacian_both_sides": all(
                self.green[q] @ self.laplacian[q] == self.laplacian[q] @ self.green[q]
                for q in space.degrees()
            ),
        }
        return out


def hodge_data(L: DgLa, metric: MetricData) -> HodgeData:
    """Construct adjoint, Laplacian, harmonic data and the Green operator.

    The Green operator solves laplacian.G = Id - P column-by-column and is
    then projected off the harmonics, which pins it down uniquely.
    """
    space = L.space
    adjoint = adjoint_differential(L, metric)
    laplacian = {}
    harmonic_basis = {}
    basis_matrix = {}
    coordinates = {}
    projector = {}
    green = {}
    for q in space.degrees():
        n = space.dim(q)
        d_q = L.differential_matrix(q)
        d_prev = L.differential_matrix(q - 1)
        adj_up = adjoint.get(q + 1, Matrix.zeros(n, space.dim(q + 1)))
        box = adj_up @ d_q + d_prev @ adjoint[q]
        laplacian[q] = box
        basis = kernel_basis(box)
        harmonic_basis[q] = basis
        B = Matrix.from_columns(basis, rows=n)
        basis_matrix[q] = B
        h = len(basis)
        if h == 0:
            coordinates[q] = Matrix.zeros(0, n)
            projector[q] = Matrix.zeros(n, n)
        else:
            gram_b = B.conjugate_transpose() @ metric.gram_matrix(q) @ B
            coords = solve_columns(gram_b, B.conjugate_transpose() @ metric.gram_matrix(q))
            if coords is None or rank(gram_b) != h:
                raise InternalCheckError(f"degree {q}: harmonic Gram matrix is singular")
            coordinates[q] = coords
            projector[q] = B @ coords
        co_exact = Matrix.identity(n) - projector[q]
        particular = solve_columns(box, co_exact)
        if particular is None:
            raise InternalCheckError(f"degree {q}: Id - P is not in the Laplacian's image")
        green[q] = particular - projector[q] @ particular
    return HodgeData(
        dgla=L,
        metric=metric,
        adjoint=adjoint,
        laplacian=laplacian,
        harmonic_basis=harmonic_basis,
        basis_matrix=basis_matrix,
        coordinates=coordinates,
        harmonic_projector=projector,
        green=green,
    )


def betti_numbers(L: DgLa) -> dict[int, int]:
    """Metric-free cohomology dimensions: dim ker d_q - rank d_{q-1}."""
    out = {}
    for q in L.space.degrees():
        n = L.space.dim(q)
        out[q] = (n - rank(L.differential_matrix(q))) - rank(L.differential_matrix(q - 1))
    return out
