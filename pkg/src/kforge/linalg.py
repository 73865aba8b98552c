"""Exact linear algebra over the Gaussian rationals.

Matrices are stored sparsely (one dict of nonzero entries per row) so that
the large diagonal operators coming out of the mode-lattice builders stay
cheap, while small dense systems go through the same code path. All basis
and solution ambiguity is fixed by the reduced row echelon form, which is
unique, so identical inputs always produce identical outputs.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InputError
from .scalars import ONE, ZERO, GaussianRational, qi


class Matrix:
    """Immutable-by-convention sparse matrix of GaussianRationals."""

    __slots__ = ("rows", "cols", "rowdata")

    def __init__(self, rows, cols, rowdata=None):
        self.rows = rows
        self.cols = cols
        self.rowdata = rowdata if rowdata is not None else [dict() for _ in range(rows)]
        if len(self.rowdata) != rows:
            raise InputError(f"matrix built with {len(self.rowdata)} rows, expected {rows}")

    # -- constructors ------------------------------------------------------

    @classmethod
    def zeros(cls, rows, cols):
        return cls(rows, cols)

    @classmethod
    def identity(cls, n):
        return cls(n, n, [{i: ONE} for i in range(n)])

    @classmethod
    def diagonal(cls, entries):
        entries = [qi(e) for e in entries]
        n = len(entries)
        return cls(n, n, [({i: entries[i]} if entries[i] else {}) for i in range(n)])

    @classmethod
    def from_rows(cls, dense_rows, cols=None):
        """Build from dense row lists; entries coerced through qi()."""
        rows = len(dense_rows)
        if cols is None:
            cols = len(dense_rows[0]) if rows else 0
        rowdata = []
        for r, row in enumerate(dense_rows):
            if len(row) != cols:
                raise InputError(f"row {r} has {len(row)} entries, expected {cols}")
            rowdata.append({j: s for j, v in enumerate(row) if (s := qi(v))})
        return cls(rows, cols, rowdata)

    @classmethod
    def from_columns(cls, columns, rows=None):
        if rows is None:
            rows = len(columns[0]) if columns else 0
        rowdata = [dict() for _ in range(rows)]
        for j, col in enumerate(columns):
            if len(col) != rows:
                raise InputError(f"column {j} has {len(col)} entries, expected {rows}")
            for i, v in enumerate(col):
                s = qi(v)
                if s:
                    rowdata[i][j] = s
        return cls(rows, len(columns), rowdata)

    # -- inspection --------------------------------------------------------

    def entry(self, i, j) -> GaussianRational:
        return self.rowdata[i].get(j, ZERO)

    def row_vector(self, i):
        row = self.rowdata[i]
        return [row.get(j, ZERO) for j in range(self.cols)]

    def column_vector(self, j):
        return [self.rowdata[i].get(j, ZERO) for i in range(self.rows)]

    def to_rows(self):
        return [self.row_vector(i) for i in range(self.rows)]

    def is_zero(self):
        return all(not row for row in self.rowdata)

    def nnz(self):
        return sum(len(row) for row in self.rowdata)

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return (
            self.rows == other.rows
            and self.cols == other.cols
            and all(self.rowdata[i] == other.rowdata[i] for i in range(self.rows))
        )

    def __hash__(self):
        return hash((self.rows, self.cols, tuple(tuple(sorted(r.items())) for r in self.rowdata)))

    def __repr__(self):
        return f"Matrix({self.rows}x{self.cols}, nnz={self.nnz()})"

    # -- arithmetic --------------------------------------------------------

    def _require_same_shape(self, other):
        if self.rows != other.rows or self.cols != other.cols:
            raise InputError(f"shape mismatch: {self.rows}x{self.cols} vs {other.rows}x{other.cols}")

    def __add__(self, other):
        self._require_same_shape(other)
        rowdata = []
        for a, b in zip(self.rowdata, other.rowdata):
            row = dict(a)
            for j, v in b.items():
                s = row.get(j, ZERO) + v
                if s:
                    row[j] = s
                elif j in row:
                    del row[j]
            rowdata.append(row)
        return Matrix(self.rows, self.cols, rowdata)

    def __sub__(self, other):
        return self + other.scale(-ONE)

    def __neg__(self):
        return self.scale(-ONE)

    def scale(self, factor):
        factor = qi(factor)
        if not factor:
            return Matrix.zeros(self.rows, self.cols)
        return Matrix(
            self.rows, self.cols, [{j: factor * v for j, v in row.items()} for row in self.rowdata]
        )

    def __matmul__(self, other):
        if self.cols != other.rows:
            raise InputError(f"cannot compose {self.rows}x{self.cols} with {other.rows}x{other.cols}")
        rowdata = []
        for arow in self.rowdata:
            acc: dict[int, GaussianRational] = {}
            for k, a in arow.items():
                for j, b in other.rowdata[k].items():
                    s = acc.get(j, ZERO) + a * b
                    if s:
                        acc[j] = s
                    elif j in acc:
                        del acc[j]
            rowdata.append(acc)
        return Matrix(self.rows, other.cols, rowdata)

    def apply(self, vector):
        """Matrix–vector product on a dense list of scalars."""
        if len(vector) != self.cols:
            raise InputError(f"vector length {len(vector)} does not match {self.cols} columns")
        out = []
        for row in self.rowdata:
            acc = ZERO
            for j, v in row.items():
                acc = acc + v * vector[j]
            out.append(acc)
        return out

    def transpose(self):
        rowdata = [dict() for _ in range(self.cols)]
        for i, row in enumerate(self.rowdata):
            for j, v in row.items():
                rowdata[j][i] = v
        return Matrix(self.cols, self.rows, rowdata)

    def conjugate_transpose(self):
        rowdata = [dict() for _ in range(self.cols)]
        for i, row in enumerate(self.rowdata):
            for j, v in row.items():
                rowdata[j][i] = v.conjugate()
        return Matrix(self.cols, self.rows, rowdata)


def _rref_in_place(rowdata, cols, aug=None):
    """Reduce to RREF over columns [0, cols); the optional augmented rows
    receive the same row operations. Returns the pivot column list."""
    pivots = []
    pivot_row = 0
    nrows = len(rowdata)
    for col in range(cols):
        src = None
        for r in range(pivot_row, nrows):
            if col in rowdata[r]:
                src = r
                break
        if src is None:
            continue
        if src != pivot_row:
            rowdata[src], rowdata[pivot_row] = rowdata[pivot_row], rowdata[src]
            if aug is not None:
                aug[src], aug[pivot_row] = aug[pivot_row], aug[src]
        inv = ONE / rowdata[pivot_row][col]
        if inv != ONE:
            rowdata[pivot_row] = {j: inv * v for j, v in rowdata[pivot_row].items()}
            if aug is not None:
                aug[pivot_row] = {j: inv * v for j, v in aug[pivot_row].items()}
        prow = rowdata[pivot_row]
        paug = aug[pivot_row] if aug is not None else None
        for r in range(nrows):
            if r == pivot_row:
                continue
            factor = rowdata[r].get(col)
            if factor is None:
                continue
            target = rowdata[r]
            for j, v in prow.items():
                s = target.get(j, ZERO) - factor * v
                if s:
                    target[j] = s
                elif j in target:
                    del target[j]
            if aug is not None:
                taug = aug[r]
                for j, v in paug.items():
                    s = taug.get(j, ZERO) - factor * v
                    if s:
                        taug[j] = s
                    elif j in taug:
                        del taug[j]
        pivots.append(col)
        pivot_row += 1
        if pivot_row == nrows:
            break
    return pivots


def rank(A: Matrix) -> int:
    rowdata = [dict(r) for r in A.rowdata]
    return len(_rref_in_place(rowdata, A.cols))


def solve_linear(A: Matrix, b):
    """Solve A x = b exactly; None if inconsistent.

    Underdetermined systems return the canonical solution with all free
    variables (non-pivot columns of the RREF) set to zero.
    """
    if len(b) != A.rows:
        raise InputError(f"right-hand side length {len(b)} does not match {A.rows} rows")
    rowdata = [dict(r) for r in A.rowdata]
    aug = []
    for i, v in enumerate(b):
        s = qi(v)
        aug.append({0: s} if s else {})
    pivots = _rref_in_place(rowdata, A.cols, aug)
    x = [ZERO] * A.cols
    for r, col in enumerate(pivots):
        x[col] = aug[r].get(0, ZERO)
    # Rows beyond the pivot count must have zero right-hand side.
    for r in range(len(pivots), A.rows):
        if aug[r]:
            return None
    return x


def solve_columns(A: Matrix, B: Matrix) -> Matrix | None:
    """Solve A X = B column-by-column with one shared elimination.

    Same canonical free-variable convention as solve_linear; None if any
    column is inconsistent.
    """
    if A.rows != B.rows:
        raise InputError(f"row mismatch: {A.rows} vs {B.rows}")
    rowdata = [dict(r) for r in A.rowdata]
    aug = [dict(r) for r in B.rowdata]
    pivots = _rref_in_place(rowdata, A.cols, aug)
    for r in range(len(pivots), A.rows):
        if aug[r]:
            return None
    out = [dict() for _ in range(A.cols)]
    for r, col in enumerate(pivots):
        out[col] = dict(aug[r])
    return Matrix(A.cols, B.cols, out)


def kernel_basis(A: Matrix):
    """Exact null-space basis in reduced-echelon canonical form.

    One vector per free column f (in increasing order), with coordinate 1
    at f and -RREF[r, f] at each pivot column; empty iff A is injective.
    """
    rowdata = [dict(r) for r in A.rowdata]
    pivots = _rref_in_place(rowdata, A.cols)
    pivot_set = set(pivots)
    basis = []
    for f in range(A.cols):
        if f in pivot_set:
            continue
        v = [ZERO] * A.cols
        v[f] = ONE
        for r, col in enumerate(pivots):
            coeff = rowdata[r].get(f)
            if coeff is not None:
                v[col] = -coeff
        basis.append(v)
    return basis


def inverse(A: Matrix) -> Matrix:
    if A.rows != A.cols:
        raise InputError("only square matrices can be inverted")
    X = solve_columns(A, Matrix.identity(A.rows))
    if X is None or rank(A) != A.rows:
        raise InputError("matrix is singular")
    return X


def determinant(A: Matrix) -> GaussianRational:
    if A.rows != A.cols:
        raise InputError("determinant requires a square matrix")
    rowdata = [dict(r) for r in A.rowdata]
    n = A.rows
    det = ONE
    for col in range(n):
        src = None
        for r in range(col, n):
            if col in rowdata[r]:
                src = r
                break
        if src is None:
            return ZERO
        if src != col:
            rowdata[src], rowdata[col] = rowdata[col], rowdata[src]
            det = -det
        pivot = rowdata[col][col]
        det = det * pivot
        inv = ONE / pivot
        prow = rowdata[col]
        for r in range(col + 1, n):
            factor = rowdata[r].get(col)
            if factor is None:
                continue
            factor = factor * inv
            target = rowdata[r]
            for j, v in prow.items():
                s = target.get(j, ZERO) - factor * v
                if s:
                    target[j] = s
                elif j in target:
                    del target[j]
    return det


@dataclass(frozen=True)
class HermitianReport:
    """Outcome of the positive-definite Hermitian admissibility check."""

    hermitian: bool
    minors_positive: bool
    witness: str | None = None

    @property
    def accepted(self) -> bool:
        return self.hermitian and self.minors_positive


def is_positive_definite_hermitian(H: Matrix) -> HermitianReport:
    """Exact admissibility check: H = H^† and all leading principal minors
    real and positive."""
    if H.rows != H.cols:
        raise InputError("Hermitian check requires a square matrix")
    for i in range(H.rows):
        for j, v in H.rowdata[i].items():
            if H.entry(j, i) != v.conjugate():
                return HermitianReport(
                    hermitian=False,
                    minors_positive=False,
                    witness=f"entry ({j + 1},{i + 1}) must be {v.conjugate()} to mirror ({i + 1},{j + 1})",
                )
    for k in range(1, H.rows + 1):
        block = Matrix(k, k, [{j: v for j, v in H.rowdata[i].items() if j < k} for i in range(k)])
        minor = determinant(block)
        if minor.im != 0 or minor.re <= 0:
            return HermitianReport(
                hermitian=True,
                minors_positive=False,
                witness=f"leading principal minor {k} is {minor}, not positive",
            )
    return HermitianReport(hermitian=True, minors_positive=True)


def matrix_from_json(value, rows, cols, path="matrix") -> Matrix:
    """Decode a row-major nested array of scalar encodings with fixed shape."""
    from .scalars import scalar_from_json

    if not isinstance(value, list):
        raise InputError(f"{path}: expected an array of rows")
    if len(value) != rows:
        raise InputError(f"{path}: expected {rows} rows, found {len(value)}")
    rowdata = []
    for i, row in enumerate(value):
        if not isinstance(row, list) or len(row) != cols:
            raise InputError(f"{path}[{i}]: expected a row of {cols} scalars")
        entries = {}
        for j, cell in enumerate(row):
            s = scalar_from_json(cell, f"{path}[{i}][{j}]")
            if s:
                entries[j] = s
        rowdata.append(entries)
    return Matrix(rows, cols, rowdata)


def matrix_to_json(A: Matrix):
    from .scalars import scalar_to_json

    return [[scalar_to_json(A.entry(i, j)) for j in range(A.cols)] for i in range(A.rows)]
