"""Finite-dimensional differential graded Lie algebras.

A dgLa here is a graded space with per-degree differential matrices and a
sparse table of bracket structure constants. Structure constants are stored
for *all* ordered basis pairs, so graded antisymmetry is a checkable axiom
rather than a baked-in convention; the validator reports each axiom with a
witness tuple on failure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InputError
from .linalg import Matrix, matrix_from_json, matrix_to_json
from .scalars import ONE, ZERO, GaussianRational, qi, scalar_from_json, scalar_to_json


@dataclass(frozen=True)
class GradedSpace:
    """Degrees min..max with a named basis in each degree."""

    min_degree: int
    max_degree: int
    dims: tuple[int, ...]
    basis_names: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        if self.min_degree > self.max_degree:
            raise InputError("min degree exceeds max degree")
        span = self.max_degree - self.min_degree + 1
        if len(self.dims) != span or len(self.basis_names) != span:
            raise InputError(f"expected {span} degree slots, got {len(self.dims)} dims")
        for q, names in zip(self.degrees(), self.basis_names):
            d = self.dim(q)
            if d < 0:
                raise InputError(f"degree {q}: negative dimension")
            if len(names) != d:
                raise InputError(f"degree {q}: {len(names)} basis names for dimension {d}")
            if len(set(names)) != d:
                raise InputError(f"degree {q}: duplicate basis names")

    def degrees(self):
        return range(self.min_degree, self.max_degree + 1)

    def in_range(self, q) -> bool:
        return self.min_degree <= q <= self.max_degree

    def dim(self, q) -> int:
        return self.dims[q - self.min_degree] if self.in_range(q) else 0

    def names(self, q):
        return self.basis_names[q - self.min_degree] if self.in_range(q) else ()

    def name(self, q, i) -> str:
        return self.basis_names[q - self.min_degree][i]

    def total_dim(self) -> int:
        return sum(self.dims)


def make_space(min_degree, max_degree, dims, basis_names=None) -> GradedSpace:
    """Build a GradedSpace; basis names default to g{degree}_{index}."""
    dims = tuple(dims)
    if basis_names is None:
        basis_names = tuple(
            tuple(f"g{q}_{i}" for i in range(d))
            for q, d in zip(range(min_degree, max_degree + 1), dims)
        )
    else:
        basis_names = tuple(tuple(names) for names in basis_names)
    return GradedSpace(min_degree, max_degree, dims, basis_names)


class GradedElement:
    """An element of a graded space: one coefficient vector per degree.

    Components are stored only for degrees with a nonzero coordinate, as
    tuples sized to the degree's dimension.
    """

    __slots__ = ("space", "components")

    def __init__(self, space: GradedSpace, components=None):
        self.space = space
        normalized = {}
        for q, vec in (components or {}).items():
            if not space.in_range(q):
                raise InputError(f"degree {q} outside graded range")
            if len(vec) != space.dim(q):
                raise InputError(f"degree {q}: component length {len(vec)} != dim {space.dim(q)}")
            vec = tuple(qi(v) for v in vec)
            if any(vec):
                normalized[q] = vec
        self.components = normalized

    @classmethod
    def zero(cls, space):
        return cls(space)

    @classmethod
    def basis(cls, space, q, i):
        vec = [ZERO] * space.dim(q)
        vec[i] = ONE
        return cls(space, {q: vec})

    def component(self, q):
        got = self.components.get(q)
        if got is not None:
            return list(got)
        return [ZERO] * self.space.dim(q)

    def is_zero(self):
        return not self.components

    def degrees(self):
        return sorted(self.components)

    def is_homogeneous(self, q) -> bool:
        return not self.components or set(self.components) == {q}

    def __add__(self, other):
        self._require_same_space(other)
        out = {}
        for q in set(self.components) | set(other.components):
            a = self.components.get(q)
            b = other.components.get(q)
            if a is None:
                out[q] = b
            elif b is None:
                out[q] = a
            else:
                out[q] = [x + y for x, y in zip(a, b)]
        return GradedElement(self.space, out)

    def __sub__(self, other):
        return self + other.scale(-ONE)

    def __neg__(self):
        return self.scale(-ONE)

    def scale(self, factor):
        factor = qi(factor)
        if not factor:
            return GradedElement(self.space)
        return GradedElement(
            self.space, {q: [factor * v for v in vec] for q, vec in self.components.items()}
        )

    def __eq__(self, other):
        if not isinstance(other, GradedElement):
            return NotImplemented
        return self.space == other.space and self.components == other.components

    def __hash__(self):
        return hash((id(self.space), tuple(sorted(self.components.items()))))

    def _require_same_space(self, other):
        if self.space != other.space:
            raise InputError("graded elements live on different spaces")

    def __repr__(self):
        return f"GradedElement({format_element(self)})"


def format_element(elt: GradedElement) -> str:
    """Human-readable rendering in terms of basis names, e.g. "u - 1/2*v"."""
    parts = []
    for q in elt.degrees():
        names = elt.space.names(q)
        for i, v in enumerate(elt.components[q]):
            if not v:
                continue
            if v == 1:
                parts.append(names[i])
            elif v == -1:
                parts.append(f"-{names[i]}")
            else:
                parts.append(f"({v})*{names[i]}")
    return " + ".join(parts).replace("+ -", "- ") if parts else "0"


class GradedOperator:
    """A degree-homogeneous linear map on a graded space.

    ``blocks[q]`` sends the degree-q component to degree q+shift; missing
    blocks are zero. Differentials, adjoints, projectors, Green operators
    and group generators are all carried in this form.
    """

    __slots__ = ("space", "shift", "blocks")

    def __init__(self, space: GradedSpace, shift: int, blocks):
        self.space = space
        self.shift = shift
        cleaned = {}
        for q, M in blocks.items():
            if not space.in_range(q):
                continue
            expected = (space.dim(q + shift), space.dim(q))
            if (M.rows, M.cols) != expected:
                raise InputError(
                    f"operator block at degree {q} has shape {M.rows}x{M.cols}, expected {expected[0]}x{expected[1]}"
                )
            if not M.is_zero():
                cleaned[q] = M
        self.blocks = cleaned

    @classmethod
    def identity(cls, space):
        return cls(space, 0, {q: Matrix.identity(space.dim(q)) for q in space.degrees()})

    @classmethod
    def zero(cls, space, shift=0):
        return cls(space, shift, {})

    def matrix(self, q) -> Matrix:
        got = self.blocks.get(q)
        if got is not None:
            return got
        return Matrix.zeros(self.space.dim(q + self.shift), self.space.dim(q))

    def apply(self, elt: GradedElement) -> GradedElement:
        if elt.space != self.space:
            raise InputError("operator and element live on different spaces")
        out: dict[int, list] = {}
        for q, vec in elt.components.items():
            target = q + self.shift
            if not self.space.in_range(target):
                continue
            image = self.matrix(q).apply(list(vec))
            if target in out:
                out[target] = [a + b for a, b in zip(out[target], image)]
            else:
                out[target] = image
        return GradedElement(self.space, out)

    def compose(self, other: GradedOperator) -> GradedOperator:
        """self after other."""
        if self.space != other.space:
            raise InputError("operators live on different spaces")
        shift = self.shift + other.shift
        blocks = {}
        for q in self.space.degrees():
            mid = q + other.shift
            if not self.space.in_range(mid):
                continue
            blocks[q] = self.matrix(mid) @ other.matrix(q)
        return GradedOperator(self.space, shift, blocks)

    def __add__(self, other):
        if self.space != other.space or self.shift != other.shift:
            raise InputError("cannot add operators of different shifts")
        return GradedOperator(
            self.space, self.shift, {q: self.matrix(q) + other.matrix(q) for q in self.space.degrees()}
        )

    def __sub__(self, other):
        return self + other.scale(-ONE)

    def scale(self, factor):
        return GradedOperator(
            self.space, self.shift, {q: M.scale(factor) for q, M in self.blocks.items()}
        )

    def __eq__(self, other):
        if not isinstance(other, GradedOperator):
            return NotImplemented
        return (
            self.space == other.space
            and self.shift == other.shift
            and self.blocks == other.blocks
        )

    def __hash__(self):
        return hash((self.shift, tuple(sorted((q, hash(M)) for q, M in self.blocks.items()))))

    def commutes_with(self, other) -> bool:
        return self.compose(other) == other.compose(self)

    def __repr__(self):
        return f"GradedOperator(shift={self.shift}, blocks={sorted(self.blocks)})"


BracketEntry = tuple[int, int, int, int, int, GaussianRational]


@dataclass(frozen=True)
class DgLa:
    """Graded space + differential + sparse bracket structure constants.

    Entry (p, i, q, j, k, c) means [e_i^(p), e_j^(q)] contains c * e_k^(p+q).
    Construction checks shapes and index ranges only; the algebra axioms are
    the validator's job.
    """

    space: GradedSpace
    differential: dict[int, Matrix]
    bracket_entries: tuple[BracketEntry, ...]
    _pairs: dict = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        space = self.space
        for q in space.degrees():
            M = self.differential.get(q)
            if M is None:
                object.__setattr__(
                    self,
                    "differential",
                    {**self.differential, q: Matrix.zeros(space.dim(q + 1), space.dim(q))},
                )
            elif (M.rows, M.cols) != (space.dim(q + 1), space.dim(q)):
                raise InputError(
                    f"differential at degree {q} has shape {M.rows}x{M.cols}, "
                    f"expected {space.dim(q + 1)}x{space.dim(q)}"
                )
        table: dict[tuple[int, int, int, int], dict[int, GaussianRational]] = {}
        entries = []
        for entry in self.bracket_entries:
            p, i, q, j, k, c = entry
            c = qi(c)
            for deg, idx, label in ((p, i, "left"), (q, j, "right")):
                if not space.in_range(deg):
                    raise InputError(f"bracket entry {entry[:5]}: {label} degree {deg} out of range")
                if not 0 <= idx < space.dim(deg):
                    raise InputError(f"bracket entry {entry[:5]}: {label} index {idx} out of range")
            if not space.in_range(p + q):
                raise InputError(
                    f"bracket entry {entry[:5]}: target degree {p + q} outside graded range"
                )
            if not 0 <= k < space.dim(p + q):
                raise InputError(f"bracket entry {entry[:5]}: target index {k} out of range")
            if not c:
                continue
            row = table.setdefault((p, i, q, j), {})
            s = row.get(k, ZERO) + c
            if s:
                row[k] = s
            elif k in row:
                del row[k]
        for key in sorted(table):
            if not table[key]:
                del table[key]
        for (p, i, q, j), row in sorted(table.items()):
            for k in sorted(row):
                entries.append((p, i, q, j, k, row[k]))
        object.__setattr__(self, "bracket_entries", tuple(entries))
        object.__setattr__(self, "_pairs", table)

    # -- structure access ---------------------------------------------------

    def differential_matrix(self, q) -> Matrix:
        got = self.differential.get(q)
        if got is not None:
            return got
        return Matrix.zeros(self.space.dim(q + 1), self.space.dim(q))

    def differential_operator(self) -> GradedOperator:
        return GradedOperator(self.space, 1, {q: self.differential_matrix(q) for q in self.space.degrees()})

    def bracket_basis(self, p, i, q, j) -> dict[int, GaussianRational]:
        return self._pairs.get((p, i, q, j), {})

    def has_zero_bracket(self) -> bool:
        return not self._pairs

    # -- operations ----------------------------------------------------------

    def bracket(self, a: GradedElement, b: GradedElement) -> GradedElement:
        """Bilinear extension of the structure constants."""
        if a.space != self.space or b.space != self.space:
            raise InputError("bracket arguments do not match the algebra's space")
        acc: dict[int, list] = {}
        for p, avec in a.components.items():
            for q, bvec in b.components.items():
                target = p + q
                if not self.space.in_range(target):
                    continue
                for i, av in enumerate(avec):
                    if not av:
                        continue
                    for j, bv in enumerate(bvec):
                        if not bv:
                            continue
                        row = self._pairs.get((p, i, q, j))
                        if not row:
                            continue
                        factor = av * bv
                        out = acc.get(target)
                        if out is None:
                            out = acc[target] = [ZERO] * self.space.dim(target)
                        for k, c in row.items():
                            out[k] = out[k] + factor * c
        return GradedElement(self.space, acc)

    def apply_differential(self, a: GradedElement) -> GradedElement:
        if a.space != self.space:
            raise InputError("element does not match the algebra's space")
        return self.differential_operator().apply(a)


# -- validation ---------------------------------------------------------------


@dataclass(frozen=True)
class AxiomCheck:
    name: str
    passed: bool
    witness: str | None = None
    defect: str | None = None
    skipped: bool = False


@dataclass(frozen=True)
class DglaReport:
    checks: tuple[AxiomCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name) -> AxiomCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def _basis_items(space):
    for q in space.degrees():
        for i in range(space.dim(q)):
            yield q, i


def _check_d_squared(L: DgLa) -> AxiomCheck:
    space = L.space
    for q in space.degrees():
        if not space.in_range(q + 2):
            continue
        M = L.differential_matrix(q + 1) @ L.differential_matrix(q)
        if M.is_zero():
            continue
        for j in range(M.cols):
            col = M.column_vector(j)
            if any(col):
                defect = GradedElement(space, {q + 2: col})
                return AxiomCheck(
                    "d_squared_zero",
                    False,
                    witness=f"d(d({space.name(q, j)}))",
                    defect=format_element(defect),
                )
    return AxiomCheck("d_squared_zero", True)


def _check_antisymmetry(L: DgLa) -> AxiomCheck:
    space = L.space
    keys = set(L._pairs)
    keys |= {(q, j, p, i) for (p, i, q, j) in L._pairs}
    for p, i, q, j in sorted(keys):
        forward = L._pairs.get((p, i, q, j), {})
        backward = L._pairs.get((q, j, p, i), {})
        sign = -ONE if (p * q) % 2 == 0 else ONE
        defect = {}
        for k in set(forward) | set(backward):
            d = forward.get(k, ZERO) - sign * backward.get(k, ZERO)
            if d:
                defect[k] = d
        if defect:
            vec = [ZERO] * space.dim(p + q)
            for k, v in defect.items():
                vec[k] = v
            rel = "+" if sign == ONE else "-"
            return AxiomCheck(
                "graded_antisymmetry",
                False,
                witness=f"[{space.name(p, i)}, {space.name(q, j)}] vs {rel}[{space.name(q, j)}, {space.name(p, i)}]",
                defect=format_element(GradedElement(space, {p + q: vec})),
            )
    return AxiomCheck("graded_antisymmetry", True)


def _check_jacobi(L: DgLa) -> AxiomCheck:
    space = L.space
    items = list(_basis_items(space))
    for p, i in items:
        for q, j in items:
            ab = L._pairs.get((p, i, q, j))
            for r, k in items:
                bc = L._pairs.get((q, j, r, k))
                ac = L._pairs.get((p, i, r, k))
                if not (ab or bc or ac):
                    continue
                a = GradedElement.basis(space, p, i)
                b = GradedElement.basis(space, q, j)
                c = GradedElement.basis(space, r, k)
                lhs = L.bracket(a, L.bracket(b, c))
                rhs = L.bracket(L.bracket(a, b), c)
                cross = L.bracket(b, L.bracket(a, c))
                rhs = rhs + (cross if (p * q) % 2 == 0 else -cross)
                defect = lhs - rhs
                if not defect.is_zero():
                    return AxiomCheck(
                        "graded_jacobi",
                        False,
                        witness=f"({space.name(p, i)}, {space.name(q, j)}, {space.name(r, k)})",
                        defect=format_element(defect),
                    )
    return AxiomCheck("graded_jacobi", True)


def _check_leibniz(L: DgLa) -> AxiomCheck:
    space = L.space
    d = L.differential_operator()
    items = list(_basis_items(space))
    d_of_basis = {
        (q, i): d.apply(GradedElement.basis(space, q, i)) for q, i in items
    }
    for p, i in items:
        a = GradedElement.basis(space, p, i)
        da = d_of_basis[(p, i)]
        for q, j in items:
            b = GradedElement.basis(space, q, j)
            lhs = d.apply(L.bracket(a, b))
            rhs = L.bracket(da, b)
            term = L.bracket(a, d_of_basis[(q, j)])
            rhs = rhs + (term if p % 2 == 0 else -term)
            defect = lhs - rhs
            if not defect.is_zero():
                return AxiomCheck(
                    "graded_leibniz",
                    False,
                    witness=f"({space.name(p, i)}, {space.name(q, j)})",
                    defect=format_element(defect),
                )
    return AxiomCheck("graded_leibniz", True)


def validate_dgla(L: DgLa, skip_jacobi: bool = False) -> DglaReport:
    """Check d^2 = 0, graded antisymmetry, graded Jacobi and graded Leibniz.

    Failures are report content, never exceptions; each failing axiom gets
    one witness basis tuple and the nonzero defect element. skip_jacobi
    marks the cubic-cost axiom as skipped for large bracket-free instances.
    """
    checks = [_check_d_squared(L), _check_antisymmetry(L)]
    if skip_jacobi and not L.has_zero_bracket():
        checks.append(AxiomCheck("graded_jacobi", True, skipped=True))
    elif L.has_zero_bracket():
        checks.append(AxiomCheck("graded_jacobi", True))
    else:
        checks.append(_check_jacobi(L))
    checks.append(_check_leibniz(L))
    return DglaReport(tuple(checks))


# -- serialization --------------------------------------------------------------


def parse_space(document, path="dgla") -> GradedSpace:
    degrees = document.get("degrees")
    if not isinstance(degrees, dict) or "min" not in degrees or "max" not in degrees:
        raise InputError(f"{path}.degrees: expected an object with min and max")
    lo, hi = degrees["min"], degrees["max"]
    if not isinstance(lo, int) or not isinstance(hi, int) or lo > hi:
        raise InputError(f"{path}.degrees: min/max must be integers with min <= max")
    span = hi - lo + 1
    dims = document.get("dims")
    if not isinstance(dims, list) or len(dims) != span or not all(isinstance(d, int) and d >= 0 for d in dims):
        raise InputError(f"{path}.dims: expected {span} non-negative integers")
    basis = document.get("basis")
    if basis is not None:
        if not isinstance(basis, list) or len(basis) != span:
            raise InputError(f"{path}.basis: expected {span} name lists")
        for idx, names in enumerate(basis):
            if not isinstance(names, list) or not all(isinstance(n, str) for n in names):
                raise InputError(f"{path}.basis[{idx}]: expected a list of strings")
    try:
        return make_space(lo, hi, dims, basis)
    except InputError as exc:
        raise InputError(f"{path}.basis: {exc}") from exc


def parse_dgla(document) -> DgLa:
    """Decode the dgla JSON document; validates shapes, not axioms."""
    if not isinstance(document, dict):
        raise InputError("dgla: expected a JSON object")
    scalar_kind = document.get("scalar", "gaussian-rational")
    if scalar_kind != "gaussian-rational":
        raise InputError(f"dgla.scalar: unsupported scalar field {scalar_kind!r}")
    space = parse_space(document)
    diffs = document.get("differential", [])
    if not isinstance(diffs, list):
        raise InputError("dgla.differential: expected an array of matrices")
    expected = max(space.max_degree - space.min_degree, 0)
    if len(diffs) not in (0, expected):
        raise InputError(f"dgla.differential: expected {expected} matrices, found {len(diffs)}")
    differential = {}
    for offset, mat in enumerate(diffs):
        q = space.min_degree + offset
        differential[q] = matrix_from_json(
            mat, space.dim(q + 1), space.dim(q), path=f"dgla.differential[{offset}]"
        )
    entries = []
    bracket = document.get("bracket", [])
    if not isinstance(bracket, list):
        raise InputError("dgla.bracket: expected an array of entries")
    for idx, raw in enumerate(bracket):
        if not isinstance(raw, list) or len(raw) != 6:
            raise InputError(f"dgla.bracket[{idx}]: expected [p, i, q, j, k, scalar]")
        p, i, q, j, k = raw[:5]
        if not all(isinstance(v, int) for v in (p, i, q, j, k)):
            raise InputError(f"dgla.bracket[{idx}]: indices must be integers")
        c = scalar_from_json(raw[5], path=f"dgla.bracket[{idx}][5]")
        entries.append((p, i, q, j, k, c))
    try:
        return DgLa(space, differential, tuple(entries))
    except InputError as exc:
        raise InputError(f"dgla.bracket: {exc}") from exc


def emit_dgla(L: DgLa, metric=None) -> dict:
    """Canonical JSON form; deterministic entry ordering."""
    space = L.space
    doc = {
        "scalar": "gaussian-rational",
        "degrees": {"min": space.min_degree, "max": space.max_degree},
        "dims": list(space.dims),
        "basis": [list(names) for names in space.basis_names],
        "differential": [
            matrix_to_json(L.differential_matrix(q))
            for q in range(space.min_degree, space.max_degree)
        ],
        "bracket": [
            [p, i, q, j, k, scalar_to_json(c)] for (p, i, q, j, k, c) in L.bracket_entries
        ],
    }
    if metric is not None:
        doc["metric"] = [matrix_to_json(metric.gram[q]) for q in space.degrees()]
    return doc
