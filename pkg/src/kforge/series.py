"""Truncated multivariate polynomial arithmetic.

Two layers: Poly carries plain scalar coefficients (used for obstruction
coordinates), GradedSeries carries graded-element coefficients (used for
the deformation series itself). Deformation parameters are central: no
sign bookkeeping ever attaches to them, only to coefficient degrees.
Truncation order is fixed at creation and mixing orders is an error, so
obstruction terms can never be lost to a silent re-truncation.
"""

from __future__ import annotations

from .dgla import DgLa, GradedElement, GradedOperator, GradedSpace
from .errors import InputError
from .linalg import Matrix
from .scalars import ONE, ZERO, GaussianRational, qi, scalar_from_json, scalar_to_json

Exponent = tuple[int, ...]


def _grlex_key(exp: Exponent):
    return (sum(exp), exp)


def _check_context(a, b, what):
    if a.parameters != b.parameters:
        raise InputError(f"{what}: parameter lists differ")
    if a.order != b.order:
        raise InputError(f"{what}: truncation orders differ ({a.order} vs {b.order})")


class Poly:
    """Scalar-coefficient polynomial truncated at a fixed total order."""

    __slots__ = ("parameters", "order", "terms")

    def __init__(self, parameters, order, terms=None):
        if order < 0:
            raise InputError("truncation order must be non-negative")
        self.parameters = tuple(parameters)
        self.order = order
        cleaned = {}
        for exp, coeff in (terms or {}).items():
            exp = tuple(exp)
            if len(exp) != len(self.parameters) or any(e < 0 for e in exp):
                raise InputError(f"exponent {exp} does not fit {len(self.parameters)} parameters")
            if sum(exp) > order:
                continue
            coeff = qi(coeff)
            if coeff:
                cleaned[exp] = coeff
        self.terms = cleaned

    @classmethod
    def zero(cls, parameters, order):
        return cls(parameters, order)

    @classmethod
    def constant(cls, parameters, order, value):
        zero_exp = (0,) * len(parameters)
        return cls(parameters, order, {zero_exp: qi(value)})

    @classmethod
    def variable(cls, parameters, order, index, coeff=ONE):
        exp = [0] * len(parameters)
        exp[index] = 1
        return cls(parameters, order, {tuple(exp): coeff})

    def is_zero(self):
        return not self.terms

    def coefficient(self, exp) -> GaussianRational:
        return self.terms.get(tuple(exp), ZERO)

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: _grlex_key(kv[0]))

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return (
            self.parameters == other.parameters
            and self.order == other.order
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.parameters, self.order, tuple(self.sorted_terms())))

    def __add__(self, other):
        _check_context(self, other, "polynomial sum")
        out = dict(self.terms)
        for exp, c in other.terms.items():
            s = out.get(exp, ZERO) + c
            if s:
                out[exp] = s
            elif exp in out:
                del out[exp]
        return Poly(self.parameters, self.order, out)

    def __sub__(self, other):
        return self + other.scale(-ONE)

    def __neg__(self):
        return self.scale(-ONE)

    def scale(self, factor):
        factor = qi(factor)
        if not factor:
            return Poly(self.parameters, self.order)
        return Poly(self.parameters, self.order, {e: factor * c for e, c in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return self.scale(other)
        _check_context(self, other, "polynomial product")
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                exp = tuple(a + b for a, b in zip(e1, e2))
                if sum(exp) > self.order:
                    continue
                s = out.get(exp, ZERO) + c1 * c2
                if s:
                    out[exp] = s
                elif exp in out:
                    del out[exp]
        return Poly(self.parameters, self.order, out)

    def derivative(self, index) -> Poly:
        out = {}
        for exp, c in self.terms.items():
            e = exp[index]
            if e == 0:
                continue
            lowered = list(exp)
            lowered[index] = e - 1
            out[tuple(lowered)] = c * e
        return Poly(self.parameters, self.order, out)

    def substitute_linear(self, R: Matrix) -> Poly:
        """Formal substitution t <- R.t, re-expanded; exact on total degree."""
        forms = _linear_forms(self.parameters, self.order, R)
        out = Poly(self.parameters, self.order)
        for exp, c in self.terms.items():
            out = out + _monomial_image(forms, exp, self.parameters, self.order).scale(c)
        return out

    def evaluate(self, point) -> GaussianRational:
        if len(point) != len(self.parameters):
            raise InputError(f"expected {len(self.parameters)} coordinates, got {len(point)}")
        point = [qi(v) for v in point]
        total = ZERO
        for exp, c in self.terms.items():
            term = c
            for v, e in zip(point, exp):
                for _ in range(e):
                    term = term * v
            total = total + term
        return total

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for exp, c in self.sorted_terms():
            mono = "*".join(
                f"{name}^{e}" if e > 1 else name
                for name, e in zip(self.parameters, exp)
                if e
            )
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append(f"-{mono}")
            else:
                parts.append(f"({c})*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self):
        return f"Poly({self})"


def _linear_forms(parameters, order, R: Matrix):
    m = len(parameters)
    if (R.rows, R.cols) != (m, m):
        raise InputError(f"substitution matrix must be {m}x{m}, got {R.rows}x{R.cols}")
    forms = []
    for i in range(m):
        terms = {}
        for j, v in R.rowdata[i].items():
            exp = [0] * m
            exp[j] = 1
            terms[tuple(exp)] = v
        forms.append(Poly(parameters, order, terms))
    return forms


def _monomial_image(forms, exp, parameters, order) -> Poly:
    result = Poly.constant(parameters, order, ONE)
    for i, e in enumerate(exp):
        for _ in range(e):
            result = result * forms[i]
    return result


class GradedSeries:
    """A polynomial with graded-element coefficients, truncated at order N.

    Terms of total degree zero are forbidden (series live in the maximal
    ideal); zero coefficients are pruned on construction.
    """

    __slots__ = ("space", "parameters", "order", "terms")

    def __init__(self, space: GradedSpace, parameters, order, terms=None):
        if order < 1:
            raise InputError("series truncation order must be at least 1")
        self.space = space
        self.parameters = tuple(parameters)
        self.order = order
        cleaned = {}
        for exp, coeff in (terms or {}).items():
            exp = tuple(exp)
            if len(exp) != len(self.parameters) or any(e < 0 for e in exp):
                raise InputError(f"exponent {exp} does not fit {len(self.parameters)} parameters")
            total = sum(exp)
            if total == 0 and not coeff.is_zero():
                raise InputError("series may not carry a constant (degree-0) term")
            if total > order:
                continue
            if coeff.space != space:
                raise InputError("series coefficient lives on the wrong space")
            if not coeff.is_zero():
                cleaned[exp] = coeff
        self.terms = cleaned

    @classmethod
    def zero(cls, space, parameters, order):
        return cls(space, parameters, order)

    def is_zero(self):
        return not self.terms

    def coefficient(self, exp) -> GradedElement:
        got = self.terms.get(tuple(exp))
        return got if got is not None else GradedElement.zero(self.space)

    def sorted_exponents(self):
        return sorted(self.terms, key=_grlex_key)

    def coefficient_degrees(self):
        degrees = set()
        for coeff in self.terms.values():
            degrees.update(coeff.degrees())
        return sorted(degrees)

    def has_homogeneous_coefficients(self, degree) -> bool:
        return all(coeff.is_homogeneous(degree) for coeff in self.terms.values())

    def __eq__(self, other):
        if not isinstance(other, GradedSeries):
            return NotImplemented
        return (
            self.space == other.space
            and self.parameters == other.parameters
            and self.order == other.order
            and self.terms == other.terms
        )

    def __add__(self, other):
        self._require_context(other)
        out = dict(self.terms)
        for exp, coeff in other.terms.items():
            if exp in out:
                out[exp] = out[exp] + coeff
            else:
                out[exp] = coeff
        return GradedSeries(self.space, self.parameters, self.order, out)

    def __sub__(self, other):
        return self + other.scale(-ONE)

    def __neg__(self):
        return self.scale(-ONE)

    def scale(self, factor):
        factor = qi(factor)
        return GradedSeries(
            self.space,
            self.parameters,
            self.order,
            {exp: coeff.scale(factor) for exp, coeff in self.terms.items()},
        )

    def scale_poly(self, poly: Poly) -> GradedSeries:
        """Multiply by a scalar polynomial, truncating at the series order."""
        _check_context(self, poly, "series times polynomial")
        out = {}
        for e1, coeff in self.terms.items():
            for e2, c in poly.terms.items():
                exp = tuple(a + b for a, b in zip(e1, e2))
                if sum(exp) > self.order:
                    continue
                scaled = coeff.scale(c)
                if exp in out:
                    out[exp] = out[exp] + scaled
                else:
                    out[exp] = scaled
        return GradedSeries(self.space, self.parameters, self.order, out)

    def homogeneous_part(self, total_degree) -> GradedSeries:
        return GradedSeries(
            self.space,
            self.parameters,
            self.order,
            {exp: c for exp, c in self.terms.items() if sum(exp) == total_degree},
        )

    def linear_part(self) -> GradedSeries:
        return self.homogeneous_part(1)

    def max_total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def _require_context(self, other):
        if self.space != other.space:
            raise InputError("series live on different graded spaces")
        _check_context(self, other, "series operation")

    def __repr__(self):
        return f"GradedSeries(order={self.order}, terms={len(self.terms)})"


def series_bracket(L: DgLa, s: GradedSeries, t: GradedSeries) -> GradedSeries:
    """Bilinear extension of the bracket over term pairs, truncated.

    Parameters are central, so the only signs involved come from the
    coefficient degrees inside the element bracket.
    """
    s._require_context(t)
    if s.space != L.space:
        raise InputError("series does not match the algebra's space")
    out: dict[Exponent, GradedElement] = {}
    for e1, c1 in s.terms.items():
        d1 = sum(e1)
        for e2, c2 in t.terms.items():
            if d1 + sum(e2) > s.order:
                continue
            value = L.bracket(c1, c2)
            if value.is_zero():
                continue
            exp = tuple(a + b for a, b in zip(e1, e2))
            if exp in out:
                out[exp] = out[exp] + value
            else:
                out[exp] = value
    return GradedSeries(s.space, s.parameters, s.order, out)


def apply_operator(op: GradedOperator, s: GradedSeries) -> GradedSeries:
    """Coefficient-wise application of a graded operator."""
    if op.space != s.space:
        raise InputError("operator does not match the series' space")
    return GradedSeries(
        s.space,
        s.parameters,
        s.order,
        {exp: op.apply(coeff) for exp, coeff in s.terms.items()},
    )


def substitute_linear(s: GradedSeries, R: Matrix) -> GradedSeries:
    """Formal parameter substitution t <- R.t, re-expanded and truncated."""
    forms = _linear_forms(s.parameters, s.order, R)
    out: dict[Exponent, GradedElement] = {}
    for exp, coeff in s.terms.items():
        image = _monomial_image(forms, exp, s.parameters, s.order)
        for e2, c in image.terms.items():
            scaled = coeff.scale(c)
            if e2 in out:
                out[e2] = out[e2] + scaled
            else:
                out[e2] = scaled
    return GradedSeries(s.space, s.parameters, s.order, out)


def evaluate_series(s: GradedSeries, point) -> GradedElement:
    """Exact specialization at a parameter point."""
    if len(point) != len(s.parameters):
        raise InputError(f"expected {len(s.parameters)} coordinates, got {len(point)}")
    point = [qi(v) for v in point]
    total = GradedElement.zero(s.space)
    for exp, coeff in s.terms.items():
        factor = ONE
        for v, e in zip(point, exp):
            for _ in range(e):
                factor = factor * v
        if factor:
            total = total + coeff.scale(factor)
    return total


def weighted_derivative_sum(s: GradedSeries, linear_forms: list[Poly]) -> GradedSeries:
    """Sum over i of linear_forms[i] * ds/dt_i, assembled in one pass so the
    intermediate bare derivatives (which may have constant terms) never
    materialize as series."""
    if len(linear_forms) != len(s.parameters):
        raise InputError("one linear form per parameter is required")
    out: dict[Exponent, GradedElement] = {}
    for exp, coeff in s.terms.items():
        for i, e in enumerate(exp):
            if e == 0:
                continue
            lowered = list(exp)
            lowered[i] = e - 1
            base = Poly(s.parameters, s.order, {tuple(lowered): qi(e)})
            image = base * linear_forms[i]
            for e2, c in image.terms.items():
                scaled = coeff.scale(c)
                if e2 in out:
                    out[e2] = out[e2] + scaled
                else:
                    out[e2] = scaled
    return GradedSeries(s.space, s.parameters, s.order, out)


def linear_forms_from_matrix(parameters, order, R: Matrix) -> list[Poly]:
    """Row i gives the linear polynomial (R.t)_i."""
    return _linear_forms(parameters, order, R)


# -- serialization -----------------------------------------------------------


def series_to_json(s: GradedSeries) -> dict:
    terms = []
    for exp in s.sorted_exponents():
        coeff = s.terms[exp]
        for q in coeff.degrees():
            terms.append(
                {
                    "exp": list(exp),
                    "degree": q,
                    "coeff": [scalar_to_json(v) for v in coeff.component(q)],
                }
            )
    return {"parameters": list(s.parameters), "order": s.order, "terms": terms}


def series_from_json(document, space: GradedSpace, path="series") -> GradedSeries:
    if not isinstance(document, dict):
        raise InputError(f"{path}: expected a JSON object")
    params = document.get("parameters")
    if not isinstance(params, list) or not all(isinstance(p, str) for p in params):
        raise InputError(f"{path}.parameters: expected a list of names")
    order = document.get("order")
    if not isinstance(order, int) or order < 1:
        raise InputError(f"{path}.order: expected a positive integer")
    raw_terms = document.get("terms", [])
    if not isinstance(raw_terms, list):
        raise InputError(f"{path}.terms: expected an array")
    acc: dict[Exponent, GradedElement] = {}
    for idx, term in enumerate(raw_terms):
        where = f"{path}.terms[{idx}]"
        if not isinstance(term, dict):
            raise InputError(f"{where}: expected an object")
        exp = term.get("exp")
        if (
            not isinstance(exp, list)
            or len(exp) != len(params)
            or not all(isinstance(e, int) and e >= 0 for e in exp)
        ):
            raise InputError(f"{where}.exp: expected {len(params)} non-negative integers")
        if sum(exp) == 0:
            raise InputError(f"{where}: constant (degree-0) terms are not allowed")
        if sum(exp) > order:
            raise InputError(f"{where}: total degree {sum(exp)} exceeds order {order}")
        q = term.get("degree")
        if not isinstance(q, int) or not space.in_range(q):
            raise InputError(f"{where}.degree: {q} outside the graded range")
        coeff_raw = term.get("coeff")
        if not isinstance(coeff_raw, list) or len(coeff_raw) != space.dim(q):
            raise InputError(f"{where}.coeff: expected {space.dim(q)} scalars")
        vec = [scalar_from_json(v, f"{where}.coeff[{k}]") for k, v in enumerate(coeff_raw)]
        piece = GradedElement(space, {q: vec})
        key = tuple(exp)
        acc[key] = acc[key] + piece if key in acc else piece
    return GradedSeries(space, params, order, acc)


def poly_to_json(p: Poly) -> dict:
    return {
        "parameters": list(p.parameters),
        "order": p.order,
        "terms": [{"exp": list(exp), "coeff": scalar_to_json(c)} for exp, c in p.sorted_terms()],
    }


def poly_from_json(document, path="poly") -> Poly:
    if not isinstance(document, dict):
        raise InputError(f"{path}: expected a JSON object")
    params = document.get("parameters", [])
    order = document.get("order")
    if not isinstance(order, int) or order < 0:
        raise InputError(f"{path}.order: expected a non-negative integer")
    terms = {}
    for idx, term in enumerate(document.get("terms", [])):
        exp = tuple(term.get("exp", ()))
        coeff = scalar_from_json(term.get("coeff"), f"{path}.terms[{idx}].coeff")
        terms[exp] = terms.get(exp, ZERO) + coeff
    return Poly(params, order, terms)
