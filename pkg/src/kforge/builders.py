"""Constructors for the example algebras, metrics and actions.

The torus family is the constant-form sub-algebra of bundle endomorphisms:
an honest finite sub-dgLa that already contains every harmonic element and
is closed under all the operators we build, so the germ computed inside it
is the full one. Naive mode cutoffs would instead break Leibniz/Jacobi
(products escape the cutoff), which is why the twisted mode-lattice builder
only ships the abelian line-bundle case: there the bracket vanishes and
truncation is harmless. Mode eigenvalues are kept in Z[i] (m1 + i*m2 + c)
rather than the analytic normalization; a uniform rescaling of the
differential only rescales parameters, never the germ.
"""

from __future__ import annotations

from itertools import combinations

from .dgla import DgLa, GradedOperator, make_space
from .equivariance import GroupAction
from .errors import InputError, ResourceGuardError
from .hodge import MetricData, identity_metric
from .linalg import Matrix, inverse
from .scalars import ONE, GaussianRational, qi

TORUS_MAX_DIM = 2
TORUS_MAX_RANK = 4
TWISTED_MAX_CUTOFF = 8


def _merge_sign(left, right):
    """Sign of sorting the concatenation of two disjoint sorted index sets."""
    inversions = 0
    for a in left:
        for b in right:
            if a > b:
                inversions += 1
    return -1 if inversions % 2 else 1


def _subsets(n, q):
    return list(combinations(range(1, n + 1), q))


def _torus_space(n, r):
    names = []
    dims = []
    for q in range(n + 1):
        level = []
        for subset in _subsets(n, q):
            suffix = "@" + "".join(str(s) for s in subset) if subset else ""
            for a in range(1, r + 1):
                for b in range(1, r + 1):
                    level.append(f"E{a}{b}{suffix}")
        names.append(level)
        dims.append(len(level))
    return make_space(0, n, dims, names)


def _torus_bracket_entries(n, r, odd_odd_plus=False):
    """[A@S, B@T] = sign(S,T) (AB - (-1)^{|S||T|} BA) @ (S u T) on matrix units.

    odd_odd_plus flips the sign of the BA term on odd-odd pairs, producing
    the anticommutator misreading kept as a validator regression fixture.
    """
    entries = []
    subsets = {q: _subsets(n, q) for q in range(n + 1)}
    index_of = {}
    for q in range(n + 1):
        for si, subset in enumerate(subsets[q]):
            for a in range(r):
                for b in range(r):
                    index_of[(subset, a, b)] = si * r * r + a * r + b
    for p in range(n + 1):
        for S in subsets[p]:
            for q in range(n + 1 - p):
                for T in subsets[q]:
                    if set(S) & set(T):
                        continue
                    union = tuple(sorted(S + T))
                    sign = _merge_sign(S, T)
                    # The reversal sign of the second wedge cancels the
                    # grading sign, so the BA term is negative for every
                    # pair; the pitfall variant forgets the reversal on
                    # odd-odd pairs and turns it into an anticommutator.
                    ba_sign = 1 if odd_odd_plus and (p * q) % 2 == 1 else -1
                    for a in range(r):
                        for b in range(r):
                            i = index_of[(S, a, b)]
                            for c in range(r):
                                for d in range(r):
                                    j = index_of[(T, c, d)]
                                    coeff = {}
                                    if b == c:
                                        k = index_of[(union, a, d)]
                                        coeff[k] = coeff.get(k, 0) + sign
                                    if d == a:
                                        k = index_of[(union, c, b)]
                                        coeff[k] = coeff.get(k, 0) + sign * ba_sign
                                    for k, v in coeff.items():
                                        if v:
                                            entries.append((p, i, q, j, k, qi(v)))
    return entries


def _check_torus_bounds(n, r):
    if n not in (1, 2):
        raise InputError(f"complex dimension must be 1 or 2, got {n}")
    if r < 1:
        raise InputError(f"rank must be positive, got {r}")
    if r > TORUS_MAX_RANK:
        raise ResourceGuardError(f"rank {r} exceeds the builder bound {TORUS_MAX_RANK}")


def build_torus_constant_dgla(n, r):
    """Constant-form endomorphism algebra: degrees 0..n, zero differential,
    dimension r^2 * binomial(n, q) per degree, identity Gram."""
    _check_torus_bounds(n, r)
    space = _torus_space(n, r)
    L = DgLa(space, {}, tuple(_torus_bracket_entries(n, r)))
    return L, identity_metric(space)


def build_gl2_odd_anticommutator():
    """The sign-pitfall fixture: rank 2, two odd directions, odd-odd bracket
    taken as an anticommutator. Fails graded antisymmetry by construction."""
    space = _torus_space(2, 2)
    L = DgLa(space, {}, tuple(_torus_bracket_entries(2, 2, odd_odd_plus=True)))
    return L, identity_metric(space)


def build_twisted_dolbeault(cutoff, twist):
    """Abelian mode-lattice complex: degrees 0 and 1, one mode per lattice
    point of [-M, M]^2, differential m1 + i*m2 + twist on each mode."""
    if cutoff < 0:
        raise InputError(f"cutoff must be non-negative, got {cutoff}")
    if cutoff > TWISTED_MAX_CUTOFF:
        raise ResourceGuardError(f"cutoff {cutoff} exceeds the builder bound {TWISTED_MAX_CUTOFF}")
    twist = qi(twist)
    modes = [(m1, m2) for m1 in range(-cutoff, cutoff + 1) for m2 in range(-cutoff, cutoff + 1)]
    modes.sort()
    names0 = [f"({m1},{m2})" for m1, m2 in modes]
    names1 = [f"({m1},{m2})@1" for m1, m2 in modes]
    space = make_space(0, 1, (len(modes), len(modes)), (names0, names1))
    eigen = [GaussianRational(m1, m2) + twist for m1, m2 in modes]
    L = DgLa(space, {0: Matrix.diagonal(eigen)}, ())
    return L, identity_metric(space)


def twisted_mode_kernel_count(cutoff, twist) -> int:
    """Closed-form count of lattice modes killed by the differential."""
    twist = qi(twist)
    target_re, target_im = -twist.re, -twist.im
    if target_re.denominator != 1 or target_im.denominator != 1:
        return 0
    m1, m2 = int(target_re), int(target_im)
    return 1 if abs(m1) <= cutoff and abs(m2) <= cutoff else 0


def build_toy3():
    """Minimal fixture with a third-order germ: degrees 0..2 with dims
    (0, 2, 2), dx = 0, dy = u, [x,x] = u, [x,y] = [y,x] = v.

    Ships with its sign action (x, v negated; y, u fixed), which all four
    axiom and action checks accept. The solved family is t*x - 1/2 t^2 y
    with obstruction -1/2 t^3 on the v coordinate; see
    docs/toy3-derivation.md for the hand recursion.
    """
    space = make_space(0, 2, (0, 2, 2), ((), ("x", "y"), ("u", "v")))
    differential = {
        0: Matrix.zeros(2, 0),
        1: Matrix.from_rows([[0, 1], [0, 0]]),
    }
    entries = (
        (1, 0, 1, 0, 0, ONE),  # [x, x] = u
        (1, 0, 1, 1, 1, ONE),  # [x, y] = v
        (1, 1, 1, 0, 1, ONE),  # [y, x] = v
    )
    L = DgLa(space, differential, entries)
    generator = GradedOperator(
        space,
        0,
        {
            0: Matrix.zeros(0, 0),
            1: Matrix.diagonal([-1, 1]),
            2: Matrix.diagonal([1, -1]),
        },
    )
    action = GroupAction(space, (generator,), declared_orders=(2,))
    return L, identity_metric(space), action


def build_conjugation_action(L: DgLa, h: Matrix) -> GroupAction:
    """Conjugation A -> h^-1 A h on the endomorphism factor, identity on the
    form factor, for any torus-constants algebra of matching rank."""
    space = L.space
    r2 = space.dim(0)
    r = 1
    while r * r < r2:
        r += 1
    if r * r != r2 or (h.rows, h.cols) != (r, r):
        raise InputError(
            f"conjugation needs an r x r matrix with r^2 = dim(degree 0); got {h.rows}x{h.cols} vs dim {r2}"
        )
    h_inv = inverse(h)  # raises InputError when singular
    conj = Matrix.zeros(r2, r2)
    for a in range(r):
        for b in range(r):
            for c in range(r):
                for d in range(r):
                    v = h_inv.entry(a, c) * h.entry(d, b)
                    if v:
                        conj.rowdata[a * r + b][c * r + d] = v
    blocks = {}
    for q in space.degrees():
        dim = space.dim(q)
        if dim % r2 != 0:
            raise InputError(f"degree {q} dimension {dim} is not a multiple of {r2}")
        block = Matrix.zeros(dim, dim)
        for s in range(dim // r2):
            base = s * r2
            for i in range(r2):
                for j, v in conj.rowdata[i].items():
                    block.rowdata[base + i][base + j] = v
        blocks[q] = block
    return GroupAction(space, (GradedOperator(space, 0, blocks),))


def conjugation_preserves_identity_gram(h: Matrix) -> bool:
    """h^dagger h = lambda * Id is exactly the condition for conjugation to
    preserve the entrywise pairing on matrix units."""
    product = h.conjugate_transpose() @ h
    scale = product.entry(0, 0)
    if not scale:
        return False
    return product == Matrix.identity(h.rows).scale(scale)
