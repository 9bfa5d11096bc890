"""Deformations of an invariant maximal isotropic subbundle.

The deformation parameter space is carved out of a fresh square matrix of
parameters by the pairing-compatibility constraint, the Maurer-Cartan system
is assembled from the algebroid differential and the Schouten bracket, gauge
directions (the image of d_L on degree one) are quotiented out by coordinate
dropping, deformed subbundles are built at ground parameter values, and the
type of each deformed structure is classified by exact rank computations.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .algebroid import InternalConsistencyError, IsotropicSubbundle, express_in_span
from .courant import GenSection, courant_bracket, pair
from .frame import ExteriorForm
from .scalar import (
    GR_HALF,
    GR_ONE,
    GR_ZERO,
    GaussianRational,
    Monomial,
    PolyScalar,
    Symbol,
    mat_rank,
    mat_rref,
    parameter,
    poly,
    solve_linear,
)


class DeformationError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Deformation maps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DeformationMap:
    """Map eps: L -> L-bar with its transported 2-form over L*.

    ``entries[i][j]`` is the coefficient of the i-th conjugate generator in
    the image of the j-th generator.  The transport convention is fixed once:
    the associated bilinear form pairs the first slot against the image of the
    second, eps~(x, y) = 2<x, eps(y)>.
    """

    sub: IsotropicSubbundle
    entries: tuple[tuple[PolyScalar, ...], ...]
    form: ExteriorForm
    parameters: tuple[Symbol, ...]

    @staticmethod
    def from_entries(
        sub: IsotropicSubbundle,
        entries: Sequence[Sequence[PolyScalar]],
        parameters: Sequence[Symbol] = (),
    ) -> "DeformationMap":
        n = sub.rank
        entries = tuple(tuple(poly(c) for c in row) for row in entries)
        if len(entries) != n or any(len(r) != n for r in entries):
            raise DeformationError("entry matrix has wrong shape")
        pair2 = [
            [
                pair(sub.generators[j], sub.conj_generators[i]).constant_value() * 2
                for i in range(n)
            ]
            for j in range(n)
        ]
        gram = [
            [
                sum(
                    (entries[i][k].scale(pair2[j][i]) for i in range(n)),
                    PolyScalar.zero(),
                )
                for k in range(n)
            ]
            for j in range(n)
        ]
        for j in range(n):
            for k in range(j, n):
                if not (gram[j][k] + gram[k][j]).is_zero():
                    raise DeformationError(
                        "pairing compatibility fails at "
                        f"({sub.names[j]}, {sub.names[k]})"
                    )
        data = {
            (j, k): gram[j][k] for j in range(n) for k in range(j + 1, n)
        }
        form = ExteriorForm.build(sub.lform_names, data)
        return DeformationMap(sub, entries, form, tuple(parameters))

    @staticmethod
    def from_form(sub: IsotropicSubbundle, form: ExteriorForm) -> "DeformationMap":
        """Recover the map from a degree-2 element of the exterior square of L*."""
        if form.degrees() not in (set(), {2}):
            raise DeformationError("deformation form must be homogeneous of degree 2")
        n = sub.rank
        hs = sub.theta_inverse_sections()
        h_coords = [h.constant_vector() for h in hs]
        entries = [[PolyScalar.zero() for _ in range(n)] for _ in range(n)]
        for k in range(n):
            unit = [
                PolyScalar.const(GR_ONE if a == k else GR_ZERO) for a in range(n)
            ]
            phi = form.interior(unit)
            amb = [PolyScalar.zero()] * (2 * sub.frame.dim)
            for a in range(n):
                c = phi.coefficient((a,))
                if c.is_zero():
                    continue
                for slot, hv in enumerate(h_coords[a]):
                    if not hv.is_zero():
                        amb[slot] = amb[slot] - c.scale(hv)
            coeffs = express_in_span(sub.conj_generators, amb)
            if coeffs is None:
                raise DeformationError("form does not map into the conjugate span")
            for i in range(n):
                entries[i][k] = coeffs[i]
        params = sorted(
            {
                g
                for _, c in form.terms
                for g in c.generators()
                if isinstance(g, Symbol)
            },
            key=lambda s: s.sort_key(),
        )
        made = DeformationMap.from_entries(sub, entries, params)
        if made.form != form:
            raise InternalConsistencyError("form transport round-trip failed")
        return made

    def substitute(self, bindings: Mapping[Symbol, object]) -> "DeformationMap":
        entries = tuple(
            tuple(c.substitute(bindings) for c in row) for row in self.entries
        )
        remaining = tuple(p for p in self.parameters if p not in bindings)
        return DeformationMap.from_entries(self.sub, entries, remaining)

    def image_section(self, j: int) -> GenSection:
        """eps applied to the j-th generator, as an ambient section."""
        out = GenSection.zero(self.sub.frame)
        for i, conj in enumerate(self.sub.conj_generators):
            c = self.entries[i][j]
            if not c.is_zero():
                out = out + conj.scale(c)
        return out

    def deformed_generator(self, j: int) -> GenSection:
        return self.sub.generators[j] + self.image_section(j)

    def mixed_block_entries(self) -> list[PolyScalar]:
        """Entries mixing tangent-type and cotangent-type generators.

        All of them vanish exactly when the deformation stays a classical
        deformation of the underlying complex structure.  Needs the
        tangent/cotangent split of the subbundle.
        """
        if self.sub.split is None:
            raise DeformationError("subbundle carries no tangent/cotangent split")
        tangent, cotangent = self.sub.split
        out = []
        for i in cotangent:
            for j in tangent:
                out.append(self.entries[i][j])
        for i in tangent:
            for j in cotangent:
                out.append(self.entries[i][j])
        return out


@dataclass
class ConstraintReport:
    eliminated: dict[Symbol, PolyScalar]
    free: list[Symbol]


def fresh_parameter_matrix(
    sub: IsotropicSubbundle, prefix: str = "t"
) -> list[list[Symbol]]:
    n = sub.rank
    sep = "" if n <= 9 else "_"
    return [
        [parameter(f"{prefix}{i + 1}{sep}{j + 1}") for j in range(n)]
        for i in range(n)
    ]


def constrain_map(
    sub: IsotropicSubbundle, raw: Optional[Sequence[Sequence[Symbol]]] = None
) -> tuple[DeformationMap, ConstraintReport]:
    """Impose the pairing-compatibility constraint on a fresh parameter matrix.

    Returns the constrained map together with the eliminated parameters and
    the surviving free ones.
    """
    if raw is None:
        raw = fresh_parameter_matrix(sub)
    n = sub.rank
    symbols = [s for row in raw for s in row]
    if len(set(symbols)) != n * n:
        raise DeformationError("raw parameters must be distinct fresh symbols")
    pairing = [
        [
            pair(sub.conj_generators[i], sub.generators[k]).constant_value()
            for k in range(n)
        ]
        for i in range(n)
    ]
    system = []
    for j in range(n):
        for k in range(j, n):
            constraint = PolyScalar.zero()
            for i in range(n):
                if not pairing[i][k].is_zero():
                    constraint = constraint + PolyScalar.of(raw[i][j]).scale(pairing[i][k])
                if not pairing[i][j].is_zero():
                    constraint = constraint + PolyScalar.of(raw[i][k]).scale(pairing[i][j])
            system.append(constraint)
    solution = solve_linear(system, symbols)
    if solution.residual or not solution.consistent:
        raise InternalConsistencyError("compatibility constraint is not linear")
    entries = [
        [PolyScalar.of(raw[i][j]).substitute(solution.bindings) for j in range(n)]
        for i in range(n)
    ]
    emap = DeformationMap.from_entries(sub, entries, tuple(solution.free))
    return emap, ConstraintReport(eliminated=solution.bindings, free=solution.free)


# ---------------------------------------------------------------------------
# Maurer-Cartan system
# ---------------------------------------------------------------------------


@dataclass
class MCSystem:
    """Coefficients of d_L(eps~) + [eps~, eps~]/2 on the degree-3 basis."""

    deformation: DeformationMap
    residual_form: ExteriorForm
    constraints: list[tuple[tuple[int, int, int], PolyScalar]]
    unknowns: list[Symbol]

    def nonzero(self) -> list[tuple[tuple[int, int, int], PolyScalar]]:
        return [(idx, c) for idx, c in self.constraints if not c.is_zero()]

    def is_trivial(self) -> bool:
        return not self.nonzero()


def mc_residual(e: DeformationMap) -> MCSystem:
    sub = e.sub
    residual = sub.d_L_invariant(e.form) + sub.schouten_bracket(e.form, e.form).scale(
        GR_HALF
    )
    constraints = [
        (idx, residual.coefficient(idx))
        for idx in itertools.combinations(range(sub.rank), 3)
    ]
    return MCSystem(
        deformation=e,
        residual_form=residual,
        constraints=constraints,
        unknowns=list(e.parameters),
    )


def gauge_image(sub: IsotropicSubbundle) -> list[ExteriorForm]:
    """Echelon basis of the image of d_L from degree 1 to degree 2."""
    slots = list(itertools.combinations(range(sub.rank), 2))
    vectors = []
    for a in range(sub.rank):
        df = sub.d_L_invariant(ExteriorForm.basis(sub.lform_names, (a,)))
        vectors.append([df.coefficient(idx).constant_value() for idx in slots])
    rows, pivots = mat_rref(vectors)
    basis = []
    for r in range(len(pivots)):
        data = {slots[c]: PolyScalar.const(rows[r][c]) for c in range(len(slots))}
        basis.append(ExteriorForm.build(sub.lform_names, data))
    return basis


# ---------------------------------------------------------------------------
# Gauge reduction
# ---------------------------------------------------------------------------


@dataclass
class DeformationFamily:
    """Solved Maurer-Cartan family after gauge reduction."""

    deformation: DeformationMap
    solved: dict[Symbol, PolyScalar]
    gauge_basis: list[ExteriorForm]
    dropped_gauge: list[Symbol]
    free: list[Symbol]
    reduced_basis: list[ExteriorForm]
    reduced_map: DeformationMap
    residual_nonlinear: list[PolyScalar]


def _direction(form: ExteriorForm, param: Symbol) -> ExteriorForm:
    """Derivative of a parameter-linear form along one parameter."""
    mono = Monomial.of(param)
    data = {}
    for idx, c in form.terms:
        data[idx] = PolyScalar.const(c.coefficient(mono))
    return ExteriorForm.build(form.names, data)


def _form_vector(form: ExteriorForm, slots) -> list[GaussianRational]:
    return [form.coefficient(idx).constant_value() for idx in slots]


def solve_mc_system(
    system: Sequence[PolyScalar], unknowns: Sequence[Symbol]
) -> tuple[dict[Symbol, PolyScalar], list[Symbol], list[PolyScalar]]:
    """Exact solution of the constraint system, without variety reasoning.

    Alternates two certified moves until nothing changes: Gaussian elimination
    on the constraints that are linear in the remaining unknowns, and the
    radical of a single-term constraint that is a pure power of one unknown
    (c * t^k = 0 forces t = 0 exactly).  Constraints that survive both moves
    are returned verbatim, unsolved.
    """
    bindings: dict[Symbol, PolyScalar] = {}
    work = [p for p in system if not p.is_zero()]
    while work:
        remaining = [u for u in unknowns if u not in bindings]
        solution = solve_linear(work, remaining)
        if not solution.consistent:
            raise DeformationError("empty solution set")
        new: dict[Symbol, PolyScalar] = dict(solution.bindings)
        if not new:
            for p in solution.residual:
                if len(p.terms) != 1:
                    continue
                gens = set(p.terms[0][0].generators())
                if len(gens) == 1:
                    (g,) = gens
                    if isinstance(g, Symbol) and g in remaining:
                        new[g] = PolyScalar.zero()
                        break
        if not new:
            return bindings, remaining, solution.residual
        bindings = {k: v.substitute(new) for k, v in bindings.items()}
        bindings.update(new)
        work = [p.substitute(new) for p in work]
        work = [p for p in work if not p.is_zero()]
    free = [u for u in unknowns if u not in bindings]
    return bindings, free, []


def reduce_family(mc: MCSystem) -> DeformationFamily:
    """Solve the Maurer-Cartan system and quotient by the gauge directions.

    The gauge quotient drops, per gauge basis element, the lexicographically
    first solution coordinate whose 2-form direction hits that element's
    leading slot.
    """
    e = mc.deformation
    sub = e.sub
    system = [c for _, c in mc.nonzero()]
    solved, free_syms, residual = solve_mc_system(system, mc.unknowns)
    if residual:
        rendered = "; ".join(str(p) for p in residual)
        raise DeformationError(f"nonlinear constraints block reduction: {rendered}")

    solved_map = e.substitute(solved)
    slots = list(itertools.combinations(range(sub.rank), 2))

    directions = {p: _direction(solved_map.form, p) for p in free_syms}
    gauge = gauge_image(sub)

    dropped: list[Symbol] = []
    for g in gauge:
        lead = next(idx for idx, c in g.terms if not c.is_zero())
        aligned = [
            p
            for p in free_syms
            if p not in dropped and not directions[p].coefficient(lead).is_zero()
        ]
        if not aligned:
            raise DeformationError(
                f"gauge direction {g} not expressible in solution coordinates"
            )
        dropped.append(min(aligned, key=lambda s: s.name))

    def slot_order_key(p: Symbol):
        vec = directions[p]
        for rank_idx, idx in enumerate(slots):
            if not vec.coefficient(idx).is_zero():
                return rank_idx
        return len(slots)

    free = sorted((p for p in free_syms if p not in dropped), key=slot_order_key)
    reduced_map = solved_map.substitute({p: PolyScalar.zero() for p in dropped})
    reduced_basis = [directions[p] for p in free]

    # the reduced directions and the gauge span must recover the full
    # solution tangent space and intersect trivially
    all_vecs = [_form_vector(directions[p], slots) for p in free_syms]
    red_vecs = [_form_vector(f, slots) for f in reduced_basis]
    gauge_vecs = [_form_vector(g, slots) for g in gauge]
    full_rank = mat_rank(all_vecs + gauge_vecs)
    if mat_rank(red_vecs + gauge_vecs) != len(red_vecs) + len(gauge_vecs):
        raise InternalConsistencyError("reduced family meets the gauge span")
    if full_rank != len(red_vecs) + len(gauge_vecs):
        raise InternalConsistencyError("reduced family plus gauge span is too small")

    if not mc_residual(reduced_map).is_trivial():
        raise InternalConsistencyError("reduced family fails its own constraint system")

    return DeformationFamily(
        deformation=e,
        solved=solved,
        gauge_basis=gauge,
        dropped_gauge=dropped,
        free=free,
        reduced_basis=reduced_basis,
        reduced_map=reduced_map,
        residual_nonlinear=[],
    )


# ---------------------------------------------------------------------------
# Deformed subbundles and types
# ---------------------------------------------------------------------------


@dataclass
class DeformedStructure:
    generators: list[GenSection]
    isotropic: bool
    involutive: bool
    separated: bool

    def is_generalized_complex(self) -> bool:
        return self.isotropic and self.involutive and self.separated


def _ground(e: DeformationMap, bindings: Mapping[Symbol, GaussianRational]):
    missing = [p for p in e.parameters if p not in bindings]
    if missing:
        names = ", ".join(p.name for p in missing)
        raise DeformationError(f"unbound parameters: {names}")
    unknown = [s for s in bindings if s not in e.parameters]
    if unknown:
        names = ", ".join(s.name for s in unknown)
        raise DeformationError(f"bindings for unknown parameters: {names}")
    return e.substitute({p: PolyScalar.const(v) for p, v in bindings.items()})


def deform_subbundle(
    e: DeformationMap, bindings: Mapping[Symbol, GaussianRational]
) -> DeformedStructure:
    """Generators (1 + eps)(g) at ground parameter values, with verdicts.

    Separation means the deformed span still intersects its conjugate only in
    zero, which is the exact invertibility condition for the deformed
    structure to be generalized complex at these values.
    """
    ground = _ground(e, bindings)
    gens = [ground.deformed_generator(j) for j in range(e.sub.rank)]

    isotropic = all(
        pair(a, b).is_zero() for a, b in itertools.combinations_with_replacement(gens, 2)
    )

    rows = [g.constant_vector() for g in gens]
    spanning = mat_rank(rows) == len(gens)
    conj_rows = [g.conjugate().constant_vector() for g in gens]
    separated = spanning and mat_rank(rows + conj_rows) == 2 * len(gens)

    involutive = False
    if spanning:
        involutive = True
        for a, b in itertools.combinations(range(len(gens)), 2):
            br = courant_bracket(gens[a], gens[b])
            if express_in_span(gens, list(br.coeffs)) is None:
                involutive = False
                break

    return DeformedStructure(
        generators=gens,
        isotropic=isotropic,
        involutive=involutive,
        separated=separated,
    )


def type_of(e: DeformationMap, bindings: Mapping[Symbol, GaussianRational]) -> int:
    """Type k: corank of the tangent projection of the deformed generators."""
    structure = deform_subbundle(e, bindings)
    if not structure.separated:
        raise DeformationError(
            "not a generalized complex structure at these parameter values"
        )
    rows = [
        [c.constant_value() for c in g.tangent] for g in structure.generators
    ]
    return e.sub.frame.dim - mat_rank(rows)


SYMPLECTIC = "symplectic type"
COMPLEX = "complex type"
CLASSICAL_COMPLEX = "classical complex"
COMPLEX_NONCLASSICAL = "complex type, non-classical"
OTHER = "other"


def classify(
    e: DeformationMap, bindings: Mapping[Symbol, GaussianRational]
) -> tuple[int, str]:
    """Type together with its stratum label at ground parameter values."""
    k = type_of(e, bindings)
    if k == 0:
        return k, SYMPLECTIC
    if k == e.sub.frame.dim // 2:
        if e.sub.split is not None:
            ground = _ground(e, bindings)
            mixed = ground.mixed_block_entries()
            if all(c.is_zero() for c in mixed):
                return k, CLASSICAL_COMPLEX
            return k, COMPLEX_NONCLASSICAL
        return k, COMPLEX
    return k, OTHER


# ---------------------------------------------------------------------------
# Symbolic type stratification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TypeStratum:
    """Parameter conditions selecting one type value.

    All polynomials in ``zero`` vanish and at least one in ``nonzero`` does
    not; an empty ``nonzero`` list means no further genericity is needed.
    """

    zero: tuple[PolyScalar, ...]
    nonzero: tuple[PolyScalar, ...]
    k: int
    label: str
    substrata: tuple[tuple[str, str], ...] = ()


@dataclass
class Stratification:
    strata: list[TypeStratum]
    generic_rank: int
    refused: Optional[str] = None


def _det(matrix: list[list[PolyScalar]]) -> PolyScalar:
    n = len(matrix)
    total = PolyScalar.zero()
    for perm in itertools.permutations(range(n)):
        sign = 1
        seen = [False] * n
        for s in range(n):
            if seen[s]:
                continue
            ln, j = 0, s
            while not seen[j]:
                seen[j] = True
                j = perm[j]
                ln += 1
            if ln % 2 == 0:
                sign = -sign
        prod = PolyScalar.const(GR_ONE)
        for row, col in enumerate(perm):
            prod = prod * matrix[row][col]
            if prod.is_zero():
                break
        total = total + (prod if sign > 0 else -prod)
    return total


def _normalize_minor(p: PolyScalar) -> PolyScalar:
    """Scale to leading coefficient one; reduce a monomial to its radical."""
    if p.is_zero():
        return p
    lead = p.terms[0][1]
    p = p.scale(GR_ONE / lead)
    if len(p.terms) == 1:
        mono = p.terms[0][0]
        gens = sorted(set(mono.generators()), key=lambda g: g.sort_key())
        return PolyScalar.from_dict({Monomial.of(*gens): GR_ONE})
    return p


def _projection_matrix(e: DeformationMap) -> list[list[PolyScalar]]:
    return [
        list(e.deformed_generator(j).tangent) for j in range(e.sub.rank)
    ]


def _nonzero_minors(matrix, r) -> list[PolyScalar]:
    rows = range(len(matrix))
    cols = range(len(matrix[0]))
    out: list[PolyScalar] = []
    seen = set()
    for rsel in itertools.combinations(rows, r):
        for csel in itertools.combinations(cols, r):
            d = _det([[matrix[i][j] for j in csel] for i in rsel])
            if d.is_zero():
                continue
            norm = _normalize_minor(d)
            if norm not in seen:
                seen.add(norm)
                out.append(norm)
    return out


def stratify_type(e: DeformationMap) -> Stratification:
    """Enumerate type strata of a parameter family by exact minor vanishing.

    Rank boundaries whose minors are monomials are descended exactly through
    minimal hitting sets of their variable supports; a non-monomial boundary
    stops the descent with an explicit refusal note, and more than eight
    parameters refuse stratification outright (the generic rank is still
    reported).
    """
    matrix = _projection_matrix(e)
    dim = e.sub.frame.dim
    max_r = min(len(matrix), dim)

    def generic_rank(m) -> int:
        for r in range(max_r, 0, -1):
            if _nonzero_minors(m, r):
                return r
        return 0

    grank = generic_rank(matrix)
    if len(e.parameters) > 8:
        return Stratification(strata=[], generic_rank=grank, refused="too many parameters")

    strata: dict[frozenset[str], TypeStratum] = {}
    refusal: list[str] = []

    def label_for(k: int) -> str:
        if k == 0:
            return SYMPLECTIC
        if k == dim // 2:
            return COMPLEX
        return OTHER

    def substrata_for(current: DeformationMap, k: int):
        if k != dim // 2 or current.sub.split is None:
            return ()
        mixed = []
        seen = set()
        for c in current.mixed_block_entries():
            if c.is_zero():
                continue
            norm = _normalize_minor(c)
            if norm not in seen:
                seen.add(norm)
                mixed.append(norm)
        if not mixed:
            return ((CLASSICAL_COMPLEX, ""),)
        conditions = ", ".join(f"{m} = 0" for m in mixed)
        anti = ", ".join(f"{m} != 0" for m in mixed)
        return (
            (CLASSICAL_COMPLEX, conditions),
            (COMPLEX_NONCLASSICAL, anti),
        )

    def descend(current: DeformationMap, zeroed: tuple[Symbol, ...]):
        key = frozenset(s.name for s in zeroed)
        if key in strata:
            return
        m = _projection_matrix(current)
        r = generic_rank(m)
        minors = _nonzero_minors(m, r) if r else []
        has_constant = any(p.is_constant() for p in minors)
        nonzero = () if has_constant else tuple(minors)
        k = dim - r
        strata[key] = TypeStratum(
            zero=tuple(PolyScalar.of(s) for s in zeroed),
            nonzero=nonzero,
            k=k,
            label=label_for(k),
            substrata=substrata_for(current, k),
        )
        if has_constant or r == 0:
            return
        supports = []
        for p in minors:
            if len(p.terms) != 1:
                refusal.append(f"non-monomial rank boundary {p}")
                return
            supports.append(
                tuple(
                    g
                    for g in p.terms[0][0].generators()
                    if isinstance(g, Symbol)
                )
            )
        for hitting in _minimal_hitting_sets(supports):
            bindings = {s: PolyScalar.zero() for s in hitting}
            descend(current.substitute(bindings), zeroed + tuple(hitting))

    descend(e, ())
    ordered = sorted(
        strata.values(), key=lambda s: (len(s.zero), [str(p) for p in s.zero])
    )
    return Stratification(
        strata=ordered,
        generic_rank=grank,
        refused="; ".join(refusal) if refusal else None,
    )


def _minimal_hitting_sets(supports: Sequence[tuple[Symbol, ...]]):
    """Minimal sets of symbols meeting every support (exact, small inputs)."""
    universe = sorted({s for sup in supports for s in sup}, key=lambda s: s.name)
    found: list[tuple[Symbol, ...]] = []
    for size in range(1, len(universe) + 1):
        for combo in itertools.combinations(universe, size):
            cs = set(combo)
            if all(cs & set(sup) for sup in supports):
                if not any(set(f) <= cs for f in found):
                    found.append(combo)
        if found and size >= max(len(f) for f in found):
            break
    return found
