"""Lie algebras by structure constants, complex endomorphisms, invariant forms.

A ``FrameAlgebra`` is a finite-dimensional Lie algebra presented by a named
basis and exact structure constants.  ``eigenframe`` splits a real frame with
an almost-complex endomorphism into +i/-i eigenvector generators, recomputing
the structure constants exactly in the new basis.  ``ExteriorForm`` holds
graded exterior elements over a dual basis; wedge evaluation follows the
determinant convention (no 1/k! factor), fixed once for the whole engine.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .scalar import (
    GR_HALF,
    GR_I,
    GR_ONE,
    GR_ZERO,
    GaussianRational,
    PolyLike,
    PolyScalar,
    mat_inverse,
    mat_mul,
    mat_rank,
    poly,
)


class FrameError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Exterior forms over a named dual basis
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExteriorForm:
    """Graded exterior element with PolyScalar coefficients.

    Terms map strictly increasing index tuples to coefficients; sign
    normalization is applied on construction.  ``names`` are the display
    labels of the underlying dual basis.
    """

    names: tuple[str, ...]
    terms: tuple[tuple[tuple[int, ...], PolyScalar], ...]

    @staticmethod
    def build(names: Sequence[str], data: Mapping[tuple[int, ...], PolyLike]) -> "ExteriorForm":
        acc: dict[tuple[int, ...], PolyScalar] = {}
        for idx, c in data.items():
            c = poly(c)
            if c.is_zero():
                continue
            sorted_idx, sign = _sort_index(idx)
            if sorted_idx is None:
                continue
            if sign < 0:
                c = -c
            prev = acc.get(sorted_idx)
            acc[sorted_idx] = c if prev is None else prev + c
        items = [(i, c) for i, c in acc.items() if not c.is_zero()]
        items.sort(key=lambda ic: (len(ic[0]), ic[0]))
        return ExteriorForm(tuple(names), tuple(items))

    @staticmethod
    def zero(names: Sequence[str]) -> "ExteriorForm":
        return ExteriorForm(tuple(names), ())

    @staticmethod
    def basis(names: Sequence[str], idx: Sequence[int]) -> "ExteriorForm":
        return ExteriorForm.build(names, {tuple(idx): PolyScalar.const(GR_ONE)})

    def coefficient(self, idx: Sequence[int]) -> PolyScalar:
        sorted_idx, sign = _sort_index(tuple(idx))
        if sorted_idx is None:
            return PolyScalar.zero()
        for i, c in self.terms:
            if i == sorted_idx:
                return c if sign > 0 else -c
        return PolyScalar.zero()

    def is_zero(self) -> bool:
        return not self.terms

    def degrees(self) -> set[int]:
        return {len(i) for i, _ in self.terms}

    def degree_part(self, k: int) -> "ExteriorForm":
        return ExteriorForm(self.names, tuple((i, c) for i, c in self.terms if len(i) == k))

    def __add__(self, other: "ExteriorForm") -> "ExteriorForm":
        self._check(other)
        d = {i: c for i, c in self.terms}
        for i, c in other.terms:
            d[i] = d.get(i, PolyScalar.zero()) + c
        return ExteriorForm.build(self.names, d)

    def __sub__(self, other: "ExteriorForm") -> "ExteriorForm":
        return self + (-other)

    def __neg__(self) -> "ExteriorForm":
        return ExteriorForm(self.names, tuple((i, -c) for i, c in self.terms))

    def scale(self, c: PolyLike) -> "ExteriorForm":
        c = poly(c)
        return ExteriorForm.build(self.names, {i: k * c for i, k in self.terms})

    def wedge(self, other: "ExteriorForm") -> "ExteriorForm":
        self._check(other)
        acc: dict[tuple[int, ...], PolyScalar] = {}
        for i1, c1 in self.terms:
            for i2, c2 in other.terms:
                idx = i1 + i2
                sorted_idx, sign = _sort_index(idx)
                if sorted_idx is None:
                    continue
                c = c1 * c2
                if sign < 0:
                    c = -c
                acc[sorted_idx] = acc.get(sorted_idx, PolyScalar.zero()) + c
        return ExteriorForm.build(self.names, acc)

    def interior(self, vector: Sequence[PolyScalar]) -> "ExteriorForm":
        """Interior product into the first slot: (i_v f)(...) = f(v, ...)."""
        acc: dict[tuple[int, ...], PolyScalar] = {}
        for idx, c in self.terms:
            for pos, b in enumerate(idx):
                v = vector[b]
                if v.is_zero():
                    continue
                rest = idx[:pos] + idx[pos + 1 :]
                term = v * c
                if pos % 2 == 1:
                    term = -term
                acc[rest] = acc.get(rest, PolyScalar.zero()) + term
        return ExteriorForm.build(self.names, acc)

    def evaluate(self, vectors: Sequence[Sequence[PolyScalar]]) -> PolyScalar:
        """Determinant-convention evaluation at coefficient vectors."""
        k = len(vectors)
        total = PolyScalar.zero()
        for idx, c in self.terms:
            if len(idx) != k:
                continue
            det = PolyScalar.zero()
            for perm in itertools.permutations(range(k)):
                sign = _permutation_sign(perm)
                prod = PolyScalar.const(GR_ONE)
                for row, col in enumerate(perm):
                    prod = prod * vectors[row][idx[col]]
                det = det + (prod if sign > 0 else -prod)
            total = total + c * det
        return total

    def _check(self, other: "ExteriorForm") -> None:
        if self.names != other.names:
            raise FrameError("forms over different dual bases")

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for idx, c in self.terms:
            label = "^".join(self.names[i] for i in idx) if idx else "1"
            if c == PolyScalar.const(GR_ONE) and idx:
                parts.append(label)
            elif c == PolyScalar.const(-GR_ONE) and idx:
                parts.append(f"-{label}")
            else:
                cs = str(c)
                if " " in cs:
                    cs = f"({cs})"
                parts.append(f"{cs}*{label}" if idx else cs)
        out = parts[0]
        for p in parts[1:]:
            if p.startswith("-"):
                out += " - " + p[1:]
            else:
                out += " + " + p
        return out


def _sort_index(idx: tuple[int, ...]):
    if len(set(idx)) != len(idx):
        return None, 0
    order = sorted(range(len(idx)), key=lambda p: idx[p])
    sign = _permutation_sign(tuple(order))
    return tuple(idx[p] for p in order), sign


def _permutation_sign(perm: Sequence[int]) -> int:
    sign = 1
    seen = [False] * len(perm)
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


# ---------------------------------------------------------------------------
# Lie algebras by structure constants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class JacobiViolation:
    triple: tuple[str, str, str]
    defect: tuple[GaussianRational, ...]
    basis: tuple[str, ...]

    def __str__(self) -> str:
        names = ", ".join(self.triple)
        parts = []
        for name, c in zip(self.basis, self.defect):
            if c.is_zero():
                continue
            cs = str(c)
            if cs == "1":
                parts.append(name)
            elif cs == "-1":
                parts.append(f"-{name}")
            else:
                parts.append(f"{cs}*{name}" if " " not in cs else f"({cs})*{name}")
        rendered = " + ".join(parts).replace("+ -", "- ")
        return f"jacobi defect at ({names}): {rendered}"


@dataclass(frozen=True)
class FrameAlgebra:
    """Lie algebra with named basis and exact structure constants.

    ``table`` stores the bracket vector of (e_i, e_j) for i < j only; the
    skew partner is implied, so c^k_ij = -c^k_ji holds by construction.
    """

    basis: tuple[str, ...]
    table: tuple[tuple[tuple[int, int], tuple[GaussianRational, ...]], ...]
    dual_names: tuple[str, ...]

    @staticmethod
    def build(
        basis: Sequence[str],
        brackets: Mapping[tuple[str, str], Mapping[str, GaussianRational]],
        dual_names: Optional[Sequence[str]] = None,
    ) -> "FrameAlgebra":
        basis = tuple(basis)
        if len(set(basis)) != len(basis):
            raise FrameError("duplicate basis names")
        index = {n: i for i, n in enumerate(basis)}
        if dual_names is None:
            dual_names = tuple(f"{n}*" for n in basis)
        dual_names = tuple(dual_names)
        if len(dual_names) != len(basis):
            raise FrameError("dual basis size mismatch")
        store: dict[tuple[int, int], list[GaussianRational]] = {}
        for (a, b), rhs in brackets.items():
            if a not in index or b not in index:
                raise FrameError(f"unknown basis name in bracket [{a}, {b}]")
            i, j = index[a], index[b]
            if i == j:
                if any(not c.is_zero() for c in rhs.values()):
                    raise FrameError(f"nonzero bracket [{a}, {a}]")
                continue
            vec = [GR_ZERO] * len(basis)
            for name, c in rhs.items():
                if name not in index:
                    raise FrameError(f"unknown basis name {name!r} in bracket value")
                vec[index[name]] = vec[index[name]] + c
            sign = 1
            if i > j:
                i, j, sign = j, i, -1
                vec = [-c for c in vec]
            if (i, j) in store:
                if store[(i, j)] != vec:
                    raise FrameError(
                        f"conflicting bracket entries for [{basis[i]}, {basis[j]}]"
                    )
            else:
                store[(i, j)] = vec
        table = tuple(
            (ij, tuple(vec)) for ij, vec in sorted(store.items()) if any(vec)
        )
        return FrameAlgebra(basis, table, dual_names)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def index(self, name: str) -> int:
        return self.basis.index(name)

    def bracket_basis(self, i: int, j: int) -> tuple[GaussianRational, ...]:
        if i == j:
            return tuple([GR_ZERO] * self.dim)
        key = (i, j) if i < j else (j, i)
        for ij, vec in self.table:
            if ij == key:
                return vec if i < j else tuple(-c for c in vec)
        return tuple([GR_ZERO] * self.dim)

    def bracket_vectors(
        self, v: Sequence[PolyScalar], w: Sequence[PolyScalar]
    ) -> list[PolyScalar]:
        """Bilinear bracket of coefficient vectors (no Leibniz terms)."""
        out = [PolyScalar.zero() for _ in range(self.dim)]
        for (i, j), vec in self.table:
            factor = v[i] * w[j] - v[j] * w[i]
            if factor.is_zero():
                continue
            for k, c in enumerate(vec):
                if not c.is_zero():
                    out[k] = out[k] + factor.scale(c)
        return out

    def validate_jacobi(self) -> list[JacobiViolation]:
        violations = []
        n = self.dim
        unit = [
            [PolyScalar.const(GR_ONE) if a == b else PolyScalar.zero() for b in range(n)]
            for a in range(n)
        ]
        for i, j, k in itertools.combinations(range(n), 3):
            total = [PolyScalar.zero()] * n
            for a, b, c in ((i, j, k), (j, k, i), (k, i, j)):
                inner = self.bracket_vectors(unit[a], unit[b])
                outer = self.bracket_vectors(inner, unit[c])
                total = [t + o for t, o in zip(total, outer)]
            if any(not t.is_zero() for t in total):
                defect = tuple(t.constant_value() for t in total)
                violations.append(
                    JacobiViolation(
                        (self.basis[i], self.basis[j], self.basis[k]), defect, self.basis
                    )
                )
        return violations

    # -- Chevalley-Eilenberg differential ------------------------------------

    def d_dual_basis(self, k: int) -> ExteriorForm:
        """d of the k-th dual 1-form: (d e_k*)(e_i, e_j) = -c^k_ij."""
        data = {}
        for (i, j), vec in self.table:
            if not vec[k].is_zero():
                data[(i, j)] = PolyScalar.const(-vec[k])
        return ExteriorForm.build(self.dual_names, data)

    def ce_differential(self, form: ExteriorForm) -> ExteriorForm:
        """Differential of an invariant form; raised degree by one.

        Coefficients must be free of coefficient functions and derivative
        symbols (those flows belong to the general Lie-algebroid path).
        """
        if form.names != self.dual_names:
            raise FrameError("form is not over this frame's dual basis")
        for _, c in form.terms:
            if c.has_functions():
                raise FrameError("non-constant coefficients in invariant differential")
        out = ExteriorForm.zero(self.dual_names)
        for idx, c in form.terms:
            for pos, k in enumerate(idx):
                dk = self.d_dual_basis(k)
                if dk.is_zero():
                    continue
                left = ExteriorForm.build(
                    self.dual_names, {idx[:pos]: PolyScalar.const(GR_ONE)}
                )
                right = ExteriorForm.build(
                    self.dual_names, {idx[pos + 1 :]: PolyScalar.const(GR_ONE)}
                )
                piece = left.wedge(dk).wedge(right).scale(c)
                if pos % 2 == 1:
                    piece = -piece
                out = out + piece
        return out


# ---------------------------------------------------------------------------
# Almost-complex endomorphisms and eigenframes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ComplexOp:
    """Endomorphism J on the real basis, required to square to -identity."""

    matrix: tuple[tuple[GaussianRational, ...], ...]

    @staticmethod
    def build(matrix: Sequence[Sequence[GaussianRational]]) -> "ComplexOp":
        rows = tuple(tuple(r) for r in matrix)
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise FrameError("J matrix is not square")
        sq = mat_mul([list(r) for r in rows], [list(r) for r in rows])
        for i in range(n):
            for j in range(n):
                want = GaussianRational.of(-1) if i == j else GR_ZERO
                if sq[i][j] != want:
                    raise FrameError("J^2 != -identity")
        return ComplexOp(rows)

    @property
    def dim(self) -> int:
        return len(self.matrix)

    def apply(self, vector: Sequence[GaussianRational]) -> list[GaussianRational]:
        return [
            sum((self.matrix[i][j] * vector[j] for j in range(self.dim)), GR_ZERO)
            for i in range(self.dim)
        ]


@dataclass(frozen=True)
class ComplexFrame:
    """Complexified ambient frame for sections of (T + T*) x C.

    ``conj`` is the conjugation involution on basis labels; for an eigenframe
    it swaps each +i generator with its barred partner, for a complexified
    real frame it is the identity (only coefficients get conjugated).
    """

    algebra: FrameAlgebra
    conj: tuple[int, ...]
    real: Optional[FrameAlgebra] = None
    change_of_basis: Optional[tuple[tuple[GaussianRational, ...], ...]] = None

    @staticmethod
    def complexified(g: FrameAlgebra) -> "ComplexFrame":
        return ComplexFrame(algebra=g, conj=tuple(range(g.dim)))

    @property
    def dim(self) -> int:
        return self.algebra.dim

    @property
    def tangent_names(self) -> tuple[str, ...]:
        return self.algebra.basis

    @property
    def cotangent_names(self) -> tuple[str, ...]:
        return self.algebra.dual_names


def eigenframe(
    g: FrameAlgebra,
    J: ComplexOp,
    tangent_names: Optional[Sequence[str]] = None,
    dual_names: Optional[Sequence[str]] = None,
) -> ComplexFrame:
    """Complexified frame of +i/-i eigenvectors of J.

    Each +i generator is (e - i*Je)/2 for a greedily chosen seed e; the barred
    partners are the conjugates and carry eigenvalue -i.  Structure constants
    are recomputed exactly in the new basis.
    """
    if J.dim != g.dim:
        raise FrameError("J dimension mismatch")
    if g.dim % 2 != 0:
        raise FrameError("odd-dimensional frame has no complex eigensplit")
    m = g.dim // 2

    seeds: list[int] = []
    chosen_rows: list[list[GaussianRational]] = []
    for a in range(g.dim):
        e = [GR_ONE if k == a else GR_ZERO for k in range(g.dim)]
        je = J.apply(e)
        trial = chosen_rows + [e, je]
        if mat_rank(trial) == len(trial):
            seeds.append(a)
            chosen_rows = trial
        if len(seeds) == m:
            break
    if len(seeds) != m:
        raise FrameError("could not split the frame into J-stable planes")

    if tangent_names is None:
        tangent_names = [f"Z{a + 1}" for a in range(m)]
    if dual_names is None:
        dual_names = [f"z{a + 1}" for a in range(m)]
    tangent_names = list(tangent_names)
    dual_names = list(dual_names)
    if len(tangent_names) != m or len(dual_names) != m:
        raise FrameError("need one eigenvector name and one dual name per plane")
    names = tangent_names + [f"{n}bar" for n in tangent_names]
    duals = dual_names + [f"{n}bar" for n in dual_names]
    if len(set(names) | set(duals)) != 2 * len(names):
        raise FrameError("eigenframe name collision")

    # columns of P are the new basis vectors in the old coordinates
    cols: list[list[GaussianRational]] = []
    for s in seeds:
        e = [GR_ONE if k == s else GR_ZERO for k in range(g.dim)]
        je = J.apply(e)
        cols.append([GR_HALF * (ev - GR_I * jv) for ev, jv in zip(e, je)])
    for vec in list(cols):
        cols.append([c.conjugate() for c in vec])
    P = [[cols[j][i] for j in range(g.dim)] for i in range(g.dim)]
    Pinv = mat_inverse(P)

    # eigenvalue check: J (e - iJe)/2 = +i (e - iJe)/2
    for a in range(m):
        jv = J.apply([P[i][a] for i in range(g.dim)])
        for i in range(g.dim):
            if jv[i] != GR_I * P[i][a]:
                raise FrameError("eigenvector relation failed")

    brackets: dict[tuple[str, str], dict[str, GaussianRational]] = {}
    for a in range(g.dim):
        for b in range(a + 1, g.dim):
            va = [PolyScalar.const(P[i][a]) for i in range(g.dim)]
            vb = [PolyScalar.const(P[i][b]) for i in range(g.dim)]
            old = [c.constant_value() for c in g.bracket_vectors(va, vb)]
            new = [
                sum((Pinv[k][i] * old[i] for i in range(g.dim)), GR_ZERO)
                for k in range(g.dim)
            ]
            rhs = {names[k]: new[k] for k in range(g.dim) if not new[k].is_zero()}
            if rhs:
                brackets[(names[a], names[b])] = rhs

    algebra = FrameAlgebra.build(names, brackets, duals)
    conj = tuple(list(range(m, 2 * m)) + list(range(m)))
    return ComplexFrame(
        algebra=algebra,
        conj=conj,
        real=g,
        change_of_basis=tuple(tuple(row) for row in P),
    )


# ---------------------------------------------------------------------------
# Built-in instance
# ---------------------------------------------------------------------------


def kodaira_preset() -> tuple[FrameAlgebra, ComplexOp]:
    """Invariant frame of the primary Kodaira surface nilmanifold.

    Basis (X, Y, U, V) with the single bracket [X, Y] = U, and the invariant
    complex endomorphism JX = Y, JY = -X, JU = V, JV = -U.  The +i eigenframe
    generators are T = (X - iY)/2 and W = (U - iV)/2; their conjugates carry
    eigenvalue -i, as the eigenvector relation J(v-bar) = -i v-bar forces.
    """
    g = FrameAlgebra.build(
        ("X", "Y", "U", "V"),
        {("X", "Y"): {"U": GR_ONE}},
    )
    zero, one = GR_ZERO, GR_ONE
    J = ComplexOp.build(
        (
            (zero, -one, zero, zero),
            (one, zero, zero, zero),
            (zero, zero, zero, -one),
            (zero, zero, one, zero),
        )
    )
    return g, J


def kodaira_frame() -> ComplexFrame:
    """Eigenframe (T, W, Tbar, Wbar) with co-frame (omega, rho, omegabar, rhobar)."""
    g, J = kodaira_preset()
    return eigenframe(g, J, tangent_names=("T", "W"), dual_names=("omega", "rho"))
