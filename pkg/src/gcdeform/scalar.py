"""Exact coefficient arithmetic for the invariant calculus.

Everything downstream (frames, brackets, deformations) computes in the ring
built here: Gaussian rationals extended by commuting generators of two kinds,
deformation parameters and coefficient functions, plus formal first-order
derivative symbols of the coefficient functions.  All arithmetic is exact;
nothing is ever rounded.

Derivative symbols are first order only.  A ``DerivationSymbol`` can only be
built from a plain coefficient-function ``Symbol``, so a nested derivative is
not constructible, and differentiating a polynomial that already contains a
derivative symbol raises ``DerivationDepthError``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence, Union


class ScalarError(ValueError):
    """Base class for scalar-ring errors."""


class DerivationDepthError(ScalarError):
    """A computation would need a second derivative of a coefficient function."""


class SubstitutionError(ScalarError):
    """A substitution targeted something other than a parameter symbol."""


# ---------------------------------------------------------------------------
# Gaussian rationals
# ---------------------------------------------------------------------------

FractionLike = Union[int, Fraction]


def _frac(x: FractionLike) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"not an exact rational: {x!r}")


@dataclass(frozen=True)
class GaussianRational:
    """Exact complex number re + im*i with rational parts.

    ``Fraction`` keeps denominators positive and in lowest terms, which is the
    canonical form required for structural equality.
    """

    re: Fraction
    im: Fraction

    @staticmethod
    def of(re: FractionLike = 0, im: FractionLike = 0) -> "GaussianRational":
        return GaussianRational(_frac(re), _frac(im))

    def __add__(self, other: "GaussianRational") -> "GaussianRational":
        other = _coerce_gr(other)
        return GaussianRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other: "GaussianRational") -> "GaussianRational":
        other = _coerce_gr(other)
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __rsub__(self, other: "GaussianRational") -> "GaussianRational":
        return _coerce_gr(other) - self

    def __neg__(self) -> "GaussianRational":
        return GaussianRational(-self.re, -self.im)

    def __mul__(self, other: "GaussianRational") -> "GaussianRational":
        other = _coerce_gr(other)
        return GaussianRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other: "GaussianRational") -> "GaussianRational":
        other = _coerce_gr(other)
        n = other.re * other.re + other.im * other.im
        if n == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return GaussianRational(
            (self.re * other.re + self.im * other.im) / n,
            (self.im * other.re - self.re * other.im) / n,
        )

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __str__(self) -> str:
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return _imag_str(self.im)
        sign = "+" if self.im > 0 else "-"
        return f"{self.re} {sign} {_imag_str(abs(self.im))}"


def _imag_str(im: Fraction) -> str:
    if im == 1:
        return "i"
    if im == -1:
        return "-i"
    return f"{im}*i"


def _coerce_gr(x) -> GaussianRational:
    if isinstance(x, GaussianRational):
        return x
    if isinstance(x, (int, Fraction)):
        return GaussianRational(_frac(x), Fraction(0))
    raise TypeError(f"cannot coerce {x!r} to a Gaussian rational")


GR_ZERO = GaussianRational.of(0)
GR_ONE = GaussianRational.of(1)
GR_I = GaussianRational.of(0, 1)
GR_HALF = GaussianRational.of(Fraction(1, 2))


_SIMPLE_RE = re.compile(r"^(\d+)(?:/(\d+))?$")
_IMAG_RE = re.compile(r"^i(?:/(\d+))?$")


def parse_gaussian(text: str) -> GaussianRational:
    """Parse a Gaussian rational from its rendered or hand-written form.

    Accepts ``3``, ``-1/2``, ``i``, ``-i``, ``i/2``, ``1/2*i``, ``2*i`` and
    sums such as ``1/2+1/3*i`` or parenthesised ``(1/2 - i)``.
    """

    s = text.strip().replace(" ", "")
    if s.startswith("(") and s.endswith(")"):
        s = s[1:-1]
    if not s:
        raise ScalarError("empty scalar")
    total = GR_ZERO
    for sign, chunk in _split_signed(s):
        total = total + sign * _parse_gaussian_atom(chunk)
    return total


def _split_signed(s: str) -> list[tuple[int, str]]:
    parts: list[tuple[int, str]] = []
    sign = 1
    buf = ""
    for idx, ch in enumerate(s):
        if ch in "+-" and idx > 0 and s[idx - 1] not in "+-*/(":
            parts.append((sign, buf))
            sign = 1 if ch == "+" else -1
            buf = ""
        elif ch in "+-" and idx == 0:
            sign = 1 if ch == "+" else -1
        else:
            buf += ch
    parts.append((sign, buf))
    return parts


def _parse_gaussian_atom(chunk: str) -> GaussianRational:
    if not chunk:
        raise ScalarError("malformed scalar term")
    factors = chunk.split("*")
    value = GR_ONE
    for f in factors:
        m = _SIMPLE_RE.match(f)
        if m:
            num = int(m.group(1))
            den = int(m.group(2)) if m.group(2) else 1
            if den == 0:
                raise ScalarError(f"zero denominator in {f!r}")
            value = value * GaussianRational.of(Fraction(num, den))
            continue
        m = _IMAG_RE.match(f)
        if m:
            den = int(m.group(1)) if m.group(1) else 1
            if den == 0:
                raise ScalarError(f"zero denominator in {f!r}")
            value = value * GaussianRational.of(0, Fraction(1, den))
            continue
        raise ScalarError(f"malformed rational {f!r}")
    return value


# ---------------------------------------------------------------------------
# Symbols
# ---------------------------------------------------------------------------

PARAMETER = "parameter"
FUNCTION = "function"


@dataclass(frozen=True)
class Symbol:
    """Named generator: a deformation parameter or a coefficient function."""

    name: str
    kind: str

    def __post_init__(self) -> None:
        if self.kind not in (PARAMETER, FUNCTION):
            raise ScalarError(f"unknown symbol kind {self.kind!r}")

    def sort_key(self) -> tuple[str, str]:
        return (self.name, "")

    def __str__(self) -> str:
        return self.name


def parameter(name: str) -> Symbol:
    return Symbol(name, PARAMETER)


def function(name: str) -> Symbol:
    return Symbol(name, FUNCTION)


@dataclass(frozen=True)
class DerivationSymbol:
    """First derivative of a coefficient function along a frame direction.

    The operand must be a plain coefficient-function symbol, so derivatives of
    parameters and nested derivatives cannot be constructed.
    """

    direction: str
    operand: Symbol

    def __post_init__(self) -> None:
        if not isinstance(self.operand, Symbol) or isinstance(self.operand, DerivationSymbol):
            raise ScalarError("derivative operand must be a plain symbol")
        if self.operand.kind != FUNCTION:
            raise ScalarError(
                f"cannot differentiate {self.operand.kind} symbol {self.operand.name!r}"
            )

    def sort_key(self) -> tuple[str, str]:
        return (self.operand.name, self.direction)

    def __str__(self) -> str:
        return f"{self.direction}({self.operand.name})"


Generator = Union[Symbol, DerivationSymbol]


# ---------------------------------------------------------------------------
# Polynomials
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Monomial:
    """Commutative product of generators, stored sorted with exponents."""

    powers: tuple[tuple[Generator, int], ...]

    @staticmethod
    def of(*gens: Generator) -> "Monomial":
        counts: dict[Generator, int] = {}
        for g in gens:
            counts[g] = counts.get(g, 0) + 1
        return Monomial.from_counts(counts)

    @staticmethod
    def from_counts(counts: Mapping[Generator, int]) -> "Monomial":
        items = [(g, e) for g, e in counts.items() if e != 0]
        if any(e < 0 for _, e in items):
            raise ScalarError("negative exponent")
        items.sort(key=lambda ge: ge[0].sort_key())
        return Monomial(tuple(items))

    def order_key(self) -> tuple[tuple[str, str], ...]:
        # Fixed lexicographic order on (symbol name, derivation direction);
        # a monomial that is a prefix of another sorts first.
        return tuple(
            key for g, e in self.powers for key in itertools.repeat(g.sort_key(), e)
        )

    def degree(self) -> int:
        return sum(e for _, e in self.powers)

    def generators(self) -> tuple[Generator, ...]:
        return tuple(g for g, _ in self.powers)

    def __mul__(self, other: "Monomial") -> "Monomial":
        counts: dict[Generator, int] = dict(self.powers)
        for g, e in other.powers:
            counts[g] = counts.get(g, 0) + e
        return Monomial.from_counts(counts)

    def __str__(self) -> str:
        if not self.powers:
            return "1"
        parts = []
        for g, e in self.powers:
            parts.append(str(g) if e == 1 else f"{g}^{e}")
        return "*".join(parts)


MONOMIAL_ONE = Monomial(())


PolyLike = Union["PolyScalar", GaussianRational, int, Fraction, Symbol, DerivationSymbol]


@dataclass(frozen=True)
class PolyScalar:
    """Sparse exact polynomial: monomials mapped to Gaussian-rational coefficients.

    Zero coefficients are never stored and terms are kept in the fixed monomial
    order, so equality is structural on the canonical form and rendering is
    deterministic.
    """

    terms: tuple[tuple[Monomial, GaussianRational], ...]

    @staticmethod
    def from_dict(d: Mapping[Monomial, GaussianRational]) -> "PolyScalar":
        items = [(m, c) for m, c in d.items() if not c.is_zero()]
        items.sort(key=lambda mc: mc[0].order_key())
        return PolyScalar(tuple(items))

    @staticmethod
    def zero() -> "PolyScalar":
        return PolyScalar(())

    @staticmethod
    def const(c) -> "PolyScalar":
        c = _coerce_gr(c)
        if c.is_zero():
            return PolyScalar(())
        return PolyScalar(((MONOMIAL_ONE, c),))

    @staticmethod
    def of(gen: Generator) -> "PolyScalar":
        return PolyScalar(((Monomial.of(gen), GR_ONE),))

    # -- ring operations ----------------------------------------------------

    def __add__(self, other: PolyLike) -> "PolyScalar":
        other = poly(other)
        d = dict(self.terms)
        for m, c in other.terms:
            s = d.get(m, GR_ZERO) + c
            if s.is_zero():
                d.pop(m, None)
            else:
                d[m] = s
        return PolyScalar.from_dict(d)

    __radd__ = __add__

    def __sub__(self, other: PolyLike) -> "PolyScalar":
        return self + (-poly(other))

    def __rsub__(self, other: PolyLike) -> "PolyScalar":
        return poly(other) + (-self)

    def __neg__(self) -> "PolyScalar":
        return PolyScalar(tuple((m, -c) for m, c in self.terms))

    def __mul__(self, other: PolyLike) -> "PolyScalar":
        other = poly(other)
        d: dict[Monomial, GaussianRational] = {}
        for m1, c1 in self.terms:
            for m2, c2 in other.terms:
                m = m1 * m2
                s = d.get(m, GR_ZERO) + c1 * c2
                if s.is_zero():
                    d.pop(m, None)
                else:
                    d[m] = s
        return PolyScalar.from_dict(d)

    __rmul__ = __mul__

    def scale(self, c) -> "PolyScalar":
        c = _coerce_gr(c)
        if c.is_zero():
            return PolyScalar(())
        return PolyScalar(tuple((m, k * c) for m, k in self.terms))

    # -- inspection ----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def coefficient(self, m: Monomial) -> GaussianRational:
        for m1, c in self.terms:
            if m1 == m:
                return c
        return GR_ZERO

    def constant_value(self) -> GaussianRational:
        if not self.terms:
            return GR_ZERO
        if len(self.terms) == 1 and self.terms[0][0] == MONOMIAL_ONE:
            return self.terms[0][1]
        raise ScalarError(f"not a constant: {self}")

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and self.terms[0][0] == MONOMIAL_ONE)

    def generators(self) -> set[Generator]:
        return {g for m, _ in self.terms for g in m.generators()}

    def has_functions(self) -> bool:
        return any(
            (isinstance(g, Symbol) and g.kind == FUNCTION) or isinstance(g, DerivationSymbol)
            for g in self.generators()
        )

    def has_derivations(self) -> bool:
        return any(isinstance(g, DerivationSymbol) for g in self.generators())

    # -- substitution, differentiation, evaluation ---------------------------

    def substitute(self, bindings: Mapping[Symbol, PolyLike]) -> "PolyScalar":
        """Eliminate parameter symbols by exact substitution.

        Binding a coefficient function or a derivative symbol is rejected.
        """
        for sym in bindings:
            if not isinstance(sym, Symbol) or isinstance(sym, DerivationSymbol):
                raise SubstitutionError(f"cannot bind {sym!r}")
            if sym.kind != PARAMETER:
                raise SubstitutionError(f"cannot bind {sym.kind} symbol {sym.name!r}")
        values = {s: poly(v) for s, v in bindings.items()}
        out = PolyScalar.zero()
        for m, c in self.terms:
            term = PolyScalar.const(c)
            for g, e in m.powers:
                if isinstance(g, Symbol) and g in values:
                    for _ in range(e):
                        term = term * values[g]
                else:
                    term = term * PolyScalar(((Monomial.from_counts({g: e}), GR_ONE),))
            out = out + term
        return out

    def differentiate(self, direction: str) -> "PolyScalar":
        """Formal derivative along a frame direction.

        Parameters are constants.  Coefficient functions pick up a
        ``DerivationSymbol`` factor.  A monomial already carrying a derivative
        symbol cannot be differentiated again (first-order closure).
        """
        out = PolyScalar.zero()
        for m, c in self.terms:
            for g, e in m.powers:
                if isinstance(g, DerivationSymbol):
                    raise DerivationDepthError(
                        f"second derivative of {g.operand.name!r} required"
                    )
            for idx, (g, e) in enumerate(m.powers):
                if isinstance(g, Symbol) and g.kind == FUNCTION:
                    counts = dict(m.powers)
                    counts[g] = e - 1
                    counts[DerivationSymbol(direction, g)] = (
                        counts.get(DerivationSymbol(direction, g), 0) + 1
                    )
                    out = out + PolyScalar.from_dict(
                        {Monomial.from_counts(counts): c * GaussianRational.of(e)}
                    )
        return out

    def evaluate(self, point: Mapping[Generator, GaussianRational]) -> GaussianRational:
        """Evaluate with every generator (derivatives included) ground to a value."""
        total = GR_ZERO
        for m, c in self.terms:
            v = c
            for g, e in m.powers:
                if g not in point:
                    raise ScalarError(f"no value for {g}")
                for _ in range(e):
                    v = v * point[g]
            total = total + v
        return total

    def conjugate_constant(self) -> "PolyScalar":
        """Complex-conjugate a symbol-free polynomial (ground values only)."""
        c = self.constant_value()
        return PolyScalar.const(c.conjugate())

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        rendered = [render_term(c, str(m) if m != MONOMIAL_ONE else "") for m, c in self.terms]
        out = rendered[0]
        for r in rendered[1:]:
            if r.startswith("-"):
                out += " - " + r[1:]
            else:
                out += " + " + r
        return out


def render_term(c: GaussianRational, mono: str) -> str:
    if not mono:
        return str(c) if (c.im == 0 or c.re == 0) else f"({c})"
    if c == GR_ONE:
        return mono
    if c == -GR_ONE:
        return f"-{mono}"
    if c.re != 0 and c.im != 0:
        return f"({c})*{mono}"
    return f"{c}*{mono}"


def poly(x: PolyLike) -> PolyScalar:
    if isinstance(x, PolyScalar):
        return x
    if isinstance(x, (Symbol, DerivationSymbol)):
        return PolyScalar.of(x)
    return PolyScalar.const(_coerce_gr(x))


P_ZERO = PolyScalar.zero()
P_ONE = PolyScalar.const(GR_ONE)


# ---------------------------------------------------------------------------
# Linear solving over the Gaussian rationals
# ---------------------------------------------------------------------------


@dataclass
class LinearSolution:
    """Result of solving a polynomial system for its degree-<=1 part."""

    bindings: dict[Symbol, PolyScalar]
    free: list[Symbol]
    residual: list[PolyScalar]
    consistent: bool

    def substitute_into(self, p: PolyScalar) -> PolyScalar:
        return p.substitute(self.bindings)


def solve_linear(system: Sequence[PolyScalar], unknowns: Sequence[Symbol]) -> LinearSolution:
    """Gaussian elimination for the linear part of ``system`` in ``unknowns``.

    Constraints that are genuinely nonlinear in the unknowns (or whose unknown
    coefficients are themselves symbolic) are returned verbatim in the residual
    list, unsolved.  When a constraint couples several unknowns the
    latest-listed one is solved for, so earlier unknowns are preferred as free
    coordinates.  An inconsistent linear system is reported as an empty
    solution set (``consistent=False``).
    """
    unknown_set = set(unknowns)
    rows: list[tuple[dict[Symbol, GaussianRational], PolyScalar]] = []
    residual: list[PolyScalar] = []

    for p in system:
        coeffs: dict[Symbol, GaussianRational] = {}
        rest = PolyScalar.zero()
        linear = True
        for m, c in p.terms:
            gens = m.generators()
            hit = [g for g in gens if isinstance(g, Symbol) and g in unknown_set]
            if not hit:
                rest = rest + PolyScalar(((m, c),))
            elif (
                len(hit) == 1
                and m.degree() == 1
            ):
                u = hit[0]
                coeffs[u] = coeffs.get(u, GR_ZERO) + c
            else:
                linear = False
                break
        if not linear:
            residual.append(p)
            continue
        coeffs = {u: c for u, c in coeffs.items() if not c.is_zero()}
        if coeffs or not rest.is_zero():
            rows.append((coeffs, rest))

    # eliminate in reversed unknown order: latest unknowns become pivots
    order = list(reversed(list(unknowns)))
    pivots: dict[Symbol, tuple[dict[Symbol, GaussianRational], PolyScalar]] = {}
    consistent = True
    for coeffs, rest in rows:
        coeffs = dict(coeffs)
        rest = rest
        for u in order:
            if u in coeffs and u in pivots:
                factor = coeffs.pop(u)
                pcoeffs, prest = pivots[u]
                for v, cv in pcoeffs.items():
                    nv = coeffs.get(v, GR_ZERO) - factor * cv
                    if nv.is_zero():
                        coeffs.pop(v, None)
                    else:
                        coeffs[v] = nv
                rest = rest - prest.scale(factor)
        pivot_sym = next((u for u in order if u in coeffs), None)
        if pivot_sym is None:
            if not rest.is_zero():
                consistent = False
            continue
        lead = coeffs.pop(pivot_sym)
        norm_coeffs = {v: c / lead for v, c in coeffs.items()}
        norm_rest = rest.scale(GR_ONE / lead)
        pivots[pivot_sym] = (norm_coeffs, norm_rest)
        # re-reduce previously found pivots against the new one
        for u, (pcoeffs, prest) in list(pivots.items()):
            if u is pivot_sym or pivot_sym not in pcoeffs:
                continue
            f = pcoeffs.pop(pivot_sym)
            for v, cv in norm_coeffs.items():
                nv = pcoeffs.get(v, GR_ZERO) + f * cv
                if nv.is_zero():
                    pcoeffs.pop(v, None)
                else:
                    pcoeffs[v] = nv
            pivots[u] = (pcoeffs, prest + norm_rest.scale(f))

    bindings: dict[Symbol, PolyScalar] = {}
    for u in unknowns:
        if u in pivots:
            pcoeffs, prest = pivots[u]
            value = -prest
            for v, cv in sorted(pcoeffs.items(), key=lambda vc: vc[0].sort_key()):
                value = value - PolyScalar.of(v).scale(cv)
            bindings[u] = value
    free = [u for u in unknowns if u not in pivots]
    return LinearSolution(bindings=bindings, free=free, residual=residual, consistent=consistent)


# ---------------------------------------------------------------------------
# Exact matrices over the Gaussian rationals
# ---------------------------------------------------------------------------

Matrix = list[list[GaussianRational]]


class SingularMatrixError(ScalarError):
    pass


def mat_rref(matrix: Sequence[Sequence[GaussianRational]]) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form; returns (rows, pivot column indices)."""
    rows = [list(r) for r in matrix]
    if not rows:
        return [], []
    ncols = len(rows[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pivot_row = next((i for i in range(r, len(rows)) if not rows[i][c].is_zero()), None)
        if pivot_row is None:
            continue
        rows[r], rows[pivot_row] = rows[pivot_row], rows[r]
        lead = rows[r][c]
        rows[r] = [x / lead for x in rows[r]]
        for i in range(len(rows)):
            if i != r and not rows[i][c].is_zero():
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows, pivots


def mat_rank(matrix: Sequence[Sequence[GaussianRational]]) -> int:
    return len(mat_rref(matrix)[1])


def mat_inverse(matrix: Sequence[Sequence[GaussianRational]]) -> Matrix:
    n = len(matrix)
    aug = [
        list(row) + [GR_ONE if i == j else GR_ZERO for j in range(n)]
        for i, row in enumerate(matrix)
    ]
    rows, pivots = mat_rref(aug)
    if pivots[:n] != list(range(n)):
        raise SingularMatrixError("matrix is singular")
    return [row[n:] for row in rows[:n]]


def mat_mul(a: Sequence[Sequence[GaussianRational]], b: Sequence[Sequence[GaussianRational]]) -> Matrix:
    return [
        [
            sum((a[i][k] * b[k][j] for k in range(len(b))), GR_ZERO)
            for j in range(len(b[0]))
        ]
        for i in range(len(a))
    ]


def mat_solve(matrix: Sequence[Sequence[GaussianRational]], rhs: Sequence[GaussianRational]):
    """One exact solution of ``matrix @ x = rhs``, or None if inconsistent."""
    m = len(matrix)
    n = len(matrix[0]) if m else 0
    aug = [list(matrix[i]) + [rhs[i]] for i in range(m)]
    rows, pivots = mat_rref(aug)
    if n in pivots:
        return None
    x = [GR_ZERO] * n
    for r, c in enumerate(pivots):
        x[c] = rows[r][n]
    return x


def mat_left_inverse(matrix: Sequence[Sequence[GaussianRational]]) -> Matrix:
    """Left inverse of a full-column-rank matrix (L @ matrix = identity)."""
    m = len(matrix)
    n = len(matrix[0]) if m else 0
    t = [[matrix[i][j] for i in range(m)] for j in range(n)]
    cols = []
    for j in range(n):
        e = [GR_ONE if k == j else GR_ZERO for k in range(n)]
        sol = mat_solve(t, e)
        if sol is None:
            raise SingularMatrixError("matrix has no left inverse")
        cols.append(sol)
    return cols


def mat_column_reduce(columns: Sequence[Sequence[GaussianRational]]) -> list[list[GaussianRational]]:
    """Echelon basis of the span of the given columns (each a sequence)."""
    rows, pivots = mat_rref([list(c) for c in columns])
    return [rows[i] for i in range(len(pivots))]
