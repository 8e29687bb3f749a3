"""Derivations, one-dimensional extensions, and strong unimodularity.

A DerivationFamily is an n x n matrix whose entries are polynomials, affine
in the derivation parameters a_1..a_m (and possibly involving structure
family parameters).  The Leibniz identity D[x,y] = [Dx,y] + [x,Dy] is always
verified identically in every symbol.

The extension s x_D R adds a generator e_{n+1} acting on s by D; its
structure equations restrict to those of s and d(e^{n+1}) = 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import linalg
from .errors import (
    DimensionMismatch,
    LeibnizViolation,
    NilradicalNotInvariant,
    NonNumericEntries,
)
from .forms import KForm, VectorExpr, wedge
from .lie import LieAlgebra, Subspace, bracket, descending_central_series, validate
from .poly import Polynomial, RationalFunction


@dataclass
class DerivationFamily:
    """Matrix family of derivations of a Lie algebra."""

    algebra: LieAlgebra
    matrix: list  # n x n nested list of Polynomial
    params: tuple = ()
    constraints: tuple = ()

    def apply(self, v: VectorExpr) -> VectorExpr:
        n = self.algebra.dim
        coords = []
        for row in self.matrix:
            acc = Polynomial.zero()
            for entry, c in zip(row, v.coords):
                if not entry.is_zero() and not c.is_zero():
                    acc = acc + entry * c
            coords.append(acc)
        return VectorExpr(n, coords)

    def column(self, j: int) -> VectorExpr:
        """Image of e_j, 1-based."""
        return VectorExpr(self.algebra.dim, [row[j - 1] for row in self.matrix])

    def substitute(self, mapping) -> "DerivationFamily":
        new = [[entry.substitute(mapping) for entry in row] for row in self.matrix]
        params = tuple(p for p in self.params if p not in mapping)
        return DerivationFamily(self.algebra, new, params, self.constraints)

    def is_numeric(self) -> bool:
        return all(entry.is_constant() for row in self.matrix for entry in row)


def verify_derivation(algebra: LieAlgebra, family: DerivationFamily) -> bool:
    """Leibniz identity, checked identically in derivation and family
    parameters.  Raises LeibnizViolation with the offending (i, j, k)."""
    n = algebra.dim
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            lhs = family.apply(algebra.bracket_basis(i, j))
            rhs = bracket(algebra, family.column(i), VectorExpr.basis(n, j)) + bracket(
                algebra, VectorExpr.basis(n, i), family.column(j)
            )
            for k in range(n):
                residual = lhs.coords[k] - rhs.coords[k]
                if not residual.is_zero():
                    raise LeibnizViolation((i, j, k + 1), residual)
    return True


def _leibniz_rows(algebra: LieAlgebra, field_of):
    """Rows of the linear system in the n^2 unknowns D[l][k] (row-major)."""
    n = algebra.dim
    zero = field_of(Polynomial.zero())
    rows = []
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            bij = algebra.bracket_basis(i, j)
            # component k of D[e_i,e_j] - [De_i,e_j] - [e_i,De_j] = 0
            for k in range(1, n + 1):
                row = [zero] * (n * n)

                def unknown(l, c):
                    return (l - 1) * n + (c - 1)

                # D[e_i, e_j]: sum_l bij_l * D[k][l]
                for l in range(1, n + 1):
                    if not bij.coords[l - 1].is_zero():
                        row[unknown(k, l)] = row[unknown(k, l)] + field_of(bij.coords[l - 1])
                # -[De_i, e_j] = -sum_l D[l][i] [e_l, e_j]_k
                for l in range(1, n + 1):
                    blj = algebra.bracket_basis(l, j).coords[k - 1]
                    if not blj.is_zero():
                        row[unknown(l, i)] = row[unknown(l, i)] - field_of(blj)
                # -[e_i, De_j] = -sum_l D[l][j] [e_i, e_l]_k
                for l in range(1, n + 1):
                    bil = algebra.bracket_basis(i, l).coords[k - 1]
                    if not bil.is_zero():
                        row[unknown(l, j)] = row[unknown(l, j)] - field_of(bil)
                if any(row):
                    rows.append(row)
    return rows


def solve_derivations(algebra: LieAlgebra, generic: bool = False) -> DerivationFamily:
    """Basis of Der(s) as one affine family with parameters a_1, a_2, ...

    Structure constants must be numeric; free parameters are named in
    row-major pivot order of the (l, k) matrix entries, which makes the
    parametrization canonical.  With generic=True the computation runs over
    the rational-function field in the family parameters instead (used to
    build catalog families; valid for generic parameter values only).
    """
    n = algebra.dim
    if generic:
        field_of = RationalFunction.from_polynomial
    else:
        if algebra.family_parameters():
            raise NonNumericEntries(
                "solve_derivations needs numeric structure constants; "
                "fix the family parameters or pass generic=True"
            )
        field_of = lambda p: p.constant_value()  # noqa: E731
    rows = _leibniz_rows(algebra, field_of)
    one = field_of(Polynomial.const(1))
    zero = field_of(Polynomial.zero())
    basis = linalg.nullspace(rows, n * n, one, zero)
    matrix = [[Polynomial.zero() for _ in range(n)] for _ in range(n)]
    params = []
    for m, vec in enumerate(basis, start=1):
        name = f"a_{m}"
        params.append(name)
        a = Polynomial.var(name)
        if generic:
            # clear denominators: rescaling a basis vector does not change the span
            dens = []
            for coeff in vec:
                if not coeff.is_zero() and not coeff.den.is_constant():
                    if all(d != coeff.den for d in dens):
                        dens.append(coeff.den)
            scale = Polynomial.const(1)
            for d in dens:
                scale = scale * d
            vec = [coeff * scale for coeff in vec]
        for l in range(n):
            for c in range(n):
                coeff = vec[l * n + c]
                if generic:
                    if coeff.is_zero():
                        continue
                    matrix[l][c] = matrix[l][c] + a * coeff.as_polynomial()
                else:
                    if coeff:
                        matrix[l][c] = matrix[l][c] + a * Polynomial.const(coeff)
    family = DerivationFamily(algebra, matrix, tuple(params))
    verify_derivation(algebra, family)
    return family


def dstar_action(family: DerivationFamily, f: KForm) -> KForm:
    """(D*f)(x_1..x_k) = sum_m f(x_1, .., D x_m, .., x_k).

    Equivalently the derivation extension of D* e^j = sum_k D[j][k] e^k.
    For D = c*Id on a k-form this returns k*c*f.
    """
    n = family.algebra.dim
    if f.dim != n:
        raise DimensionMismatch("form dimension differs from the algebra")
    pulled_rows = [
        KForm(n, 1, {1 << c: family.matrix[j][c] for c in range(n) if not family.matrix[j][c].is_zero()})
        for j in range(n)
    ]
    out = KForm.zero(n, f.degree)
    for mask, coeff in f.coeffs.items():
        indices = []
        rem = mask
        while rem:
            low = rem & -rem
            rem ^= low
            indices.append(low.bit_length())
        for m, i in enumerate(indices):
            factors = []
            for t, j in enumerate(indices):
                if t == m:
                    factors.append(pulled_rows[j - 1])
                else:
                    factors.append(KForm(n, 1, {1 << (j - 1): Polynomial.const(1)}))
            term = factors[0]
            for extra in factors[1:]:
                term = wedge(term, extra)
            out = out + term * coeff
    return out


@dataclass
class ExtensionSpec:
    """g = s x_D R with the extra generator e_{n+1}."""

    base: LieAlgebra
    derivation: DerivationFamily
    result: LieAlgebra = field(init=False)

    def __post_init__(self):
        n = self.base.dim
        differentials = []
        for k in range(1, n + 1):
            coeffs = dict(self.base.d_basis(k).coeffs)
            lifted = {m: c for m, c in coeffs.items()}
            for j in range(1, n + 1):
                entry = self.derivation.matrix[k - 1][j - 1]
                if entry.is_zero():
                    continue
                mask = (1 << (j - 1)) | (1 << n)
                lifted[mask] = lifted.get(mask, Polynomial.zero()) + entry
            differentials.append(KForm(n + 1, 2, {m: c for m, c in lifted.items()}))
        differentials.append(KForm.zero(n + 1, 2))
        name = f"{self.base.name} x R" if self.base.name else "extension"
        self.result = LieAlgebra(n + 1, differentials, name=name)
        validate(self.result)


@dataclass
class StrongUnimodularity:
    """Trace conditions of D and of every ad_{e_j} on the base-nilradical
    quotients n^i / n^(i+1).

    derivation_subs: solved linear constraints on derivation parameters,
    in triangular (substitution) form.
    family_equations: conditions involving only structure family parameters
    (e.g. 2p = 0 or l + 1 = 0).
    constant_obstructions: nonzero rational traces; when present, no
    extension of this base is strongly unimodular in the base-nilradical
    sense, whatever the parameters.
    """

    derivation_subs: dict
    family_equations: list
    constant_obstructions: list
    raw_traces: list

    def satisfiable(self) -> bool:
        return not self.constant_obstructions


def _quotient_trace(algebra: LieAlgebra, operator_cols, inner: Subspace, outer: Subspace):
    """Trace of the induced endomorphism on outer/inner.

    operator_cols(j) must return the image of e_j as a VectorExpr; images of
    outer generators must stay in outer (checked by the caller).
    """
    inner_rows = inner.basis_rows()
    # extend inner basis to a basis of outer
    combined = [list(r) for r in inner_rows]
    added = []
    for gen in outer.generators:
        row = [RationalFunction.from_polynomial(c) for c in gen.coords]
        trial = [list(r) for r in combined] + [list(row)]
        reduced, pivots = linalg.rref(trial, algebra.dim)
        if len(pivots) > len(combined):
            combined.append(row)
            added.append(gen)
    trace = RationalFunction.zero()
    if not added:
        return trace
    basis_matrix = combined  # rows: inner basis then added representatives
    for idx, gen in enumerate(added):
        image = operator_cols(gen)
        img_row = [RationalFunction.from_polynomial(c) for c in image.coords]
        # solve x * basis_matrix = img_row  (coordinates in the combined basis)
        cols = [[basis_matrix[r][c] for r in range(len(basis_matrix))] for c in range(algebra.dim)]
        solution = linalg.solve_unique(cols, img_row)
        if solution is None:
            raise NilradicalNotInvariant("operator does not preserve a central-series term")
        trace = trace + solution[len(inner_rows) + idx]
    return trace


def strongly_unimodular_constraints(ext: ExtensionSpec, nilradical: Subspace) -> StrongUnimodularity:
    """Equate to zero the traces of D and of every ad_{e_j} on each quotient
    of the descending central series of the base nilradical.

    Linear conditions in the derivation parameters are returned solved in
    triangular form; conditions only involving family parameters are kept
    as equations; nonzero constants are reported separately (they mean the
    trace conditions cannot be satisfied at all).
    """
    base = ext.base
    D = ext.derivation
    for gen in nilradical.generators:
        if not nilradical.contains(D.apply(gen)):
            raise NilradicalNotInvariant("derivation does not preserve the nilradical")
    series = descending_central_series(base, nilradical)
    traces = []
    operators = [("D", lambda v: D.apply(v))]
    for j in range(1, base.dim + 1):
        operators.append((f"ad_e{j}", lambda v, j=j: bracket(base, VectorExpr.basis(base.dim, j), v)))
    for level in range(len(series) - 1):
        outer, inner = series[level], series[level + 1]
        for name, op in operators:
            tr = _quotient_trace(base, op, inner, outer)
            if not tr.is_zero():
                traces.append((name, level, tr.num))
    def normalize_eq(poly: Polynomial) -> Polynomial:
        scale = poly.content()
        _, lead = poly.leading()
        if lead < 0:
            scale = -scale
        return poly * (1 / scale)

    deriv_rows = []
    family_eqs = []
    constants = []
    dparams = sorted(
        {v for _, _, p in traces for v in p.variables() if v.startswith("a_")},
        key=lambda s: (len(s), s),
    )
    for name, level, poly in traces:
        vars_ = poly.variables()
        if not vars_:
            constants.append(poly.constant_value())
            continue
        if not any(v.startswith("a_") for v in vars_):
            eq = normalize_eq(poly)
            if all(existing != eq for existing in family_eqs):
                family_eqs.append(eq)
            continue
        # linear form in the derivation parameters (constant coefficients)
        row = []
        rest = poly
        linear = True
        for p in dparams:
            coeff = Polynomial.zero()
            for mono, c in poly.terms.items():
                if mono == ((p, 1),):
                    coeff = Polynomial.const(c)
            if not coeff.is_constant():
                linear = False
                break
            row.append(coeff.constant_value())
            rest = rest - coeff * Polynomial.var(p)
        if linear and rest.is_zero():
            deriv_rows.append(row)
        else:
            # nonlinear or mixed condition: keep as a raw equation
            eq = normalize_eq(poly)
            if all(existing != eq for existing in family_eqs):
                family_eqs.append(eq)
    subs = {}
    if deriv_rows:
        rows = [[Fraction(x) for x in row] for row in deriv_rows]
        rows, pivots = linalg.rref(rows, len(dparams))
        for r, c in enumerate(pivots):
            expr = Polynomial.zero()
            for other in range(c + 1, len(dparams)):
                if rows[r][other]:
                    expr = expr - Polynomial.const(rows[r][other]) * Polynomial.var(dparams[other])
            subs[dparams[c]] = expr
    constants = sorted(set(constants))
    return StrongUnimodularity(subs, family_eqs, constants, traces)


@dataclass
class NilradicalBranch:
    is_nilpotent_derivation: bool
    indices_include_extension: bool
    condition: str


def nilradical_of_extension(ext: ExtensionSpec) -> list:
    """Branches for the nilradical of s x_D R: the base nilradical n when D
    is not nilpotent, n x_D R when it is.

    For a symbolic family both branches are returned with their defining
    conditions: D^n = 0 identically gives the nilpotent branch only; if
    some entry of D^n is a nonzero polynomial, the generic branch is the
    base nilradical and the nilpotent branch holds where all listed entries
    vanish.
    """
    n = ext.base.dim
    power = [row[:] for row in ext.derivation.matrix]
    for _ in range(n - 1):
        power = linalg.mat_mul(power, ext.derivation.matrix)
    nonzero = [power[i][j] for i in range(n) for j in range(n) if not power[i][j].is_zero()]
    if not nonzero:
        return [NilradicalBranch(True, True, "D is nilpotent for all parameter values")]
    condition = "; ".join(str(p) for p in nonzero[:4])
    return [
        NilradicalBranch(False, False, f"generic branch, valid where D^{n} != 0: {condition}"),
        NilradicalBranch(True, True, f"special branch where all entries of D^{n} vanish"),
    ]
