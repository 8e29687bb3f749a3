"""Alternating forms on an n-dimensional space with polynomial coefficients.

Index tuples are stored as bitmasks over the basis 1..n (bit i-1 stands for
e^i), with sign bookkeeping by transposition counting.  Coefficients are
Polynomials; purely numeric forms are just forms with constant coefficients.
Forms are immutable and safe to share.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import DegreeMismatch, DegreeZero, DimensionMismatch
from .poly import Polynomial, Scalar

# -- bitmask helpers ----------------------------------------------------


def mask_of(indices: Iterable[int]) -> int:
    """Bitmask of a set of 1-based indices (must be distinct)."""
    mask = 0
    for i in indices:
        bit = 1 << (i - 1)
        if mask & bit:
            raise ValueError(f"repeated index {i}")
        mask |= bit
    return mask


def indices_of(mask: int) -> tuple:
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def merge_sign(mask_a: int, mask_b: int) -> int:
    """Sign of sorting the concatenation (a..., b...) of two disjoint masks."""
    swaps = 0
    b = mask_b
    while b:
        low = b & -b
        # bits of mask_a strictly above this bit of mask_b must jump over it
        swaps += (mask_a >> low.bit_length()).bit_count()
        b ^= low
    return -1 if swaps & 1 else 1


def _coerce_poly(value) -> Polynomial:
    if isinstance(value, Polynomial):
        return value
    return Polynomial.const(value)


class KForm:
    """Alternating k-form; coeffs maps index bitmasks to Polynomials."""

    __slots__ = ("dim", "degree", "coeffs")

    def __init__(self, dim: int, degree: int, coeffs: Mapping[int, Polynomial] | None = None):
        self.dim = dim
        self.degree = degree
        clean = {}
        if coeffs:
            for mask, coeff in coeffs.items():
                coeff = _coerce_poly(coeff)
                if coeff.is_zero():
                    continue
                if mask.bit_count() != degree:
                    raise ValueError(f"mask {mask:b} does not have degree {degree}")
                if mask >= (1 << dim):
                    raise ValueError(f"mask {mask:b} exceeds dimension {dim}")
                clean[mask] = coeff
        self.coeffs = clean

    # -- constructors ---------------------------------------------------

    @staticmethod
    def zero(dim: int, degree: int) -> "KForm":
        return KForm(dim, degree)

    @staticmethod
    def basis(dim: int, indices: Sequence[int]) -> "KForm":
        """The basis form e^{i1...ik} for strictly increasing indices."""
        idx = tuple(indices)
        if any(i < 1 or i > dim for i in idx):
            raise ValueError(f"indices {idx} out of range for dim {dim}")
        if list(idx) != sorted(set(idx)):
            raise ValueError(f"indices {idx} must be strictly increasing")
        return KForm(dim, len(idx), {mask_of(idx): Polynomial.const(1)})

    @staticmethod
    def from_terms(dim: int, degree: int, terms: Mapping[Sequence[int], object]) -> "KForm":
        return KForm(dim, degree, {mask_of(idx): _coerce_poly(c) for idx, c in terms.items()})

    # -- inspection -------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.coeffs

    def coefficient(self, indices: Sequence[int]) -> Polynomial:
        return self.coeffs.get(mask_of(indices), Polynomial.zero())

    def terms(self) -> list:
        """Deterministic (indices, coefficient) list."""
        return [(indices_of(m), c) for m, c in sorted(self.coeffs.items())]

    def variables(self) -> frozenset:
        out = frozenset()
        for c in self.coeffs.values():
            out |= c.variables()
        return out

    def __eq__(self, other):
        if not isinstance(other, KForm):
            return NotImplemented
        return self.dim == other.dim and self.degree == other.degree and self.coeffs == other.coeffs

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for indices, coeff in self.terms():
            name = "e" + "".join(str(i) for i in indices) if indices else "1"
            parts.append(f"({coeff})*{name}")
        return " + ".join(parts)

    def __repr__(self):
        return f"KForm({self})"

    # -- linear structure -------------------------------------------------

    def _check_compatible(self, other: "KForm"):
        if self.dim != other.dim:
            raise DimensionMismatch(f"dim {self.dim} vs {other.dim}")
        if self.degree != other.degree:
            raise DegreeMismatch(f"degree {self.degree} vs {other.degree}")

    def __add__(self, other: "KForm") -> "KForm":
        self._check_compatible(other)
        out = dict(self.coeffs)
        for mask, coeff in other.coeffs.items():
            total = out.get(mask, Polynomial.zero()) + coeff
            if total.is_zero():
                out.pop(mask, None)
            else:
                out[mask] = total
        return KForm(self.dim, self.degree, out)

    def __sub__(self, other: "KForm") -> "KForm":
        return self + (-other)

    def __neg__(self) -> "KForm":
        return KForm(self.dim, self.degree, {m: -c for m, c in self.coeffs.items()})

    def __mul__(self, scalar) -> "KForm":
        scalar = _coerce_poly(scalar)
        return KForm(self.dim, self.degree, {m: c * scalar for m, c in self.coeffs.items()})

    __rmul__ = __mul__

    # -- evaluation ---------------------------------------------------------

    def substitute(self, mapping: Mapping[str, Polynomial | Scalar]) -> "KForm":
        return KForm(self.dim, self.degree, {m: c.substitute(mapping) for m, c in self.coeffs.items()})

    def evaluate(self, assignment: Mapping[str, Scalar]) -> "KForm":
        """Numeric form (constant coefficients) at a rational assignment."""
        out = {}
        for mask, coeff in self.coeffs.items():
            value = coeff.evaluate(assignment)
            if value:
                out[mask] = Polynomial.const(value)
        return KForm(self.dim, self.degree, out)


class VectorExpr:
    """Vector with polynomial coordinates in the fixed basis e_1..e_n."""

    __slots__ = ("dim", "coords")

    def __init__(self, dim: int, coords: Sequence):
        if len(coords) != dim:
            raise DimensionMismatch(f"expected {dim} coordinates, got {len(coords)}")
        self.dim = dim
        self.coords = tuple(_coerce_poly(c) for c in coords)

    @staticmethod
    def basis(dim: int, i: int) -> "VectorExpr":
        coords = [Polynomial.zero()] * dim
        coords[i - 1] = Polynomial.const(1)
        return VectorExpr(dim, coords)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coords)

    def __add__(self, other: "VectorExpr") -> "VectorExpr":
        if self.dim != other.dim:
            raise DimensionMismatch("vector dims differ")
        return VectorExpr(self.dim, [a + b for a, b in zip(self.coords, other.coords)])

    def __neg__(self):
        return VectorExpr(self.dim, [-c for c in self.coords])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, scalar) -> "VectorExpr":
        scalar = _coerce_poly(scalar)
        return VectorExpr(self.dim, [c * scalar for c in self.coords])

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, VectorExpr):
            return NotImplemented
        return self.dim == other.dim and all(a == b for a, b in zip(self.coords, other.coords))

    def __str__(self):
        parts = [f"({c})*e{i + 1}" for i, c in enumerate(self.coords) if not c.is_zero()]
        return " + ".join(parts) if parts else "0"

    def __repr__(self):
        return f"VectorExpr({self})"


# -- operations -----------------------------------------------------------


def wedge(a: KForm, b: KForm) -> KForm:
    """Exterior product; graded-commutative and associative."""
    if a.dim != b.dim:
        raise DimensionMismatch(f"dim {a.dim} vs {b.dim}")
    degree = a.degree + b.degree
    out = {}
    for ma, ca in a.coeffs.items():
        for mb, cb in b.coeffs.items():
            if ma & mb:
                continue
            mask = ma | mb
            term = ca * cb
            if merge_sign(ma, mb) < 0:
                term = -term
            total = out.get(mask, Polynomial.zero()) + term
            if total.is_zero():
                out.pop(mask, None)
            else:
                out[mask] = total
    return KForm(a.dim, degree, out)


def wedge_all(forms: Sequence[KForm]) -> KForm:
    result = forms[0]
    for f in forms[1:]:
        result = wedge(result, f)
    return result


def contract(v: VectorExpr, f: KForm) -> KForm:
    """Interior product iota_v f; degree drops by one."""
    if v.dim != f.dim:
        raise DimensionMismatch(f"dim {v.dim} vs {f.dim}")
    if f.degree == 0:
        raise DegreeZero("cannot contract a 0-form")
    out = {}
    for mask, coeff in f.coeffs.items():
        rem = mask
        while rem:
            low = rem & -rem
            rem ^= low
            i = low.bit_length()  # 1-based index
            vi = v.coords[i - 1]
            if vi.is_zero():
                continue
            # sign: (-1)^(number of indices below i in mask)
            below = (mask & (low - 1)).bit_count()
            term = vi * coeff
            if below & 1:
                term = -term
            new_mask = mask ^ low
            total = out.get(new_mask, Polynomial.zero()) + term
            if total.is_zero():
                out.pop(new_mask, None)
            else:
                out[new_mask] = total
    return KForm(f.dim, f.degree - 1, out)


def pullback(matrix: Sequence[Sequence], f: KForm) -> KForm:
    """Pullback F*f for the linear map F with matrix M (F e_j = sum_i M[i][j] e_i).

    Satisfies (F*f)(v_1..v_k) = f(F v_1, .., F v_k), hence
    pullback(M1*M2, f) = pullback(M2, pullback(M1, f)).
    """
    n = f.dim
    if len(matrix) != n or any(len(row) != n for row in matrix):
        raise DimensionMismatch(f"matrix must be {n}x{n}")
    rows = [
        KForm(n, 1, {1 << j: _coerce_poly(matrix[k][j]) for j in range(n)})
        for k in range(n)
    ]
    out = KForm.zero(n, f.degree)
    for mask, coeff in f.coeffs.items():
        pulled = [rows[i - 1] for i in indices_of(mask)]
        term = wedge_all(pulled) if pulled else KForm(n, 0, {0: Polynomial.const(1)})
        out = out + term * coeff
    return out


def top_coefficient(f: KForm) -> Polynomial:
    """Coefficient of e^{1..n}; the orientation is the ordered basis."""
    if f.degree != f.dim:
        raise DegreeMismatch(f"degree {f.degree} on dimension {f.dim}")
    return f.coeffs.get((1 << f.dim) - 1, Polynomial.zero())


def form_value(f: KForm, i: int, j: int) -> Polynomial:
    """Value omega(e_i, e_j) of a 2-form on two basis vectors."""
    if f.degree != 2:
        raise DegreeMismatch("form_value needs a 2-form")
    if i == j:
        return Polynomial.zero()
    if i < j:
        return f.coeffs.get(mask_of((i, j)), Polynomial.zero())
    return -f.coeffs.get(mask_of((j, i)), Polynomial.zero())


def generic_two_form(dim: int, prefix: str = "alpha") -> KForm:
    """Sum over i<j of prefix_ij e^{ij} with fresh symbolic coefficients."""
    coeffs = {}
    for i in range(1, dim + 1):
        for j in range(i + 1, dim + 1):
            coeffs[mask_of((i, j))] = Polynomial.var(f"{prefix}_{i}{j}")
    return KForm(dim, 2, coeffs)


def generic_one_form(dim: int, prefix: str = "beta") -> KForm:
    coeffs = {1 << (k - 1): Polynomial.var(f"{prefix}_{k}") for k in range(1, dim + 1)}
    return KForm(dim, 1, coeffs)
