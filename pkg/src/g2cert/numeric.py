"""Integer fast path for the randomized SU(3) falsifier.

Forms are dicts mapping index bitmasks to Python ints; a symbolic form is
evaluated once per sample and cleared of denominators (the SU(3) verdict is
invariant under scaling omega and psi by positive rationals).  This mirrors
hitchin.su3_check exactly and is cross-validated against it in the tests.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm

from .errors import KSquareNotScalar
from .forms import KForm, merge_sign
from .linalg import det_fraction

FULL6 = (1 << 6) - 1


def eval_form_int(form: KForm, assignment) -> dict:
    """Evaluate coefficients and clear denominators (positive scaling)."""
    values = {}
    denominators = 1
    for mask, coeff in form.coeffs.items():
        value = coeff.evaluate(assignment)
        if value:
            values[mask] = value
            denominators = lcm(denominators, value.denominator)
    return {mask: int(v * denominators) for mask, v in values.items()}


def wedge_int(a: dict, b: dict) -> dict:
    out = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            if ma & mb:
                continue
            mask = ma | mb
            term = ca * cb if merge_sign(ma, mb) > 0 else -ca * cb
            new = out.get(mask, 0) + term
            if new:
                out[mask] = new
            else:
                out.pop(mask, None)
    return out


def contract_basis_int(i: int, f: dict) -> dict:
    """iota_{e_i} on an int-coefficient form."""
    low = 1 << (i - 1)
    out = {}
    for mask, coeff in f.items():
        if not mask & low:
            continue
        below = (mask & (low - 1)).bit_count()
        out[mask ^ low] = -coeff if below & 1 else coeff
    return out


def k_matrix_int(psi: dict):
    """(K entries as ints, tr(K^2)); volume e^123456, 1-form-first pairing."""
    entries = [[0] * 6 for _ in range(6)]
    for i in range(1, 7):
        xi = wedge_int(contract_basis_int(i, psi), psi)
        for mask, coeff in xi.items():
            j = (FULL6 ^ mask).bit_length()
            if FULL6 ^ mask != 1 << (j - 1):
                continue
            below = (mask & ((1 << (j - 1)) - 1)).bit_count()
            # e^j ^ xi: move e^j across nothing (it is in front); sign of
            # sorting (j, mask) is (-1)^(number of mask indices below j)
            entries[j - 1][i - 1] = coeff if below % 2 == 0 else -coeff
    trace_sq = 0
    for i in range(6):
        for j in range(6):
            s = sum(entries[i][l] * entries[l][j] for l in range(6))
            if i == j:
                trace_sq += s
            expected_zero = i != j
            if expected_zero and s != 0:
                raise KSquareNotScalar(f"integer K^2 off-diagonal ({i + 1},{j + 1})")
    for i in range(6):
        s = sum(entries[i][l] * entries[l][i] for l in range(6))
        if 6 * s != trace_sq:
            raise KSquareNotScalar(f"integer K^2 diagonal ({i + 1},{i + 1})")
    return entries, trace_sq


def form_value2_int(f: dict, i: int, j: int) -> int:
    if i == j:
        return 0
    if i < j:
        return f.get((1 << (i - 1)) | (1 << (j - 1)), 0)
    return -f.get((1 << (j - 1)) | (1 << (i - 1)), 0)


def su3_passes_int(omega: dict, psi: dict) -> bool:
    """True when the integer pair passes all four SU(3) conditions.

    Mirrors hitchin.su3_check with either definite sign accepted.
    """
    vol = wedge_int(wedge_int(omega, omega), omega).get(FULL6, 0)
    if vol == 0:
        return False
    k, trace_sq = k_matrix_int(psi)
    if trace_sq >= 0:
        return False
    if wedge_int(omega, psi):
        return False
    h = [[0] * 6 for _ in range(6)]
    for i in range(1, 7):
        for j in range(1, 7):
            h[i - 1][j - 1] = sum(
                form_value2_int(omega, i, l) * k[l - 1][j - 1] for l in range(1, 7)
            )
    for i in range(6):
        for j in range(i + 1, 6):
            if h[i][j] != h[j][i]:
                return False
    minors = [
        det_fraction([row[: m + 1] for row in h[: m + 1]]) for m in range(6)
    ]
    if minors[-1] == 0:
        return False
    if all(m > 0 for m in minors):
        return True
    if all((m < 0) if (idx % 2 == 0) else (m > 0) for idx, m in enumerate(minors)):
        return True
    return False


def candidate_conditions_int(omega: dict, psi: dict):
    """(omega^3 != 0, lambda < 0) for the sampling filter."""
    vol = wedge_int(wedge_int(omega, omega), omega).get(FULL6, 0)
    if vol == 0:
        return False
    _, trace_sq = k_matrix_int(psi)
    return trace_sq < 0
