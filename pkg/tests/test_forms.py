"""Exterior algebra: wedge, contraction, pullback, top coefficient."""

import random
from fractions import Fraction

import pytest

from conftest import P
from g2cert.errors import DegreeMismatch, DegreeZero, DimensionMismatch
from g2cert.forms import (
    KForm,
    VectorExpr,
    contract,
    generic_two_form,
    pullback,
    top_coefficient,
    wedge,
)
from g2cert.linalg import det_fraction
from g2cert.poly import Polynomial
from oracles import basis_vectors, eval_form, wedge_eval


def random_form(rng, dim, degree, nterms=3):
    coeffs = {}
    for _ in range(nterms):
        idx = tuple(sorted(rng.sample(range(1, dim + 1), degree)))
        mask = sum(1 << (i - 1) for i in idx)
        coeffs[mask] = Polynomial.const(Fraction(rng.randint(-5, 5)))
    return KForm(dim, degree, coeffs)


class TestWedge:
    def test_square_of_covector_vanishes(self):
        e1 = KForm.basis(4, (1,))
        assert wedge(e1, e1).is_zero()

    def test_antisymmetry_of_covectors(self):
        e1, e2 = KForm.basis(4, (1,)), KForm.basis(4, (2,))
        assert wedge(e1, e2) == KForm.basis(4, (1, 2))
        assert wedge(e2, e1) == -KForm.basis(4, (1, 2))

    def test_square_of_symplectic_form(self):
        # oracle: expansion over index pairs gives 2 e1234
        f = KForm.basis(4, (1, 2)) + KForm.basis(4, (3, 4))
        assert wedge(f, f) == 2 * KForm.basis(4, (1, 2, 3, 4))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            wedge(KForm.basis(4, (1,)), KForm.basis(5, (1,)))

    def test_graded_commutativity_random(self):
        rng = random.Random(11)
        for da in (1, 2, 3):
            for db in (1, 2, 3):
                for _ in range(200):
                    a = random_form(rng, 6, da)
                    b = random_form(rng, 6, db)
                    left = wedge(a, b)
                    right = wedge(b, a)
                    if (da * db) % 2:
                        right = -right
                    assert left == right

    def test_wedge_matches_multilinear_oracle(self):
        rng = random.Random(23)
        basis = basis_vectors(5)
        for _ in range(20):
            a = random_form(rng, 5, 2)
            b = random_form(rng, 5, 3)
            product = wedge(a, b)
            assert eval_form(product, basis) == wedge_eval([a, b], basis)


class TestContract:
    def test_basis_contraction(self):
        assert contract(VectorExpr.basis(3, 1), KForm.basis(3, (1, 2, 3))) == KForm.basis(3, (2, 3))

    def test_missing_index_contracts_to_zero(self):
        assert contract(VectorExpr.basis(4, 4), KForm.basis(4, (1, 2, 3))).is_zero()

    def test_linearity(self):
        v = VectorExpr.basis(3, 1) + VectorExpr.basis(3, 2)
        f = KForm.basis(3, (1, 2))
        assert contract(v, f) == KForm.basis(3, (2,)) - KForm.basis(3, (1,))

    def test_double_contraction_vanishes(self):
        rng = random.Random(5)
        for _ in range(50):
            f = random_form(rng, 6, 3)
            v = VectorExpr(6, [Fraction(rng.randint(-3, 3)) for _ in range(6)])
            assert contract(v, contract(v, f)).is_zero()

    def test_leibniz_rule_random(self):
        rng = random.Random(17)
        for da in (1, 2):
            for db in (1, 2, 3):
                for _ in range(200):
                    a = random_form(rng, 6, da)
                    b = random_form(rng, 6, db)
                    v = VectorExpr(6, [Fraction(rng.randint(-3, 3)) for _ in range(6)])
                    lhs = contract(v, wedge(a, b))
                    rhs = wedge(contract(v, a), b)
                    second = wedge(a, contract(v, b))
                    rhs = rhs + (second if da % 2 == 0 else -second)
                    assert lhs == rhs

    def test_degree_zero_rejected(self):
        with pytest.raises(DegreeZero):
            contract(VectorExpr.basis(3, 1), KForm(3, 0, {0: Polynomial.const(1)}))


class TestPullback:
    def test_identity(self):
        f = generic_two_form(4)
        identity = [[Polynomial.const(1 if i == j else 0) for j in range(4)] for i in range(4)]
        assert pullback(identity, f) == f

    def test_diagonal_scaling(self):
        f = KForm.basis(4, (1, 2))
        diag = [[Polynomial.const(0)] * 4 for _ in range(4)]
        for i in range(4):
            diag[i][i] = Polynomial.const(2 if i == 0 else 1)
        assert pullback(diag, f) == 2 * f

    def test_exp_s_reproduces_printed_coefficient(self):
        # F = exp(S) with the four-parameter nilpotent gauge of the double
        # g_{3,4}: the e136 coefficient of F*psi is -(a14 s3 + a15 s4 + a16)
        psi = KForm.from_terms(
            6,
            3,
            {
                (1, 3, 4): P("-alpha_14"),
                (1, 3, 5): P("-alpha_15"),
                (1, 3, 6): P("-alpha_16"),
                (1, 4, 6): P("alpha_14"),
                (1, 5, 6): P("-alpha_15"),
                (2, 3, 4): P("alpha_24"),
                (2, 3, 5): P("alpha_25"),
                (2, 3, 6): P("alpha_26"),
                (2, 4, 6): P("alpha_24"),
                (2, 5, 6): P("-alpha_25"),
                (3, 4, 6): P("alpha_34"),
                (3, 5, 6): P("-alpha_35"),
            },
        )
        F = [[Polynomial.const(1 if i == j else 0) for j in range(6)] for i in range(6)]
        F[0][2] = P("s_1")
        F[1][2] = P("s_2")
        F[3][5] = P("s_3")
        F[4][5] = P("s_4")
        pulled = pullback(F, psi)
        assert pulled.coefficient((1, 3, 6)) == P("-(alpha_14*s_3 + alpha_15*s_4 + alpha_16)")

    def test_functoriality(self):
        rng = random.Random(2)
        for _ in range(20):
            f = random_form(rng, 4, 2)
            m1 = [[Polynomial.const(rng.randint(-2, 2)) for _ in range(4)] for _ in range(4)]
            m2 = [[Polynomial.const(rng.randint(-2, 2)) for _ in range(4)] for _ in range(4)]
            composed = [
                [
                    sum((m1[i][k] * m2[k][j] for k in range(4)), Polynomial.zero())
                    for j in range(4)
                ]
                for i in range(4)
            ]
            assert pullback(composed, f) == pullback(m2, pullback(m1, f))

    def test_determinant_scaling_of_volume(self):
        rng = random.Random(9)
        vol = KForm.basis(4, (1, 2, 3, 4))
        for _ in range(30):
            entries = [[Fraction(rng.randint(-3, 3)) for _ in range(4)] for _ in range(4)]
            matrix = [[Polynomial.const(x) for x in row] for row in entries]
            pulled = pullback(matrix, vol)
            assert top_coefficient(pulled).constant_value() == det_fraction(entries)


class TestTopCoefficient:
    def test_unit_volume(self):
        assert top_coefficient(KForm.basis(6, (1, 2, 3, 4, 5, 6))) == Polynomial.const(1)

    def test_scaled_volume(self):
        assert top_coefficient(2 * KForm.basis(6, (1, 2, 3, 4, 5, 6))) == Polynomial.const(2)

    def test_omega_cubed_nondegenerate(self):
        # oracle: direct wedge of three copies
        omega = KForm.from_terms(6, 2, {(1, 2): 1, (3, 4): 1, (5, 6): 1})
        cubed = wedge(wedge(omega, omega), omega)
        assert top_coefficient(cubed) == Polynomial.const(6)

    def test_degree_mismatch(self):
        with pytest.raises(DegreeMismatch):
            top_coefficient(KForm.basis(6, (1, 2)))
