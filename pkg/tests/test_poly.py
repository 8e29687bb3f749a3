"""Exact scalar arithmetic: polynomials, rational functions, witnesses,
symbolic linear systems."""

import random
from fractions import Fraction

import pytest

from conftest import P
from g2cert.errors import ExpansionMismatch, MissingVariable, SingularSymbolicSystem
from g2cert.poly import (
    NonNegWitness,
    Polynomial,
    PositiveConst,
    Product,
    RationalFunction,
    Square,
    Sum,
    check_nonneg_witness,
    poly_matrix_det,
    solve_linear,
    substitute_cramer,
)


class TestRingOps:
    def test_additive_inverse(self):
        x = Polynomial.var("x")
        assert (x + (-x)).is_zero()

    def test_monomial_product_from_lambda_table(self):
        # 4 a14^2 a24^2 is the product of a14 a24 and 4 a14 a24
        assert P("alpha_14*alpha_24") * P("4*alpha_14*alpha_24") == P("4*alpha_14^2*alpha_24^2")

    def test_schoolbook_square(self):
        # oracle: term-by-term expansion of (x + y)^2
        x, y = Polynomial.var("x"), Polynomial.var("y")
        expanded = x * x + x * y + y * x + y * y
        assert (x + y) ** 2 == expanded
        assert (x + y) ** 2 == P("x^2 + 2*x*y + y^2")

    def test_rational_coefficients_are_exact(self):
        p = P("2/3*x") + P("1/3*x")
        assert p == P("x")

    def test_power_and_content(self):
        p = P("6*x^2 - 4*x*y")
        assert p.content() == Fraction(2)
        assert (p * Fraction(1, 2)) == P("3*x^2 - 2*x*y")

    def test_random_ring_homomorphism(self):
        # evaluate(a*b) = evaluate(a)*evaluate(b), evaluate(a+b) likewise
        rng = random.Random(7)
        names = ["x", "y", "z"]

        def random_poly():
            terms = {}
            for _ in range(rng.randint(1, 5)):
                mono = tuple(
                    sorted((n, rng.randint(1, 3)) for n in rng.sample(names, rng.randint(0, 2)))
                )
                terms[mono] = terms.get(mono, Fraction(0)) + Fraction(
                    rng.randint(-6, 6), rng.randint(1, 4)
                )
            return Polynomial(terms)

        for _ in range(1000):
            a, b = random_poly(), random_poly()
            point = {n: Fraction(rng.randint(-5, 5), rng.randint(1, 3)) for n in names}
            assert (a * b).evaluate(point) == a.evaluate(point) * b.evaluate(point)
            assert (a + b).evaluate(point) == a.evaluate(point) + b.evaluate(point)


class TestEvaluate:
    def test_direct_substitution(self):
        assert P("4*a_14^2*a_24^2").evaluate({"a_14": 1, "a_24": 2}) == 16

    def test_zero_polynomial_empty_assignment(self):
        assert Polynomial.zero().evaluate({}) == 0

    def test_g654_lambda_value(self):
        # lambda = 16 alpha_12^2 alpha_24 alpha_13 at (1, 1, -1) is -16
        lam = P("16*alpha_12^2*alpha_24*alpha_13")
        assert lam.evaluate({"alpha_12": 1, "alpha_24": 1, "alpha_13": -1}) == -16

    def test_missing_variable(self):
        with pytest.raises(MissingVariable):
            P("x*y").evaluate({"x": 1})


class TestSubstitution:
    def test_partial_substitution(self):
        p = P("x^2*y + 3*x")
        assert p.substitute({"x": 2}) == P("4*y + 6")

    def test_polynomial_image(self):
        p = P("x^2")
        assert p.substitute({"x": P("u+v")}) == P("u^2 + 2*u*v + v^2")

    def test_divide_exact(self):
        p = P("x^2*y - y^3")
        assert p.divide_exact(P("y")) == P("x^2 - y^2")
        assert p.divide_exact(P("x + 1")) is None


class TestRationalFunction:
    def test_normalization_sign_and_content(self):
        r = RationalFunction(P("2*x"), P("-4*y"))
        assert r.den == P("y") and r.num == P("-1/2*x")

    def test_cross_multiplied_equality(self):
        a = RationalFunction(P("x^2 - y^2"), P("x - y"))
        b = RationalFunction(P("(x+y)*(x-y)"), P("x - y"))
        assert a == b

    def test_arithmetic(self):
        x = RationalFunction(P("1"), P("x"))
        assert (x + x) == RationalFunction(P("2"), P("x"))
        # content-only reduction keeps x/x unreduced, but equality is exact
        assert (x * P("x")) == 1
        assert (x * P("x")).as_polynomial() == P("1")

    def test_zero_denominator_rejected(self):
        with pytest.raises(ZeroDivisionError):
            RationalFunction(P("1"), Polynomial.zero())


class TestNonNegWitness:
    def test_monomial_square_witness(self):
        target = P("4*a_14^2*a_24^2")
        witness = Product([PositiveConst(4), Square(P("a_14*a_24"))])
        assert check_nonneg_witness(target, witness)

    def test_sum_of_squares_square(self):
        target = P("(a_14^2 + a_24^2)^2")
        assert check_nonneg_witness(target, Square(P("a_14^2 + a_24^2")))

    def test_negative_values_unprovable(self):
        with pytest.raises(ExpansionMismatch) as err:
            check_nonneg_witness(P("x^2 - 1"), Square(P("x")))
        assert err.value.difference == P("1")

    def test_positive_const_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            PositiveConst(0)

    def test_verified_witness_nonnegative_on_samples(self):
        # a verified witness evaluates >= 0 everywhere; 10^4 exact samples
        witness = Product(
            [
                PositiveConst(4),
                Sum([Square(P("a_14")), Square(P("a_15"))]),
                Sum([Square(P("a_24")), Square(P("a_25"))]),
            ]
        )
        target = witness.expand()
        rng = random.Random(3)
        names = sorted(target.variables())
        for _ in range(10_000):
            point = {n: Fraction(rng.randint(-30, 30), rng.randint(1, 9)) for n in names}
            assert target.evaluate(point) >= 0

    def test_json_round_trip(self):
        witness = Product([PositiveConst(16), Square(P("fam_p*alpha_14*alpha_16"))])
        rebuilt = NonNegWitness.from_json(witness.to_json())
        assert rebuilt.expand() == witness.expand()


class TestSolveLinear:
    def test_identity_system(self):
        one, zero = Polynomial.const(1), Polynomial.zero()
        solved = solve_linear([[one, zero], [zero, one]], [P("p"), P("q")])
        assert solved.solutions[0] == RationalFunction(P("p"), P("1"))
        assert solved.solutions[1] == RationalFunction(P("q"), P("1"))

    def test_two_by_two_hand_cramer(self):
        # [[alpha_12, 0], [1, 1]] x = (u, v): hand Cramer gives
        # x1 = u/alpha_12, x2 = (alpha_12 v - u)/alpha_12
        matrix = [[P("alpha_12"), Polynomial.zero()], [P("1"), P("1")]]
        solved = solve_linear(matrix, [P("u"), P("v")])
        assert solved.determinant == P("alpha_12")
        assert solved.solutions[0] == RationalFunction(P("u"), P("alpha_12"))
        assert solved.solutions[1] == RationalFunction(P("alpha_12*v - u"), P("alpha_12"))

    def test_gauge_system_of_the_double_g34(self):
        # the 4x4 block system; determinant is (a14 a25 - a15 a24)^2
        z = Polynomial.zero()
        a14, a15, a24, a25 = (P(f"alpha_{k}") for k in ("14", "15", "24", "25"))
        matrix = [
            [z, z, a14, a15],
            [z, z, a24, a25],
            [a14, a24, z, z],
            [a15, a25, z, z],
        ]
        rhs = [-P("alpha_16"), -P("alpha_26"), -P("alpha_34"), -P("alpha_35")]
        solved = solve_linear(matrix, rhs)
        delta = P("alpha_14*alpha_25 - alpha_15*alpha_24")
        assert solved.determinant == delta * delta or solved.determinant == -(delta * delta)

    def test_substituted_solution_satisfies_system(self):
        matrix = [[P("x"), P("1")], [P("1"), P("x")]]
        rhs = [P("u"), P("v")]
        solved = solve_linear(matrix, rhs)
        for i in range(2):
            acc = RationalFunction.zero()
            for j in range(2):
                acc = acc + solved.solutions[j] * matrix[i][j]
            assert acc == RationalFunction.from_polynomial(rhs[i])

    def test_singular_system(self):
        one = Polynomial.const(1)
        with pytest.raises(SingularSymbolicSystem):
            solve_linear([[one, one], [one, one]], [P("u"), P("v")])

    def test_substitute_cramer_matches_rational_substitution(self):
        matrix = [[P("x"), P("1")], [P("1"), P("x")]]
        solved = solve_linear(matrix, [P("u"), P("v")])
        poly = P("3*s_1^2 + s_1*s_2*y - s_2 + 7")
        num, power = substitute_cramer(poly, ["s_1", "s_2"], solved.numerators, solved.determinant)
        direct = poly.substitute_rational(dict(zip(["s_1", "s_2"], solved.solutions)))
        assert RationalFunction(num, solved.determinant**power) == direct


def test_poly_matrix_det_matches_fraction_det():
    rng = random.Random(5)
    from g2cert.linalg import det_fraction

    for _ in range(25):
        n = rng.randint(1, 4)
        rows = [[Fraction(rng.randint(-4, 4)) for _ in range(n)] for _ in range(n)]
        poly_rows = [[Polynomial.const(x) for x in row] for row in rows]
        assert poly_matrix_det(poly_rows).constant_value() == det_fraction(rows)
