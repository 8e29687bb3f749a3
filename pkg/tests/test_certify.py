"""Certificates, pipelines, sampling, reports."""

import json
import random
from fractions import Fraction

import pytest

from conftest import P, algebra_of, fam
from g2cert.catalog import load_builtin
from g2cert.certify import (
    Certificate,
    CertKind,
    Outcome,
    PairSampler,
    PipelineOptions,
    Report,
    certify_lambda_sign,
    certify_null_direction,
    certify_sign_product,
    certify_zero_diagonal,
    gauge_transport,
    generic_exact_g2,
    generic_su3_candidate,
    negative_control,
    recheck_certificate,
    recheck_report,
    run_all,
    run_pipeline,
    sample_falsify,
    standard_su3_pair,
)
from g2cert.derivations import DerivationFamily, dstar_action, verify_derivation
from g2cert.errors import (
    IdentityMismatch,
    NotIdenticallyZero,
    SingularSymbolicSystem,
    WitnessMismatch,
)
from g2cert.forms import generic_one_form, generic_two_form
from g2cert.lie import ce_differential
from g2cert.poly import Polynomial, Square, Sum
from g2cert import numeric


def by_name(dataset, name):
    return next(e for e in load_builtin(dataset) if name in e.name)


@pytest.fixture(scope="module")
def table1():
    return load_builtin("table1")


@pytest.fixture(scope="module")
def indecomposable():
    return load_builtin("indecomposable")


class TestGenericExactG2:
    def test_q1_zero_diagonal(self):
        q1 = by_name("nonsolvable", "q_1")
        cert = certify_zero_diagonal(q1, [5, 6, 7])
        assert cert.verified and cert.kind == CertKind.ZERO_DIAGONAL

    def test_abelian_r7_gives_zero(self):
        L = algebra_of("(0, 0, 0, 0, 0, 0, 0)")
        phi, b = generic_exact_g2(L)
        assert phi.is_zero()
        assert all(b.entry(i, j).is_zero() for i in range(1, 8) for j in range(1, 8))

    def test_q2_symbolic_mu_diagonal_zero_and_samples(self):
        q2 = by_name("nonsolvable", "q_2")
        algebra = q2.build_algebra()
        phi, b = generic_exact_g2(algebra)
        assert b.entry(5, 5).is_zero()
        # independent spot check: evaluate the full construction at random
        # rational points (Schwartz-Zippel style consistency)
        rng = random.Random(41)
        names = sorted(phi.variables() | {"fam_mu"})
        from g2cert.forms import VectorExpr, contract, top_coefficient, wedge

        for _ in range(50):
            point = {n: Fraction(rng.randint(-6, 6), rng.randint(1, 3)) for n in names}
            phi_num = phi.evaluate(point)
            contraction = contract(VectorExpr.basis(7, 5), phi_num)
            value = top_coefficient(wedge(wedge(contraction, contraction), phi_num))
            assert value.is_zero() or value.constant_value() == 0


class TestLambdaStage:
    def test_witnessed_nonnegative(self, table1):
        entry = by_name("table1", "g_{3,4}^{-1}+g_{3,1}")
        cert, sample = certify_lambda_sign(
            entry.build_algebra(), entry.witness("lambda"), entry.name,
            witness_json=entry.witnesses.get("lambda"),
        )
        assert cert.kind == CertKind.LAMBDA_NONNEG and sample is None

    def test_identically_zero(self):
        entry = by_name("table1", "g_{3,4}^{-1}+R^3")
        cert, _ = certify_lambda_sign(entry.build_algebra(), None, entry.name)
        assert cert.kind == CertKind.LAMBDA_ZERO

    def test_survivor_negative_sample(self):
        entry = by_name("table1", "g_{3,4}^{-1}+g_{3,4}^{-1}")
        cert, sample = certify_lambda_sign(
            entry.build_algebra(), None, entry.name, rng=random.Random(5)
        )
        assert cert is None
        values = {k: Fraction(v) for k, v in sample.items()}
        lam = 16 * values["alpha_14"] * values["alpha_15"] * values["alpha_24"] * values["alpha_25"]
        assert lam < 0

    def test_wrong_witness_raises(self):
        entry = by_name("table1", "g_{3,4}^{-1}+g_{3,1}")
        with pytest.raises(WitnessMismatch):
            certify_lambda_sign(
                entry.build_algebra(), Square(P("alpha_14")), entry.name
            )


def su3_candidate_for(entry, subs=None, fam_subs=None):
    algebra = entry.build_algebra()
    family = entry.build_derivation_family()
    if subs:
        family = family.substitute(subs)
    if fam_subs:
        from g2cert.lie import LieAlgebra

        algebra = LieAlgebra(6, [d.substitute(fam_subs) for d in algebra.differentials])
        family = DerivationFamily(
            algebra, [[e.substitute(fam_subs) for e in row] for row in family.matrix], family.params
        )
    return generic_su3_candidate(algebra, family)


class TestNullDirectionAndSignProduct:
    def test_g530_null_directions(self):
        entry = by_name("table1", "g_{5,30}")
        candidate = su3_candidate_for(entry, {"a_1": 0, "a_5": 0, "a_8": 0})
        cert = certify_null_direction(candidate, [1, 2, 3], entry.name)
        assert cert.verified

    def test_g530_nonnull_index_rejected(self):
        entry = by_name("table1", "g_{5,30}")
        candidate = su3_candidate_for(entry, {"a_1": 0, "a_5": 0, "a_8": 0})
        with pytest.raises(NotIdenticallyZero):
            certify_null_direction(candidate, [4], entry.name)

    def test_g654_null_directions(self):
        entry = by_name("indecomposable", "g_{6,54}")
        candidate = su3_candidate_for(entry, fam_subs={"fam_l": Fraction(-1)})
        cert = certify_null_direction(candidate, [1, 2, 3, 4], entry.name)
        assert cert.verified

    def test_g535_sign_product(self):
        entry = by_name("table1", "g_{5,35}")
        candidate = su3_candidate_for(entry)
        cert = certify_sign_product(
            candidate, 1, 6, entry.witness("sign_product"), entry.name,
            witness_json=entry.witnesses["sign_product"],
        )
        assert cert.verified

    def test_zero_witness_mismatch(self):
        entry = by_name("table1", "g_{5,35}")
        candidate = su3_candidate_for(entry)
        with pytest.raises(IdentityMismatch):
            certify_sign_product(candidate, 1, 6, Sum([]), entry.name)

    def test_g6115_sign_product(self):
        entry = by_name("indecomposable", "g_{6,115}")
        candidate = su3_candidate_for(entry, subs={"a_1": P("-a_3 - 2*a_6")})
        cert = certify_sign_product(
            candidate, 3, 4, entry.witness("sign_product"), entry.name,
            witness_json=entry.witnesses["sign_product"],
        )
        assert cert.verified


class TestGaugeTransport:
    def test_double_g34_gauge(self):
        entry = by_name("table1", "g_{3,4}^{-1}+g_{3,4}")
        candidate = su3_candidate_for(entry)
        step = entry.plan[0]
        s_family = DerivationFamily(
            entry.build_algebra(),
            [[P(c) for c in row] for row in step["s_matrix"]],
            tuple(step["s_params"]),
        )
        cert = gauge_transport(
            candidate, s_family, [tuple(t) for t in step["targets"]], (3, 6), entry.name
        )
        assert cert.verified
        delta = P("alpha_14*alpha_25 - alpha_15*alpha_24")
        assert P(cert.data["branch_condition"]) == delta * delta
        # lambda < 0 forces the branch condition nonzero:
        # lambda + 4 delta^2 = 4 (a14 a25 + a15 a24)^2
        lam = candidate.lam
        assert lam + 4 * delta * delta == 4 * P("(alpha_14*alpha_25 + alpha_15*alpha_24)^2")

    def test_gauge_without_freedom_is_singular(self):
        entry = by_name("table1", "g_{3,4}^{-1}+g_{3,4}")
        candidate = su3_candidate_for(entry)
        zero_s = DerivationFamily(
            entry.build_algebra(),
            [[Polynomial.zero()] * 6 for _ in range(6)],
            ("s_1", "s_2", "s_3", "s_4"),
        )
        with pytest.raises(SingularSymbolicSystem):
            gauge_transport(candidate, zero_s, [(1, 3, 6), (2, 3, 6), (3, 4, 6), (3, 5, 6)], (3, 6), entry.name)


class TestSampling:
    def test_deterministic_replay(self):
        entry = by_name("indecomposable", "g_{6,118}")
        algebra = entry.build_algebra()
        family = entry.build_derivation_family().substitute({"a_1": P("-a_3 - 2*a_7")})
        sampler = PairSampler(algebra, family, entry.atoms, random.Random(0))
        cert1 = sample_falsify(entry.name, sampler, 40, 123)
        sampler2 = PairSampler(algebra, family, entry.atoms, random.Random(0))
        cert2 = sample_falsify(entry.name, sampler2, 40, 123)
        assert cert1.data == cert2.data
        assert cert1.verified and cert1.data["passes"] == 0

    def test_zero_trials_empty_certificate(self):
        entry = by_name("indecomposable", "g_{6,118}")
        algebra = entry.build_algebra()
        family = entry.build_derivation_family()
        sampler = PairSampler(algebra, family, entry.atoms, random.Random(0))
        cert = sample_falsify(entry.name, sampler, 0, 7)
        assert cert.verified and cert.data["trials"] == 0 and cert.data["passes"] == 0

    def test_negative_control_finds_passes(self):
        assert negative_control(trials=25, seed=3) == 25

    def test_fast_path_matches_exact_su3_check(self):
        # cross-validate the integer fast path against hitchin.su3_check
        from g2cert.forms import KForm, pullback
        from g2cert.hitchin import SU3Verdict, su3_check

        rng = random.Random(8)
        omega0, psi0 = standard_su3_pair()
        agree = 0
        for _ in range(60):
            entries = [[Fraction(rng.randint(-2, 2)) for _ in range(6)] for _ in range(6)]
            matrix = [[Polynomial.const(x) for x in row] for row in entries]
            omega, psi = pullback(matrix, omega0), pullback(matrix, psi0)
            om_int = {m: int(c.constant_value()) for m, c in omega.coeffs.items()}
            ps_int = {m: int(c.constant_value()) for m, c in psi.coeffs.items()}
            exact = su3_check(omega, psi) == SU3Verdict.PASSES
            fast = numeric.su3_passes_int(om_int, ps_int)
            assert exact == fast
            agree += 1
        assert agree == 60


class TestPipelines:
    def test_table1_exactly_four_reach_su3_stage(self, table1):
        reached = []
        for entry in table1:
            result = run_pipeline(entry, PipelineOptions(trials_override=5))
            assert result.ok(), result.name
            stage_kinds = {
                CertKind.NULL_DIRECTION,
                CertKind.SIGN_PRODUCT,
                CertKind.GAUGE_NULL,
                CertKind.SAMPLED_NO_SU3,
            }
            if any(c.kind in stage_kinds for c in result.certificates):
                reached.append(entry.name)
        assert sorted(reached) == sorted(
            [
                "g_{3,4}^{-1}+g_{3,4}^{-1}",
                "g_{5,30}^{-4/3}+R",
                "g_{5,33}^{-1,-1}+R",
                "g_{5,35}^{-2,0}+R",
            ]
        )

    def test_nonsolvable_outcomes(self):
        results = {e.name: run_pipeline(e) for e in load_builtin("nonsolvable")}
        for name in ("q_1", "q_2^{mu}", "q_3^{mu}"):
            assert results[name].outcome == Outcome.OBSTRUCTED
            assert results[name].certificates[0].kind == CertKind.ZERO_DIAGONAL
        assert results["q_4"].outcome == Outcome.LATTICE_OUT_OF_SCOPE

    def test_empty_catalog_empty_report(self):
        report = run_all([])
        assert report.results == [] and report.verified_all()

    def test_stub_reports_data_not_shipped(self, indecomposable):
        stub = next(e for e in indecomposable if e.stub)
        result = run_pipeline(stub)
        assert result.outcome == Outcome.DATA_NOT_SHIPPED


class TestRecheckDeterminism:
    def test_report_certificates_recheck_and_are_stable(self):
        entries = load_builtin("nonsolvable") + [
            by_name("table1", "g_{5,30}"),
            by_name("table1", "g_{5,35}"),
            by_name("table1", "g_{3,4}^{-1}+g_{3,1}"),
            by_name("indecomposable", "g_{6,55}"),
        ]
        options = PipelineOptions(trials_override=10)
        report = run_all(entries, options)
        assert report.verified_all()
        blob = json.dumps(report.to_json(include_timing=False), sort_keys=True)
        verdicts = recheck_report(json.loads(blob), entries)
        assert all(all(v) for v in verdicts.values())
        # bit-identical re-serialization of the certificate content
        report2 = run_all(entries, options)
        blob2 = json.dumps(report2.to_json(include_timing=False), sort_keys=True)
        assert blob == blob2

    def test_gauge_certificate_rechecks_from_stored_data(self):
        entry = by_name("table1", "g_{3,4}^{-1}+g_{3,4}")
        result = run_pipeline(entry, PipelineOptions(skip_sampling=True))
        cert = next(c for c in result.certificates if c.kind == CertKind.GAUGE_NULL)
        rebuilt = Certificate.from_json(json.loads(json.dumps(cert.to_json())))
        assert recheck_certificate(entry, rebuilt)

    def test_sampling_certificate_replays(self):
        entry = by_name("indecomposable", "g_{6,118}")
        result = run_pipeline(entry, PipelineOptions(trials_override=15))
        cert = next(c for c in result.certificates if c.kind == CertKind.SAMPLED_NO_SU3)
        assert recheck_certificate(entry, cert)


class TestReportRendering:
    def test_markdown_contains_outcomes(self):
        entries = load_builtin("nonsolvable")
        report = run_all(entries)
        text = report.to_markdown()
        assert "q_4" in text and "lattice-out-of-scope" in text
        assert "zero_diagonal" in text
