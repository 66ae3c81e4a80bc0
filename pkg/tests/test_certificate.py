"""Certificate-layer tests: criteria, radii, schedules, audits, JSON."""

import json
import math

import numpy as np
import pytest

from halley_cert import (
    ConvergenceCertificate,
    KantorovichInputs,
    SMALE_CRITERION_BOUND,
    SmaleInputs,
    check_initial_conditions,
    halley_solve,
    kantorovich_certificate,
    smale_certificate,
    verify_error_bound,
)
from halley_cert.majorant import CubicMajorant
from helpers import (
    linear_problem,
    random_certified_cubic,
    random_certified_smale,
    scalar_sqrt2,
)

TABLE_INPUTS = KantorovichInputs(beta=0.2, eta=1.2, lip=1.2)


def table_cert(seq_len=10):
    return kantorovich_certificate(TABLE_INPUTS, seq_len=seq_len)


def test_input_validation():
    for bad in [(-0.1, 1.0, 1.0), (0.1, -1.0, 1.0), (0.1, 1.0, 0.0),
                (math.inf, 1.0, 1.0), (0.1, 1.0, math.nan)]:
        with pytest.raises(ValueError):
            KantorovichInputs(*bad)
    for bad in [(-0.1, 1.0), (0.1, 0.0), (0.1, -2.0), (math.nan, 1.0)]:
        with pytest.raises(ValueError):
            SmaleInputs(*bad)
    assert SmaleInputs(0.25, 2.0).alpha == pytest.approx(0.5)
    with pytest.raises(ValueError):
        kantorovich_certificate(TABLE_INPUTS, seq_len=0)
    with pytest.raises(ValueError):
        smale_certificate(SmaleInputs(0.1, 0.5), seq_len=0)


def test_kantorovich_table_row():
    cert = table_cert()
    assert cert.certified
    assert cert.verdict == "certified"
    assert cert.majorant_kind == "kantorovich"
    assert cert.criterion_lhs == 0.2
    assert cert.criterion_rhs == pytest.approx(0.3418593726458156, rel=1e-12)
    assert cert.t_star == pytest.approx(math.sqrt(5.0) - 2.0, rel=1e-13)
    assert cert.uniqueness_radius == pytest.approx(1.0, abs=1e-13)
    assert cert.rate_constant == pytest.approx(1.961093857666584, rel=1e-12)
    assert cert.sequence.points[0] == 0.0
    assert cert.sequence.points[1] == pytest.approx(0.2272727272727273, rel=1e-15)
    assert cert.apriori_errors == cert.sequence.gaps
    for t, gap in zip(cert.sequence.points, cert.apriori_errors):
        assert gap == pytest.approx(cert.t_star - t, abs=1e-16)


def test_kantorovich_spec_example_quarter_lambda():
    cert = kantorovich_certificate(
        KantorovichInputs(beta=0.0344828, eta=0.2068966, lip=0.2068966))
    assert cert.certified
    assert cert.t_star == pytest.approx(0.0346081, abs=1e-6)
    assert cert.uniqueness_radius == pytest.approx(4.06814, abs=1e-4)


def test_kantorovich_boundary_is_rejected():
    bound = CubicMajorant(0.0, 1.2, 1.2).criterion_bound()
    cert = kantorovich_certificate(KantorovichInputs(bound, 1.2, 1.2))
    assert not cert.certified
    assert cert.verdict == "criterion_failed"
    assert cert.criterion_lhs == bound
    assert cert.t_star is None
    assert cert.uniqueness_radius is None
    assert cert.rate_constant is None
    assert cert.sequence is None
    assert cert.apriori_errors is None
    # just above fails too
    above = kantorovich_certificate(
        KantorovichInputs(bound * (1.0 + 1e-12), 1.2, 1.2))
    assert not above.certified


def test_zero_beta_is_trivially_certified():
    cert = kantorovich_certificate(KantorovichInputs(0.0, 1.2, 1.2))
    assert cert.certified
    assert cert.t_star == 0.0
    assert cert.sequence.points == (0.0,)
    assert cert.apriori_errors == (0.0,)
    assert cert.sequence.converged_at == 0
    assert cert.uniqueness_radius > 0.0
    assert cert.rate_constant == pytest.approx(0.7466666666666666, rel=1e-12)


def test_smale_frozen_values():
    cert = smale_certificate(SmaleInputs(beta=0.1, gamma=0.5))
    assert cert.certified
    assert cert.majorant_kind == "smale"
    assert cert.criterion_lhs == pytest.approx(0.05)
    assert cert.criterion_rhs == SMALE_CRITERION_BOUND
    assert cert.t_star == pytest.approx(0.10592363464399479, abs=1e-14)
    assert cert.uniqueness_radius == pytest.approx(0.9440763653560053, abs=1e-13)
    assert cert.rate_constant == pytest.approx(1.0581017529772574, rel=1e-12)
    assert cert.sequence.converged_at is not None


def test_smale_boundary_and_zero_beta():
    at_bound = smale_certificate(SmaleInputs(SMALE_CRITERION_BOUND, 1.0))
    assert not at_bound.certified
    assert at_bound.criterion_lhs == SMALE_CRITERION_BOUND

    trivial = smale_certificate(SmaleInputs(0.0, 2.0))
    assert trivial.certified
    assert trivial.t_star == 0.0
    assert trivial.uniqueness_radius == pytest.approx(0.25, rel=1e-14)


def test_certificates_are_deterministic():
    assert table_cert() == table_cert()
    s = SmaleInputs(0.07, 1.3)
    assert smale_certificate(s) == smale_certificate(s)


def test_existence_radius_grows_with_beta():
    betas = np.linspace(0.02, 0.32, 7)
    stars = []
    outs = []
    for beta in betas:
        cert = kantorovich_certificate(KantorovichInputs(float(beta), 1.2, 1.2))
        assert cert.certified
        stars.append(cert.t_star)
        outs.append(cert.uniqueness_radius)
    assert all(a < b for a, b in zip(stars, stars[1:]))
    assert all(a > b for a, b in zip(outs, outs[1:]))


def test_radii_are_roots_of_the_majorant():
    rng = np.random.default_rng(101)
    for _ in range(25):
        h = random_certified_cubic(rng)
        cert = kantorovich_certificate(KantorovichInputs(h.beta, h.eta, h.lip))
        assert cert.certified
        assert abs(h.value(cert.t_star)) <= 1e-11
        assert abs(h.value(cert.uniqueness_radius)) <= 1e-11
        assert cert.t_star < cert.uniqueness_radius
    for _ in range(25):
        h = random_certified_smale(rng)
        cert = smale_certificate(SmaleInputs(h.beta, h.gamma))
        assert cert.certified
        assert abs(h.value(cert.t_star)) <= 1e-11
        assert abs(h.value(cert.uniqueness_radius)) <= 1e-11


def test_json_schema_and_round_trip():
    cert = table_cert()
    payload = cert.to_json_dict()
    assert set(payload) == {"kind", "verdict", "criterion", "t_star",
                            "uniqueness_radius", "rate_constant", "sequence",
                            "apriori_errors"}
    assert set(payload["criterion"]) == {"lhs", "rhs", "margin"}
    assert payload["criterion"]["margin"] == pytest.approx(
        (cert.criterion_rhs - cert.criterion_lhs) / cert.criterion_rhs)
    assert all(isinstance(v, float) for v in payload["sequence"])

    back = ConvergenceCertificate.from_json_dict(json.loads(json.dumps(payload)))
    assert back.verdict == cert.verdict
    assert back.t_star == cert.t_star
    assert back.uniqueness_radius == cert.uniqueness_radius
    assert back.rate_constant == cert.rate_constant
    assert back.sequence.points == cert.sequence.points
    assert back.sequence.converged_at == cert.sequence.converged_at
    assert back.apriori_errors == cert.apriori_errors


def test_failed_certificate_round_trip():
    cert = smale_certificate(SmaleInputs(1.0, 1.0))
    payload = json.loads(json.dumps(cert.to_json_dict()))
    assert payload["verdict"] == "criterion_failed"
    assert payload["t_star"] is None
    assert payload["sequence"] is None
    back = ConvergenceCertificate.from_json_dict(payload)
    assert not back.certified
    assert back.sequence is None
    assert back.apriori_errors is None


def test_check_initial_conditions_linear_problem():
    a = np.array([[4.0, 1.0], [0.0, 5.0]])
    b = np.array([1.0, 2.0])
    p = linear_problem(a, b)
    d = np.linalg.solve(a, -b)
    h = CubicMajorant(beta=np.max(np.abs(d)) * 1.5, eta=1.0, lip=1.0)
    report = check_initial_conditions(p, np.zeros(2), h)
    assert report.residual_norm == pytest.approx(np.max(np.abs(d)), rel=1e-14)
    assert report.second_norm == 0.0
    assert report.second_is_lower_bound
    assert report.both_hold

    tight = CubicMajorant(beta=np.max(np.abs(d)) * 0.5, eta=1.0, lip=1.0)
    report2 = check_initial_conditions(p, np.zeros(2), tight)
    assert not report2.residual_ok
    assert not report2.both_hold


def test_check_initial_conditions_scalar():
    p = scalar_sqrt2()
    x0 = np.array([1.0])
    # |F'^{-1} F| = 1/2 and |F'^{-1} F''| = 1 at x0 = 1
    generous = CubicMajorant(beta=0.6, eta=1.2, lip=1.2)
    rep = check_initial_conditions(p, x0, generous)
    assert rep.residual_norm == pytest.approx(0.5, rel=1e-15)
    assert rep.second_norm == pytest.approx(1.0, rel=1e-12)
    assert rep.both_hold

    table = CubicMajorant(beta=0.2, eta=1.2, lip=1.2)
    rep2 = check_initial_conditions(p, x0, table)
    assert not rep2.residual_ok
    assert rep2.second_ok
    assert not rep2.both_hold


def test_verify_error_bound_passes_on_covered_trace():
    cert = table_cert()
    trace = halley_solve(scalar_sqrt2(), np.array([1.3]), tol=1e-12)
    report = verify_error_bound(trace, cert)
    assert not report.mismatch
    assert report.all_ok
    assert len(report.checks) == len(trace.iterates) - 1
    for check in report.checks:
        assert check.containment_ok
        assert check.recursion_ok is not False
    # at least one row carries a real (non-vacuous) recursion bound
    assert any(c.recursion_bound is not None for c in report.checks)


def test_verify_error_bound_flags_uncovered_start():
    cert = table_cert()
    trace = halley_solve(scalar_sqrt2(), np.array([1.0]), tol=1e-12)
    # |x0 - sqrt(2)| = 0.414 exceeds t* = 0.236: the budget never applied
    report = verify_error_bound(trace, cert)
    assert report.mismatch
    assert not report.all_ok
    assert report.checks == ()
    assert "existence" in report.message


def test_verify_error_bound_vacuous_cases():
    cert = table_cert()
    at_root = halley_solve(scalar_sqrt2(), np.array([math.sqrt(2.0)]))
    report = verify_error_bound(at_root, cert)
    assert report.all_ok
    assert report.checks == ()

    trace = halley_solve(scalar_sqrt2(), np.array([1.3]), tol=1e-12)
    noisy = verify_error_bound(trace, cert, noise_floor=1.0)
    assert noisy.all_ok
    assert all(c.vacuous for c in noisy.checks)


def test_verify_error_bound_rejects_bad_inputs():
    trace = halley_solve(scalar_sqrt2(), np.array([1.3]), tol=1e-12)
    failed = kantorovich_certificate(KantorovichInputs(0.9, 1.2, 1.2))
    with pytest.raises(ValueError):
        verify_error_bound(trace, failed)

    stuck = halley_solve(scalar_sqrt2(), np.array([1.3]), tol=1e-12, max_iters=1)
    with pytest.raises(ValueError):
        verify_error_bound(stuck, table_cert())
