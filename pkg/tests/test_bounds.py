"""Closed-form bound tests: hand-computed values, monotonicity, refusals."""

from __future__ import annotations

import json
import math

import pytest

from sgdbounds import bounds as B
from sgdbounds import schedules as S
from sgdbounds.certify import DissipativityCert, GrowthCert, NoiseCert

NOISE_FREE = NoiseCert(rho=0.0, sigma2=0.0)


# ---------------------------------------------------------------------------
# uniform bound for quadratic-tail problems (p = 2)


def test_p2_bound_noise_free_equals_initial_distance():
    cert = DissipativityCert(theta1=1.0, theta2=0.0, R=0.0, p=2.0)
    rep = B.theorem1_bound(cert, NOISE_FREE, L=1.0, dist2_init=2.0)
    assert rep.r2 == 0.0
    assert rep.bound == 2.0
    assert rep.cap == 1.0


def test_p2_bound_hand_value():
    cert = DissipativityCert(theta1=1.0, theta2=0.0, R=0.0, p=2.0)
    noise = NoiseCert(rho=0.0, sigma2=0.01)
    rep = B.theorem1_bound(cert, noise, L=1.0, dist2_init=2.0)
    # r2 = 2*theta2/theta1 + sigma2/((1+rho) L^2) = 0.01
    assert rep.r2 == pytest.approx(0.01, abs=0)
    # ball = 2*(sigma2 + L^2 r2) cap^2 + 2 r2 = 0.04 + 0.02
    assert rep.details["bound_ball_branch"] == pytest.approx(0.06, abs=1e-15)
    assert rep.bound == 2.0
    assert rep.hypotheses_satisfied is True


@pytest.mark.parametrize(
    "cert2,noise2,d2i2",
    [
        (DissipativityCert(1.0, 0.5, 1.0, 2.0), NoiseCert(0.5, 0.4), 5.0),
        (DissipativityCert(1.0, 0.6, 1.0, 2.0), NoiseCert(0.5, 0.3), 5.0),
        (DissipativityCert(1.0, 0.5, 1.5, 2.0), NoiseCert(0.5, 0.3), 5.0),
        (DissipativityCert(1.0, 0.5, 1.0, 2.0), NoiseCert(0.5, 0.3), 5.5),
    ],
)
def test_p2_bound_monotone_in_each_input(cert2, noise2, d2i2):
    base = B.theorem1_bound(
        DissipativityCert(1.0, 0.5, 1.0, 2.0), NoiseCert(0.5, 0.3), 2.0, 5.0
    )
    assert B.theorem1_bound(cert2, noise2, 2.0, d2i2).bound >= base.bound


def test_p2_bound_rejects_other_exponents():
    with pytest.raises(ValueError):
        B.theorem1_bound(DissipativityCert(1.0, 0.0, 0.0, p=1.0), NOISE_FREE, 1.0, 1.0)


# ---------------------------------------------------------------------------
# uniform bound for sub-quadratic tails (0 < p < 2)


def test_subquadratic_bound_degenerate_zero_step():
    cert = DissipativityCert(theta1=1.0, theta2=0.5, R=1.0, p=1.0)
    growth = GrowthCert(theta3=2.0, tau=0.0)
    rep = B.theorem5_bound(cert, growth, NOISE_FREE, eta_max=0.0, dist2_init=5.0)
    assert rep.r2 == 1.0
    assert rep.bound == 2.0
    assert rep.details["companion_max_bound"] == 5.0
    assert rep.cap == math.inf


def test_subquadratic_bound_hand_values():
    cert = DissipativityCert(1.0, 0.5, 0.0, p=1.0)
    growth = GrowthCert(2.0, 0.0)
    noise = NoiseCert(0.0, 0.05)
    rep = B.theorem5_bound(cert, growth, noise, eta_max=0.1, dist2_init=50.0)
    assert rep.details["r2_step_branch"] == pytest.approx(1.6, abs=1e-15)
    assert rep.details["r2_step_branch_no8_variant"] == pytest.approx(0.2, abs=1e-15)
    assert rep.details["r2_noise_branch"] == pytest.approx(1.205**2, abs=1e-15)
    assert rep.r2 == pytest.approx(1.6, abs=1e-15)
    assert rep.details["bound_ball_branch"] == pytest.approx(3.305, abs=1e-12)
    assert rep.bound == pytest.approx(3.305, abs=1e-12)
    assert rep.details["companion_max_bound"] == 50.0


def test_subquadratic_bound_monotone_in_noise():
    cert = DissipativityCert(1.0, 0.5, 0.0, p=1.0)
    growth = GrowthCert(2.0, 0.0)
    prev = -1.0
    for s2 in (0.0, 0.01, 0.05, 0.2, 1.0):
        b = B.theorem5_bound(cert, growth, NoiseCert(0.0, s2), 0.1, 50.0).bound
        assert b >= prev
        prev = b


def test_subquadratic_bound_refuses_out_of_range_exponents():
    growth = GrowthCert(2.0, 0.0)
    with pytest.raises(ValueError):
        B.theorem5_bound(DissipativityCert(1.0, 0.0, 0.0, p=2.0), growth, NOISE_FREE, 0.1, 1.0)
    with pytest.raises(ValueError):
        B.theorem5_bound(
            DissipativityCert(1.0, 0.0, 0.0, p=0.0), GrowthCert(1.0, 0.0), NOISE_FREE, 0.1, 1.0
        )
    with pytest.raises(ValueError):
        B.theorem5_bound(
            DissipativityCert(1.0, 0.5, 0.0, p=1.0), GrowthCert(2.0, 0.6), NOISE_FREE, 0.1, 1.0
        )
    rep = B.theorem5_bound(
        DissipativityCert(1.0, 0.0, 0.0, p=2.0 - 1e-9), growth, NOISE_FREE, 0.1, 1.0
    )
    assert math.isfinite(rep.bound)


def test_subquadratic_boundary_growth_marks_hypothesis_failed():
    cert = DissipativityCert(1.0, 0.5, 0.0, p=1.0)
    rep = B.theorem5_bound(cert, GrowthCert(2.0, 0.5), NOISE_FREE, 0.1, 50.0)
    assert rep.hypotheses_satisfied is False
    assert "r2_step_branch" not in rep.details
    assert math.isfinite(rep.bound)


# ---------------------------------------------------------------------------
# momentum step caps per regime


def test_momentum_cap_generalized_constant_hand_value():
    cap = B.momentum_caps(1.0, 0.0, 1.0, 0.9, "generalized_const")
    assert cap == pytest.approx(0.19 / 9.09, abs=1e-15)
    assert abs(cap - 0.02090) < 5e-6


def test_momentum_cap_poly_is_half_constant():
    cap_const = B.momentum_caps(1.0, 0.0, 1.0, 0.9, "generalized_const")
    cap_poly = B.momentum_caps(1.0, 0.0, 1.0, 0.9, "generalized_decaying_poly")
    assert cap_poly == cap_const / 2.0


def test_momentum_cap_generalized_exponential_hand_value():
    cap = B.momentum_caps(1.0, 0.0, 1.0, 0.9, "generalized_decaying_exp")
    assert cap == pytest.approx(0.19 / (0.9 * 20.1), abs=1e-15)


def test_momentum_cap_quadratic_regimes_match_schedule_audit_value():
    cap = B.momentum_caps(1.0, 0.0, 1.0, 0.9, "constant")
    assert cap == S.momentum_cap_value(1.0, 0.0, 1.0, 0.9)
    assert B.momentum_caps(1.0, 0.0, 1.0, 0.9, "decaying") == cap


def test_momentum_cap_small_beta_limit():
    cap = B.momentum_caps(1.0, 0.0, 1.0, 1e-6, "decaying")
    assert cap == pytest.approx(0.25, abs=1e-5)
    br = B.momentum_cap_branches(1.0, 0.0, 1.0, 1e-6, "decaying")
    assert br["curvature"] > 1e5


def test_momentum_cap_branches_hand_values():
    br = B.momentum_cap_branches(3.0, 0.5, 2.0, 0.9, "constant")
    assert br["dissipativity"] == pytest.approx(3.0 / 12.12, abs=1e-15)
    assert br["dissipativity_no2_variant"] == 2.0 * br["dissipativity"]


def test_momentum_cap_rejects_bad_inputs():
    with pytest.raises(ValueError):
        B.momentum_caps(1.0, 0.0, 1.0, 0.9, "nope")
    with pytest.raises(ValueError):
        B.momentum_caps(1.0, 0.0, 1.0, 0.0, "constant")
    with pytest.raises(ValueError):
        B.momentum_caps(1.0, 0.0, 1.0, 1.0, "constant")


# ---------------------------------------------------------------------------
# momentum stability radii


def test_momentum_radius_quadratic_hand_values():
    cert = DissipativityCert(1.0, 0.0, 0.0, p=2.0)
    noise = NoiseCert(0.0, 1.0)
    r2c = B.momentum_r2(cert, noise, beta=0.5, eta_ref=0.1, regime="constant")
    assert r2c == pytest.approx(0.25, abs=1e-15)
    r2d = B.momentum_r2(cert, noise, beta=0.5, eta_ref=0.1, regime="decaying")
    assert r2d == pytest.approx(0.125, abs=1e-15)
    assert r2c >= r2d


def test_momentum_radius_honours_certificate_radius_floor():
    r2 = B.momentum_r2(
        DissipativityCert(1.0, 0.0, 3.0, 2.0), NoiseCert(0.0, 1.0), 0.5, 0.1, "constant"
    )
    assert r2 == 9.0


def test_momentum_radius_generalized_hand_values():
    cert = DissipativityCert(1.0, 0.0, 0.0, p=1.0)
    noise = NoiseCert(0.0, 1.0)
    growth = GrowthCert(2.0, 0.0)
    r2 = B.momentum_r2(cert, noise, 0.5, 0.1, "generalized_const", growth=growth)
    assert r2 == pytest.approx(2.25, abs=1e-15)
    r2 = B.momentum_r2(cert, noise, 0.5, 0.1, "generalized_decaying_poly", growth=growth)
    assert r2 == pytest.approx(0.455625, abs=1e-15)
    r2 = B.momentum_r2(
        cert, noise, 0.5, 0.1, "generalized_decaying_exp", growth=growth, alpha=1.5
    )
    assert r2 == pytest.approx(0.075625, abs=1e-12)


def test_momentum_radius_input_validation():
    cert = DissipativityCert(1.0, 0.0, 0.0, p=1.0)
    noise = NoiseCert(0.0, 1.0)
    growth = GrowthCert(2.0, 0.0)
    with pytest.raises(ValueError):
        B.momentum_r2(cert, noise, 0.5, 0.1, "generalized_const")  # growth required
    with pytest.raises(ValueError):
        B.momentum_r2(cert, noise, 0.5, 0.1, "generalized_decaying_exp", growth)  # alpha
    with pytest.raises(ValueError):
        B.momentum_r2(cert, noise, 0.5, 0.1, "constant")  # needs p = 2
    with pytest.raises(ValueError):
        B.momentum_r2(cert, noise, 0.5, 0.1, "generalized_const", GrowthCert(2.0, 0.5))


# ---------------------------------------------------------------------------
# constant-step recursion bound


def test_constant_recursion_bound_frozen_values():
    assert B.appendixD_constant_bound(1.0, 0.0, 0.0, 0.5, 10, 1.0) == 0.0009765625
    assert B.appendixD_constant_bound(1.0, 0.2, 0.0, 0.5, 0, 1.0) == pytest.approx(1.2, abs=1e-15)
    assert B.appendixD_constant_bound(1.0, 0.0, 0.01, 0.1, 10000, 5.0) == pytest.approx(
        0.001, abs=1e-12
    )


def test_constant_recursion_bound_rejects_large_steps():
    with pytest.raises(ValueError):
        B.appendixD_constant_bound(2.0, 0.0, 0.0, 0.5, 10, 1.0)  # eta*theta1 >= 1
    with pytest.raises(ValueError):
        B.appendixD_constant_bound(1.0, 0.0, 0.0, 0.1, -1, 1.0)


def test_constant_recursion_report():
    rep = B.appendixD_constant_report(1.0, 0.0, 0.01, 0.1, 500, 2.0, rho=0.0, L=1.0)
    assert rep.formula_id == "AppD_Const"
    assert dict(rep.hypotheses)["eta_within_step_cap"] is True
    assert rep.bound == pytest.approx(0.9**500 * 2.0 + 0.001, abs=1e-18)


# ---------------------------------------------------------------------------
# decaying-step recursion bounds


def test_decaying_recursion_inverse_k_frozen_value():
    spec = S.ScheduleSpec(family="Polynomial", horizon=99, eta1=1.0, r_exponent=1.0)
    assert B.appendixD_decaying_bound(1.0, 0.0, 0.0, spec, 1.0) == pytest.approx(0.01, abs=1e-16)
    rep = B.appendixD_decaying_report(1.0, 0.0, 0.0, spec, 1.0)
    assert rep.formula_id == "AppD_PolyEq1"
    rep = B.appendixD_decaying_report(1.0, 0.3, 0.1, spec, 1.0)
    assert rep.details["stationary_term"] == pytest.approx(2 * (0.3 + 0.1), abs=1e-15)


def test_decaying_recursion_fractional_exponent_frozen_value():
    spec = S.ScheduleSpec(family="Polynomial", horizon=3, eta1=1.0, r_exponent=0.5)
    assert B.appendixD_decaying_bound(1.0, 0.0, 0.0, spec, 1.0) == math.exp(-2.0)
    rep = B.appendixD_decaying_report(1.0, 0.0, 0.0, spec, 1.0)
    assert rep.formula_id == "AppD_PolyLt1"
    rep = B.appendixD_decaying_report(1.0, 1.0, 0.0, spec, 0.0)
    assert rep.details["stationary_term"] == pytest.approx(math.sqrt(2.0), abs=1e-15)


def test_decaying_recursion_step_decay_terms():
    spec = S.ScheduleSpec(family="StepDecay", horizon=10, eta1=0.1, stage_lengths=(5, 5))
    rep = B.appendixD_decaying_report(1.0, 0.0, 0.01, spec, 1.0)
    want_tr = math.exp(-0.5)
    want_st = (0.0 + 0.1 * 0.01) * 0.1 / (1.0 - math.exp(-0.1))
    assert rep.formula_id == "AppD_StepDecay"
    assert rep.details["transient_term"] == want_tr
    assert rep.details["stationary_term"] == pytest.approx(want_st, abs=1e-18)
    assert rep.bound == pytest.approx(want_tr + want_st, abs=1e-15)
    want_fac = 1.0 / (1.0 - math.exp(-0.1 * 5 * 2.0 ** (-1.0)))
    assert rep.details["unsimplified_factor"] == pytest.approx(want_fac, abs=1e-15)
    assert rep.details["unsimplified_bound"] == pytest.approx(
        want_tr + want_st * want_fac, abs=1e-15
    )


def test_decaying_recursion_bandwidth_terms():
    spec = S.ScheduleSpec(
        family="Bandwidth",
        horizon=10,
        eta_min=0.05,
        eta_max=0.1,
        stage_lengths=(5, 5),
        inner_mode="constant",
    )
    rep = B.appendixD_decaying_report(1.0, 0.0, 0.01, spec, 1.0)
    assert rep.details["band_lo_m"] == 0.05
    assert rep.details["band_hi_M"] == 0.1
    assert rep.details["transient_term"] == math.exp(-0.25)


def test_decaying_recursion_refusals():
    with pytest.raises(ValueError):
        B.appendixD_decaying_report(
            1.0,
            0.0,
            0.0,
            S.ScheduleSpec(
                family="Bandwidth",
                horizon=10,
                eta_min=0.05,
                eta_max=0.1,
                stage_lengths=(5, 5),
                inner_mode="cosine",
            ),
            1.0,
        )
    with pytest.raises(ValueError):
        B.appendixD_decaying_report(
            1.0,
            0.0,
            0.0,
            S.ScheduleSpec(family="StepDecay", horizon=10, eta1=0.1, stage_lengths=(6, 4)),
            1.0,
        )
    with pytest.raises(ValueError):
        B.appendixD_decaying_report(
            1.0,
            0.0,
            0.0,
            S.ScheduleSpec(family="Linear", horizon=10, eta_min=0.01, eta_max=0.1),
            1.0,
        )


def test_decaying_recursion_records_cap_hypothesis():
    spec = S.ScheduleSpec(family="Polynomial", horizon=99, eta1=1.0, r_exponent=1.0)
    rep = B.appendixD_decaying_report(1.0, 0.0, 0.0, spec, 1.0, rho=0.0, L=1.0)
    assert dict(rep.hypotheses)["max_step_within_step_cap"] is True
    rep = B.appendixD_decaying_report(1.0, 0.0, 0.0, spec, 1.0, rho=0.0, L=4.0)
    assert dict(rep.hypotheses)["max_step_within_step_cap"] is False


# ---------------------------------------------------------------------------
# report container


def test_report_rejects_unknown_formula_id():
    with pytest.raises(ValueError):
        B.BoundReport("Nope", 0.0, 0.0, 1.0, ())


def test_report_serializes_to_json():
    cert = DissipativityCert(theta1=1.0, theta2=0.0, R=0.0, p=2.0)
    rep = B.theorem1_bound(cert, NoiseCert(0.0, 0.01), L=1.0, dist2_init=2.0)
    d = rep.to_dict()
    json.dumps(d)
    assert d["formula_id"] == "Thm1"
    assert type(d["hypotheses"][0][1]) is bool
