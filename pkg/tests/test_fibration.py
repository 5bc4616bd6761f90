"""Work map, lifting oracle, and pullback planner tests.

The z^2 lift expectations are frozen from the closed form: multiplying
the start by exp(i * phi / 2) lifts a value rotation of phi.
"""

import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tubeplan.errors import LiftFailure
from tubeplan.fibration import (
    ExactCircleOracle,
    NumericOracle,
    TaskingPlanner,
    WorkMap,
    jacobian_fd,
    lift,
    newton_project,
    pullback_planner,
    rr_arm_workmap,
)
from tubeplan.geometry import Constant, NormalizedSegment, Scaled, path_from_json, path_to_json
from tubeplan.milnor import brieskorn_germ, hopf_germ, power_germ, tube_fibration
from tubeplan.sphere_planner import build_planner
from tubeplan.verify import run_contract_suite

from conftest import random_unit

seeds = st.integers(min_value=0, max_value=2**32 - 1)


# --- the arm work map -------------------------------------------------------


def test_arm_reference_values():
    wm = rr_arm_workmap()
    assert np.allclose(wm.f(np.array([0.0, 0.0])), [1.0, 0.0, 0.0], atol=1e-15)
    # alpha = pi/2 pins the end effector at the top regardless of beta
    assert np.allclose(wm.f(np.array([math.pi / 2, 0.7])), [0.0, 0.0, 1.0], atol=1e-15)


def test_arm_jacobian_drops_rank_at_pole():
    wm = rr_arm_workmap()
    J = wm.jac(np.array([math.pi / 2, 0.0]))
    assert J.shape == (3, 2)
    assert np.linalg.matrix_rank(J, tol=1e-10) == 1
    # generic configuration has full rank 2
    assert np.linalg.matrix_rank(wm.jac(np.array([0.3, 0.4]))) == 2


@settings(deadline=None, max_examples=30)
@given(seeds)
def test_arm_jacobian_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    wm = rr_arm_workmap()
    x = rng.uniform(-math.pi, math.pi, 2)
    J = wm.jac(x)
    Jfd = jacobian_fd(wm, x)
    assert np.abs(J - Jfd).max() < 1e-5 * max(1.0, np.abs(J).max())


def test_germ_workmap_jacobian_matches_finite_differences(rng):
    for germ in (brieskorn_germ(2, 3), power_germ(3)):
        wm = tube_fibration(germ)
        for _ in range(25):
            x = rng.standard_normal(wm.n) * 0.3
            assert np.abs(wm.jac(x) - jacobian_fd(wm, x)).max() < 1e-5


# --- newton projection -------------------------------------------------------


def _circle_f(x):
    x = np.atleast_2d(x)
    return np.sum(x * x, axis=1, keepdims=True) - 1.0


def _circle_jac(x):
    x = np.atleast_2d(x)
    return 2.0 * x[:, None, :]


def test_newton_project_onto_circle(rng):
    x0 = rng.standard_normal((200, 2)) * 2.0
    keep = np.linalg.norm(x0, axis=1) > 0.3
    x0 = x0[keep]
    targets = np.zeros((x0.shape[0], 1))
    xs, ok = newton_project(_circle_f, _circle_jac, x0, targets, tol=1e-12)
    assert ok.all()
    assert np.abs(np.linalg.norm(xs, axis=1) - 1.0).max() < 1e-12


def test_newton_project_flags_degenerate_seed():
    # the Jacobian vanishes at the origin; that row must fail, not blow up
    x0 = np.array([[0.0, 0.0], [1.5, 0.0]])
    xs, ok = newton_project(_circle_f, _circle_jac, x0, np.zeros((2, 1)))
    assert not ok[0]
    assert ok[1]


# --- exact circle-action lifting ------------------------------------------------


def test_exact_lift_quarter_turn_closed_form():
    germ = power_germ(2)
    wm = tube_fibration(germ)
    eta = germ.eta
    e = np.array([math.sqrt(eta), 0.0])  # real start on the tube
    base = Scaled(
        NormalizedSegment(a=np.array([1.0, 0.0]), b=np.array([0.0, 1.0])), eta
    )
    lam = ExactCircleOracle().lift(wm, e, base)
    want = cmath.exp(1j * math.pi / 4) * math.sqrt(eta)
    end = lam.at(1.0)
    assert abs(complex(end[0], end[1]) - want) < 1e-15


def test_exact_lift_constant_base_is_constant():
    germ = power_germ(2)
    wm = tube_fibration(germ)
    e = np.array([math.sqrt(germ.eta), 0.0])
    lam = ExactCircleOracle().lift(wm, e, Constant(point=wm.f(e)))
    for t in (0.0, 0.5, 1.0):
        assert np.linalg.norm(lam.at(t) - e) < 1e-15


def test_exact_lift_rejects_detached_start():
    germ = power_germ(2)
    wm = tube_fibration(germ)
    e = np.array([math.sqrt(germ.eta) * 1.5, 0.0])
    base = Constant(point=germ.eta * np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        ExactCircleOracle().lift(wm, e, base)


def test_free_lift_helper_delegates():
    germ = power_germ(2)
    wm = tube_fibration(germ)
    e = np.array([math.sqrt(germ.eta), 0.0])
    base = Constant(point=wm.f(e))
    oracle = ExactCircleOracle()
    a = oracle.lift(wm, e, base)
    b = lift(oracle, wm, e, base)
    assert np.array_equal(a.at(0.7), b.at(0.7))


def test_exact_lift_projection_property(rng):
    germ = brieskorn_germ(2, 3)
    wm = tube_fibration(germ)
    planner = pullback_planner(wm)
    ts = np.linspace(0, 1, 256)
    for _ in range(40):
        e = wm.sample(rng, 1)[0]
        w = germ.eta * random_unit(rng, 2)
        idx, lam = planner.plan(e, w)
        th1, th2 = planner._base_pair(e, w)
        gamma = Scaled(planner.base.regions[idx - 1].build(th1, th2, planner.delta), germ.eta)
        resid = np.linalg.norm(wm.f(lam.sample(ts)) - gamma.sample(ts), axis=1).max()
        assert resid <= 1e-12, f"projection residual {resid:.3e}"


# --- numeric lifting --------------------------------------------------------------


def test_numeric_lift_hopf_meridian():
    wm = hopf_germ()
    planner = pullback_planner(wm, oracle=NumericOracle())
    assert len(planner.regions) == 3
    e = np.array([0.1, 0.0, 0.0, 0.0])  # maps to the top of the value sphere
    w = np.array([0.0, 0.0, -wm.eta])
    idx, lam = planner.plan(e, w)
    assert idx == 3
    assert np.linalg.norm(lam.at(0.0) - e) < 1e-9
    assert np.linalg.norm(wm.f(lam.at(1.0)) - w) < 1e-6
    vals = wm.f(lam.sample(np.linspace(0, 1, 256)))
    assert np.abs(np.linalg.norm(vals, axis=1) - wm.eta).max() < 1e-6


def test_numeric_lift_identity_query():
    wm = rr_arm_workmap()
    planner = pullback_planner(wm, oracle=NumericOracle())
    e = np.array([0.5, -1.1])
    idx, lam = planner.plan(e, wm.f(e))
    assert idx == 1
    assert np.linalg.norm(lam.at(0.0) - e) < 1e-9
    assert np.linalg.norm(wm.f(lam.at(1.0)) - wm.f(e)) < 1e-6


def test_numeric_lift_refuses_goal_at_rank_drop():
    wm = rr_arm_workmap()
    planner = pullback_planner(wm, oracle=NumericOracle())
    near_pole = np.array([1e-4, 0.0, 1.0])
    near_pole = near_pole / np.linalg.norm(near_pole)
    with pytest.raises(LiftFailure) as err:
        planner.plan(np.array([0.2, 0.3]), near_pole)
    assert 0.0 <= err.value.t_star <= 1.0


def test_numeric_lift_serialization_round_trip(rng):
    wm = rr_arm_workmap()
    planner = pullback_planner(wm, oracle=NumericOracle())
    e = rng.uniform(-math.pi, math.pi, 2)
    w = random_unit(rng, 3)
    while min(np.linalg.norm(w - [0, 0, 1]), np.linalg.norm(w + [0, 0, 1])) < 0.2:
        w = random_unit(rng, 3)
    _, lam = planner.plan(e, w)
    again = path_from_json(path_to_json(lam))
    ts = np.linspace(0, 1, 113)
    assert np.array_equal(lam.sample(ts), again.sample(ts))


# --- planner structure ------------------------------------------------------------


def test_region_count_preserved_from_base():
    assert len(pullback_planner(tube_fibration(brieskorn_germ(2, 3))).regions) == 2
    assert len(pullback_planner(rr_arm_workmap(), oracle=NumericOracle()).regions) == 3


def test_single_region_base_is_refused():
    base = build_planner(2)
    crippled = type(base)(m=2, delta=base.delta, regions=base.regions[:1])
    with pytest.raises(ValueError, match="single-region"):
        TaskingPlanner(workmap=rr_arm_workmap(), base=crippled, oracle=NumericOracle())


def test_base_dimension_must_match_codomain():
    with pytest.raises(ValueError):
        TaskingPlanner(
            workmap=rr_arm_workmap(), base=build_planner(1), oracle=NumericOracle()
        )


def test_goal_radius_is_validated():
    germ = brieskorn_germ(2, 3)
    wm = tube_fibration(germ)
    planner = pullback_planner(wm)
    rng = np.random.default_rng(0)
    e = wm.sample(rng, 1)[0]
    with pytest.raises(ValueError):
        planner.plan(e, 2.0 * germ.eta * np.array([1.0, 0.0]))


def test_default_oracle_choice():
    assert pullback_planner(tube_fibration(power_germ(2))).oracle.kind == "exact"
    assert pullback_planner(rr_arm_workmap()).oracle.kind == "numeric"


def test_pullback_contract_via_suite():
    germ = brieskorn_germ(2, 3)
    report = run_contract_suite(pullback_planner(tube_fibration(germ)), 200, seed=5)
    assert report.passed
    assert report.max_endpoint_error < 1e-10
    assert report.max_projection_residual < 1e-12
