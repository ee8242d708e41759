import numpy as np
import pytest

from releq.solver import (
    ConvergenceError,
    SolveOptions,
    continue_branch,
    group_classes,
    manifold_dim,
    multistart,
    residual,
    residual_tolerance,
    solve_re,
    transport_re,
)
from releq.transversality import quotient_branch_dim


def test_axis_solutions(body, axis_res):
    for i, re in enumerate(axis_res):
        d = re.point.mu_b / np.linalg.norm(re.point.mu_b)
        assert abs(abs(d[i]) - 1.0) < 1e-8
        assert re.fingerprint.as_tuple() == (1, 1, 1, 0)
        assert re.residual_norm < residual_tolerance(body, re.point)
        assert np.linalg.norm(body.algebra.coad(re.generator, re.momentum)) < 1e-9


def test_exact_guess_takes_no_steps(body):
    mu = np.array([0.0, 0.0, 1.5])
    re = solve_re(body, body.point(mu), body.Minv @ mu)
    assert re.iterations == 0


def test_residual_vanishes_only_at_re(body):
    mu = np.array([1.0, 1.0, 0.0])
    psi, psi_o = residual(body, body.point(mu), body.Minv @ mu)
    assert np.linalg.norm(psi) == pytest.approx(0.5)
    psi, psi_o = residual(body, body.point(mu * [1, 0, 0]), body.Minv @ (mu * [1, 0, 0]))
    assert np.linalg.norm(psi) < 1e-14 and np.linalg.norm(psi_o) < 1e-14


def test_momentum_level_is_kept(body):
    mu = np.array([0.9, 0.3, 0.2])
    re = solve_re(body, body.point(mu), body.Minv @ mu)
    assert np.linalg.norm(re.point.mu_b) == pytest.approx(np.linalg.norm(mu))


def test_failure_is_reported(body):
    mu = np.array([1.0, 1.0, 1.0])
    with pytest.raises(ConvergenceError) as info:
        solve_re(body, body.point(mu), body.Minv @ mu, SolveOptions(max_iter=1))
    assert info.value.residual > 0


def test_multistart_finds_three_axes(body):
    found, failures = multistart(body, 40, seed=1)
    assert failures == 0
    classes = group_classes(found)
    assert len(classes) == 3
    dirs = sorted(tuple(np.abs(np.array(k[1])).round(6)) for k in classes)
    assert dirs == [(0, 0, 1), (0, 1, 0), (1, 0, 0)]


def test_transport_gives_re(body, axis_res):
    x = np.array([0.3, -0.7, 0.2])
    moved = transport_re(body, axis_res[0], x)
    psi, _ = residual(body, moved.point, moved.generator)
    assert np.linalg.norm(psi) < 1e-10
    assert np.allclose(body.J(moved.point), moved.momentum)


def test_origin_types(body_origin, rotor_origin):
    assert body_origin.fingerprint.as_tuple() == (3, 0, 1, 3)
    assert rotor_origin.fingerprint.as_tuple() == (6, 3, 4, 3)


def test_rotor_generic(rotor_generic):
    assert rotor_generic
    for re in rotor_generic:
        assert re.fingerprint.as_tuple() == (4, 4, 4, 0)


def test_local_dimensions(body, axis_res, rotors, rotor_origin):
    for re in axis_res:
        assert manifold_dim(body, re) == 4
        assert quotient_branch_dim(body, re) == 1
    assert manifold_dim(rotors, rotor_origin) == 6
    assert quotient_branch_dim(rotors, rotor_origin) == 0


def test_continuation_stays_on_branch(body, axis_res):
    re = axis_res[2]
    direction = np.concatenate([np.zeros(3), re.point.mu_b])
    branch = continue_branch(body, re, direction, steps=5, step_size=0.1)
    assert branch.event == "completed"
    assert len(branch) == 6
    norms = [np.linalg.norm(b.point.mu_b) for b in branch]
    assert np.all(np.diff(norms) > 0)
    for b in branch:
        assert b.fingerprint == re.fingerprint
