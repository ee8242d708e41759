"""Shared example systems for the tests."""

import numpy as np

from releq.lie import _su_basis, build_algebra
from releq.solver import multistart, solve_re
from releq.systems import make_cotangent_group_system, rigid_body, rigid_body_rotors, torus_system


def su3_coords(M):
    flat = np.array([np.concatenate([b.real.ravel(), b.imag.ravel()]) for b in _su_basis(3)]).T
    return np.linalg.lstsq(flat, np.concatenate([M.real.ravel(), M.imag.ravel()]), rcond=None)[0]


def su3_case():
    """An su(3) system with an RE whose momentum isotropy is u(2) and whose xi acts nontrivially on it.

    M^{-1} maps mu to v = h + y with [v, h] = 0, so (mu, v) is a commuting pair.
    """
    g = build_algebra("su(3)")
    h = su3_coords(np.diag([1j, 1j, -2j]))
    y = su3_coords(np.array([[0.3j, 0.5, 0], [-0.5, -0.3j, 0], [0, 0, 0]]))
    mu = g.flat(h)
    v = h + y
    Q0 = np.random.default_rng(5).standard_normal((8, 8))
    Q0 = Q0 @ Q0.T + np.eye(8)
    P = np.eye(8) - np.outer(mu, mu) / (mu @ mu)
    Minv = np.outer(v, v) / (v @ mu) + P @ Q0 @ P
    sys = make_cotangent_group_system(g, np.linalg.inv(Minv), "su3_example")
    return sys, solve_re(sys, sys.point(mu), v)


def axis_res(body):
    out = []
    for i in range(3):
        mu = np.full(3, 0.05)
        mu[i] = 1.0
        out.append(solve_re(body, body.point(mu), body.Minv @ mu))
    return out


def suite():
    """(system, RE) pairs covering every shipped system and stratum type."""
    body, rotors, torus = rigid_body(), rigid_body_rotors(), torus_system()
    cases = [(body, re) for re in axis_res(body)]
    cases.append((body, solve_re(body, body.point(np.zeros(3)), np.zeros(3))))
    cases.append((rotors, solve_re(rotors, rotors.point(np.zeros(6)), np.zeros(6))))
    cases += [(rotors, re) for re in multistart(rotors, 3, seed=5)[0]]
    cases.append((torus, solve_re(torus, torus.point(np.array([1.0])), np.array([1.0]))))
    cases.append(su3_case())
    return cases
