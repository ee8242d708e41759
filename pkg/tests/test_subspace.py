import numpy as np
import pytest

from releq.subspace import Subspace, null_space, numerical_rank, principal_angles


def test_rank_and_null_space():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((6, 3)) @ rng.standard_normal((3, 5))
    assert numerical_rank(A) == 3
    N = null_space(A)
    assert N.shape == (5, 2)
    assert np.linalg.norm(A @ N) < 1e-10


def test_span_drops_dependent_columns():
    v = np.array([[1.0, 2.0], [0.0, 0.0], [0.0, 0.0]])
    S = Subspace.span(v, 3)
    assert S.dim == 1
    assert S.contains(np.array([3.0, 0.0, 0.0]))
    assert not S.contains(np.array([0.0, 1.0, 0.0]))


def test_intersection_sum_perp():
    e = np.eye(4)
    U = Subspace.span(e[:, :2], 4)
    V = Subspace.span(e[:, 1:3], 4)
    assert U.intersect(V).dim == 1
    assert U.sum(V).dim == 3
    assert U.perp().dim == 2
    assert U.perp().intersect(U).dim == 0


def test_projector_is_idempotent():
    rng = np.random.default_rng(1)
    S = Subspace.span(rng.standard_normal((5, 2)), 5)
    P = S.projector()
    assert np.allclose(P @ P, P)
    assert np.allclose(P, P.T)


def test_principal_angles():
    U = Subspace.span(np.array([[1.0], [0.0]]), 2)
    t = 0.3
    V = Subspace.span(np.array([[np.cos(t)], [np.sin(t)]]), 2)
    assert principal_angles(U, V)[-1] == pytest.approx(t)


def test_zero_and_empty_ambient():
    Z = Subspace.zero(3)
    assert Z.dim == 0
    assert Subspace.zero(0).dim == 0
    assert Subspace.full(3).perp().dim == 0
