import numpy as np
import pytest

from releq.lie import (
    build_algebra,
    center_of,
    centralizer,
    check_subalgebra,
    conjugate,
    derived_subalgebra,
    parse_descriptor,
    stabilizer,
)
from releq.subspace import Subspace


def test_so3_structure(so3):
    e = np.eye(3)
    assert np.allclose(so3.bracket(e[0], e[1]), e[2])
    assert np.allclose(so3.coad(e[0], e[1]), e[2])
    assert np.allclose(so3.inner_product, np.eye(3))


def test_identities(algebra):
    assert algebra.jacobi_residual() < 1e-10
    assert algebra.antisymmetry_residual() < 1e-10
    assert algebra.invariance_residual() < 1e-10


@pytest.mark.parametrize("name,dim,rank", [
    ("so(3)", 3, 1), ("su(3)", 8, 2), ("so(4)", 6, 2), ("so(3)+torus(3)", 6, 4), ("su(2)", 3, 1), ("torus(2)", 2, 2),
])
def test_dimension_and_rank(name, dim, rank):
    g = build_algebra(name)
    assert g.dim == dim
    assert g.rank == rank


def test_descriptor_forms():
    assert parse_descriptor("so(3)⊕t(3)") == parse_descriptor("so(3)+torus(3)")
    with pytest.raises(ValueError):
        build_algebra("e(8)")
    with pytest.raises(ValueError):
        build_algebra("so(0)")


def test_coad_matches_cross_product(so3):
    rng = np.random.default_rng(2)
    for _ in range(1000):
        xi, mu = rng.standard_normal((2, 3))
        assert np.allclose(so3.coad(xi, mu), np.cross(xi, mu))


def test_coad_equivariance_of_pairing(algebra):
    """<coad_x mu, y> = -<mu, [x, y]>, i.e. coad is minus the transposed ad."""
    rng = np.random.default_rng(3)
    for _ in range(1000):
        x, y, mu = rng.standard_normal((3, algebra.dim))
        assert abs(algebra.coad(x, mu) @ y + mu @ algebra.bracket(x, y)) < 1e-10 * (1 + abs(mu @ y)) * 10


def test_stabilizer_dimension_at_least_rank(algebra):
    rng = np.random.default_rng(4)
    for _ in range(1000):
        x = rng.standard_normal(algebra.dim)
        assert stabilizer(algebra, x).dim >= algebra.rank
    for _ in range(100):
        mu = rng.standard_normal(algebra.dim)
        assert stabilizer(algebra, mu, dual=True).dim >= algebra.rank


def test_conjugation_preserves_invariant_norm(algebra):
    rng = np.random.default_rng(5)
    B = algebra.inner_product
    for _ in range(1000):
        x, t = rng.standard_normal((2, algebra.dim))
        y = conjugate(algebra, x, 1.0, t)
        assert abs(y @ B @ y - t @ B @ t) < 1e-9 * (1 + t @ B @ t)


def test_quarter_turn(so3):
    e = np.eye(3)
    assert np.allclose(conjugate(so3, e[2], np.pi / 2, e[0]), e[1])


def test_subalgebra_structure(so3):
    e = np.eye(3)
    line = Subspace.span(e[:, :1], 3)
    check_subalgebra(so3, line)
    assert center_of(so3, line).dim == 1
    assert derived_subalgebra(so3, Subspace.full(3)).dim == 3
    assert centralizer(so3, e[0]).dim == 1
    with pytest.raises(ValueError):
        check_subalgebra(so3, Subspace.span(e[:, :2], 3))
