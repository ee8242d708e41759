import numpy as np
import pytest

from releq.systems import (
    ChartError,
    GroupBase,
    build_system,
    make_cotangent_group_system,
    perturbed,
    rigid_body,
)

SYSTEMS = ["body", "rotors", "torus"]


def _random_point(sys, seed):
    rng = np.random.default_rng(seed)
    base = GroupBase.identity(sys.algebra).left_multiplied(sys.algebra, rng.standard_normal(sys.algebra.dim))
    q = rng.standard_normal(sys.algebra.dim)
    q *= 0.4 * rng.uniform() / np.linalg.norm(q)
    return sys.point(rng.standard_normal(sys.algebra.dim), q=q, base=base)


@pytest.mark.parametrize("name", SYSTEMS)
def test_identities(name, request):
    sys = request.getfixturevalue(name)
    for seed in range(20):
        res = sys.identity_residuals(_random_point(sys, seed))
        assert res["antisymmetry"] < 1e-10
        assert res["omega_flat"] < 1e-8
        assert res["equivariance"] < 1e-8
        assert res["invariance"] < 1e-8
        assert res["omega_rank"] == sys.phase_dim
        assert res["generator_rank"] == sys.algebra.dim


@pytest.mark.parametrize("name", SYSTEMS)
def test_hamiltonian_and_momentum_gradients(name, request):
    """Chart derivatives of H and J agree with central differences."""
    sys = request.getfixturevalue(name)
    p = _random_point(sys, 1)
    ev = sys.evaluate(p)
    h = 1e-6
    for i in range(sys.phase_dim):
        e = np.zeros(sys.phase_dim)
        e[i] = h
        plus, minus = p.with_coords(p.coords + e), p.with_coords(p.coords - e)
        assert (sys.H(plus) - sys.H(minus)) / (2 * h) == pytest.approx(ev.dH[i], abs=1e-6)
        assert np.allclose((sys.J(plus) - sys.J(minus)) / (2 * h), ev.dJ[:, i], atol=1e-6)


def test_momentum_is_equivariant(rotors):
    p = _random_point(rotors, 2)
    g = rotors.algebra
    x = np.random.default_rng(3).standard_normal(g.dim)
    from scipy.linalg import expm

    ad = expm(g.ad(x))
    assert np.allclose(rotors.J(rotors.act(p, x)), np.linalg.solve(ad.T, rotors.J(p)))
    assert rotors.H(rotors.act(p, x)) == pytest.approx(rotors.H(p))


def test_recentering_keeps_the_point(body):
    p = _random_point(body, 4)
    r = p.recentered(body.algebra)
    assert not r.q.any()
    assert np.allclose(body.J(r), body.J(p))
    assert body.H(r) == pytest.approx(body.H(p))


def test_chart_radius(body):
    with pytest.raises(ChartError):
        body.evaluate(body.point(np.ones(3), q=np.array([2.0, 0.0, 0.0])))


def test_builders():
    assert build_system({"preset": "rigid_body", "moments": [1, 2, 3]}).algebra.name == "so(3)"
    assert build_system({"preset": "rigid_body_rotors"}).algebra.dim == 6
    assert build_system({"preset": "cotangent_group", "algebra": "su(2)", "M": np.eye(3).tolist()}).phase_dim == 6
    with pytest.raises(ValueError):
        build_system({"preset": "pendulum"})
    with pytest.raises(ValueError):
        make_cotangent_group_system("so(3)", -np.eye(3))
    with pytest.raises(ValueError):
        make_cotangent_group_system("so(3)", np.eye(2))


def test_perturbed_keeps_group():
    body = rigid_body()
    other = perturbed(body, 0.01 * np.eye(3))
    assert np.allclose(other.M, body.M + 0.01 * np.eye(3))
    assert other.algebra is body.algebra
