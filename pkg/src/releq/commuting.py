"""Commuting pairs (mu, xi) in g* + g: orbit types, strata and the slice model.

A pair commutes when ``coad_xi mu = 0``.  Its type is read off the isotropy
subalgebra k = g_mu ∩ g_xi through a numerical fingerprint.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .lie import (
    LieAlgebra,
    _su_basis,
    b_orthonormal,
    center_of,
    centralizer,
    derived_subalgebra,
    rank_of,
    stabilizer,
)
from .subspace import Subspace, null_space
from .tolerances import TAU_PAIR, TAU_RANK


class NotCommutingError(ValueError):
    """Raised when an operation needs coad_xi mu = 0 and the pair fails it."""


@dataclass(frozen=True, eq=False)
class CommutingPair:
    mu: np.ndarray
    xi: np.ndarray
    algebra: LieAlgebra

    def __post_init__(self):
        object.__setattr__(self, "mu", self.algebra._vec(self.mu).copy())
        object.__setattr__(self, "xi", self.algebra._vec(self.xi).copy())

    @property
    def defect(self) -> float:
        return float(np.linalg.norm(self.algebra.coad(self.xi, self.mu)))

    @property
    def tolerance(self) -> float:
        return pair_tolerance(self.mu, self.xi)

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.mu, self.xi])


@dataclass(frozen=True, order=True)
class TypeFingerprint:
    dim_k: int
    dim_z: int
    rank_k: int
    dim_derived: int

    def __post_init__(self):
        for name in ("dim_z", "rank_k", "dim_derived"):
            if getattr(self, name) > self.dim_k:
                raise ValueError(f"{name} exceeds dim_k in {self}")

    @property
    def dim_l(self) -> int:
        return self.dim_k - self.dim_z

    def as_tuple(self) -> tuple:
        return (self.dim_k, self.dim_z, self.rank_k, self.dim_derived)

    def __iter__(self):
        return iter(self.as_tuple())


@dataclass(frozen=True)
class StratumInfo:
    fingerprint: TypeFingerprint
    dim_stratum: int
    dim_quotient: int
    transversal_possible: bool


def pair_tolerance(mu, xi, tol: float = TAU_PAIR) -> float:
    return tol * (1.0 + np.linalg.norm(mu) * np.linalg.norm(xi))


def _require(pair: CommutingPair, tol: float = TAU_PAIR):
    if not verify_commuting(pair, tol):
        raise NotCommutingError(
            f"|coad_xi mu| = {pair.defect:.3e} exceeds {pair_tolerance(pair.mu, pair.xi, tol):.1e}"
        )


def verify_commuting(pair: CommutingPair, tol: float = TAU_PAIR) -> bool:
    return pair.defect < pair_tolerance(pair.mu, pair.xi, tol)


def isotropy(pair: CommutingPair, tol: float = TAU_RANK) -> Subspace:
    """k = g_mu ∩ g_xi, as the joint kernel of both defining maps."""
    g = pair.algebra
    stacked = np.vstack([g.coad_orbit_matrix(pair.mu), g.ad(pair.xi)])
    return Subspace(g.dim, null_space(stacked, tol), tol)


def fingerprint_of(g: LieAlgebra, k: Subspace) -> TypeFingerprint:
    z = center_of(g, k)
    return TypeFingerprint(k.dim, z.dim, rank_of(g, k), derived_subalgebra(g, k).dim)


def classify_pair(pair: CommutingPair, tol: float = TAU_PAIR) -> TypeFingerprint:
    _require(pair, tol)
    g = pair.algebra
    fp = fingerprint_of(g, isotropy(pair))
    if fp.rank_k != g.rank:
        raise ArithmeticError(f"isotropy rank {fp.rank_k} differs from rank(g) = {g.rank}")
    return fp


def stratum_info(g: LieAlgebra, fp: TypeFingerprint) -> StratumInfo:
    if fp.rank_k != g.rank:
        raise ValueError(f"rank {fp.rank_k} != rank(g) = {g.rank}: not a commuting-pair type")
    quotient = 2 * fp.dim_z - fp.dim_k
    return StratumInfo(fp, g.dim + quotient, quotient, quotient >= 0)


def orbit_directions(pair: CommutingPair) -> np.ndarray:
    """Columns (coad_eta mu, [eta, xi]) for eta over the basis of g."""
    g = pair.algebra
    return np.vstack([g.coad_orbit_matrix(pair.mu), -g.ad(pair.xi)])


def stratum_tangent(pair: CommutingPair, tol: float = TAU_PAIR) -> Subspace:
    """Tangent space g.(mu, xi) + (z* + z) of the orbit-type stratum."""
    _require(pair, tol)
    g = pair.algebra
    z = center_of(g, isotropy(pair))
    n = g.dim
    zeros = np.zeros((n, z.dim))
    gens = np.hstack([
        orbit_directions(pair),
        np.vstack([g.inner_product @ z.basis, zeros]),
        np.vstack([zeros, z.basis]),
    ])
    return Subspace.span(gens, 2 * n)


def split_sigma(g: LieAlgebra, k: Subspace) -> tuple[Subspace, Subspace]:
    """k = l + z with z the center of k and l its orthogonal complement in k."""
    z = center_of(g, k)
    if z.dim == 0:
        return k, z
    coords = null_space((g.inner_product @ z.basis).T @ k.basis, 1e-12)
    return Subspace(g.dim, k.basis @ coords), z


# ---------------------------------------------------------------------------
# sampling

def random_group_adjoint(g: LieAlgebra, rng: np.random.Generator, scale: float = 3.0) -> np.ndarray:
    """Ad matrix of exp(x) for a random x."""
    return expm(g.ad(scale * rng.standard_normal(g.dim)))


def _coadjoint_from_adjoint(ad_matrix: np.ndarray) -> np.ndarray:
    return np.linalg.inv(ad_matrix).T


def conjugate_pair(pair: CommutingPair, ad_matrix: np.ndarray) -> CommutingPair:
    """Apply a group element, given by its Ad matrix, to both components."""
    return CommutingPair(_coadjoint_from_adjoint(ad_matrix) @ pair.mu, ad_matrix @ pair.xi, pair.algebra)


def _factor_special_elements(kind: str, n: int, dim: int) -> list[np.ndarray]:
    """Representative elements whose centralizers give the Levi types of one factor."""
    if kind == "torus" or (kind == "so" and n == 2) or (kind == "so" and n == 3) or (kind == "su" and n == 2):
        # rank one, or abelian: either everything or a maximal torus
        gen = np.zeros(dim)
        gen[0] = 1.0
        return [np.zeros(dim), gen]
    if kind == "so" and n == 4:
        # basis order (01),(02),(03),(12),(13),(23)
        plus = np.zeros(dim)
        plus[0], plus[5] = 1.0, 1.0
        minus = plus.copy()
        minus[5] = -1.0
        generic = np.zeros(dim)
        generic[0], generic[5] = 1.0, 2.0
        return [np.zeros(dim), plus, minus, generic]
    if kind == "su" and n == 3:
        basis = _su_basis(3)
        flat = np.array([np.concatenate([m.real.ravel(), m.imag.ravel()]) for m in basis]).T

        def coords(mat):
            v = np.concatenate([mat.real.ravel(), mat.imag.ravel()])
            return np.linalg.lstsq(flat, v, rcond=None)[0]

        levi = coords(np.diag([1j, 1j, -2j]))
        generic = coords(np.diag([1j, 2j, -3j]))
        return [np.zeros(dim), levi, generic]
    raise ValueError(f"no special elements for {kind}({n})")


def levi_subalgebras(g: LieAlgebra) -> list[Subspace]:
    """Centralizers of representative elements, one per combination of factor types."""
    per_factor = []
    for kind, n, s in g.factors:
        embedded = []
        for e in _factor_special_elements(kind, n, s.stop - s.start):
            full = np.zeros(g.dim)
            full[s] = e
            embedded.append(full)
        per_factor.append(embedded)
    subs = []
    for combo in itertools.product(*per_factor):
        subs.append(centralizer(g, np.sum(combo, axis=0)))
    return subs


def _stabilizer_dual(g: LieAlgebra, xi) -> Subspace:
    """B g_xi, the covectors commuting with xi."""
    s = stabilizer(g, xi)
    return Subspace.span(g.inner_product @ s.basis, g.dim) if s.dim else s


def sample_pairs(g: LieAlgebra, strategy, n: int, seed: int) -> list[CommutingPair]:
    """Draw ``n`` commuting pairs.

    ``strategy`` is ``"generic"``, ``"origin"``, or ``("through_subalgebra", k)``
    with ``k`` a Subspace; a bare Subspace is accepted for the latter.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    if isinstance(strategy, Subspace):
        strategy = ("through_subalgebra", strategy)
    if strategy == "origin":
        return [CommutingPair(np.zeros(g.dim), np.zeros(g.dim), g) for _ in range(n)]
    if strategy == "generic":
        out = []
        for _ in range(n):
            xi = rng.standard_normal(g.dim)
            dual = _stabilizer_dual(g, xi)
            mu = dual.basis @ rng.standard_normal(dual.dim)
            out.append(CommutingPair(mu, xi, g))
        return out
    if isinstance(strategy, tuple) and len(strategy) == 2 and strategy[0] == "through_subalgebra":
        k = strategy[1]
        if not isinstance(k, Subspace) or k.ambient_dim != g.dim:
            raise ValueError("through_subalgebra needs a Subspace of g")
        z = center_of(g, k)
        zb = b_orthonormal(g, z)
        out = []
        for _ in range(n):
            xi = zb @ rng.standard_normal(z.dim)
            mu = g.inner_product @ (zb @ rng.standard_normal(z.dim))
            ad = random_group_adjoint(g, rng)
            out.append(conjugate_pair(CommutingPair(mu, xi, g), ad))
        return out
    raise ValueError(f"invalid sampling strategy {strategy!r}")


def stratified_samples(g: LieAlgebra, n: int, seed: int) -> list[CommutingPair]:
    """Mix of generic draws, the origin, and draws through every Levi subalgebra."""
    subs = levi_subalgebras(g)
    rng = np.random.default_rng(seed)
    seeds = rng.integers(0, 2**31, size=len(subs) + 2)
    n_each = max(1, n // (len(subs) + 1))
    out = sample_pairs(g, "generic", n_each, int(seeds[0]))
    out += sample_pairs(g, "origin", 1, int(seeds[1]))
    for k, s in zip(subs, seeds[2:]):
        out += sample_pairs(g, ("through_subalgebra", k), n_each, int(s))
    while len(out) < n:
        out += sample_pairs(g, "generic", n - len(out), int(rng.integers(2**31)))
    return out


# ---------------------------------------------------------------------------
# slice model

@dataclass(frozen=True)
class LocalModelReport:
    n: int
    n_agree: int
    n_both_in: int
    n_both_out: int
    max_residual: float
    radius: float

    @property
    def all_agree(self) -> bool:
        return self.n_agree == self.n


def local_model_check(pair: CommutingPair, n: int, seed: int, tol: float = TAU_PAIR,
                      radius: float | None = None) -> LocalModelReport:
    """Compare membership of (mu+nu, xi+eta) in the commuting set of g with
    membership of (nu, eta) in the commuting set of k, for (nu, eta) in k* + k.

    Half of the draws are commuting in k by construction, half are random.
    ``max_residual`` is the largest gap between the two defects.
    """
    _require(pair, tol)
    g = pair.algebra
    k = isotropy(pair)
    if radius is None:
        radius = 0.1 * (1.0 + np.linalg.norm(pair.as_vector()))
    rng = np.random.default_rng(seed)
    agree = both_in = both_out = 0
    max_res = 0.0
    for i in range(n):
        if k.dim == 0:
            eta = np.zeros(g.dim)
            nu = np.zeros(g.dim)
        elif i % 2 == 0:
            eta = k.basis @ rng.standard_normal(k.dim)
            ck = centralizer(g, eta, within=k)
            nu = g.inner_product @ (ck.basis @ rng.standard_normal(ck.dim))
        else:
            eta = k.basis @ rng.standard_normal(k.dim)
            nu = g.inner_product @ (k.basis @ rng.standard_normal(k.dim))
        size = np.linalg.norm(np.concatenate([nu, eta]))
        if size > 0:
            scale = radius * rng.uniform(0.05, 1.0) / size
            nu, eta = nu * scale, eta * scale
        mu_full, xi_full = pair.mu + nu, pair.xi + eta
        d_full = np.linalg.norm(g.coad(xi_full, mu_full))
        d_slice = np.linalg.norm(g.coad(eta, nu))
        in_full = d_full < pair_tolerance(mu_full, xi_full, tol)
        in_slice = d_slice < pair_tolerance(nu, eta, tol)
        max_res = max(max_res, abs(d_full - d_slice))
        if in_full == in_slice:
            agree += 1
            both_in += int(in_full)
            both_out += int(not in_full)
    return LocalModelReport(n, agree, both_in, both_out, max_res, float(radius))


def commuting_rank_consistency(g: LieAlgebra, fp: TypeFingerprint) -> bool:
    """k abelian exactly when dim k equals the rank of g."""
    return (fp.dim_derived == 0) == (fp.dim_k == g.rank)


