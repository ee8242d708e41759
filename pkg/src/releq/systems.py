"""Cotangent bundles of compact groups as symmetric Hamiltonian systems.

T*G is left-trivialized as G x g* with points (g, mu_b), where mu_b is the
body momentum.  G acts on the left, ``h.(g, mu_b) = (h g, mu_b)``, and the
Hamiltonian is ``H = 1/2 mu_b . M^{-1} mu_b``.

Group elements are charted by exponential coordinates around a movable base,
``g = g0 exp(q)``.  The base is stored through its adjoint matrix together
with the angles along abelian factors, which the adjoint matrix cannot see.
Phase coordinates are ``(q, mu_b)``.

Tangent vectors are handled in two frames.  The body frame writes
``d/dt (g, mu_b)`` as ``(g^{-1} dg/dt, dmu_b/dt)``.  Chart coordinates use
``(dq/dt, dmu_b/dt)``.  The two agree at q = 0.  ``Phi(q)`` maps chart
vectors to body vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .lie import LieAlgebra, build_algebra
from .subspace import numerical_rank
from .tolerances import TAU_RANK

RECENTER_RADIUS = 0.5
CHART_RADIUS = 1.0
ROTOR_SEED = 11


class ChartError(ValueError):
    """Raised when chart coordinates leave the declared chart radius."""


def _abelian_mask(g: LieAlgebra) -> np.ndarray:
    mask = np.zeros(g.dim, dtype=bool)
    for kind, n, s in g.factors:
        if kind == "torus" or (kind == "so" and n == 2):
            mask[s] = True
    return mask


@dataclass(frozen=True, eq=False)
class GroupBase:
    """Base point g0 of the exponential chart."""

    ad: np.ndarray
    angles: np.ndarray

    @classmethod
    def identity(cls, g: LieAlgebra) -> "GroupBase":
        return cls(np.eye(g.dim), np.zeros(g.dim))

    def shifted(self, g: LieAlgebra, q: np.ndarray) -> "GroupBase":
        """Base moved to g0 exp(q)."""
        mask = _abelian_mask(g)
        return GroupBase(self.ad @ expm(g.ad(q)), self.angles + np.where(mask, q, 0.0))

    def left_multiplied(self, g: LieAlgebra, x: np.ndarray) -> "GroupBase":
        """Base moved to exp(x) g0."""
        mask = _abelian_mask(g)
        return GroupBase(expm(g.ad(x)) @ self.ad, self.angles + np.where(mask, x, 0.0))


@dataclass(frozen=True, eq=False)
class PhasePoint:
    base: GroupBase
    q: np.ndarray
    mu_b: np.ndarray

    @property
    def coords(self) -> np.ndarray:
        return np.concatenate([self.q, self.mu_b])

    @property
    def dim(self) -> int:
        return 2 * self.q.size

    def with_coords(self, coords) -> "PhasePoint":
        coords = np.asarray(coords, dtype=float)
        n = self.q.size
        return PhasePoint(self.base, coords[:n].copy(), coords[n:].copy())

    def recentered(self, g: LieAlgebra) -> "PhasePoint":
        """Same point with q = 0."""
        if not np.any(self.q):
            return self
        return PhasePoint(self.base.shifted(g, self.q), np.zeros_like(self.q), self.mu_b.copy())

    def group_ad(self, g: LieAlgebra) -> np.ndarray:
        return self.base.ad @ expm(g.ad(self.q))


@dataclass
class Evaluation:
    """Everything the analysis needs at one point, in chart coordinates."""

    H: float
    dH: np.ndarray
    X_H: np.ndarray
    J: np.ndarray
    dJ: np.ndarray
    omega: np.ndarray
    generator: np.ndarray


def dexp_body(g: LieAlgebra, q: np.ndarray) -> np.ndarray:
    """(e^X - I)/X at X = -ad_q: chart velocity dq to body velocity."""
    n = g.dim
    X = -g.ad(q)
    big = np.zeros((2 * n, 2 * n))
    big[:n, :n] = X
    big[:n, n:] = np.eye(n)
    return expm(big)[:n, n:]


@dataclass(frozen=True, eq=False)
class CotangentGroupSystem:
    """T*G with left action and quadratic Hamiltonian ``1/2 mu . Minv mu``."""

    algebra: LieAlgebra
    Minv: np.ndarray
    name: str = "cotangent_group"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        n = self.algebra.dim
        Minv = np.asarray(self.Minv, dtype=float)
        if Minv.shape != (n, n):
            raise ValueError(f"M must be {n}x{n} for {self.algebra.name}, got {Minv.shape}")
        if not np.allclose(Minv, Minv.T, atol=1e-12):
            raise ValueError("M must be symmetric")
        if np.linalg.eigvalsh(Minv).min() <= 0:
            raise ValueError("M must be positive definite")
        object.__setattr__(self, "Minv", 0.5 * (Minv + Minv.T))

    @property
    def phase_dim(self) -> int:
        return 2 * self.algebra.dim

    @property
    def M(self) -> np.ndarray:
        return np.linalg.inv(self.Minv)

    def point(self, mu_b, q=None, base: GroupBase | None = None) -> PhasePoint:
        n = self.algebra.dim
        q = np.zeros(n) if q is None else np.asarray(q, dtype=float)
        base = GroupBase.identity(self.algebra) if base is None else base
        return PhasePoint(base, q.copy(), self.algebra._vec(mu_b).copy())

    def _check_chart(self, p: PhasePoint):
        r = float(np.linalg.norm(p.q))
        if r > CHART_RADIUS:
            raise ChartError(f"|q| = {r:.3f} exceeds chart radius {CHART_RADIUS}")

    # body-frame quantities -------------------------------------------------

    def H(self, p: PhasePoint) -> float:
        return 0.5 * float(p.mu_b @ self.Minv @ p.mu_b)

    def J(self, p: PhasePoint) -> np.ndarray:
        self._check_chart(p)
        return np.linalg.solve(p.group_ad(self.algebra).T, p.mu_b)

    def omega_body(self, p: PhasePoint) -> np.ndarray:
        n = self.algebra.dim
        W = np.zeros((2 * n, 2 * n))
        W[:n, :n] = self.algebra.coad_orbit_matrix(p.mu_b)
        W[:n, n:] = np.eye(n)
        W[n:, :n] = -np.eye(n)
        return W

    def dH_body(self, p: PhasePoint) -> np.ndarray:
        return np.concatenate([np.zeros(self.algebra.dim), self.Minv @ p.mu_b])

    def X_body(self, p: PhasePoint) -> np.ndarray:
        Omega = self.Minv @ p.mu_b
        return np.concatenate([Omega, -self.algebra.coad_orbit_matrix(p.mu_b) @ Omega])

    def dJ_body(self, p: PhasePoint) -> np.ndarray:
        g = self.algebra
        coad_g = np.linalg.inv(p.group_ad(g)).T
        return coad_g @ np.hstack([g.coad_orbit_matrix(p.mu_b), np.eye(g.dim)])

    def generator_body(self, p: PhasePoint) -> np.ndarray:
        """Columns xi.p for xi over the basis of g."""
        n = self.algebra.dim
        return np.vstack([np.linalg.inv(p.group_ad(self.algebra)), np.zeros((n, n))])

    def linearization_body(self, p: PhasePoint, xi) -> np.ndarray:
        """Derivative of the body-frame field X_H - xi.p with respect to body variations.

        At a zero of the field this is the linearization of X_{H_xi}.
        """
        g = self.algebra
        n = g.dim
        zeta = np.linalg.solve(p.group_ad(g), g._vec(xi))
        Omega = self.Minv @ p.mu_b
        A = np.zeros((2 * n, 2 * n))
        A[:n, :n] = -g.ad(zeta)
        A[:n, n:] = self.Minv
        A[n:, n:] = -g.coad_matrix(Omega) - g.coad_orbit_matrix(p.mu_b) @ self.Minv
        return A

    # chart transport ------------------------------------------------------

    def chart_jacobian(self, p: PhasePoint) -> np.ndarray:
        n = self.algebra.dim
        Phi = np.eye(2 * n)
        if np.any(p.q):
            Phi[:n, :n] = dexp_body(self.algebra, p.q)
        return Phi

    def evaluate(self, p: PhasePoint) -> Evaluation:
        self._check_chart(p)
        Phi = self.chart_jacobian(p)
        W = self.omega_body(p)
        return Evaluation(
            H=self.H(p),
            dH=self.dH_body(p) @ Phi,
            X_H=np.linalg.solve(Phi, self.X_body(p)),
            J=self.J(p),
            dJ=self.dJ_body(p) @ Phi,
            omega=Phi.T @ W @ Phi,
            generator=np.linalg.solve(Phi, self.generator_body(p)),
        )

    def act(self, p: PhasePoint, x) -> PhasePoint:
        """exp(x).p for the left action."""
        return PhasePoint(p.base.left_multiplied(self.algebra, self.algebra._vec(x)), p.q.copy(), p.mu_b.copy())

    def identity_residuals(self, p: PhasePoint) -> dict:
        """Residuals of the structural identities at ``p`` (chart coordinates)."""
        ev = self.evaluate(p)
        g = self.algebra
        omega_flat = ev.omega.T @ ev.X_H - ev.dH
        equiv = ev.dJ @ ev.generator - np.column_stack([g.coad(e, ev.J) for e in np.eye(g.dim)])
        return {
            "antisymmetry": float(np.max(np.abs(ev.omega + ev.omega.T))),
            "omega_flat": float(np.max(np.abs(omega_flat))),
            "equivariance": float(np.max(np.abs(equiv))),
            "invariance": float(np.max(np.abs(ev.dH @ ev.generator))),
            "generator_rank": numerical_rank(ev.generator, TAU_RANK),
            "omega_rank": numerical_rank(ev.omega, TAU_RANK),
        }


def eval_system(sys: CotangentGroupSystem, p: PhasePoint) -> Evaluation:
    return sys.evaluate(p)


def make_cotangent_group_system(g, M, name: str = "cotangent_group", params: dict | None = None
                                ) -> CotangentGroupSystem:
    """System on T*G with Hamiltonian 1/2 mu . M^{-1} mu from the inertia-like matrix M."""
    if not isinstance(g, LieAlgebra):
        g = build_algebra(g)
    M = np.asarray(M, dtype=float)
    if M.shape != (g.dim, g.dim):
        raise ValueError(f"M must be {g.dim}x{g.dim}, got {M.shape}")
    if not np.allclose(M, M.T, atol=1e-12) or np.linalg.eigvalsh(0.5 * (M + M.T)).min() <= 0:
        raise ValueError("M must be symmetric positive definite")
    return CotangentGroupSystem(g, np.linalg.inv(M), name, dict(params or {}))


def rigid_body(moments=(1.0, 2.0, 3.0)) -> CotangentGroupSystem:
    moments = [float(m) for m in moments]
    return make_cotangent_group_system("so(3)", np.diag(moments), "rigid_body", {"moments": moments})


def rotor_inertia(seed: int = ROTOR_SEED, coupling: float = 0.3) -> np.ndarray:
    R = np.random.default_rng(seed).standard_normal((3, 3))
    M = np.zeros((6, 6))
    M[:3, :3] = np.diag([2.0, 3.0, 4.0])
    M[:3, 3:] = coupling * R
    M[3:, :3] = coupling * R.T
    M[3:, 3:] = np.eye(3)
    return M


def rigid_body_rotors(seed: int = ROTOR_SEED, coupling: float = 0.3) -> CotangentGroupSystem:
    return make_cotangent_group_system("so(3)+torus(3)", rotor_inertia(seed, coupling),
                                       "rigid_body_rotors", {"seed": seed, "coupling": coupling})


def torus_system(inertia: float = 1.0) -> CotangentGroupSystem:
    return make_cotangent_group_system("torus(1)", [[float(inertia)]], "torus", {"inertia": float(inertia)})


def perturbed(sys: CotangentGroupSystem, delta: np.ndarray) -> CotangentGroupSystem:
    """Same group, inertia matrix M + delta."""
    return make_cotangent_group_system(sys.algebra, sys.M + delta, sys.name, sys.params)


PRESETS = {
    "rigid_body": rigid_body,
    "rigid_body_rotors": rigid_body_rotors,
    "torus": torus_system,
}


def build_system(spec: dict) -> CotangentGroupSystem:
    """Build from ``{"preset": name, ...params}``; ``cotangent_group`` takes ``algebra`` and ``M``."""
    spec = dict(spec)
    name = spec.pop("preset")
    if name == "cotangent_group":
        return make_cotangent_group_system(spec["algebra"], spec["M"])
    if name not in PRESETS:
        raise ValueError(f"unknown system preset {name!r}")
    return PRESETS[name](**spec)
