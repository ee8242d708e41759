"""Orthonormal subspace representation and rank-revealing helpers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tolerances import TAU_RANK, TAU_SUB


def rank_cutoff(s: np.ndarray, rtol: float = TAU_RANK) -> float:
    """Singular values above this count toward the numerical rank.

    The cutoff is relative to the largest singular value, floored at an
    absolute ``rtol`` so that pure round-off matrices report rank zero.
    """
    smax = float(s[0]) if s.size else 0.0
    return rtol * max(smax, 1.0)


def numerical_rank(a: np.ndarray, rtol: float = TAU_RANK) -> int:
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.size == 0:
        return 0
    s = np.linalg.svd(a, compute_uv=False)
    return int(np.sum(s > rank_cutoff(s, rtol)))


def null_space(a: np.ndarray, rtol: float = TAU_RANK) -> np.ndarray:
    """Orthonormal basis (columns) of the numerical kernel of ``a``."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    n = a.shape[1]
    if a.shape[0] == 0 or n == 0:
        return np.eye(n)
    _, s, vt = np.linalg.svd(a, full_matrices=True)
    r = int(np.sum(s > rank_cutoff(s, rtol)))
    return vt[r:].T.copy()


def range_basis(a: np.ndarray, rtol: float = TAU_RANK) -> np.ndarray:
    """Orthonormal basis (columns) of the numerical column space of ``a``."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.shape[1] == 0:
        return np.zeros((a.shape[0], 0))
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    r = int(np.sum(s > rank_cutoff(s, rtol)))
    return u[:, :r].copy()


@dataclass(frozen=True, eq=False)
class Subspace:
    """A linear subspace of R^ambient_dim stored by an orthonormal basis.

    ``basis`` has shape (ambient_dim, dim) and may have zero columns.
    """

    ambient_dim: int
    basis: np.ndarray
    tol: float = TAU_RANK

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float)
        b = b.reshape(self.ambient_dim, -1) if self.ambient_dim else b.reshape(0, b.shape[-1] if b.ndim == 2 else 0)
        object.__setattr__(self, "basis", b)

    @classmethod
    def span(cls, vectors, ambient_dim: int | None = None, tol: float = TAU_RANK) -> "Subspace":
        """Span of the columns of ``vectors`` (rank-revealing SVD)."""
        v = np.asarray(vectors, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if ambient_dim is None:
            ambient_dim = v.shape[0]
        v = v.reshape(ambient_dim, -1)
        return cls(ambient_dim, range_basis(v, tol), tol)

    @classmethod
    def zero(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, np.zeros((ambient_dim, 0)))

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, np.eye(ambient_dim))

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def __repr__(self):
        return f"Subspace(ambient_dim={self.ambient_dim}, dim={self.dim})"

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.T

    def project(self, x: np.ndarray) -> np.ndarray:
        return self.basis @ (self.basis.T @ x)

    def orthonormality_residual(self) -> float:
        if self.dim == 0:
            return 0.0
        return float(np.max(np.abs(self.basis.T @ self.basis - np.eye(self.dim))))

    def residuals(self, vectors: np.ndarray) -> np.ndarray:
        """Distance of each (column) vector to the subspace."""
        v = np.asarray(vectors, dtype=float).reshape(self.ambient_dim, -1)
        return np.linalg.norm(v - self.project(v), axis=0)

    def _check(self, other: "Subspace"):
        if other.ambient_dim != self.ambient_dim:
            raise ValueError(
                f"ambient dimension mismatch: {self.ambient_dim} vs {other.ambient_dim}"
            )

    def contains(self, other, tol: float = TAU_SUB) -> bool:
        """Containment of a subspace, or of vectors (columns) relative to their norm."""
        if not isinstance(other, Subspace):
            v = np.asarray(other, dtype=float).reshape(self.ambient_dim, -1)
            scale = np.maximum(np.linalg.norm(v, axis=0), 1.0)
            return bool(np.all(self.residuals(v) < tol * scale))
        self._check(other)
        if other.dim == 0:
            return True
        return bool(np.all(self.residuals(other.basis) < tol))

    def _split(self, other: "Subspace", tol: float):
        # singular values of (I - P_A) B are the sines of the principal angles
        self._check(other)
        if other.dim == 0:
            return np.zeros((self.ambient_dim, 0)), np.zeros((self.ambient_dim, 0))
        resid = other.basis - self.project(other.basis)
        u, s, vt = np.linalg.svd(resid, full_matrices=False)
        outside = s >= tol
        return other.basis @ vt[~outside].T, u[:, outside]

    def intersect(self, other: "Subspace", tol: float = TAU_SUB) -> "Subspace":
        inside, _ = self._split(other, tol)
        return Subspace(self.ambient_dim, inside, self.tol)

    def sum(self, other: "Subspace", tol: float = TAU_SUB) -> "Subspace":
        _, outside = self._split(other, tol)
        return Subspace(self.ambient_dim, np.hstack([self.basis, outside]), self.tol)

    def perp(self, metric: np.ndarray | None = None) -> "Subspace":
        """Orthogonal complement; w.r.t. ``metric`` when given (returned basis is Euclidean-orthonormal)."""
        if self.dim == 0:
            return Subspace.full(self.ambient_dim)
        a = self.basis if metric is None else metric @ self.basis
        u, _, _ = np.linalg.svd(a, full_matrices=True)
        if metric is None:
            comp = u[:, self.dim:]
        else:
            comp = null_space(a.T, 1e-12)
        return Subspace(self.ambient_dim, comp, self.tol)

    def coordinates(self, x: np.ndarray) -> np.ndarray:
        return self.basis.T @ x


def subspace_arith(op: str, a: Subspace, b: Subspace | None = None, tol: float = TAU_SUB):
    """Dispatch ``intersect``, ``sum``, ``perp`` and ``contains`` by name."""
    if op == "perp":
        return a.perp()
    if b is None:
        raise ValueError(f"operation {op!r} needs two subspaces")
    if op == "intersect":
        return a.intersect(b, tol)
    if op == "sum":
        return a.sum(b, tol)
    if op == "contains":
        return a.contains(b, tol)
    raise ValueError(f"unknown subspace operation {op!r}")


def principal_angles(a: Subspace, b: Subspace) -> np.ndarray:
    """Principal angles (radians, ascending) between two subspaces."""
    a._check(b)
    if a.dim == 0 or b.dim == 0:
        return np.zeros(0)
    k = min(a.dim, b.dim)
    cosines = np.linalg.svd(a.basis.T @ b.basis, compute_uv=False)
    big = np.sort(np.arccos(np.clip(cosines, -1.0, 1.0)))[:k]
    # arcsin of the residual singular values is accurate for small angles
    sines = np.linalg.svd(b.basis - a.project(b.basis), compute_uv=False)
    small = np.sort(np.arcsin(np.clip(sines, 0.0, 1.0)))[:k]
    return np.where(big < 0.5, small, big)
