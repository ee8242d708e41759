"""Compact Lie algebras by structure constants.

Conventions
-----------
Elements of g and of the dual g* are plain coordinate vectors; covectors are
written in the dual basis, so the pairing <mu, xi> is ``mu @ xi``.

The bracket is ``[e_i, e_j] = sum_k c[i, j, k] e_k`` and ``ad(x)`` is the
matrix of ``y -> [x, y]``.  The coadjoint representation is fixed once, here:

    <coad_xi mu, eta> = -<mu, [xi, eta]>,   i.e.  coad_xi = -ad(xi).T

which is the derivative of the coadjoint group action.  On so(3) with the hat
basis this reads ``coad_xi mu = xi x mu``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.linalg import expm

from .subspace import Subspace, null_space, numerical_rank, range_basis
from .tolerances import TAU_ALG, TAU_RANK

N_RETRY = 8
_RANK_SEED = 20240601


class NotSubalgebraError(ValueError):
    """Raised when a subspace is not closed under the bracket."""


@dataclass(frozen=True, eq=False)
class LieAlgebra:
    """A finite-dimensional compact Lie algebra.

    Attributes
    ----------
    name
        Descriptor the algebra was built from, e.g. ``"so(3)+torus(3)"``.
    structure_constants
        Array ``c`` of shape (dim, dim, dim).
    inner_product
        Ad-invariant positive-definite Gram matrix ``B``.
    factors
        ``(kind, n, slice)`` for each direct summand.
    """

    name: str
    structure_constants: np.ndarray
    inner_product: np.ndarray
    factors: tuple = field(default=())

    @property
    def dim(self) -> int:
        return self.structure_constants.shape[0]

    def __repr__(self):
        return f"LieAlgebra({self.name!r}, dim={self.dim})"

    def _vec(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"expected a vector of length {self.dim}, got shape {x.shape}")
        return x

    def ad(self, x) -> np.ndarray:
        return np.einsum("ijk,i->kj", self.structure_constants, self._vec(x))

    def bracket(self, x, y) -> np.ndarray:
        return np.einsum("ijk,i,j->k", self.structure_constants, self._vec(x), self._vec(y))

    def coad_matrix(self, xi) -> np.ndarray:
        """Matrix of ``mu -> coad_xi mu``."""
        return -self.ad(xi).T

    def coad(self, xi, mu) -> np.ndarray:
        return self.coad_matrix(xi) @ self._vec(mu)

    def coad_orbit_matrix(self, mu) -> np.ndarray:
        """Matrix of ``eta -> coad_eta mu``; its kernel is g_mu."""
        return np.einsum("abk,k->ab", self.structure_constants, self._vec(mu))

    def flat(self, x) -> np.ndarray:
        """g -> g* via the invariant inner product."""
        return self.inner_product @ self._vec(x)

    def sharp(self, mu) -> np.ndarray:
        """g* -> g, inverse of :meth:`flat`."""
        return np.linalg.solve(self.inner_product, self._vec(mu))

    def dualize(self, x, dual: bool = False) -> np.ndarray:
        return self.sharp(x) if dual else self.flat(x)

    def killing_form(self) -> np.ndarray:
        ads = np.stack([self.ad(e) for e in np.eye(self.dim)])
        return np.einsum("iab,jba->ij", ads, ads)

    def jacobi_residual(self) -> float:
        c = self.structure_constants
        # [[e_i,e_j],e_l] + cyclic
        t = np.einsum("ijm,mlk->ijlk", c, c)
        r = t + np.transpose(t, (1, 2, 0, 3)) + np.transpose(t, (2, 0, 1, 3))
        return float(np.max(np.abs(r))) if r.size else 0.0

    def antisymmetry_residual(self) -> float:
        c = self.structure_constants
        return float(np.max(np.abs(c + np.transpose(c, (1, 0, 2))))) if c.size else 0.0

    def invariance_residual(self) -> float:
        """max |<[x,y],z> + <y,[x,z]>| over basis triples."""
        B = self.inner_product
        c = self.structure_constants
        # <[e_i,e_j], e_l> = c[i,j,k] B[k,l]
        t = np.einsum("ijk,kl->ijl", c, B)
        r = t + np.transpose(t, (0, 2, 1))
        return float(np.max(np.abs(r))) if r.size else 0.0

    @cached_property
    def rank(self) -> int:
        return rank_of(self, Subspace.full(self.dim))


# ---------------------------------------------------------------------------
# constructors

def _hat_so3() -> list[np.ndarray]:
    mats = []
    for i in range(3):
        x = np.zeros(3)
        x[i] = 1.0
        mats.append(np.array([[0, -x[2], x[1]], [x[2], 0, -x[0]], [-x[1], x[0], 0]]))
    return mats


def _so_basis(n: int) -> list[np.ndarray]:
    if n == 3:
        return _hat_so3()
    mats = []
    for a in range(n):
        for b in range(a + 1, n):
            m = np.zeros((n, n))
            m[a, b], m[b, a] = -1.0, 1.0
            mats.append(m)
    return mats


def _su_basis(n: int) -> list[np.ndarray]:
    mats = []
    for a in range(n):
        for b in range(a + 1, n):
            m = np.zeros((n, n), dtype=complex)
            m[a, b], m[b, a] = 1.0, -1.0
            mats.append(m)
            m = np.zeros((n, n), dtype=complex)
            m[a, b], m[b, a] = 1j, 1j
            mats.append(m)
    for a in range(n - 1):
        d = np.zeros(n, dtype=complex)
        d[: a + 1] = 1j
        d[a + 1] = -1j * (a + 1)
        mats.append(np.diag(d))
    # orthonormalize w.r.t. Re tr(X^H Y)
    flat = np.array([np.concatenate([m.real.ravel(), m.imag.ravel()]) for m in mats]).T
    q, _ = np.linalg.qr(flat)
    k = n * n
    return [(q[:k, i] + 1j * q[k:, i]).reshape(n, n) for i in range(q.shape[1])]


def _structure_from_matrices(mats: list[np.ndarray]) -> np.ndarray:
    flat = np.array([np.concatenate([m.real.ravel(), m.imag.ravel()]) for m in mats]).T
    d = len(mats)
    c = np.zeros((d, d, d))
    for i in range(d):
        for j in range(d):
            com = mats[i] @ mats[j] - mats[j] @ mats[i]
            v = np.concatenate([com.real.ravel(), com.imag.ravel()])
            c[i, j] = np.linalg.lstsq(flat, v, rcond=None)[0]
    c[np.abs(c) < 1e-14] = 0.0
    return c


def _factor(kind: str, n: int) -> tuple[np.ndarray, np.ndarray]:
    if kind == "torus" or (kind == "so" and n == 2):
        k = n if kind == "torus" else 1
        if k < 1:
            raise ValueError("torus dimension must be positive")
        return np.zeros((k, k, k)), np.eye(k)
    if kind == "so":
        if not 3 <= n <= 4:
            raise ValueError(f"so(n) supported for n <= 4, got so({n})")
        c = _structure_from_matrices(_so_basis(n))
    elif kind == "su":
        if not 2 <= n <= 3:
            raise ValueError(f"su(n) supported for n <= 3, got su({n})")
        c = _structure_from_matrices(_su_basis(n))
    else:
        raise ValueError(f"unsupported algebra {kind!r}")
    ads = [np.einsum("ijk,i->kj", c, e) for e in np.eye(c.shape[0])]
    killing = np.array([[np.trace(a @ b) for b in ads] for a in ads])
    # normalizer 2 gives <e_1, e_1> = 1 on so(3)
    B = -killing / 2.0
    B[np.abs(B) < 1e-14] = 0.0
    return c, B


_TOKEN = re.compile(r"^\s*(so|su|torus|t)\s*\(\s*(-?\d+)\s*\)\s*$")


def parse_descriptor(spec) -> list[tuple[str, int]]:
    """``"so(3)+torus(3)"`` (also ``⊕``) or a list of such strings / (kind, n) pairs."""
    if isinstance(spec, str):
        parts = re.split(r"[+⊕]", spec)
    elif isinstance(spec, (list, tuple)):
        parts = list(spec)
    else:
        raise ValueError(f"cannot parse algebra descriptor {spec!r}")
    out = []
    for part in parts:
        if isinstance(part, (list, tuple)) and len(part) == 2:
            kind, n = str(part[0]), int(part[1])
        else:
            m = _TOKEN.match(str(part))
            if not m:
                raise ValueError(f"unsupported algebra name {part!r}")
            kind, n = m.group(1), int(m.group(2))
        kind = "torus" if kind == "t" else kind
        if n <= 0:
            raise ValueError(f"non-positive dimension in {part!r}")
        out.append((kind, n))
    if not out:
        raise ValueError("empty algebra descriptor")
    return out


def build_algebra(spec, tol: float = TAU_ALG) -> LieAlgebra:
    """Build so(n) (n <= 4), su(n) (n <= 3), torus(k), or a direct sum."""
    parts = parse_descriptor(spec)
    blocks = [_factor(kind, n) for kind, n in parts]
    dim = sum(c.shape[0] for c, _ in blocks)
    c = np.zeros((dim, dim, dim))
    B = np.zeros((dim, dim))
    factors = []
    off = 0
    for (kind, n), (cf, Bf) in zip(parts, blocks):
        d = cf.shape[0]
        s = slice(off, off + d)
        c[s, s, s] = cf
        B[s, s] = Bf
        factors.append((kind, n, s))
        off += d
    name = "+".join(f"{k}({n})" for k, n in parts)
    g = LieAlgebra(name, c, B, tuple(factors))
    for label, r in (("antisymmetry", g.antisymmetry_residual()),
                     ("Jacobi", g.jacobi_residual()),
                     ("invariance", g.invariance_residual())):
        if r >= tol:
            raise ArithmeticError(f"{name}: {label} residual {r:.3e} exceeds {tol:.1e}")
    _ = g.rank
    return g


# ---------------------------------------------------------------------------
# subalgebra computations

def bracket(g: LieAlgebra, x, y) -> np.ndarray:
    return g.bracket(x, y)


def coad(g: LieAlgebra, xi, mu) -> np.ndarray:
    return g.coad(xi, mu)


def stabilizer(g: LieAlgebra, item, dual: bool = False, tol: float = TAU_RANK) -> Subspace:
    """g_xi = ker ad_xi, or g_mu = ker(eta -> coad_eta mu) when ``dual``."""
    m = g.coad_orbit_matrix(item) if dual else g.ad(item)
    return Subspace(g.dim, null_space(m, tol), tol)


def centralizer(g: LieAlgebra, x, within: Subspace | None = None, tol: float = TAU_RANK) -> Subspace:
    """{y in within : [x, y] = 0}."""
    if within is None:
        return stabilizer(g, x, tol=tol)
    coords = null_space(g.ad(x) @ within.basis, tol)
    return Subspace(g.dim, within.basis @ coords, tol)


def closure_residual(g: LieAlgebra, k: Subspace) -> float:
    """Largest distance of a basis bracket [b_i, b_j] from k."""
    if k.dim < 2:
        return 0.0
    br = np.einsum("ijk,ia,jb->kab", g.structure_constants, k.basis, k.basis)
    br = br.reshape(g.dim, -1)
    return float(np.max(k.residuals(br)))


def check_subalgebra(g: LieAlgebra, k: Subspace, tol: float = TAU_ALG):
    r = closure_residual(g, k)
    if r >= tol:
        raise NotSubalgebraError(f"bracket closure residual {r:.3e} >= {tol:.1e}")


def center_of(g: LieAlgebra, k: Subspace, tol: float = TAU_RANK, alg_tol: float = TAU_ALG) -> Subspace:
    """z(k) = {x in k : [x, k] = 0}."""
    check_subalgebra(g, k, alg_tol)
    if k.dim == 0:
        return k
    stacked = np.vstack([g.ad(b) @ k.basis for b in k.basis.T])
    coords = null_space(stacked, tol)
    return Subspace(g.dim, k.basis @ coords, tol)


def derived_subalgebra(g: LieAlgebra, k: Subspace, tol: float = TAU_RANK) -> Subspace:
    """[k, k], spanned by brackets of basis pairs."""
    if k.dim < 2:
        return Subspace.zero(g.dim)
    br = np.einsum("ijk,ia,jb->kab", g.structure_constants, k.basis, k.basis)
    return Subspace(g.dim, range_basis(br.reshape(g.dim, -1), tol), tol)


def rank_of(g: LieAlgebra, k: Subspace, seed: int = _RANK_SEED, n_retry: int = N_RETRY,
            tol: float = TAU_RANK) -> int:
    """Dimension of the centralizer in k of a generic element of k.

    Generic elements minimize the centralizer dimension, so the minimum over
    ``n_retry`` Gaussian draws is returned.
    """
    if k.dim == 0:
        return 0
    rng = np.random.default_rng(seed)
    best = k.dim
    for _ in range(n_retry):
        x = k.basis @ rng.standard_normal(k.dim)
        dim_c = k.dim - numerical_rank(g.ad(x) @ k.basis, tol)
        best = min(best, dim_c)
    return best


def adjoint_matrix(g: LieAlgebra, x, t: float = 1.0) -> np.ndarray:
    """Ad_{exp(t x)} = exp(t ad_x)."""
    return expm(t * g.ad(x))


def conjugate(g: LieAlgebra, x, t: float, target, dual: bool = False) -> np.ndarray:
    """Act by exp(t x): adjoint on g, coadjoint (dual inverse) on g* when ``dual``."""
    target = g._vec(target)
    if dual:
        return expm(-t * g.ad(x).T) @ target
    return expm(t * g.ad(x)) @ target


def b_orthonormal(g: LieAlgebra, s: Subspace) -> np.ndarray:
    """A basis of ``s`` orthonormal for the invariant inner product."""
    if s.dim == 0:
        return s.basis
    gram = s.basis.T @ g.inner_product @ s.basis
    L = np.linalg.cholesky(gram)
    return np.linalg.solve(L, s.basis.T).T


def b_perp(g: LieAlgebra, s: Subspace) -> Subspace:
    return s.perp(g.inner_product)


def dual_subspace(g: LieAlgebra, s: Subspace) -> Subspace:
    """k* realized inside g* as the image of k under the inner product."""
    return Subspace.span(g.inner_product @ s.basis, g.dim) if s.dim else Subspace.zero(g.dim)
