"""Adapted frames, normal-form blocks and transversality at a relative equilibrium.

At a relative equilibrium p_e with momentum mu_e and generator xi_e the
tangent space splits as T0 + N1 + N0 + T1 where

* T0 = g_mu.p_e and T1 = g_mu^perp.p_e are orbit directions,
* N1 completes T0 inside ker dJ (the reduced directions),
* N0 completes the rest and is identified with g_mu^* through dJ.

In such a frame the linearization A of X_H - xi_e.p at p_e is block upper
triangular::

    [ -ad   C*   D    0  ]      rows/cols: T0, N1, N0, T1
    [  0    L    C    0  ]
    [  0    0   -coad 0  ]
    [  0    0    0   -ad ]

Coordinates on T0 and T1 are taken in B-orthonormal bases of g_mu and its
B-orthogonal complement; N0 uses the dual basis, so g_mu and g_mu^* share
coordinates.  All computations happen at a point recentred to q = 0, where
chart and body frames coincide.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import schur, solve_sylvester

from .commuting import TypeFingerprint, isotropy, split_sigma
from .lie import b_orthonormal, b_perp, stabilizer
from .solver import RelativeEquilibrium, admissible_pairs, solution_tangent
from .subspace import Subspace, null_space, numerical_rank, principal_angles, range_basis, rank_cutoff
from .systems import CotangentGroupSystem
from .tolerances import TAU_NF, TAU_RANK

RESONANCE_TOL = 1e-7
MAX_REFINE = 4


class NotTransversalError(ValueError):
    """Raised by operations whose statements assume a transversal RE."""


def _recentered(sys, re: RelativeEquilibrium) -> RelativeEquilibrium:
    if re.point.q.any():
        return replace(re, point=re.point.recentered(sys.algebra))
    return re


# ---------------------------------------------------------------------------
# frame

@dataclass(frozen=True, eq=False)
class AdaptedFrame:
    """Frame T0 | N1 | N0 | T1 of the phase tangent space at p_e.

    ``b_mu`` and ``b_perp`` are B-orthonormal bases of g_mu and of its
    complement, so ``T0 = gen @ b_mu`` and ``T1 = gen @ b_perp``.
    """

    T0: np.ndarray
    N1: np.ndarray
    N0: np.ndarray
    T1: np.ndarray
    b_mu: np.ndarray
    b_perp: np.ndarray
    refined: bool = False
    converged: bool = False
    refine_history: tuple = ()

    @property
    def dims(self) -> tuple:
        return (self.T0.shape[1], self.N1.shape[1], self.N0.shape[1], self.T1.shape[1])

    @property
    def matrix(self) -> np.ndarray:
        return np.hstack([self.T0, self.N1, self.N0, self.T1])

    def slices(self) -> tuple:
        m, r, m0, s = self.dims
        return (slice(0, m), slice(m, m + r), slice(m + r, m + r + m0), slice(m + r + m0, m + r + m0 + s))

    def subspaces(self) -> dict:
        return {name: Subspace.span(block, self.T0.shape[0])
                for name, block in zip(("T0", "N1", "N0", "T1"), (self.T0, self.N1, self.N0, self.T1))}

    def with_blocks(self, **changes) -> "AdaptedFrame":
        return replace(self, **changes)


def _initial_frame(sys: CotangentGroupSystem, re: RelativeEquilibrium) -> AdaptedFrame:
    g = sys.algebra
    p = re.point
    gm = stabilizer(g, re.momentum, dual=True)
    b_mu = b_orthonormal(g, gm)
    b_pp = b_orthonormal(g, b_perp(g, gm))
    gen = sys.generator_body(p)
    dJ = sys.dJ_body(p)
    T0, T1 = gen @ b_mu, gen @ b_pp
    K = null_space(dJ, TAU_RANK)
    if K.shape[1] != g.dim:
        raise ArithmeticError(f"dJ has kernel of dimension {K.shape[1]}, expected {g.dim}")
    # N1: Euclidean complement of T0 inside ker dJ
    coords = null_space(T0.T @ K, 1e-12) if T0.shape[1] else np.eye(K.shape[1])
    N1 = K @ coords
    # N0: complement of T + K, then corrected along T1 so that dJ N0 = B b_mu
    TK = range_basis(np.hstack([gen, K]), TAU_RANK)
    V = null_space(TK.T, 1e-12)
    if V.shape[1] != b_mu.shape[1]:
        raise ArithmeticError("T + ker dJ has the wrong codimension; is the action free?")
    lhs = np.hstack([dJ @ V, dJ @ T1])
    sol = np.linalg.solve(lhs, g.inner_product @ b_mu)
    N0 = V @ sol[: V.shape[1]] + T1 @ sol[V.shape[1]:]
    return AdaptedFrame(T0, N1, N0, T1, b_mu, b_pp)


def _spectral_split(M: np.ndarray, centers: np.ndarray, tol: float):
    """Block-diagonalizing basis for M: eigenvalues near ``centers`` first.

    Returns ``(P, k)`` with ``P^{-1} M P = diag(M_near (k x k), M_far)``.
    """
    n = M.shape[0]
    if n == 0:
        return np.eye(0, dtype=complex), 0

    def near(z):
        return bool(centers.size) and bool(np.min(np.abs(centers - z)) < tol)

    T, U, k = schur(M.astype(complex), output="complex", sort=near)
    if k in (0, n):
        return U, k
    Y = solve_sylvester(T[:k, :k], -T[k:, k:], -T[:k, k:])
    P = U.copy()
    P[:, k:] = U[:, :k] @ Y + U[:, k:]
    return P, k


def _eliminate_nonresonant(L, S, C, tol):
    """X with C + L X - X S equal to the resonant part of C."""
    r, m = C.shape
    if r == 0 or m == 0:
        return np.zeros((r, m))
    eig_L = np.linalg.eigvals(L)
    eig_S = np.linalg.eigvals(S)
    scale = 1.0 + max(np.max(np.abs(eig_L)), np.max(np.abs(eig_S)))
    P, kl = _spectral_split(L, eig_S, tol * scale)
    Q, ks = _spectral_split(S, eig_L, tol * scale)
    Lt = np.linalg.solve(P, L @ P)
    St = np.linalg.solve(Q, S @ Q)
    Ct = np.linalg.solve(P, C.astype(complex) @ Q)
    Xt = np.zeros_like(Ct)
    rows = (slice(0, kl), slice(kl, r))
    cols = (slice(0, ks), slice(ks, m))
    for a, ra in enumerate(rows):
        for b, cb in enumerate(cols):
            if a == 0 and b == 0:
                continue
            if ra.stop - ra.start == 0 or cb.stop - cb.start == 0:
                continue
            Xt[ra, cb] = solve_sylvester(Lt[ra, ra], -St[cb, cb], -Ct[ra, cb])
    X = P @ Xt @ np.linalg.inv(Q)
    return X.real


def _commutator_projection(A11, S, D, scale: float = 1.0):
    """Y with A11 Y - Y S = -(part of D outside ker of that operator).

    Singular values below TAU_RANK * scale are treated as zero; ``scale`` is
    the size of the whole linearization, since round-off left in the blocks
    by earlier shears is of that order.
    """
    m = D.shape[0]
    if m == 0:
        return np.zeros((0, 0))
    K = np.kron(np.eye(m), A11) - np.kron(S.T, np.eye(m))
    u, s, vt = np.linalg.svd(K)
    keep = s > max(rank_cutoff(s, 1e-10), TAU_RANK * scale)
    y = -vt[keep].T @ ((u[:, keep].T @ D.reshape(-1, order="F")) / s[keep])
    return y.reshape(m, m, order="F")


def _blocks(frame: AdaptedFrame, A: np.ndarray, W: np.ndarray):
    F = frame.matrix
    Ahat = np.linalg.solve(F, A @ F)
    What = F.T @ W @ F
    return Ahat, What


def _refine(frame: AdaptedFrame, A: np.ndarray, W: np.ndarray, tol: float = TAU_NF) -> AdaptedFrame:
    """Symplectic adaptation, removal of the nonresonant part of C and averaging of D.

    Each pass applies, in order:

    1. N0 += N1 X  killing the part of C that no resonance protects,
    2. N1 += T0 Z  making N1 symplectically orthogonal to N0,
    3. N0 += T0 Y  (Y antisymmetric) making N0 isotropic,
    4. N0 += T0 Y  (Y symmetric) making D commute with ad_xi on g_mu.

    All shears stay inside ker dJ, so dJ(N0) is untouched.
    """
    history = []
    converged = False
    scale = 1.0 + float(np.linalg.norm(A, 2))
    for _ in range(MAX_REFINE):
        s0, s1, s2, _s3 = frame.slices()
        Ahat, What = _blocks(frame, A, W)
        X = _eliminate_nonresonant(Ahat[s1, s1], Ahat[s2, s2], Ahat[s1, s2], RESONANCE_TOL)
        frame = frame.with_blocks(N0=frame.N0 + frame.N1 @ X)

        Ahat, What = _blocks(frame, A, W)
        E = What[s0, s2]
        if frame.N1.shape[1] and E.size:
            Z = -np.linalg.solve(E.T, What[s1, s2].T)
            frame = frame.with_blocks(N1=frame.N1 + frame.T0 @ Z)

        Ahat, What = _blocks(frame, A, W)
        if E.size:
            Y = np.linalg.solve(E.T, What[s2, s2]) / 2.0
            frame = frame.with_blocks(N0=frame.N0 + frame.T0 @ Y)

        Ahat, What = _blocks(frame, A, W)
        Y = _commutator_projection(Ahat[s0, s0], Ahat[s2, s2], Ahat[s0, s2], scale)
        Y = 0.5 * (Y + Y.T)
        frame = frame.with_blocks(N0=frame.N0 + frame.T0 @ Y)

        Ahat, What = _blocks(frame, A, W)
        res = _adaptation_residual(frame, What)
        D = Ahat[s0, s2]
        comm = np.linalg.norm(Ahat[s0, s0] @ D - D @ Ahat[s2, s2]) if D.size else 0.0
        step = max(np.abs(X).max(initial=0.0), np.abs(Y).max(initial=0.0))
        history.append((float(res), float(comm), float(step)))
        if res < tol and comm < tol and step < tol:
            converged = True
            break
    return frame.with_blocks(refined=True, converged=converged, refine_history=tuple(history))


def _adaptation_residual(frame: AdaptedFrame, What: np.ndarray) -> float:
    """How far the symplectic form is from the block form of the adapted frame."""
    s0, s1, s2, s3 = frame.slices()
    zero_blocks = [(s0, s0), (s0, s1), (s0, s3), (s1, s2), (s1, s3), (s2, s2), (s2, s3)]
    worst = max((np.abs(What[a, b]).max(initial=0.0) for a, b in zero_blocks), default=0.0)
    E = What[s0, s2]
    if E.size:
        worst = max(worst, np.abs(E - np.eye(E.shape[0])).max())
    return float(worst)


def adapted_frame(sys: CotangentGroupSystem, re: RelativeEquilibrium, refine: bool = True) -> AdaptedFrame:
    re = _recentered(sys, re)
    frame = _initial_frame(sys, re)
    if refine:
        frame = _refine(frame, sys.linearization_body(re.point, re.generator), sys.omega_body(re.point))
    return frame


def momentum_frame_residual(sys: CotangentGroupSystem, re: RelativeEquilibrium, frame: AdaptedFrame,
                 n: int = 200, seed: int = 0) -> float:
    """max |dJ(xi0 + w + mu0 + xi1) - (mu0 + coad_xi1 mu)| over random frame coordinates."""
    re = _recentered(sys, re)
    g = sys.algebra
    dJ = sys.dJ_body(re.point)
    F = frame.matrix
    _, _, s2, s3 = frame.slices()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        c = rng.standard_normal(F.shape[1])
        expected = g.inner_product @ frame.b_mu @ c[s2] + g.coad(frame.b_perp @ c[s3], re.momentum)
        worst = max(worst, float(np.abs(dJ @ F @ c - expected).max()))
    return worst


def frame_invariants(sys: CotangentGroupSystem, re: RelativeEquilibrium, frame: AdaptedFrame) -> dict:
    re = _recentered(sys, re)
    F = frame.matrix
    P = F.shape[0]
    dJ = sys.dJ_body(re.point)
    K = Subspace(P, null_space(dJ, TAU_RANK))
    T = Subspace.span(sys.generator_body(re.point), P)
    T0N1 = Subspace.span(np.hstack([frame.T0, frame.N1]), P)
    T0T1 = Subspace.span(np.hstack([frame.T0, frame.T1]), P)
    return {
        "dims": frame.dims,
        "full_rank": numerical_rank(F, TAU_RANK) == P and sum(frame.dims) == P,
        "kernel_match": K.contains(T0N1) and T0N1.dim == K.dim,
        "orbit_match": T.contains(T0T1) and T0T1.dim == T.dim,
    }


# ---------------------------------------------------------------------------
# normal form

@dataclass(frozen=True, eq=False)
class NormalFormBlocks:
    """Blocks of the linearization in an adapted frame.

    Coordinates on g_mu and g_mu^* are the B-orthonormal ones, so ``R`` is the
    matrix of ad_xi on g_mu and ``k_basis``/``z_basis`` are orthonormal bases
    of k and z in those coordinates.
    """

    dX_red: np.ndarray
    C: np.ndarray
    Cstar: np.ndarray
    D: np.ndarray
    R: np.ndarray
    k_basis: np.ndarray
    z_basis: np.ndarray
    R_perp: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    spectrum: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))
    residuals: dict = field(default_factory=dict)
    frame: AdaptedFrame | None = None
    converged: bool = True

    @property
    def m(self) -> int:
        return self.D.shape[0]

    @property
    def r(self) -> int:
        return self.dX_red.shape[0]

    @property
    def l_basis(self) -> np.ndarray:
        k = Subspace(self.m, self.k_basis)
        z = Subspace(self.m, self.z_basis)
        return k.basis @ null_space(z.basis.T @ k.basis, 1e-12) if z.dim else k.basis

    def structure_residuals(self) -> dict:
        L, C, Cs, D, R = self.dX_red, self.C, self.Cstar, self.D, self.R

        def nrm(x):
            return float(np.linalg.norm(x)) if x.size else 0.0

        return {
            "C_intertwining": nrm(L @ C + C @ R),
            "Cstar_intertwining": nrm(Cs @ L + R @ Cs),
            "D_commuting": nrm(R @ D - D @ R),
            "D_symmetry": nrm(D - D.T),
        }


def _coords_in_g_mu(g, b_mu: np.ndarray, sub: Subspace) -> np.ndarray:
    if sub.dim == 0:
        return np.zeros((b_mu.shape[1], 0))
    return range_basis(b_mu.T @ g.inner_product @ sub.basis, TAU_RANK)


def normal_form_blocks(sys: CotangentGroupSystem, re: RelativeEquilibrium,
                       frame: AdaptedFrame | None = None) -> NormalFormBlocks:
    re = _recentered(sys, re)
    g = sys.algebra
    A = sys.linearization_body(re.point, re.generator)
    W = sys.omega_body(re.point)
    if frame is None:
        frame = adapted_frame(sys, re)
    elif not frame.refined:
        frame = _refine(frame, A, W)
    Ahat, What = _blocks(frame, A, W)
    s0, s1, s2, s3 = frame.slices()
    b_mu, b_pp = frame.b_mu, frame.b_perp
    B = g.inner_product
    R = b_mu.T @ B @ g.ad(re.generator) @ b_mu
    R_perp = b_pp.T @ B @ g.ad(re.generator) @ b_pp
    forbidden = [(s1, s0), (s2, s0), (s2, s1), (s3, s0), (s3, s1), (s3, s2), (s0, s3), (s1, s3), (s2, s3)]
    forbidden_res = max((np.abs(Ahat[a, b]).max(initial=0.0) for a, b in forbidden), default=0.0)

    def dev(x, y):
        return float(np.abs(x - y).max(initial=0.0))

    k = isotropy(re.pair(sys))
    _, z = split_sigma(g, k)
    L = Ahat[s1, s1]
    blocks = NormalFormBlocks(
        dX_red=L,
        C=Ahat[s1, s2],
        Cstar=Ahat[s0, s1],
        D=Ahat[s0, s2],
        R=R,
        k_basis=_coords_in_g_mu(g, b_mu, k),
        z_basis=_coords_in_g_mu(g, b_mu, z),
        R_perp=R_perp,
        spectrum=np.linalg.eigvals(L) if L.size else np.zeros(0, dtype=complex),
        frame=frame,
        converged=frame.converged,
    )
    residuals = blocks.structure_residuals()
    residuals.update({
        "forbidden": float(forbidden_res),
        "diag_T0": dev(Ahat[s0, s0], -R),
        "diag_N0": dev(Ahat[s2, s2], -R),
        "diag_T1": dev(Ahat[s3, s3], -R_perp),
        "symplectic": _adaptation_residual(frame, What),
        "C_norm": float(np.linalg.norm(blocks.C)) if blocks.C.size else 0.0,
    })
    return replace(blocks, residuals=residuals)


# ---------------------------------------------------------------------------
# transversality verdicts

@dataclass(frozen=True)
class DirectVerdict:
    transversal: bool
    margin: float
    image_rank: int
    kernel_dim: int
    max_principal_angle: float
    escape: float


def check_transversal_direct(sys: CotangentGroupSystem, re: RelativeEquilibrium,
                             tol: float = TAU_RANK) -> DirectVerdict:
    """Does the linearized RE map, restricted to fixed type, cover ker dJ?

    ``margin`` is sigma_min / sigma_max of the image expressed in an
    orthonormal basis of ker dJ; it is zero when the image misses a direction.
    ``escape`` measures how far the image leaves ker dJ (should be round-off).
    """
    re = _recentered(sys, re)
    p = re.point
    n = sys.algebra.dim
    P = 2 * n
    basis = admissible_pairs(sys, re)
    A = sys.linearization_body(p, re.generator)
    img = np.hstack([A, -sys.generator_body(p)]) @ basis
    Kb = null_space(sys.dJ_body(p), tol)
    inside = Kb.T @ img
    escape = float(np.linalg.norm(img - Kb @ inside) / max(1.0, np.linalg.norm(img)))
    s = np.linalg.svd(inside, compute_uv=False) if inside.size else np.zeros(0)
    k = Kb.shape[1]
    if s.size < k or s[0] == 0:
        margin = 0.0
    else:
        margin = float(s[k - 1] / s[0])
    rank = numerical_rank(inside, tol)
    K = Subspace(P, Kb)
    Im = Subspace.span(img, P) if img.size else Subspace.zero(P)
    if Im.dim == 0:
        angle = float(np.pi / 2) if K.dim else 0.0
    else:
        resid = np.linalg.svd(Kb - Im.project(Kb), compute_uv=False)
        angle = float(np.arcsin(min(1.0, resid.max(initial=0.0))))
    return DirectVerdict(rank == k, margin, rank, k, angle, escape)


@dataclass(frozen=True)
class NormalFormVerdict:
    transversal: bool
    semisimple_zero: bool
    nondegenerate: bool
    C_onto_kernel: bool
    k_spanned: bool
    Dbar_surjective: bool | None
    kernel_dim: int


def check_transversal_normalform(blocks: NormalFormBlocks, fingerprint: TypeFingerprint | None = None,
                                 tol: float = TAU_RANK) -> NormalFormVerdict:
    """The three-condition test on the normal-form blocks."""
    L, C, Cs, D = blocks.dX_red, blocks.C, blocks.Cstar, blocks.D
    m, r = blocks.m, blocks.r
    k = Subspace(m, blocks.k_basis)
    z = Subspace(m, blocks.z_basis)
    if fingerprint is not None and (k.dim, z.dim) != (fingerprint.dim_k, fingerprint.dim_z):
        raise ValueError(f"blocks carry dim k = {k.dim}, dim z = {z.dim}; fingerprint says "
                         f"{fingerprint.dim_k}, {fingerprint.dim_z}")
    rank_L = numerical_rank(L, tol) if r else 0
    nondegenerate = rank_L == r
    semisimple = nondegenerate or rank_L == numerical_rank(L @ L, tol)
    kerL = Subspace(r, null_space(L, tol)) if r else Subspace.zero(0)

    # condition 2: C(z*) = ker L
    Cz = C @ z.basis if r else np.zeros((0, z.dim))
    image = Subspace.span(Cz, r) if r and z.dim else Subspace.zero(r)
    cond2 = kerL.contains(image) and image.dim == kerL.dim

    # condition 3: C*(ker L) + D(ker C ∩ z*) + z = k
    if r and z.dim:
        ker_C_z = z.basis @ null_space(C @ z.basis, tol)
    else:
        ker_C_z = z.basis
    gens = np.hstack([Cs @ kerL.basis if r else np.zeros((m, 0)), D @ ker_C_z, z.basis])
    spanned = Subspace.span(gens, m) if gens.size else Subspace.zero(m)
    cond3 = k.contains(spanned) and spanned.dim == k.dim

    dbar = None
    if nondegenerate:
        l_basis = blocks.l_basis
        dbar_map = l_basis.T @ D @ z.basis
        dbar = numerical_rank(dbar_map, tol) == l_basis.shape[1] if l_basis.shape[1] else True
    verdict = semisimple and cond2 and cond3
    return NormalFormVerdict(verdict, semisimple, nondegenerate, cond2, cond3, dbar, kerL.dim)


def necessary_inequality(fp: TypeFingerprint) -> bool:
    """2 dim z >= dim k, required of every transversal RE."""
    return 2 * fp.dim_z >= fp.dim_k


def _require_transversal(sys, re):
    v = check_transversal_direct(sys, re)
    if not v.transversal:
        raise NotTransversalError(f"RE is not transversal (margin {v.margin:.3e})")


# ---------------------------------------------------------------------------
# tangent space of the fixed-type RE set

def _tangent_coordinates(blocks: NormalFormBlocks, tol: float = TAU_RANK) -> np.ndarray:
    """Frame coordinates (xi0, w, mu0, xi1) spanning the tangent space."""
    frame = blocks.frame
    m, r, _, s = frame.dims
    z = Subspace(m, blocks.z_basis)
    kerL = null_space(blocks.dX_red, tol) if r else np.zeros((0, 0))
    if r and z.dim:
        mu0 = z.basis @ null_space(blocks.C @ z.basis, tol)
    else:
        mu0 = z.basis
    # constraint: C* w + D mu0 has no component outside z
    zperp = Subspace(m, z.basis).perp() if z.dim else Subspace.full(m)
    cons = zperp.basis.T @ np.hstack([blocks.Cstar @ kerL if r else np.zeros((m, 0)), blocks.D @ mu0])
    nw, nm = kerL.shape[1] if r else 0, mu0.shape[1]
    coeff = null_space(cons, tol) if cons.size else np.eye(nw + nm)
    wm = np.zeros((r + m, coeff.shape[1]))
    if r:
        wm[:r] = kerL @ coeff[:nw]
    wm[r:] = mu0 @ coeff[nw:]
    total = m + r + m + s
    cols = []
    for i in range(m):
        e = np.zeros(total)
        e[i] = 1.0
        cols.append(e)
    for j in range(wm.shape[1]):
        e = np.zeros(total)
        e[m: m + r + m] = wm[:, j]
        cols.append(e)
    for i in range(s):
        e = np.zeros(total)
        e[m + r + m + i] = 1.0
        cols.append(e)
    return np.column_stack(cols) if cols else np.zeros((total, 0))


def tangent_space_E(sys: CotangentGroupSystem, re: RelativeEquilibrium,
                    blocks: NormalFormBlocks | None = None, check: bool = True) -> Subspace:
    """Tangent space at p_e of the set of relative equilibria of the same type."""
    re = _recentered(sys, re)
    if check:
        _require_transversal(sys, re)
    if blocks is None:
        blocks = normal_form_blocks(sys, re)
    coords = _tangent_coordinates(blocks)
    return Subspace.span(blocks.frame.matrix @ coords, sys.phase_dim)


def tangent_frame_coordinates(sys: CotangentGroupSystem, re: RelativeEquilibrium,
                              blocks: NormalFormBlocks | None = None) -> np.ndarray:
    re = _recentered(sys, re)
    if blocks is None:
        blocks = normal_form_blocks(sys, re)
    return _tangent_coordinates(blocks)


def generator_variation(blocks: NormalFormBlocks, coords) -> np.ndarray:
    """Generator change eta for a tangent vector given in frame coordinates.

    eta0 = C* w + D mu0 - ad_xi xi0 on g_mu and eta1 = -ad_xi xi1 on the
    complement; returned as an element of g.
    """
    frame = blocks.frame
    coords = np.asarray(coords, dtype=float)
    s0, s1, s2, s3 = frame.slices()
    eta0 = blocks.Cstar @ coords[s1] + blocks.D @ coords[s2] - blocks.R @ coords[s0]
    eta1 = -blocks.R_perp @ coords[s3]
    return frame.b_mu @ eta0 + frame.b_perp @ eta1


def graph_residual(sys: CotangentGroupSystem, re: RelativeEquilibrium, blocks: NormalFormBlocks,
                   coords) -> float:
    """|A v - eta.p_e| for v = F coords and eta from :func:`generator_variation`."""
    re = _recentered(sys, re)
    v = blocks.frame.matrix @ coords
    eta = generator_variation(blocks, coords)
    A = sys.linearization_body(re.point, re.generator)
    return float(np.linalg.norm(A @ v - sys.generator_body(re.point) @ eta))


@dataclass(frozen=True)
class SymplecticityRecord:
    measured_rank: int
    dim: int
    is_symplectic: bool
    predicted: bool
    nondegenerate: bool
    maximal_torus: bool

    @property
    def agree(self) -> bool:
        return self.is_symplectic == self.predicted


def symplecticity_check(sys: CotangentGroupSystem, re: RelativeEquilibrium,
                        blocks: NormalFormBlocks | None = None, tol: float = TAU_RANK) -> SymplecticityRecord:
    re = _recentered(sys, re)
    _require_transversal(sys, re)
    if blocks is None:
        blocks = normal_form_blocks(sys, re)
    T = tangent_space_E(sys, re, blocks, check=False)
    W = sys.omega_body(re.point)
    restricted = T.basis.T @ W @ T.basis
    rank = numerical_rank(restricted, tol) if T.dim else 0
    g = sys.algebra
    gm = stabilizer(g, re.momentum, dual=True)
    from .lie import derived_subalgebra

    abelian = derived_subalgebra(g, gm).dim == 0
    torus = gm.dim == g.rank and abelian
    nondeg = blocks.r == 0 or numerical_rank(blocks.dX_red, tol) == blocks.r
    return SymplecticityRecord(rank, T.dim, rank == T.dim, nondeg and torus, nondeg, torus)


# ---------------------------------------------------------------------------
# singularity type

_NAMED = {(3, 1): "so(3)", (6, 2): "so(4)", (8, 2): "su(3)"}


@dataclass(frozen=True)
class SingularityModel:
    dim_l: int
    rank_l: int
    smooth: bool
    cone_dim: int
    model: str
    descriptor: str


def singularity_model(fp: TypeFingerprint) -> SingularityModel:
    """Local model (l* + l)^c transverse to the stratum, l = k / z."""
    dim_l = fp.dim_k - fp.dim_z
    if dim_l == 0:
        return SingularityModel(0, 0, True, 0, "point", "smooth point")
    rank_l = fp.rank_k - fp.dim_z
    cone = dim_l + rank_l
    name = _NAMED.get((dim_l, rank_l), f"l (dim {dim_l}, rank {rank_l})")
    return SingularityModel(dim_l, rank_l, False, cone, f"({name}*+{name})^c",
                            f"commuting pairs of {name}, local cone dimension {cone}")


def quotient_branch_dim(sys: CotangentGroupSystem, re: RelativeEquilibrium) -> int:
    """Dimension of the RE set of fixed type modulo group orbits."""
    re = _recentered(sys, re)
    V, _ = solution_tangent(sys, re)
    orbit = numerical_rank(sys.generator_body(re.point), TAU_RANK)
    span = Subspace.span(np.hstack([V, sys.generator_body(re.point)]), sys.phase_dim)
    return span.dim - orbit


def secant_angle(tangent: Subspace, secants: np.ndarray) -> float:
    """Largest principal angle between a tangent space and the span of secants."""
    S = Subspace.span(secants, tangent.ambient_dim, tol=1e-6)
    ang = principal_angles(tangent, S)
    if S.dim != tangent.dim:
        return float(np.pi / 2)
    return float(ang.max(initial=0.0))
