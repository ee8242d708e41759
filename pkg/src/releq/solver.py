"""Relative equilibria as roots of psi(p, xi) = X_H(p) - xi.p."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import expm

from .commuting import CommutingPair, TypeFingerprint, classify_pair, verify_commuting
from .subspace import null_space, numerical_rank
from .systems import RECENTER_RADIUS, CotangentGroupSystem, GroupBase, PhasePoint
from .tolerances import TAU_RANK, TAU_RE


class ConvergenceError(RuntimeError):
    """Gauss-Newton did not reach the residual tolerance."""

    def __init__(self, message, residual=None, point=None, generator=None):
        super().__init__(message)
        self.residual = residual
        self.point = point
        self.generator = generator


@dataclass(frozen=True)
class SolveOptions:
    max_iter: int = 60
    rcond: float = 1e-8
    tol: float = TAU_RE
    max_backtracks: int = 20
    armijo: float = 1e-4
    recenter: bool = True
    fix_momentum_norm: bool = True
    polish: int = 2


@dataclass(frozen=True, eq=False)
class RelativeEquilibrium:
    point: PhasePoint
    generator: np.ndarray
    momentum: np.ndarray
    fingerprint: TypeFingerprint
    residual_norm: float
    iterations: int = 0

    def pair(self, sys: CotangentGroupSystem) -> CommutingPair:
        return CommutingPair(self.momentum, self.generator, sys.algebra)


def residual(sys: CotangentGroupSystem, p: PhasePoint, xi) -> tuple[np.ndarray, np.ndarray]:
    """(psi, psi_o) in chart coordinates: X_H - xi.p and dH - d<J, xi>."""
    ev = sys.evaluate(p)
    xi = sys.algebra._vec(xi)
    psi = ev.X_H - ev.generator @ xi
    psi_o = ev.dH - xi @ ev.dJ
    return psi, psi_o


def _field(sys, p, xi):
    return sys.X_body(p) - sys.generator_body(p) @ xi


def residual_tolerance(sys: CotangentGroupSystem, p: PhasePoint, tol: float = TAU_RE) -> float:
    return tol * (1.0 + float(np.linalg.norm(sys.X_body(p))))


def _recenter_if_needed(sys, p: PhasePoint, force: bool = False) -> PhasePoint:
    if force or np.linalg.norm(p.q) > RECENTER_RADIUS:
        return p.recentered(sys.algebra)
    return p


def _finalize(sys, p, xi, iterations, tol) -> RelativeEquilibrium:
    r = float(np.linalg.norm(_field(sys, p, xi)))
    J = sys.J(p)
    pair = CommutingPair(J, xi, sys.algebra)
    if not verify_commuting(pair):
        raise ConvergenceError(f"momentum and generator do not commute (defect {pair.defect:.3e})",
                               r, p, xi)
    return RelativeEquilibrium(p, xi.copy(), J, classify_pair(pair), r, iterations)


def solve_re(sys: CotangentGroupSystem, guess_point: PhasePoint, guess_generator,
             opts: SolveOptions | None = None) -> RelativeEquilibrium:
    """Damped truncated-SVD Gauss-Newton on (p, xi) -> psi(p, xi).

    The unknowns are the chart coordinates of p and the generator.  Orbit
    directions make the Jacobian rank deficient; the pseudo-inverse step
    ignores them.  Relative equilibria of quadratic Hamiltonians come in
    rays, and a minimum-norm step slides down the ray towards zero momentum,
    so by default the invariant norm |mu_b|_B of the guess is held fixed by
    an extra residual row.
    """
    opts = opts or SolveOptions()
    g = sys.algebra
    n = g.dim
    B = g.inner_product
    p = guess_point
    sys._check_chart(p)
    xi = g._vec(guess_generator).copy()
    level = float(np.sqrt(p.mu_b @ B @ p.mu_b))
    constrained = opts.fix_momentum_norm and level > 0

    def residuals(point, gen):
        F = _field(sys, point, gen)
        if constrained:
            F = np.append(F, np.sqrt(point.mu_b @ B @ point.mu_b) - level)
        return F

    def gn_step(point, gen, F, f):
        Phi = sys.chart_jacobian(point)
        A = sys.linearization_body(point, gen)
        jac = np.hstack([A @ Phi, -sys.generator_body(point)])
        if constrained:
            row = np.zeros(3 * n)
            row[n: 2 * n] = B @ point.mu_b / np.sqrt(point.mu_b @ B @ point.mu_b)
            jac = np.vstack([jac, row])
        step = -np.linalg.pinv(jac, rcond=opts.rcond) @ F
        t = 1.0
        for _ in range(opts.max_backtracks + 1):
            trial = point.with_coords(point.coords + t * step[: 2 * n])
            gen_trial = gen + t * step[2 * n:]
            F_trial = residuals(trial, gen_trial)
            f_trial = float(F_trial @ F_trial)
            if f_trial <= (1.0 - 2.0 * opts.armijo * t) * f:
                return trial, gen_trial, F_trial, f_trial
            t *= 0.5
        return None

    F = residuals(p, xi)
    f = float(F @ F)
    for it in range(opts.max_iter + 1):
        if np.sqrt(f) < residual_tolerance(sys, p, opts.tol):
            # a few more full steps take the residual to round-off, which the
            # normal-form blocks downstream are sensitive to
            for _ in range(opts.polish):
                if f == 0.0:
                    break
                out = gn_step(p, xi, F, f)
                if out is None or not out[3] < f:
                    break
                p, xi, F, f = out
            if opts.recenter:
                p = _recenter_if_needed(sys, p, force=True)
            return _finalize(sys, p, xi, it, opts.tol)
        if it == opts.max_iter:
            break
        out = gn_step(p, xi, F, f)
        if out is None:
            raise ConvergenceError(f"line search failed at iteration {it}, |psi| = {np.sqrt(f):.3e}",
                                   np.sqrt(f), p, xi)
        p, xi, F, f = out
        p = _recenter_if_needed(sys, p)
    raise ConvergenceError(f"no convergence in {opts.max_iter} iterations, |psi| = {np.sqrt(f):.3e}",
                           np.sqrt(f), p, xi)


# ---------------------------------------------------------------------------
# symmetry

def transport_re(sys: CotangentGroupSystem, re: RelativeEquilibrium, x) -> RelativeEquilibrium:
    """Image of an RE under exp(x): point moved, generator and momentum conjugated."""
    g = sys.algebra
    ad = expm(g.ad(g._vec(x)))
    point = sys.act(re.point, x)
    return RelativeEquilibrium(point, ad @ re.generator, np.linalg.solve(ad.T, re.momentum),
                               re.fingerprint, float(np.linalg.norm(_field(sys, point, ad @ re.generator))),
                               re.iterations)


def random_base(sys: CotangentGroupSystem, rng: np.random.Generator, scale: float = 2.0) -> GroupBase:
    return GroupBase.identity(sys.algebra).left_multiplied(sys.algebra, scale * rng.standard_normal(sys.algebra.dim))


def multistart(sys: CotangentGroupSystem, n: int, seed: int, opts: SolveOptions | None = None,
               momentum_scale: float = 1.0) -> tuple[list[RelativeEquilibrium], int]:
    """Solve from ``n`` random unit-scale momenta at random base points.

    Returns the solutions and the number of failed starts.
    """
    rng = np.random.default_rng(seed)
    found, failures = [], 0
    for _ in range(n):
        base = random_base(sys, rng)
        mu = rng.standard_normal(sys.algebra.dim)
        mu *= momentum_scale / np.linalg.norm(mu)
        p = sys.point(mu, base=base)
        try:
            found.append(solve_re(sys, p, sys.Minv @ mu, opts))
        except ConvergenceError:
            failures += 1
    return found, failures


def re_class_key(re: RelativeEquilibrium, digits: int = 5) -> tuple:
    """Fingerprint plus body-momentum direction up to sign."""
    mu = re.point.mu_b
    norm = np.linalg.norm(mu)
    if norm == 0:
        return (re.fingerprint.as_tuple(), ())
    d = mu / norm
    i = int(np.argmax(np.abs(d)))
    d = d * np.sign(d[i])
    return (re.fingerprint.as_tuple(), tuple(float(v) for v in np.round(d, digits) + 0.0))


def group_classes(res: list[RelativeEquilibrium], digits: int = 5) -> dict:
    classes: dict = {}
    for re in res:
        classes.setdefault(re_class_key(re, digits), []).append(re)
    return dict(sorted(classes.items()))


# ---------------------------------------------------------------------------
# local structure

def admissible_pairs(sys: CotangentGroupSystem, re: RelativeEquilibrium) -> np.ndarray:
    """Basis of (v, eta) with (dJ v, eta) in the tangent of the stratum through (mu_e, xi_e)."""
    from .commuting import stratum_tangent

    p = re.point
    n = sys.algebra.dim
    S = stratum_tangent(re.pair(sys))
    dJ = sys.dJ_body(p)
    lift = np.zeros((2 * n, 3 * n))
    lift[:n, : 2 * n] = dJ
    lift[n:, 2 * n:] = np.eye(n)
    comp = S.perp()
    return null_space(comp.basis.T @ lift, 1e-12)


def solution_tangent(sys: CotangentGroupSystem, re: RelativeEquilibrium) -> tuple[np.ndarray, np.ndarray]:
    """Linearized solution set: (v, eta) admissible with A v = eta.p_e.

    Returns ``(V, E)`` with matching columns, V the phase parts.
    """
    p = re.point
    n = sys.algebra.dim
    basis = admissible_pairs(sys, re)
    A = sys.linearization_body(p, re.generator)
    img = np.hstack([A, -sys.generator_body(p)]) @ basis
    coeffs = null_space(img, TAU_RANK)
    sol = basis @ coeffs
    return sol[: 2 * n], sol[2 * n:]


def manifold_dim(sys: CotangentGroupSystem, re: RelativeEquilibrium, require_transversal: bool = True) -> int:
    """Dimension of the phase projection of the linearized solution set of fixed type."""
    if re.point.q.any():
        re = replace(re, point=re.point.recentered(sys.algebra))
    if require_transversal:
        from .transversality import NotTransversalError, check_transversal_direct

        verdict = check_transversal_direct(sys, re)
        if not verdict.transversal:
            raise NotTransversalError("manifold dimension is only guaranteed at transversal RE")
    V, _ = solution_tangent(sys, re)
    return numerical_rank(V, TAU_RANK)


# ---------------------------------------------------------------------------
# continuation

@dataclass
class Branch:
    points: list = field(default_factory=list)
    event: str = "completed"
    message: str = ""
    step_lengths: list = field(default_factory=list)
    secants: list = field(default_factory=list)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, i):
        return self.points[i]


def continue_branch(sys: CotangentGroupSystem, re: RelativeEquilibrium, direction, steps: int,
                    step_size: float, opts: SolveOptions | None = None) -> Branch:
    """Predictor-corrector along the RE set of fixed type.

    ``direction`` is a body-frame phase vector.  At each point it is projected
    onto the tangent space of the fixed-type RE set and used as predictor; the
    corrector is :func:`solve_re`.  A change of fingerprint ends the branch
    with event ``"fingerprint_change"``.
    """
    from .transversality import tangent_space_E

    opts = replace(opts or SolveOptions(), recenter=False)
    direction = np.asarray(direction, dtype=float)
    current = replace(re, point=re.point.recentered(sys.algebra))
    branch = Branch([current])
    prev = None
    for _ in range(max(0, steps)):
        T = tangent_space_E(sys, current)
        d = T.project(direction if prev is None else prev)
        norm = np.linalg.norm(d)
        if norm < 1e-12:
            branch.event, branch.message = "direction_lost", "direction has no tangent component"
            return branch
        d = d / norm
        if prev is not None and d @ prev < 0:
            d = -d
        guess = current.point.with_coords(current.point.coords + step_size * d)
        try:
            nxt = solve_re(sys, guess, current.generator, opts)
        except ConvergenceError as exc:
            branch.event, branch.message = "corrector_failure", str(exc)
            return branch
        # both points share the chart of ``current``, so the difference is a secant there
        secant = nxt.point.coords - current.point.coords
        branch.step_lengths.append(float(np.linalg.norm(secant)))
        branch.secants.append(secant)
        nxt = replace(nxt, point=nxt.point.recentered(sys.algebra))
        if nxt.fingerprint != current.fingerprint:
            branch.event = "fingerprint_change"
            branch.message = f"{current.fingerprint.as_tuple()} -> {nxt.fingerprint.as_tuple()}"
            return branch
        branch.points.append(nxt)
        prev = d
        current = nxt
    return branch
