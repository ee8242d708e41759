"""Numerical thresholds shared across the package.

All rank decisions use one relative SVD threshold so that verdicts computed
in different modules stay coherent.
"""

from dataclasses import dataclass, fields, replace

TAU_ALG = 1e-10     # algebra identities (Jacobi, invariance, closure)
TAU_SUB = 1e-9      # subspace orthonormality / containment residuals
TAU_RANK = 1e-8     # relative singular-value cutoff for numerical rank
TAU_PAIR = 1e-9     # commuting-pair membership, scaled by 1 + |mu||xi|
TAU_SYS = 1e-8      # system identities (omega-flat, equivariance)
TAU_RE = 1e-10      # relative-equilibrium residual, scaled by 1 + |X_H|
TAU_NF = 1e-8       # normal-form block residuals


@dataclass(frozen=True)
class Tolerances:
    alg: float = TAU_ALG
    sub: float = TAU_SUB
    rank: float = TAU_RANK
    pair: float = TAU_PAIR
    sys: float = TAU_SYS
    re: float = TAU_RE
    nf: float = TAU_NF

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not value > 0:
                raise ValueError(f"tolerance {f.name!r} must be positive, got {value!r}")

    def updated(self, **overrides) -> "Tolerances":
        return replace(self, **overrides)


DEFAULT = Tolerances()
