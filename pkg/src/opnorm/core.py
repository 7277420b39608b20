"""Shared numerics: exponent pairs, l_p norms, the norm ratio, duality and
the positivity shift used before the fixed-point iteration."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError

INF = math.inf

DEFAULT_DELTA = 1e-6


def dual_exponent(p: float) -> float:
    """Return p' with 1/p + 1/p' = 1 (1 <-> inf)."""
    if p == 1:
        return INF
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


@dataclass(frozen=True)
class NormParams:
    """Exponent pair for the q -> p operator norm.

    ``p`` is the exponent of the target space (applied to ``Ax``) and ``q``
    the exponent of the source space (applied to ``x``). Any pair with
    ``p, q >= 1`` (``inf`` allowed) can be constructed; the fixed-point
    iteration additionally needs ``1 < p <= q < inf``, see
    :meth:`require_iteration_range`.
    """

    p: float
    q: float
    p_dual: float = field(init=False)
    q_dual: float = field(init=False)

    def __post_init__(self):
        for name in ("p", "q"):
            v = float(getattr(self, name))
            if math.isnan(v) or v < 1:
                raise InvalidInputError(f"exponent {name}={v} must be >= 1")
            object.__setattr__(self, name, v)
        object.__setattr__(self, "p_dual", dual_exponent(self.p))
        object.__setattr__(self, "q_dual", dual_exponent(self.q))

    @property
    def iteration_ok(self) -> bool:
        return 1 < self.p <= self.q < INF

    def require_iteration_range(self):
        if not self.iteration_ok:
            raise InvalidInputError(
                f"the fixed-point iteration needs 1 < p <= q < inf, got p={self.p}, q={self.q}; "
                "use the oracle for other exponent pairs"
            )
        return self


def as_params(params, q=None) -> NormParams:
    if isinstance(params, NormParams):
        return params
    if isinstance(params, (tuple, list)):
        return NormParams(*params)
    if q is None:
        return NormParams(params, params)
    return NormParams(params, q)


def as_matrix(A) -> np.ndarray:
    """Validate and return ``A`` as a finite 2-D float array."""
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A[None, :]
    if A.ndim != 2 or A.size == 0:
        raise InvalidInputError(f"expected a non-empty 2-D matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidInputError("matrix has non-finite entries")
    return A


def lp_norm(v, p: float) -> float:
    """l_p norm of ``v``, computed with the largest magnitude factored out.

    Factoring keeps ``p`` up to a few hundred free of overflow/underflow.
    """
    v = np.abs(np.asarray(v, dtype=float)).ravel()
    if not np.all(np.isfinite(v)):
        raise InvalidInputError("vector has non-finite entries")
    if p < 1:
        raise InvalidInputError(f"p={p} must be >= 1")
    if v.size == 0:
        return 0.0
    vmax = v.max()
    if vmax == 0.0:
        return 0.0
    if math.isinf(p):
        return float(vmax)
    return float(vmax * np.sum((v / vmax) ** p) ** (1.0 / p))


def ratio_f(A, x, params) -> float:
    """The objective ``||Ax||_p / ||x||_q``."""
    params = as_params(params)
    A = np.asarray(A, dtype=float)
    x = np.asarray(x, dtype=float)
    den = lp_norm(x, params.q)
    if den == 0.0:
        raise InvalidInputError("ratio undefined at the zero vector")
    return lp_norm(A @ x, params.p) / den


def dualize(A, params):
    """Return ``(A.T, params')`` with ``||A||_{q->p} = ||A.T||_{p'->q'}``.

    In the returned pair the target exponent is ``q'`` and the source
    exponent ``p'``, so ``p <= q`` is preserved.
    """
    params = as_params(params)
    if math.isinf(params.p) or math.isinf(params.q) or params.p == 1 or params.q == 1:
        raise InvalidInputError("dualize needs finite p, q > 1")
    A = as_matrix(A)
    return A.T.copy(), NormParams(params.q_dual, params.p_dual)


def ones_norm(rows: int, cols: int, eps: float, params) -> float:
    """Exact ``||eps*J||_{q->p}`` for the rows x cols all-eps matrix.

    ``J x = (sum x) 1`` so the norm is ``eps * rows^(1/p) * cols^(1-1/q)``.
    """
    params = as_params(params)
    return eps * rows ** (1.0 / params.p) * cols ** (1.0 - 1.0 / params.q)


@dataclass(frozen=True)
class PositiveMatrix:
    """Max-scaled matrix with every entry in ``[1/N, 1]``.

    ``base = max(A / original_max, eps)`` entrywise; ``eps`` is the floor
    that was applied and ``shift_applied`` records whether it changed any
    entry.
    """

    base: np.ndarray
    N: float
    shift_applied: bool
    original_max: float
    eps: float

    @property
    def shape(self):
        return self.base.shape


def positivity_shift(A, delta: float = DEFAULT_DELTA) -> PositiveMatrix:
    """Scale ``A`` so its largest entry is 1 and lift small entries to ``eps``.

    ``eps = delta / (rows + cols)^2``. The lifted matrix ``B`` satisfies
    ``A/max <= B <= A/max + eps*J`` entrywise, so its q->p norm exceeds that
    of ``A/max`` by at most ``ones_norm(rows, cols, eps)``.
    """
    A = as_matrix(A)
    if np.any(A < 0):
        raise InvalidInputError("positivity_shift needs a nonnegative matrix")
    amax = float(A.max())
    if amax == 0.0:
        raise InvalidInputError("positivity_shift needs a matrix that is not all zero")
    if not delta > 0:
        raise InvalidInputError(f"delta={delta} must be positive")
    rows, cols = A.shape
    eps = delta / (rows + cols) ** 2
    scaled = A / amax
    base = np.maximum(scaled, eps)
    base.flags.writeable = False
    return PositiveMatrix(
        base=base,
        N=float(1.0 / base.min()),
        shift_applied=bool(np.any(scaled < eps)),
        original_max=amax,
        eps=eps,
    )


@dataclass(frozen=True)
class UnitVector:
    """Nonnegative vector with unit ``norm_exponent``-norm."""

    coords: np.ndarray
    norm_exponent: float

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        if np.any(c < 0):
            raise InvalidInputError("unit vector coordinates must be nonnegative")
        if abs(lp_norm(c, self.norm_exponent) - 1.0) > 1e-12:
            raise InvalidInputError("vector is not normalized")
        object.__setattr__(self, "coords", c)

    @classmethod
    def normalize(cls, v, exponent: float) -> "UnitVector":
        v = np.asarray(v, dtype=float)
        return cls(v / lp_norm(v, exponent), exponent)


@dataclass(frozen=True)
class CertifiedBounds:
    """Two-sided bounds on a norm and where they came from.

    ``method`` is one of ``"sandwich"``, ``"interpolation"`` or ``"oracle"``.
    """

    lower: float
    upper: float
    method: str

    def contains(self, value: float, slack: float = 0.0) -> bool:
        return self.lower - slack <= value <= self.upper + slack

    def as_dict(self):
        return {"lower": self.lower, "upper": self.upper, "method": self.method}
