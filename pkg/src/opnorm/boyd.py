"""Fixed-point power iteration for q -> p norms of nonnegative matrices.

For ``1 < p <= q`` the map

    (S x)_i = ( sum_k a_ki (A_k x)^(p-1) )^(1/(q-1))

has a unique positive fixed direction on strictly positive matrices, and
that direction maximizes ``||Ax||_p / ||x||_q``. For any positive unit
vector the potentials ``m = min_i (Sx)_i/x_i`` and ``M = max_i (Sx)_i/x_i``
bracket the norm:

    m^((q-1)/p) <= ||A||_{q->p} <= M^((q-1)/p)

so every iterate carries a certificate, and the iteration stops once
``M/m <= 1 + tol``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .core import (
    DEFAULT_DELTA,
    CertifiedBounds,
    PositiveMatrix,
    UnitVector,
    as_matrix,
    as_params,
    lp_norm,
    ones_norm,
    positivity_shift,
    ratio_f,
)
from .errors import InvalidInputError

DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 100_000


def _base(A) -> np.ndarray:
    return A.base if isinstance(A, PositiveMatrix) else np.asarray(A, dtype=float)


def apply_S(A, x, params) -> np.ndarray:
    """One application of the fixed-point map.

    Works for rectangular ``A`` (m x n); ``x`` and the result live in R^n.
    Homogeneous of degree ``(p-1)/(q-1)``.
    """
    params = as_params(params)
    B = _base(A)
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise InvalidInputError("S is only defined on strictly positive vectors")
    return (B.T @ (B @ x) ** (params.p - 1.0)) ** (1.0 / (params.q - 1.0))


class Potentials(NamedTuple):
    m: float
    M: float
    lower: float
    upper: float


def potentials(A, x, params, Sx=None) -> Potentials:
    """Potentials ``m(x), M(x)`` and the norm bounds they certify.

    ``x`` must be strictly positive with unit q-norm; the bounds are not
    scale invariant unless ``p == q``.
    """
    params = as_params(params)
    x = np.asarray(x, dtype=float)
    if abs(lp_norm(x, params.q) - 1.0) > 1e-9:
        raise InvalidInputError("potentials need a unit q-norm vector")
    if Sx is None:
        Sx = apply_S(A, x, params)
    r = Sx / x
    m, M = float(r.min()), float(r.max())
    e = (params.q - 1.0) / params.p
    return Potentials(m, M, m**e, M**e)


@dataclass(frozen=True)
class IterationState:
    x: np.ndarray
    m_pot: float
    M_pot: float
    f_val: float
    iter: int


@dataclass
class ConvergenceReport:
    """Outcome of :func:`compute_norm`.

    ``bounds`` hold for the matrix that was passed in; ``shifted_bounds``
    are the raw sandwich bounds for the max-scaled positive matrix the
    iteration actually ran on. ``estimate`` is the objective at the final
    iterate evaluated on the input matrix, hence also ``bounds.lower``.
    """

    bounds: CertifiedBounds
    shifted_bounds: CertifiedBounds
    estimate: float
    maximizer: UnitVector
    iterations: int
    converged: bool
    potential_ratio: float
    positive: PositiveMatrix
    history: list[IterationState] | None = field(default=None, repr=False)


def _start_vector(n, q, x0):
    if x0 is None:
        x = np.ones(n)
    else:
        x = np.asarray(x0, dtype=float).ravel()
        if x.shape != (n,):
            raise InvalidInputError(f"start vector has length {x.size}, expected {n}")
        if np.any(~(x > 0)):
            raise InvalidInputError("start vector must be strictly positive")
    return x / lp_norm(x, q)


def compute_norm(
    A,
    params,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    delta: float = DEFAULT_DELTA,
    x0=None,
    record: bool = False,
) -> ConvergenceReport:
    """Compute ``||A||_{q->p}`` for a nonnegative matrix ``A``.

    ``A`` is max-scaled and floored by :func:`positivity_shift` (a
    :class:`PositiveMatrix` is used as is), then ``x <- Sx / ||Sx||_q`` is
    iterated from the uniform vector (or ``x0``) until ``M/m <= 1 + tol`` or
    ``max_iter`` updates. With ``record=True`` every visited iterate is kept
    in ``report.history``.
    """
    params = as_params(params).require_iteration_range()
    if isinstance(A, PositiveMatrix):
        pos = A
        original = pos.base * pos.original_max
    else:
        original = as_matrix(A)
        pos = positivity_shift(original, delta)
    if not tol > 0:
        raise InvalidInputError("tol must be positive")
    B = pos.base
    p, q = params.p, params.q
    e = (q - 1.0) / p
    x = _start_vector(B.shape[1], q, x0)

    history = [] if record else None
    converged = False
    it = 0
    while True:
        Bx = B @ x
        Sx = (B.T @ Bx ** (p - 1.0)) ** (1.0 / (q - 1.0))
        r = Sx / x
        m, M = float(r.min()), float(r.max())
        if record:
            history.append(IterationState(x, m, M, lp_norm(Bx, p), it))
        if M <= (1.0 + tol) * m:
            converged = True
            break
        if it >= max_iter:
            break
        x = Sx / lp_norm(Sx, q)
        it += 1

    shifted = CertifiedBounds(m**e, M**e, "sandwich")
    estimate = ratio_f(original, x, params)
    # A/max <= B entrywise and the maximizer is nonnegative, so the sandwich
    # upper bound transfers; max() only absorbs last-ulp rounding.
    upper = max(pos.original_max * shifted.upper, estimate)
    return ConvergenceReport(
        bounds=CertifiedBounds(estimate, upper, "sandwich"),
        shifted_bounds=shifted,
        estimate=estimate,
        maximizer=UnitVector.normalize(x, q),
        iterations=it,
        converged=converged,
        potential_ratio=M / m,
        positive=pos,
        history=history,
    )


def shift_correction(pos: PositiveMatrix, params) -> float:
    """Largest possible gap ``||B|| - ||A/max||`` caused by the floor."""
    rows, cols = pos.shape
    return ones_norm(rows, cols, pos.eps, params)
