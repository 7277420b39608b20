"""First- and second-order checks on ``f(x) = ||Ax||_p / ||x||_q``."""

from __future__ import annotations

from dataclasses import dataclass

import mpmath
import numpy as np

from .core import PositiveMatrix, as_params, lp_norm
from .errors import InvalidInputError, PreconditionError

FD_STEP = np.finfo(float).eps ** (1.0 / 3.0)


def _require_positive(x):
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise InvalidInputError("x must be strictly positive")
    return x


def gradient_f(A, x, params) -> np.ndarray:
    """Analytic gradient of ``f`` at a positive ``x``.

    df/dx_i = f(x) * ( sum_k (A_k x)^(p-1) a_ki / ||Ax||_p^p
                       - x_i^(q-1) / ||x||_q^q )
    """
    params = as_params(params)
    p, q = params.p, params.q
    A = np.asarray(A, dtype=float)
    x = _require_positive(x)
    Ax = A @ x
    nA = np.sum(np.abs(Ax) ** p)
    nx = np.sum(x**q)
    f = nA ** (1.0 / p) / nx ** (1.0 / q)
    return f * (A.T @ (np.sign(Ax) * np.abs(Ax) ** (p - 1.0)) / nA - x ** (q - 1.0) / nx)


def fd_gradient(A, x, params, h=None) -> np.ndarray:
    """Central-difference gradient; independent check on :func:`gradient_f`."""
    params = as_params(params)
    A = np.asarray(A, dtype=float)
    x = np.asarray(x, dtype=float)

    def f(v):
        return lp_norm(A @ v, params.p) / lp_norm(v, params.q)

    g = np.empty_like(x)
    for i in range(x.size):
        step = (FD_STEP if h is None else h) * max(abs(x[i]), 1.0)
        e = np.zeros_like(x)
        e[i] = step
        g[i] = (f(x + e) - f(x - e)) / (2.0 * step)
    return g


def critical_residual(A, x, params) -> float:
    """Max over i of ``|x_i^(q-1) - (||x||_q^q/||Ax||_p^p) sum_k a_ki (A_k x)^(p-1)|``
    with ``x`` first scaled to unit q-norm."""
    params = as_params(params)
    p, q = params.p, params.q
    A = np.asarray(A, dtype=float)
    x = _require_positive(x)
    x = x / lp_norm(x, q)
    Ax = A @ x
    g = A.T @ (Ax ** (p - 1.0))
    return float(np.max(np.abs(x ** (q - 1.0) - g / np.sum(Ax**p))))


def _normalized_critical(A, z, params, tol):
    params = as_params(params)
    A = np.asarray(A, dtype=float)
    z = _require_positive(z)
    z = z / lp_norm(z, params.q)
    res = critical_residual(A, z, params)
    if res > tol:
        raise PreconditionError(f"z is not a critical point (residual {res:.3e} > {tol:.1e})")
    s = lp_norm(A @ z, params.p)
    return A / s, z, s


def hessian_terms(A, z, eps, params, tol=1e-6):
    """Split ``eps^T H eps`` at a critical point into its two parts.

    With ``||z||_q = ||Az||_p = 1`` (``A`` is rescaled internally) and
    ``w = Az``::

        T1 = (p-1) * ( sum_k w_k^(p-2) (A_k eps)^2 - sum_i z_i^(q-2) eps_i^2 )
        T2 = (q-p) * ( (sum_i z_i^(q-1) eps_i)^2  - sum_i z_i^(q-2) eps_i^2 )

    Both are multiplied back by ``||Az||_p`` so the sum is the Hessian of
    ``f`` for the original ``A``. ``T2 <= 0`` whenever ``q >= p``.
    """
    params = as_params(params)
    p, q = params.p, params.q
    A, z, s = _normalized_critical(A, z, params, tol)
    eps = np.asarray(eps, dtype=float)
    w = A @ z
    diag = np.sum(z ** (q - 2.0) * eps**2)
    t1 = (p - 1.0) * (np.sum(w ** (p - 2.0) * (A @ eps) ** 2) - diag)
    t2 = (q - p) * (np.dot(z ** (q - 1.0), eps) ** 2 - diag)
    return float(s * t1), float(s * t2)


def hessian_quadform(A, z, eps, params, tol=1e-6) -> float:
    """``eps^T H_f eps`` at a critical point ``z`` (unit q-norm), matrix-free.

    Raises :class:`PreconditionError` when the criticality residual of ``z``
    exceeds ``tol``.
    """
    t1, t2 = hessian_terms(A, z, eps, params, tol)
    return t1 + t2


def fd_hessian_quadform(A, z, eps, params, h=1e-4) -> float:
    """Second difference of ``f`` along ``eps`` at the unit-q ``z``."""
    params = as_params(params)
    A = np.asarray(A, dtype=float)
    z = np.asarray(z, dtype=float)
    z = z / lp_norm(z, params.q)
    eps = np.asarray(eps, dtype=float)

    def f(v):
        return lp_norm(A @ v, params.p) / lp_norm(v, params.q)

    return (f(z + h * eps) - 2.0 * f(z) + f(z - h * eps)) / h**2


@dataclass(frozen=True)
class CriticalityReport:
    grad_norm: float
    residual: float
    hessian_max_quadform: float


def criticality(A, x, params, directions: int = 100, seed: int = 0, tol=1e-6) -> CriticalityReport:
    """Gradient size, critical residual and the largest sampled Hessian
    quadratic form over random unit directions."""
    params = as_params(params)
    A = np.asarray(A, dtype=float)
    x = _require_positive(x)
    x = x / lp_norm(x, params.q)
    rng = np.random.default_rng(seed)
    worst = -np.inf
    for _ in range(directions):
        d = rng.standard_normal(x.size)
        worst = max(worst, hessian_quadform(A, x, d / np.linalg.norm(d), params, tol))
    return CriticalityReport(
        grad_norm=float(np.max(np.abs(gradient_f(A, x, params)))),
        residual=critical_residual(A, x, params),
        hessian_max_quadform=float(worst),
    )


@dataclass(frozen=True)
class StabilityReport:
    delta: float
    trials: int
    min_gap: float
    max_gap: float
    bound: float
    all_strict: bool
    bound_held: bool


def _mp_ratio(A, x, p):
    Ax = [mpmath.fsum(a * v for a, v in zip(row, x)) for row in A]
    num = mpmath.fsum(abs(v) ** p for v in Ax) ** (1 / p)
    return num / mpmath.fsum(abs(v) ** p for v in x) ** (1 / p)


def _mp_normalize(v, p):
    s = mpmath.fsum(abs(c) ** p for c in v) ** (1 / p)
    return [c / s for c in v]


def stability_probe(A, xstar, delta: float, trials: int, params, seed: int = 0, dps: int = 60) -> StabilityReport:
    """Sample unit points at l1 distance ``delta`` from ``xstar`` and compare
    ``f`` there with ``f(xstar)``.

    Gaps ``1 - f(x)/f(xstar)`` are computed in ``dps``-digit arithmetic so
    that tiny ``delta`` (quadratic gaps far below double precision) can be
    resolved. ``bound`` is ``delta^2 / (N n)^6``; ``bound_held`` reports
    whether every sampled gap reached it. Only ``p == q`` is supported.
    """
    params = as_params(params)
    if params.p != params.q:
        raise InvalidInputError("stability_probe is defined for p == q only")
    p = params.p
    if isinstance(A, PositiveMatrix):
        base = A.base
        N = A.N
    else:
        base = np.asarray(A, dtype=float)
        if np.any(base <= 0):
            raise InvalidInputError("stability_probe needs a strictly positive matrix")
        N = float(base.max() / base.min())
    xs = np.asarray(getattr(xstar, "coords", xstar), dtype=float)
    n = max(base.shape)
    bound = delta**2 / (N * n) ** 6

    with mpmath.workdps(dps):
        P = mpmath.mpf(p)
        Am = [[mpmath.mpf(float(a)) for a in row] for row in base]
        xm = _mp_normalize([mpmath.mpf(float(v)) for v in xs], P)
        f0 = _mp_ratio(Am, xm, P)
        gaps = []
        for t in range(trials):
            if delta == 0:
                gaps.append(mpmath.mpf(0))
                continue
            rng = np.random.default_rng([seed, t])
            u = [mpmath.mpf(float(c)) for c in rng.standard_normal(xs.size)]

            def point(s):
                return _mp_normalize([abs(a + s * b) for a, b in zip(xm, u)], P)

            def dist(s):
                return mpmath.fsum(abs(a - b) for a, b in zip(point(s), xm))

            hi = mpmath.mpf(delta)
            while dist(hi) < delta and hi < 1e6:
                hi *= 2
            if dist(hi) < delta:
                continue
            lo = mpmath.mpf(0)
            for _ in range(200):
                mid = (lo + hi) / 2
                if dist(mid) < delta:
                    lo = mid
                else:
                    hi = mid
            gaps.append(1 - _mp_ratio(Am, point(hi), P) / f0)
        if not gaps:
            return StabilityReport(delta, 0, float("nan"), float("nan"), bound, False, False)
        return StabilityReport(
            delta=delta,
            trials=len(gaps),
            min_gap=float(min(gaps)),
            max_gap=float(max(gaps)),
            bound=bound,
            all_strict=bool(delta > 0 and all(g > 0 for g in gaps)),
            bound_held=all(g >= bound for g in gaps),
        )
