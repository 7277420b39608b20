"""Independent ground truth at desk scale.

* :func:`brute_norm` - multistart projected gradient ascent on the q-sphere,
  any sign pattern, any finite exponents (``q = inf`` is routed to the exact
  sign enumeration, ``p = inf`` to the closed form).
* :func:`longest_vector` - exact ``||A||_{inf->p}`` by enumerating signs.
* :func:`interpolation_estimate` - best-of-three lower bound with a
  Riesz-Thorin upper bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import INF, CertifiedBounds, as_matrix, as_params, lp_norm, ratio_f
from .errors import InvalidInputError, SizeError

MAX_SIGN_COLUMNS = 24
DEFAULT_RESTARTS = 32


@dataclass(frozen=True)
class OracleResult:
    value: float
    witness: np.ndarray
    method: str
    exhaustive: bool

    def as_dict(self):
        return {
            "value": self.value,
            "witness": [float(v) for v in self.witness],
            "method": self.method,
            "exhaustive": self.exhaustive,
        }


def _col_lp(Y, p):
    """Column-wise l_p norms with max factoring."""
    Y = np.abs(Y)
    top = Y.max(axis=0)
    safe = np.where(top > 0, top, 1.0)
    if math.isinf(p):
        return top
    return top * np.sum((Y / safe) ** p, axis=0) ** (1.0 / p)


def _batch_value_grad(A, X, p, q):
    AX = A @ X
    num = _col_lp(AX, p)
    den = _col_lp(X, q)
    f = num / den
    sa = np.sign(AX) * (np.abs(AX) / np.where(num > 0, num, 1.0)) ** (p - 1.0)
    sx = np.sign(X) * (np.abs(X) / den) ** (q - 1.0)
    # gradient of ||Ax||_p/||x||_q, written with normalized powers
    G = f * ((A.T @ sa) / np.where(num > 0, num, 1.0) - sx / den)
    return f, G


def _normalize_cols(X, q):
    return X / _col_lp(X, q)


def brute_norm(A, params, restarts: int = DEFAULT_RESTARTS, seed: int = 0, max_iter: int = 5000, starts=None) -> OracleResult:
    """Best value of ``||Ax||_p/||x||_q`` found from ``restarts`` random starts.

    Starts are drawn in the positive orthant for nonnegative ``A`` and with
    random signs otherwise; ``starts`` (columns) are appended when given.
    Each start runs ascent along the gradient with a Barzilai-Borwein step,
    backtracking until the objective does not decrease, and renormalizes
    onto the q-sphere after every step. Deterministic given ``seed``.
    """
    params = as_params(params)
    A = as_matrix(A)
    p, q = params.p, params.q
    if math.isinf(q):
        return longest_vector(A.T, p)
    if math.isinf(p):
        # ||A||_{q->inf} = max_i ||A_i||_{q'}, attained by a Holder vector
        qd = params.q_dual
        i = int(np.argmax([lp_norm(r, qd) for r in A]))
        row = A[i]
        if math.isinf(qd):
            x = np.zeros_like(row)
            x[int(np.argmax(np.abs(row)))] = 1.0
        elif qd == 1:
            x = np.sign(row)
            x[x == 0] = 1.0
        else:
            x = np.sign(row) * np.abs(row) ** (qd - 1.0)
            if not np.any(x):
                x = np.ones_like(row)
        return OracleResult(ratio_f(A, x, params), x / lp_norm(x, q), "closed-form", True)

    n = A.shape[1]
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, restarts))
    if np.all(A >= 0):
        X = np.abs(X)
    if starts is not None:
        X = np.hstack([X, np.asarray(starts, dtype=float).reshape(n, -1)])
    X = _normalize_cols(X, q)
    f, G = _batch_value_grad(A, X, p, q)
    step = np.full(X.shape[1], 1.0) / np.maximum(f, 1e-300)
    active = np.ones(X.shape[1], dtype=bool)
    stall = np.zeros(X.shape[1], dtype=int)

    for _ in range(max_iter):
        if not active.any():
            break
        idx = np.flatnonzero(active)
        Xa, fa, Ga, ta = X[:, idx], f[idx], G[:, idx], step[idx]
        accepted = np.zeros(idx.size, dtype=bool)
        Xn, fn, Gn = Xa.copy(), fa.copy(), Ga.copy()
        t = ta.copy()
        for _ in range(60):
            todo = ~accepted
            if not todo.any():
                break
            Y = _normalize_cols(Xa[:, todo] + t[todo] * Ga[:, todo], q)
            fy, gy = _batch_value_grad(A, Y, p, q)
            ok = fy >= fa[todo]
            sel = np.flatnonzero(todo)[ok]
            Xn[:, sel], fn[sel], Gn[:, sel] = Y[:, ok], fy[ok], gy[:, ok]
            accepted[sel] = True
            t[np.flatnonzero(todo)[~ok]] *= 0.5
        s = Xn - Xa
        y = Gn - Ga
        sy = np.abs(np.sum(s * y, axis=0))
        ss = np.sum(s * s, axis=0)
        bb = np.where(sy > 0, ss / np.where(sy > 0, sy, 1.0), t * 2.0)
        step[idx] = np.clip(bb, 1e-12, 1e12)
        X[:, idx], f[idx], G[:, idx] = Xn, fn, Gn
        gnorm = np.max(np.abs(Gn * Xn), axis=0)
        gain = (fn - fa) / np.maximum(fa, 1e-300)
        # at the float resolution of f, accepted steps stop changing the value
        stall[idx] = np.where(gain <= 1e-15, stall[idx] + 1, 0)
        done = (~accepted) | (gnorm <= 1e-13 * np.maximum(fn, 1e-300)) | (stall[idx] >= 5)
        active[idx[done]] = False

    best = int(np.argmax(f))
    w = X[:, best].copy()
    return OracleResult(ratio_f(A, w, params), w, "multistart", False)


def _sign_block(start, count, nfree):
    codes = np.arange(start, start + count, dtype=np.int64)
    bits = (codes[None, :] >> np.arange(nfree, dtype=np.int64)[:, None]) & 1
    return 1.0 - 2.0 * bits


def longest_vector(columns, p: float, chunk: int = 1 << 15) -> OracleResult:
    """Exact ``max_{x in {-1,1}^n} ||sum_i x_i v_i||_p``.

    ``columns`` is a sequence of equal-length vectors (or a matrix whose
    rows are the vectors). The result equals ``||A||_{inf->p}`` for the
    matrix with these columns.
    """
    V = np.atleast_2d(np.asarray(columns, dtype=float))
    n = V.shape[0]
    if n > MAX_SIGN_COLUMNS:
        raise SizeError(f"{n} columns exceeds the enumeration limit of {MAX_SIGN_COLUMNS}")
    if not np.all(np.isfinite(V)):
        raise InvalidInputError("vectors have non-finite entries")
    A = V.T
    # x and -x give the same length, so fix the first sign to +1
    nfree = n - 1
    total = 1 << nfree
    best_val, best_x = -1.0, None
    for start in range(0, total, chunk):
        cnt = min(chunk, total - start)
        signs = np.vstack([np.ones((1, cnt)), _sign_block(start, cnt, nfree)])
        vals = _col_lp(A @ signs, p)
        k = int(np.argmax(vals))
        if vals[k] > best_val:
            best_val, best_x = float(vals[k]), signs[:, k].copy()
    return OracleResult(best_val, best_x, "sign-enum", True)


def _power_sigma(A, tol=1e-12, max_iter=100_000):
    """Largest singular value and right singular vector by power iteration."""
    n = A.shape[1]
    v = np.random.default_rng(0).random(n) + 0.5
    v /= np.linalg.norm(v)
    sigma = 0.0
    AtA = A.T @ A
    for _ in range(max_iter):
        w = AtA @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0, v
        v = w / nw
        new = float(np.linalg.norm(A @ v))
        if abs(new - sigma) <= tol * new:
            sigma = new
            break
        sigma = new
    return sigma, v


def interpolation_estimate(A, p: float) -> CertifiedBounds:
    """Bounds on ``||A||_{p->p}`` from the exactly computable 1, 2, inf norms.

    Lower: best objective among the l_1 maximizer (basis vector of the
    heaviest column), the top right singular vector and the sign pattern of
    the heaviest row. Upper: Riesz-Thorin between anchors (1, 2) for
    ``p <= 2`` and (2, inf) for ``p >= 2``. The ratio upper/lower is at most
    ``n^(1/4)`` for square matrices.
    """
    A = as_matrix(A)
    if p < 1:
        raise InvalidInputError(f"p={p} must be >= 1")
    absA = np.abs(A)
    col_sums = absA.sum(axis=0)
    row_sums = absA.sum(axis=1)
    norm1 = float(col_sums.max())
    norminf = float(row_sums.max())
    sigma, v = _power_sigma(A)

    e = np.zeros(A.shape[1])
    e[int(np.argmax(col_sums))] = 1.0
    s = np.sign(A[int(np.argmax(row_sums))])
    s[s == 0] = 1.0
    params = (p, p)
    lower = max(ratio_f(A, e, params), ratio_f(A, v, params) if sigma > 0 else 0.0, ratio_f(A, s, params))

    if math.isinf(p):
        upper = norminf
    elif p <= 2:
        theta = 2.0 * (1.0 - 1.0 / p)
        upper = norm1 ** (1.0 - theta) * sigma**theta
    else:
        theta = 1.0 - 2.0 / p
        upper = sigma ** (1.0 - theta) * norminf**theta
    return CertifiedBounds(float(lower), float(max(upper, lower)), "interpolation")


def qp_upper_from_pp(A, params) -> float:
    """Certified upper bound on ``||A||_{q->p}`` for ``q >= p`` via
    ``||x||_p <= n^(1/p - 1/q) ||x||_q`` and the interpolation bound."""
    params = as_params(params)
    A = as_matrix(A)
    n = A.shape[1]
    ub = interpolation_estimate(A, params.p).upper
    exponent = 1.0 / params.p - (0.0 if math.isinf(params.q) else 1.0 / params.q)
    return ub * n ** max(exponent, 0.0) if params.q >= params.p else ub


__all__ = [
    "OracleResult",
    "brute_norm",
    "longest_vector",
    "interpolation_estimate",
    "qp_upper_from_pp",
    "INF",
]
