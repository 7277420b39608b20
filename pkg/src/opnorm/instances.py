"""Structured instances with known witnesses.

The MaxCut gadget turns a d-regular graph into a ``5|E| x (n+1)`` matrix
whose p-th power ratio ``||Mx||_p^p / ||x||_p^p`` equals

    g(x_0..x_n) = ( sum_{i~j} |x_i-x_j|^p + C d sum_i (|x_0+x_i|^p + |x_0-x_i|^p) )
                  / ( n |x_0|^p + sum_i |x_i|^p )

under ``z = n^(1/p) x_0`` (column 0 holds ``z``). At a +-1 cut vector with
``x_0 = 1`` the value is ``C d 2^(p-1) + (cut/n) 2^(p-1)``.

Tensor powers of the gadget amplify that value, and an integer column
weighting converts the p->p problem into a q->p one.
"""

from __future__ import annotations

import itertools
import json
import math
import os
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import NormParams, as_matrix, lp_norm, ratio_f
from .errors import FormatError, InvalidInputError, SizeError
from .io import write_matrix

DEFAULT_MAX_DIM = 4096
MAX_CUT_VERTICES = 16


def max_dim() -> int:
    """Dimension cap from ``OPNORM_MAX_DIM`` (default 4096)."""
    raw = os.environ.get("OPNORM_MAX_DIM")
    if raw is None:
        return DEFAULT_MAX_DIM
    try:
        cap = int(raw)
    except ValueError:
        raise InvalidInputError(f"OPNORM_MAX_DIM={raw!r} is not an integer") from None
    if cap <= 0:
        raise InvalidInputError("OPNORM_MAX_DIM must be positive")
    return cap


def check_dims(shape, cap=None):
    cap = max_dim() if cap is None else cap
    if max(shape) > cap:
        raise SizeError(f"dimension {max(shape)} exceeds cap {cap} (set OPNORM_MAX_DIM to raise it)")


# -- graphs -----------------------------------------------------------------


@dataclass(frozen=True)
class Graph:
    """Simple d-regular graph on vertices ``0..n-1``."""

    n: int
    edges: tuple
    degree: int = field(init=False)

    def __post_init__(self):
        if self.n < 2:
            raise InvalidInputError("graph needs at least two vertices")
        seen = set()
        deg = [0] * self.n
        norm_edges = []
        for u, v in self.edges:
            u, v = int(u), int(v)
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise InvalidInputError(f"edge ({u}, {v}) has a vertex outside 0..{self.n - 1}")
            if u == v:
                raise InvalidInputError(f"self-loop at vertex {u}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise InvalidInputError(f"duplicate edge {key}")
            seen.add(key)
            norm_edges.append(key)
            deg[u] += 1
            deg[v] += 1
        if len(set(deg)) != 1 or deg[0] == 0:
            raise InvalidInputError(f"graph is not regular (degrees {sorted(set(deg))})")
        object.__setattr__(self, "edges", tuple(norm_edges))
        object.__setattr__(self, "degree", deg[0])

    def as_dict(self):
        return {"n": self.n, "degree": self.degree, "edges": [list(e) for e in self.edges]}


def cycle(n: int) -> Graph:
    if n < 3:
        raise InvalidInputError("cycle needs n >= 3")
    return Graph(n, tuple((i, (i + 1) % n) for i in range(n)))


def complete(n: int) -> Graph:
    return Graph(n, tuple(itertools.combinations(range(n), 2)))


def hypercube(k: int) -> Graph:
    if k < 1:
        raise InvalidInputError("hypercube needs k >= 1")
    n = 1 << k
    return Graph(n, tuple((v, v ^ (1 << b)) for v in range(n) for b in range(k) if v < v ^ (1 << b)))


_BUILTIN = re.compile(r"^(cycle|complete|hypercube)(\d+)$")


def builtin_graph(name: str) -> Graph:
    """``cycleN``, ``completeN`` or ``hypercubeK``."""
    m = _BUILTIN.match(name)
    if not m:
        raise InvalidInputError(f"unknown builtin graph {name!r}; expected cycleN, completeN or hypercubeK")
    kind, k = m.group(1), int(m.group(2))
    return {"cycle": cycle, "complete": complete, "hypercube": hypercube}[kind](k)


def read_edge_list(path) -> Graph:
    """Edge-list TSV: one ``u<TAB>v`` pair per line; labels are relabelled
    to ``0..n-1`` in sorted order."""
    pairs = []
    with open(path) as fh:
        for no, ln in enumerate(fh, start=1):
            ln = ln.strip()
            if not ln or ln.startswith("#"):
                continue
            toks = ln.split()
            if len(toks) != 2:
                raise FormatError("expected two vertex labels", no)
            pairs.append((toks[0], toks[1]))
    if not pairs:
        raise FormatError("no edges", 1)
    labels = sorted({t for e in pairs for t in e}, key=lambda s: (len(s), s))
    index = {lab: i for i, lab in enumerate(labels)}
    return Graph(len(labels), tuple((index[u], index[v]) for u, v in pairs))


def cut_size(graph: Graph, signs) -> int:
    s = np.asarray(signs)
    return int(sum(1 for u, v in graph.edges if s[u] != s[v]))


def greedy_cut(graph: Graph) -> np.ndarray:
    """Local search from the all-+1 assignment: repeatedly flip the vertex
    with the largest cut gain (lowest index on ties) until no flip helps."""
    s = np.ones(graph.n, dtype=int)
    nbrs = [[] for _ in range(graph.n)]
    for u, v in graph.edges:
        nbrs[u].append(v)
        nbrs[v].append(u)
    while True:
        gains = [sum(1 if s[w] == s[v] else -1 for w in nbrs[v]) for v in range(graph.n)]
        best = int(np.argmax(gains))
        if gains[best] <= 0:
            return s
        s[best] = -s[best]


def max_cut(graph: Graph) -> tuple[int, np.ndarray]:
    """Exact maximum cut by enumeration (``n <= 16``)."""
    if graph.n > MAX_CUT_VERTICES:
        raise SizeError(f"exact max cut limited to {MAX_CUT_VERTICES} vertices")
    E = np.array(graph.edges)
    codes = np.arange(1 << (graph.n - 1), dtype=np.int64)
    # vertex n-1 pinned to side 0
    bits = (codes[:, None] >> np.arange(graph.n, dtype=np.int64)[None, :]) & 1
    cuts = np.sum(bits[:, E[:, 0]] != bits[:, E[:, 1]], axis=1)
    k = int(np.argmax(cuts))
    return int(cuts[k]), 1 - 2 * bits[k]


# -- gadget -----------------------------------------------------------------


def edge_term(x: float, y: float, C: float, p: float) -> float:
    """Per-edge ratio
    ``(|x-y|^p + C(|1+x|^p + |1-x|^p + |1+y|^p + |1-y|^p)) / (2 + |x|^p + |y|^p)``."""
    num = abs(x - y) ** p + C * (abs(1 + x) ** p + abs(1 - x) ** p + abs(1 + y) ** p + abs(1 - y) ** p)
    return num / (2.0 + abs(x) ** p + abs(y) ** p)


def brute_ratio(x, p: float):
    """``(|1+x|^p + |1-x|^p) / (1 + |x|^p)``; at most ``2^(p-1)`` for ``p >= 2``."""
    x = np.abs(np.asarray(x, dtype=float))
    return ((1 + x) ** p + np.abs(1 - x) ** p) / (1 + x**p)


def brute_slack(p: float, eps: float, grid: int = 200_001) -> float:
    """Measured ``2^(p-1) - sup brute_ratio`` over ``|x|`` outside ``[1-eps, 1+eps]``."""
    lo = np.linspace(0.0, max(1.0 - eps, 0.0), grid // 2)
    hi = 1.0 + eps + np.geomspace(1e-12, 1e6, grid // 2)
    sup = max(brute_ratio(lo, p).max(), brute_ratio(hi, p).max(), brute_ratio(1.0 + eps, p))
    return float(2.0 ** (p - 1) - sup)


def default_C(p: float, eps: float = 0.1) -> float:
    """``2^(p+2) / delta(eps)`` with ``delta`` from :func:`brute_slack`."""
    return 2.0 ** (p + 2) / brute_slack(p, eps)


def gadget_objective(graph: Graph, C: float, p: float, x) -> float:
    """``g(x_0, ..., x_n)`` evaluated from its definition."""
    x = np.asarray(x, dtype=float)
    x0, xs = x[0], x[1:]
    num = sum(abs(xs[i] - xs[j]) ** p for i, j in graph.edges)
    num += C * graph.degree * float(np.sum(np.abs(x0 + xs) ** p + np.abs(x0 - xs) ** p))
    return num / (graph.n * abs(x0) ** p + float(np.sum(np.abs(xs) ** p)))


def gadget_closed_form(C: float, d: int, p: float, cut: int, n: int) -> float:
    return C * d * 2.0 ** (p - 1) + (cut / n) * 2.0 ** (p - 1)


@dataclass
class GadgetInstance:
    """MaxCut gadget. ``witness`` is in the matrix's own variables
    ``(n^(1/p), s_1, ..., s_n)``; ``expected_value`` is the p-th power ratio
    there."""

    matrix: np.ndarray
    C: float
    p: float
    graph: Graph
    witness: np.ndarray
    cut_size: int
    expected_value: float

    def value(self, x) -> float:
        return ratio_f(self.matrix, x, (self.p, self.p)) ** self.p


def gadget_matrix(graph: Graph, C: float, p: float) -> np.ndarray:
    """The ``5|E| x (n+1)`` gadget matrix.

    Per edge ``{i, j}``: the difference row ``x_i - x_j`` and four rows
    ``c (n^(-1/p) z -+ x_i)``, ``c (n^(-1/p) z -+ x_j)`` with
    ``c = C^(1/p)``. Column 0 is ``z``; vertex ``v`` is column ``v + 1``. The
    factor ``c`` makes the rows' p-th powers sum to the ``C d`` weighting of
    ``g`` (each vertex lies on ``d`` edges).
    """
    n = graph.n
    c = C ** (1.0 / p)
    z = c * n ** (-1.0 / p)
    M = np.zeros((5 * len(graph.edges), n + 1))
    for e, (i, j) in enumerate(graph.edges):
        r = 5 * e
        M[r, i + 1], M[r, j + 1] = 1.0, -1.0
        for k, v in enumerate((i, j)):
            M[r + 1 + 2 * k, 0], M[r + 1 + 2 * k, v + 1] = z, -c
            M[r + 2 + 2 * k, 0], M[r + 2 + 2 * k, v + 1] = z, c
    return M


def build_gadget(graph: Graph, C: float, p: float, signs=None) -> GadgetInstance:
    """Gadget instance for ``graph`` with witness from ``signs`` (default:
    :func:`greedy_cut`)."""
    if not isinstance(graph, Graph):
        raise InvalidInputError("build_gadget needs a Graph")
    if not C > 0:
        raise InvalidInputError("C must be positive")
    if not p > 2:
        raise InvalidInputError("the gadget needs p > 2")
    check_dims((5 * len(graph.edges), graph.n + 1))
    s = greedy_cut(graph) if signs is None else np.asarray(signs, dtype=int)
    if s.shape != (graph.n,) or not np.all(np.abs(s) == 1):
        raise InvalidInputError("signs must be a +-1 vector with one entry per vertex")
    c = cut_size(graph, s)
    witness = np.concatenate([[graph.n ** (1.0 / p)], s.astype(float)])
    return GadgetInstance(
        matrix=gadget_matrix(graph, C, p),
        C=float(C),
        p=float(p),
        graph=graph,
        witness=witness,
        cut_size=c,
        expected_value=gadget_closed_form(C, graph.degree, p, c, graph.n),
    )


# -- tensoring --------------------------------------------------------------


def pad_square(M) -> np.ndarray:
    M = as_matrix(M)
    k = max(M.shape)
    out = np.zeros((k, k))
    out[: M.shape[0], : M.shape[1]] = M
    return out


def tensor(M, N, pad: bool = True, cap=None) -> np.ndarray:
    """Kronecker product; block ``(i, j)`` is ``m_ij * N``.

    Rectangular factors are zero-padded to square first unless
    ``pad=False``; padding leaves every q->p norm unchanged.
    """
    M, N = as_matrix(M), as_matrix(N)
    if pad:
        M, N = pad_square(M), pad_square(N)
    check_dims((M.shape[0] * N.shape[0], M.shape[1] * N.shape[1]), cap)
    return np.kron(M, N)


@dataclass
class WeightedInstance:
    """Maximize ``||B y||_p / (sum_i alpha_i |y_i|^q)^(1/q)``.

    ``witness`` is a +-1 vector; ``expected_value`` is the objective there
    raised to the power ``q`` (the p-th power ratio when ``q == p``).
    """

    matrix: np.ndarray
    alpha: np.ndarray
    p: float
    q: float
    witness: np.ndarray
    expected_value: float
    k: int = 1
    base: GadgetInstance | None = None

    def __post_init__(self):
        a = np.asarray(self.alpha)
        if a.ndim != 1 or a.size != self.matrix.shape[1]:
            raise InvalidInputError("one weight per column required")
        if np.any(a < 1) or np.any(a != np.round(a)):
            raise InvalidInputError("weights must be integers >= 1")
        self.alpha = a.astype(np.int64)

    def objective(self, y) -> float:
        y = np.asarray(y, dtype=float)
        den = np.sum(self.alpha * np.abs(y) ** self.q) ** (1.0 / self.q)
        return lp_norm(self.matrix @ y, self.p) / den


def amplify(instance: GadgetInstance, k: int, cap=None) -> WeightedInstance:
    """k-fold tensor power of the gadget in weighted form.

    Columns are indexed by tuples ``I`` in ``{0..n}^k`` (first factor most
    significant). With ``w(I)`` the number of zeros in ``I`` the columns of
    the Kronecker power are scaled by ``n^(w(I)/p)`` and weighted by
    ``alpha_I = n^w(I)``, so the witness is the +-1 vector
    ``(1, s)^{(x)k}`` and its value is the base value to the k-th power.
    """
    if k < 1:
        raise InvalidInputError("k must be >= 1")
    M = instance.matrix
    rows, cols = M.shape[0] ** k, M.shape[1] ** k
    check_dims((rows, cols), cap)
    n, p = instance.graph.n, instance.p
    big = M
    for _ in range(k - 1):
        big = np.kron(big, M)
    zeros = np.zeros(cols, dtype=np.int64)
    for I in range(cols):
        r = I
        for _ in range(k):
            zeros[I] += (r % M.shape[1]) == 0
            r //= M.shape[1]
    alpha = np.array([n**int(w) for w in zeros], dtype=np.int64)
    B = big * (n ** (zeros / p))[None, :]
    base = np.concatenate([[1.0], instance.witness[1:]])
    w = base
    for _ in range(k - 1):
        w = np.kron(w, base)
    return WeightedInstance(
        matrix=B,
        alpha=alpha,
        p=p,
        q=p,
        witness=w,
        expected_value=instance.expected_value**k,
        k=k,
        base=instance,
    )


def lift_to_qp(instance: WeightedInstance, p: float, q: float):
    """Rewrite the weighted objective with denominator exponent ``q`` as a
    plain ``q -> p`` norm problem.

    With ``z_i = alpha_i^(1/q) y_i`` the objective becomes
    ``||B D z||_p / ||z||_q`` for ``D = diag(alpha^(-1/q))``. Returns
    ``(B D, NormParams(p, q))``.
    """
    params = NormParams(p, q)
    if math.isinf(params.p) or math.isinf(params.q):
        raise InvalidInputError("lift_to_qp needs finite exponents")
    alpha = np.asarray(instance.alpha, dtype=float)
    return instance.matrix * alpha[None, :] ** (-1.0 / q), params


def lifted_witness(instance: WeightedInstance, q: float) -> np.ndarray:
    """The witness in the lifted variables ``z = alpha^(1/q) y``."""
    return np.asarray(instance.alpha, dtype=float) ** (1.0 / q) * instance.witness


def completeness_factor(instance: WeightedInstance, p: float, q: float) -> float:
    """``(sum alpha)^(1/p - 1/q)``: the lifted value at a +-1 witness is the
    p->p value (non-powered) times this factor."""
    return float(np.sum(instance.alpha, dtype=float) ** (1.0 / p - 1.0 / q))


# -- corpus files -----------------------------------------------------------


def write_instance(out_dir, name: str, matrix, manifest: dict) -> Path:
    """Write ``<name>.mtx`` and ``<name>.json``; returns the manifest path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_matrix(matrix, out / f"{name}.mtx")
    doc = dict(manifest)
    doc["matrix"] = f"{name}.mtx"
    path = out / f"{name}.json"
    path.write_text(json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n")
    return path


def gadget_manifest(inst: GadgetInstance) -> dict:
    return {
        "kind": "gadget",
        "C": inst.C,
        "p": inst.p,
        "q": inst.p,
        "k": 1,
        "graph": inst.graph.as_dict(),
        "alphas": None,
        "witness": [float(v) for v in inst.witness],
        "cut_size": inst.cut_size,
        "expected_ratio_at_witness": inst.expected_value,
        "ratio_exponent": inst.p,
        "base_value": inst.expected_value,
        "completeness_factor": None,
    }


def weighted_manifest(inst: WeightedInstance) -> dict:
    """Manifest for a tensored instance, written in the plain p->p form
    (the witness is ``y = D^{-1} x`` so ``||M y||_p^p / ||y||_p^p`` is the
    expected value)."""
    base = inst.base
    return {
        "kind": "tensor",
        "C": base.C,
        "p": inst.p,
        "q": inst.p,
        "k": inst.k,
        "graph": base.graph.as_dict(),
        "alphas": [int(a) for a in inst.alpha],
        "witness": [float(v) for v in lifted_witness(inst, inst.p)],
        "cut_size": base.cut_size,
        "expected_ratio_at_witness": inst.expected_value,
        "ratio_exponent": inst.p,
        "base_value": base.expected_value,
        "completeness_factor": None,
    }


def lift_manifest(inst: WeightedInstance, p: float, q: float) -> dict:
    base = inst.base
    factor = completeness_factor(inst, p, q)
    tau = inst.expected_value ** (1.0 / inst.p)
    return {
        "kind": "lift",
        "C": base.C if base else None,
        "p": p,
        "q": q,
        "k": inst.k,
        "graph": base.graph.as_dict() if base else None,
        "alphas": [int(a) for a in inst.alpha],
        "witness": [float(v) for v in lifted_witness(inst, q)],
        "cut_size": base.cut_size if base else None,
        "expected_ratio_at_witness": tau * factor,
        "ratio_exponent": 1.0,
        "base_value": inst.expected_value,
        "completeness_factor": factor,
    }
