import math

import numpy as np
import pytest

from opnorm.boyd import compute_norm
from opnorm.core import INF, ratio_f
from opnorm.errors import InvalidInputError, SizeError
from opnorm.oracle import brute_norm, interpolation_estimate, longest_vector, qp_upper_from_pp

from conftest import random_positive


def test_brute_examples():
    assert brute_norm(np.diag([1.0, 2.0]), (2, 2)).value == pytest.approx(2.0, rel=1e-12)
    r = brute_norm([[1, 2], [3, 1]], (2, 2))
    assert r.value == pytest.approx(math.sqrt((15 + math.sqrt(125)) / 2), rel=1e-12)
    assert r.method == "multistart" and not r.exhaustive


def test_brute_matches_iteration(rng):
    A = random_positive(rng, 5)
    assert brute_norm(A, (2.2, 3.7)).value == pytest.approx(compute_norm(A, (2.2, 3.7)).estimate, rel=1e-6)


def test_brute_witness_reproduces_value(rng):
    A = rng.standard_normal((4, 3))
    for prm in [(2.0, 2.0), (3.0, 1.5), (1.5, 4.0)]:
        r = brute_norm(A, prm)
        assert ratio_f(A, r.witness, prm) == pytest.approx(r.value, rel=1e-10)


def test_brute_deterministic(rng):
    A = rng.standard_normal((3, 3))
    a, b = brute_norm(A, (3, 2), seed=5), brute_norm(A, (3, 2), seed=5)
    assert a.value == b.value
    np.testing.assert_array_equal(a.witness, b.witness)


def test_brute_sign_matrix_two_norm(rng):
    A = rng.standard_normal((5, 4))
    sigma = np.linalg.svd(A, compute_uv=False)[0]
    assert brute_norm(A, (2, 2)).value == pytest.approx(sigma, rel=1e-10)


def test_brute_infinite_exponents(rng):
    A = rng.standard_normal((3, 4))
    r = brute_norm(A, (INF, 2))
    assert r.value == pytest.approx(np.max(np.linalg.norm(A, axis=1)), rel=1e-12)
    assert r.exhaustive
    r = brute_norm(A, (INF, INF))
    assert r.value == pytest.approx(np.max(np.abs(A).sum(axis=1)), rel=1e-12)
    r = brute_norm(A, (2, INF))
    assert r.method == "sign-enum" and r.exhaustive


def test_longest_vector_examples():
    r = longest_vector([(1, 0), (0, 1)], 2)
    assert r.value == pytest.approx(math.sqrt(2))
    np.testing.assert_array_equal(r.witness, [1, 1])
    assert longest_vector([(1, 0), (0, 1), (1, 1)], 3).value == pytest.approx(2 * 2 ** (1 / 3))
    v = np.array([0.3, -1.2, 2.0])
    r = longest_vector([v, -v], 2.7)
    assert r.value == pytest.approx(2 * np.sum(np.abs(v) ** 2.7) ** (1 / 2.7))
    assert r.witness[0] == -r.witness[1]
    assert r.exhaustive and r.method == "sign-enum"


def test_longest_vector_limits():
    with pytest.raises(SizeError):
        longest_vector(np.ones((25, 2)), 2)
    with pytest.raises(InvalidInputError):
        longest_vector([[1.0, np.nan]], 2)


def test_longest_vector_chunked(rng):
    V = rng.standard_normal((11, 3))
    assert longest_vector(V, 2.5, chunk=7).value == longest_vector(V, 2.5).value


def test_interpolation_examples(rng):
    A = rng.standard_normal((6, 6))
    b = interpolation_estimate(A, 2)
    sigma = np.linalg.svd(A, compute_uv=False)[0]
    assert b.lower == pytest.approx(sigma, rel=1e-10) and b.upper == pytest.approx(sigma, rel=1e-10)
    for p in (1.0, 1.5, 3.0, INF):
        b = interpolation_estimate(np.eye(5), p)
        assert b.lower == pytest.approx(1.0) and b.upper == pytest.approx(1.0)
    assert interpolation_estimate(np.eye(3), 1).method == "interpolation"


def test_interpolation_sandwich_and_factor(rng):
    for _ in range(10):
        A = rng.choice([-1.0, 1.0], size=(8, 8))
        b = interpolation_estimate(A, 4)
        assert b.upper / b.lower <= 8**0.25
        exact = brute_norm(A, (4, 4), restarts=64).value
        assert b.lower <= exact * (1 + 1e-12)
        assert exact <= b.upper * (1 + 1e-12)


def test_interpolation_exact_anchors(rng):
    A = rng.standard_normal((4, 5))
    assert interpolation_estimate(A, 1).lower == pytest.approx(np.abs(A).sum(axis=0).max())
    assert interpolation_estimate(A, INF).upper == pytest.approx(np.abs(A).sum(axis=1).max())


def test_qp_upper(rng):
    A = random_positive(rng, 4)
    assert compute_norm(A, (2, 3)).estimate <= qp_upper_from_pp(A, (2, 3))
