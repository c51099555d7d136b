"""Shared fixtures and independent oracles used across the test suite."""

from itertools import combinations

import numpy as np
import pytest

from slemma.quadratic import QuadraticFunction, evaluate_quadratic_batch
from slemma.rng import SplitMix64
from slemma.systems import FunctionSystem


@pytest.fixture
def example3():
    """q0(x, y) = 2x^2 - y^2 with the constraint q1(x, y) = x + y."""
    q0 = QuadraticFunction(np.array([[4.0, 0.0], [0.0, -2.0]]),
                           np.zeros(2), 0.0)
    q1 = QuadraticFunction(np.zeros((2, 2)), np.array([1.0, 1.0]), 0.0)
    return FunctionSystem(n=2, f0=q0, constraints=(q1,))


def random_quadratic(rng, n, scale=1.0):
    vals = rng.uniforms(n * n + n + 1, -scale, scale)
    raw = np.array(vals[: n * n]).reshape(n, n)
    return QuadraticFunction(raw + raw.T, np.array(vals[n * n: n * n + n]),
                             float(vals[-1]))


def random_psd_quadratic(rng, n, margin=0.0):
    """Globally nonnegative quadratic built from a PSD bordered matrix."""
    vals = rng.uniforms((n + 1) * (n + 1), -1.0, 1.0)
    L = np.array(vals).reshape(n + 1, n + 1)
    G = L @ L.T
    return QuadraticFunction(G[:n, :n], G[:n, n], G[n, n] / 2.0 + margin)


def random_p1_system(seed, max_n=4):
    rng = SplitMix64(seed)
    n = 1 + int(rng.randint(max_n))
    return FunctionSystem(n, random_quadratic(rng, n),
                          (random_quadratic(rng, n),))


def grid_decides_implication(system, radius=10.0, tol=1e-6, points=41):
    """Independent adjudication of the implication on [-R, R]^n: a grid
    point with every constraint above -tol and f0 below -tol falsifies it."""
    axes = [np.linspace(-radius, radius, points)] * system.n
    mesh = np.meshgrid(*axes, indexing="ij")
    X = np.stack([m.ravel() for m in mesh], axis=1)
    f0 = evaluate_quadratic_batch(system.f0, X)
    feasible = np.ones(X.shape[0], dtype=bool)
    for f in system.constraints:
        feasible &= evaluate_quadratic_batch(f, X) >= -tol
    return not np.any(feasible & (f0 < -tol))


def brute_force_boxed_lp(c, A, b, lower, upper, tol=1e-9):
    """Vertex enumeration for min c.y s.t. A y <= b inside a box.

    Returns ("optimal", value) or ("infeasible", None); the box guarantees
    any nonempty feasible set has a vertex."""
    m = c.shape[0]
    G = np.vstack([A, np.eye(m), -np.eye(m)])
    h = np.concatenate([b, upper, -lower])
    combos = list(combinations(range(G.shape[0]), m))
    mats = np.array([G[list(cb)] for cb in combos])
    rhs = np.array([h[list(cb)] for cb in combos])
    dets = np.abs(np.linalg.det(mats))
    ok = dets > 1e-10
    if not np.any(ok):
        return "infeasible", None
    sols = np.linalg.solve(mats[ok], rhs[ok][..., None])[..., 0]
    feas = np.all(G @ sols.T <= h[:, None] + tol * (1 + np.abs(h[:, None])),
                  axis=0)
    if not np.any(feas):
        return "infeasible", None
    return "optimal", float(np.min(sols[feas] @ c))
