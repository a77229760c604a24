"""Shared generators for randomized tests: bounded polytopes and
reverse-engineered stationary problems."""

from __future__ import annotations

import numpy as np

from kkt2.linalg import PolytopeH
from kkt2.model import BoxSet, ProblemSpec, quadratic


def random_bounded_polytope(rng: np.random.Generator, max_dim: int = 5) -> PolytopeH:
    """Random half-space cuts around a random interior point, plus box rows
    that force boundedness."""

    d = int(rng.integers(1, max_dim + 1))
    x0 = rng.uniform(-1.0, 1.0, d)
    rows = []
    for _ in range(int(rng.integers(d, 2 * d + 4))):
        a = rng.standard_normal(d)
        rows.append((a, float(a @ x0 + rng.uniform(0.1, 1.5))))
    bound = float(np.max(np.abs(x0))) + 2.0
    for i in range(d):
        e = np.zeros(d)
        e[i] = 1.0
        rows.append((e, bound))
        rows.append((-e, bound))
    return PolytopeH(d, (), tuple(rows))


def random_stationary_problem(
    rng: np.random.Generator,
    max_dim: int = 4,
    max_constraints: int = 3,
    weights_one: bool = True,
):
    """A problem with a known stationary point.

    Active sets, multiplier signs, and the box pattern are drawn first; the
    objective's linear term is then chosen so the stationarity equation
    holds exactly at xbar with the drawn (lambda, mu).
    """

    n = int(rng.integers(1, max_dim + 1))
    m = int(rng.integers(0, max_constraints + 1))
    m1 = int(rng.integers(0, m + 1))
    weights = np.ones(n) if weights_one else rng.uniform(0.5, 2.0, n)
    xbar = rng.uniform(-1.0, 1.0, n)

    lower = np.full(n, -np.inf)
    upper = np.full(n, np.inf)
    lam = np.zeros(n)
    for j in range(n):
        kind = rng.integers(0, 3)
        if kind == 0:  # lower-active
            lower[j] = xbar[j]
            upper[j] = xbar[j] + rng.uniform(0.5, 2.0)
            lam[j] = -abs(rng.standard_normal())
        elif kind == 1:  # upper-active
            upper[j] = xbar[j]
            lower[j] = xbar[j] - rng.uniform(0.5, 2.0)
            lam[j] = abs(rng.standard_normal())
        else:  # interior
            lower[j] = xbar[j] - rng.uniform(0.5, 2.0)
            upper[j] = xbar[j] + rng.uniform(0.5, 2.0)

    constraints = []
    mu = np.zeros(m)
    grads = []
    for i in range(m):
        M = rng.standard_normal((n, n))
        M = 0.5 * (M + M.T)
        linear = rng.standard_normal(n)
        if i < m1:
            target = 0.0
            mu[i] = rng.standard_normal()
        else:
            active = rng.random() < 0.6
            target = 0.0 if active else -abs(rng.uniform(0.2, 1.0))
            mu[i] = abs(rng.standard_normal()) if active and rng.random() < 0.7 else 0.0
        constant = target - linear @ xbar - 0.5 * xbar @ M @ xbar
        constraints.append(quadratic(constant, linear, M, weights, name=f"g{i}"))
        grads.append((linear + M @ xbar) / weights)

    Mf = rng.standard_normal((n, n))
    Mf = 0.5 * (Mf + Mf.T)
    # f'(xbar) = -lam - sum mu_i g_i'(xbar): back out the linear term
    fgrad = -lam - sum(mu[i] * grads[i] for i in range(m)) if m else -lam
    linear_f = weights * fgrad - Mf @ xbar
    objective = quadratic(0.0, linear_f, Mf, weights, name="f")

    spec = ProblemSpec(objective, tuple(constraints), m1,
                       BoxSet(lower, upper), weights)
    return spec, xbar, lam, mu
