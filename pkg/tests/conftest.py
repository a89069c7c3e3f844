import numpy as np
import pytest

from jacobiscatter import (
    PeriodicBackground,
    PerturbedOperator,
    Perturbation,
    band_structure,
    fundamental_solutions,
)


@pytest.fixture(scope="session")
def free_bg():
    return PeriodicBackground(q=1, a=(1.0,), b=(0.0,))


@pytest.fixture(scope="session")
def q2_bg():
    # q=2 with one open finite gap (0, 1); the Dirichlet point mu_1 = 1
    # coincides with the right gap edge
    return PeriodicBackground(q=2, a=(1.0, 1.0), b=(1.0, 0.0))


@pytest.fixture(scope="session")
def q3_bg():
    return PeriodicBackground(q=3, a=(1.1, 0.8, 1.4), b=(0.3, -0.2, 0.5))


def make_op(bg, p, u, v):
    return PerturbedOperator(bg, Perturbation(p=p, u=tuple(u), v=tuple(v)))


def pipeline(bg, nmax=None):
    fund = fundamental_solutions(bg, nmax=nmax)
    bands = band_structure(bg, fund)
    return fund, bands


def random_background(rng, qmax=4):
    q = int(rng.integers(1, qmax + 1))
    a = tuple(rng.uniform(0.5, 2.0, q))
    b = tuple(rng.uniform(-2.0, 2.0, q))
    return PeriodicBackground(q=q, a=a, b=b)


def random_canonical(rng, qmax=4, pmax=4, mode=None):
    """One canonical instance; mode stratifies the off-diagonal defect:
    0 -> u = 0, 1 -> u_p = 0 but u free below, 2 -> u_p != 0."""
    bg = random_background(rng, qmax)
    p = int(rng.integers(0, pmax + 1))
    mode = int(rng.integers(0, 3)) if mode is None else mode

    def draw_u(j):
        # keep the perturbed entry inside [0.5, 2] like the background
        return float(rng.uniform(0.5, 2.0) - bg.a0(j))

    if mode == 0 or p == 0 and mode == 1:
        u = tuple(0.0 for _ in range(p + 1))
    elif mode == 1:
        u = tuple(draw_u(j) for j in range(p)) + (0.0,)
    else:
        u = tuple(draw_u(j) for j in range(p + 1))
        while abs(u[p]) < 0.05:
            u = u[:p] + (draw_u(p),)
    v = []
    for j in range(p + 1):
        x = float(rng.uniform(-2.0, 2.0))
        if j in (0, p):
            while abs(x) < 0.1:
                x = float(rng.uniform(-2.0, 2.0))
        v.append(x)
    return make_op(bg, p, u, tuple(v))
