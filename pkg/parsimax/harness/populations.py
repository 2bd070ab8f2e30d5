"""Seeded constructors for the exact populations and moment pairs used as oracles"""
import itertools
from typing import Tuple
import numpy as np
from parsimax.core import FinitePopulation, MomentSet


def atom_count(p: int, h: int) -> int:
    return 4 * (p + h) + 8


def random_population(rng: np.random.Generator, p: int, h: int,
                      heteroscedastic: bool = True, intercept: bool = True,
                      atoms: int = 0) -> FinitePopulation:
    """
    Random discrete population. Key regressors load on the last protected regressor
    so Gamma_zx != 0; with `heteroscedastic` the error variance moves with x_1.
    """
    k = atoms or atom_count(p, h)
    z = rng.standard_normal((k, p))
    if intercept:
        z[:, 0] = 1.0
    x = rng.standard_normal((k, h)) + 0.5 * z[:, [p - 1]]
    if heteroscedastic:
        sigma2 = 0.5 + x[:, 0] ** 2 + rng.uniform(0.0, 1.0, size=k)
    else:
        sigma2 = np.ones(k)
    prob = rng.dirichlet(np.full(k, 2.0))
    return FinitePopulation(z, x, sigma2, prob / prob.sum())


def rademacher_population(h: int) -> FinitePopulation:
    """z = 1, x uniform on {-1, 1}^h, sigma2 = 1: Gamma = Lambda = I and V = I"""
    corners = np.array(list(itertools.product([-1.0, 1.0], repeat=h)))
    k = corners.shape[0]
    return FinitePopulation(np.ones((k, 1)), corners, np.ones(k), np.full(k, 1.0 / k))


def random_pd(rng: np.random.Generator, order: int, ridge: float = 0.05) -> np.ndarray:
    a = rng.standard_normal((order + 3, order))
    return a.T @ a / (order + 3) + ridge * np.eye(order)


def random_moment_pair(rng: np.random.Generator, p: int, h: int) -> Tuple[MomentSet, MomentSet]:
    """Independent random PD Gamma and Lambda, split into p/h blocks"""
    gamma = MomentSet.from_assembled(random_pd(rng, p + h), p)
    lam = MomentSet.from_assembled(random_pd(rng, p + h), p)
    return gamma, lam
