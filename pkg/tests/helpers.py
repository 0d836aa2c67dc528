"""Shared test utilities: 50-digit reference implementations and small
random-instance factories.

The mpmath functions below recompute the posteriors and the exact
log-likelihood directly from the model definition in the linear domain,
term by term, with no log-sum-exp tricks. They are deliberately naive;
the point is that they share no code path with the package.
"""

from __future__ import annotations

import itertools

import mpmath as mp
import numpy as np

from coblock.model import BinaryMatrix, CovariateTable, ModelParams

mp.mp.dps = 50


def mp_gauss_logpdf(yrow, mean, cov):
    p = len(yrow)
    if p == 0:
        return mp.mpf(0)
    a = mp.matrix([[mp.mpf(float(cov[i][j])) for j in range(p)] for i in range(p)])
    diff = mp.matrix([mp.mpf(float(yrow[i]) - float(mean[i])) for i in range(p)])
    sol = mp.lu_solve(a, diff)
    quad = sum(diff[i] * sol[i] for i in range(p))
    return -mp.mpf(p) / 2 * mp.log(2 * mp.pi) - mp.log(mp.det(a)) / 2 - quad / 2


def mp_cell_loglik(x_ij, eta):
    eta = mp.mpf(float(eta))
    return mp.mpf(float(x_ij)) * eta - mp.log(1 + mp.exp(eta))


def _predictors(y: CovariateTable, params: ModelParams):
    """eta[i][k][l] as exact mpf scalars."""
    aug = y.augmented
    n = aug.shape[0]
    g, d = params.g, params.d
    return [
        [
            [
                sum(mp.mpf(float(aug[i, a])) * mp.mpf(float(params.coefs[k, l, a]))
                    for a in range(aug.shape[1]))
                for l in range(d)
            ]
            for k in range(g)
        ]
        for i in range(n)
    ]


def mp_row_posteriors(x: BinaryMatrix, y: CovariateTable, r, params: ModelParams,
                      cov_weight: str = "m") -> np.ndarray:
    """Row posteriors evaluated directly from the defining product."""
    eta = _predictors(y, params)
    r = np.asarray(r, dtype=float)
    weight = mp.mpf(x.m if cov_weight == "m" else 1)
    out = np.empty((x.n, params.g))
    for i in range(x.n):
        logs = []
        for k in range(params.g):
            acc = mp.log(mp.mpf(float(params.row_props[k])))
            acc += weight * mp_gauss_logpdf(y.values[i], params.means[k], params.covs[k])
            for j in range(x.m):
                for l in range(params.d):
                    acc += mp.mpf(float(r[j, l])) * mp_cell_loglik(x.values[i, j], eta[i][k][l])
            logs.append(acc)
        total = sum(mp.exp(v) for v in logs)
        for k in range(params.g):
            out[i, k] = float(mp.exp(logs[k]) / total)
    return out


def mp_col_posteriors(x: BinaryMatrix, y: CovariateTable, t, params: ModelParams) -> np.ndarray:
    eta = _predictors(y, params)
    t = np.asarray(t, dtype=float)
    out = np.empty((x.m, params.d))
    for j in range(x.m):
        logs = []
        for l in range(params.d):
            acc = mp.log(mp.mpf(float(params.col_props[l])))
            for i in range(x.n):
                for k in range(params.g):
                    acc += mp.mpf(float(t[i, k])) * mp_cell_loglik(x.values[i, j], eta[i][k][l])
            logs.append(acc)
        total = sum(mp.exp(v) for v in logs)
        for l in range(params.d):
            out[j, l] = float(mp.exp(logs[l]) / total)
    return out


def mp_exact_loglik(x: BinaryMatrix, y: CovariateTable, params: ModelParams,
                    cov_weight: str = "m") -> float:
    """log-likelihood by exhaustive enumeration of every (z, w) labeling."""
    eta = _predictors(y, params)
    weight = mp.mpf(x.m if cov_weight == "m" else 1)
    gauss = [
        [weight * mp_gauss_logpdf(y.values[i], params.means[k], params.covs[k])
         for k in range(params.g)]
        for i in range(x.n)
    ]
    total = mp.mpf(0)
    for z in itertools.product(range(params.g), repeat=x.n):
        for w in itertools.product(range(params.d), repeat=x.m):
            acc = mp.mpf(0)
            for i in range(x.n):
                acc += mp.log(mp.mpf(float(params.row_props[z[i]]))) + gauss[i][z[i]]
            for j in range(x.m):
                acc += mp.log(mp.mpf(float(params.col_props[w[j]])))
            for i in range(x.n):
                for j in range(x.m):
                    acc += mp_cell_loglik(x.values[i, j], eta[i][z[i]][w[j]])
            total += mp.exp(acc)
    return float(mp.log(total))


def rand_params(rng: np.random.Generator, g: int, d: int, p: int,
                coef_scale: float = 1.0) -> ModelParams:
    row_props = rng.dirichlet(np.full(g, 4.0))
    col_props = rng.dirichlet(np.full(d, 4.0))
    coefs = rng.normal(scale=coef_scale, size=(g, d, p + 1))
    means = rng.normal(scale=1.5, size=(g, p))
    covs = np.empty((g, p, p))
    for k in range(g):
        a = rng.normal(size=(p, p))
        covs[k] = a @ a.T + 0.5 * np.eye(p)
    return ModelParams(row_props=row_props, col_props=col_props, coefs=coefs,
                       means=means, covs=covs)


def rand_instance(rng: np.random.Generator, n: int, m: int, p: int):
    x = BinaryMatrix((rng.random((n, m)) < rng.random()).astype(float))
    y = CovariateTable(rng.normal(size=(n, p)))
    return x, y


def rand_soft(rng: np.random.Generator, n: int, k: int) -> np.ndarray:
    return rng.dirichlet(np.full(k, 1.0), size=n)


def hard_soft(labels, k: int) -> np.ndarray:
    """One-hot rows from 0-based integer labels."""
    labels = np.asarray(labels, dtype=int)
    out = np.zeros((labels.size, k))
    out[np.arange(labels.size), labels] = 1.0
    return out
