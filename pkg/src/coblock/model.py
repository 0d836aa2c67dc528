"""Core domain types and elementary densities.

The model couples a binary data matrix with a per-row real covariate
vector: cells follow a Bernoulli distribution whose success probability
is a logistic function of the covariates, with one coefficient vector
per (row cluster, column cluster) block, and the covariates themselves
follow a per-row-cluster multivariate Gaussian.

Everything here is an immutable value: types validate on construction
and freeze their arrays, and the density functions are pure, so all of
it is safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import expit

from .errors import NotPositiveDefinite, ParamValidationError

LOG_2PI = float(np.log(2.0 * np.pi))

_PROB_SUM_TOL = 1e-12
_SYMMETRY_TOL = 1e-12
_ROW_SUM_TOL = 1e-10


def _frozen(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class BinaryMatrix:
    """An n-by-m matrix of {0,1} observations (rows: individuals, columns: variables)."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2:
            raise ParamValidationError(f"binary matrix must be 2-D, got shape {v.shape}")
        if v.shape[0] < 1 or v.shape[1] < 1:
            raise ParamValidationError(f"binary matrix needs n >= 1 and m >= 1, got {v.shape}")
        if not np.all((v == 0.0) | (v == 1.0)):
            bad = np.argwhere((v != 0.0) & (v != 1.0))[0]
            raise ParamValidationError(
                f"entry at row {bad[0] + 1}, column {bad[1] + 1} is not 0 or 1"
            )
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def m(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class CovariateTable:
    """Per-row covariate vectors, plus the augmented form with a leading constant 1.

    The augmentation convention is fixed package-wide: index 0 of each
    augmented row is the constant, so coefficient vectors always carry
    the intercept in position 0.
    """

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2:
            raise ParamValidationError(f"covariate table must be 2-D, got shape {v.shape}")
        if v.shape[0] < 1:
            raise ParamValidationError("covariate table needs at least one row")
        if not np.all(np.isfinite(v)):
            raise ParamValidationError("covariate table contains non-finite entries")
        v.setflags(write=False)
        aug = np.hstack([np.ones((v.shape[0], 1)), v])
        aug.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "augmented", aug)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class ModelParams:
    """Full parameter set of the co-clustering model.

    Attributes:
        row_props: (g,) mixing proportions of the row clusters.
        col_props: (d,) mixing proportions of the column clusters.
        coefs: (g, d, p+1) logistic coefficients per block; index 0 of the
            last axis is the intercept, matching the covariate augmentation.
        means: (g, p) Gaussian means of the covariates per row cluster.
        covs: (g, p, p) Gaussian covariances, symmetric positive definite.

    A lower Cholesky factor of each covariance is computed and cached at
    construction; since instances are immutable, any "mutation" builds a
    new instance and re-validates.
    """

    row_props: np.ndarray
    col_props: np.ndarray
    coefs: np.ndarray
    means: np.ndarray
    covs: np.ndarray

    def __post_init__(self):
        pi = _frozen(self.row_props)
        rho = _frozen(self.col_props)
        coefs = _frozen(self.coefs)
        means = _frozen(self.means)
        covs = _frozen(self.covs)

        for name, vec in (("row_props", pi), ("col_props", rho)):
            if vec.ndim != 1 or vec.size < 1:
                raise ParamValidationError(f"{name} must be a non-empty 1-D vector")
            if np.any(vec < 0):
                raise ParamValidationError(f"{name} has a negative component")
            if abs(vec.sum() - 1.0) > _PROB_SUM_TOL:
                raise ParamValidationError(f"{name} sums to {vec.sum()!r}, expected 1")

        g, d = pi.size, rho.size
        if means.ndim != 2 or means.shape[0] != g:
            raise ParamValidationError(f"means must have shape (g, p), got {means.shape}")
        p = means.shape[1]
        if coefs.shape != (g, d, p + 1):
            raise ParamValidationError(
                f"coefs must have shape (g, d, p+1) = {(g, d, p + 1)}, got {coefs.shape}"
            )
        if covs.shape != (g, p, p):
            raise ParamValidationError(f"covs must have shape (g, p, p), got {covs.shape}")
        if not np.all(np.isfinite(coefs)):
            raise ParamValidationError("coefs contain non-finite entries")
        if not np.all(np.isfinite(means)) or not np.all(np.isfinite(covs)):
            raise ParamValidationError("Gaussian parameters contain non-finite entries")
        if p > 0 and np.max(np.abs(covs - np.transpose(covs, (0, 2, 1)))) > _SYMMETRY_TOL:
            raise ParamValidationError("a covariance matrix is not symmetric")

        chols = np.empty_like(covs)
        for k in range(g):
            chols[k] = _cholesky(covs[k])
        chols.setflags(write=False)

        object.__setattr__(self, "row_props", pi)
        object.__setattr__(self, "col_props", rho)
        object.__setattr__(self, "coefs", coefs)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "covs", covs)
        object.__setattr__(self, "cov_chols", chols)

    @property
    def g(self) -> int:
        return self.row_props.size

    @property
    def d(self) -> int:
        return self.col_props.size

    @property
    def p(self) -> int:
        return self.means.shape[1]


@dataclass(frozen=True)
class SoftAssignments:
    """Row and column posterior membership probabilities, row-stochastic."""

    row_probs: np.ndarray
    col_probs: np.ndarray

    def __post_init__(self):
        t = _frozen(self.row_probs)
        r = _frozen(self.col_probs)
        for name, probs in (("row_probs", t), ("col_probs", r)):
            if probs.ndim != 2:
                raise ParamValidationError(f"{name} must be 2-D")
            if np.any(probs < 0) or np.any(probs > 1):
                raise ParamValidationError(f"{name} has entries outside [0, 1]")
            if np.max(np.abs(probs.sum(axis=1) - 1.0)) > _ROW_SUM_TOL:
                raise ParamValidationError(f"rows of {name} do not sum to 1")
        object.__setattr__(self, "row_probs", t)
        object.__setattr__(self, "col_probs", r)


@dataclass(frozen=True)
class HardLabels:
    """Hard cluster assignments; labels are 1-based throughout the public API."""

    row_labels: np.ndarray
    col_labels: np.ndarray

    def __post_init__(self):
        z = _frozen(self.row_labels, dtype=np.int64)
        w = _frozen(self.col_labels, dtype=np.int64)
        for name, labels in (("row_labels", z), ("col_labels", w)):
            if labels.ndim != 1:
                raise ParamValidationError(f"{name} must be 1-D")
            if labels.size and labels.min() < 1:
                raise ParamValidationError(f"{name} must be 1-based (min value >= 1)")
        object.__setattr__(self, "row_labels", z)
        object.__setattr__(self, "col_labels", w)


def _cholesky(cov: np.ndarray) -> np.ndarray:
    """Lower Cholesky factor, raising NotPositiveDefinite on failure."""
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(f"covariance is not positive definite: {exc}") from exc


def logistic(u):
    """Stable logistic function e^u / (1 + e^u); accepts scalars or arrays."""
    return expit(u)


def bernoulli_link_logpdf(x, y_aug: np.ndarray, coef: np.ndarray) -> float:
    """Log-probability of a binary cell under the logistic link.

    Computes x * eta - log(1 + exp(eta)) with eta = y_aug . coef, using
    logaddexp so large |eta| cannot overflow.
    """
    eta = float(np.dot(y_aug, coef))
    return float(x * eta - np.logaddexp(0.0, eta))


def gaussian_logpdf(y: np.ndarray, mean: np.ndarray, cov: np.ndarray) -> float:
    """Log-density of a multivariate Gaussian at a single point."""
    chol = _cholesky(np.asarray(cov, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    return float(gaussian_logpdf_rows(y[None, :], mean, chol)[0])


def gaussian_logpdf_rows(rows: np.ndarray, mean: np.ndarray, chol: np.ndarray) -> np.ndarray:
    """Vectorized Gaussian log-density over the rows of a matrix.

    `chol` is the lower Cholesky factor of the covariance. With p = 0 the
    density is an empty product, hence identically log 1 = 0.
    """
    p = mean.size
    if p == 0:
        return np.zeros(rows.shape[0])
    u = solve_triangular(chol, (rows - mean).T, lower=True)
    logdet = 2.0 * np.sum(np.log(np.diag(chol)))
    return -0.5 * (p * LOG_2PI + logdet + np.sum(u * u, axis=0))


def gaussian_cluster_logpdfs(y: CovariateTable, params: ModelParams) -> np.ndarray:
    """(n, g) matrix of log phi(y_i; mean_k, cov_k) using the cached factors."""
    out = np.empty((y.n, params.g))
    for k in range(params.g):
        out[:, k] = gaussian_logpdf_rows(y.values, params.means[k], params.cov_chols[k])
    return out


def covariate_density_weight(cov_weight: str, m: int) -> float:
    """Exponent applied to the covariate density in the joint cell model.

    "m": the Gaussian factor appears once per cell, i.e. with total weight
    m per row (the default, matching the log-domain E-step formulas).
    "1": the Gaussian factor appears once per row.
    """
    if cov_weight == "m":
        return float(m)
    if cov_weight == "1":
        return 1.0
    raise ValueError(f"cov_weight must be 'm' or '1', got {cov_weight!r}")
