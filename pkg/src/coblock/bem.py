"""Block-EM estimator: alternating row/column variational E-steps and
M-steps that jointly ascend the free energy.

One outer cycle is
    (a) row E-step        t <- posterior over row clusters given r, params
    (b) row M-step        pi, Gaussian params, and a logistic half-update
    (c) column E-step     r <- posterior over column clusters given t, params
    (d) column M-step     rho and the logistic update, warm-started from (b)

Every sub-step maximizes the free energy over its own coordinates with
the rest held fixed, so the trace recorded after each sub-step is
non-decreasing (up to a relative slack of 1e-9 that covers the ridge
term added to covariance estimates).

The per-block logistic fits are damped Newton-Raphson solves of a
weighted binomial log-likelihood; linear predictors are kept inside a
box so complete separation cannot push coefficients to infinity.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.special import expit, logsumexp, xlogy

from .errors import (
    AllRestartsFailed,
    EmptyCluster,
    LengthMismatch,
    NotPositiveDefinite,
    ParamValidationError,
)
from .model import (
    BinaryMatrix,
    CovariateTable,
    HardLabels,
    ModelParams,
    SoftAssignments,
    covariate_density_weight,
    gaussian_cluster_logpdfs,
)

_TRACE_SLACK = 1e-9

INIT_RANDOM_SOFT = "random_soft"
INIT_KMEANS_LIKE = "kmeans_like"


@dataclass(frozen=True)
class BemConfig:
    """Knobs of the fitting loop; defaults are ours, chosen for robustness.

    cov_weight selects the exponent convention for the covariate density
    in the free energy and row E-step: "m" counts it once per cell (so a
    row's Gaussian term carries weight m), "1" counts it once per row.
    predictor_bound is the box half-width for linear predictors inside
    the logistic solver (separation guard). nr_grad_tol is relative to
    each block's Bernoulli mass, so solver effort is size-invariant.
    split_merge_rounds controls the post-restart refinement that merges
    the two most similar column clusters and splits the most
    heterogeneous one, keeping the move only when the free energy
    improves; it targets optima where one true column cluster is fitted
    twice while two others share a cluster.
    """

    max_outer_iters: int = 200
    free_energy_rel_tol: float = 1e-8
    nr_max_iters: int = 25
    nr_grad_tol: float = 1e-8
    n_restarts: int = 10
    init_strategy: str = INIT_RANDOM_SOFT
    ridge: float = 1e-8
    min_cluster_mass: float = 1e-6
    seed: int = 0
    predictor_bound: float = 30.0
    cov_weight: str = "m"
    split_merge_rounds: int = 2

    def __post_init__(self):
        if self.max_outer_iters < 1 or self.nr_max_iters < 1 or self.n_restarts < 1:
            raise ValueError("iteration and restart counts must be >= 1")
        if self.split_merge_rounds < 0:
            raise ValueError("split_merge_rounds must be >= 0")
        if self.free_energy_rel_tol <= 0 or self.nr_grad_tol <= 0:
            raise ValueError("tolerances must be > 0")
        if self.ridge < 0 or self.min_cluster_mass <= 0 or self.predictor_bound <= 0:
            raise ValueError("ridge >= 0, min_cluster_mass > 0, predictor_bound > 0 required")
        if self.init_strategy not in (INIT_RANDOM_SOFT, INIT_KMEANS_LIKE):
            raise ValueError(f"unknown init_strategy {self.init_strategy!r}")
        if self.cov_weight not in ("m", "1"):
            raise ValueError(f"cov_weight must be 'm' or '1', got {self.cov_weight!r}")


@dataclass(frozen=True)
class FitResult:
    """Outcome of one fit: parameters, posteriors, and the ascent trace.

    free_energy_trace holds one value per sub-step, starting with the
    value right after initialization; it is validated non-decreasing up
    to the documented slack. map_labels must be the argmax of the
    assignments (checked at construction).
    """

    params: ModelParams
    assignments: SoftAssignments
    free_energy_trace: np.ndarray
    converged: bool
    n_iters: int
    map_labels: HardLabels

    def __post_init__(self):
        tr = np.array(self.free_energy_trace, dtype=float)
        if tr.ndim != 1 or tr.size < 1:
            raise ParamValidationError("free_energy_trace must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(tr)):
            raise ParamValidationError("free_energy_trace contains non-finite values")
        slack = _TRACE_SLACK * np.maximum(np.abs(tr[:-1]), np.abs(tr[1:])) + 1e-12
        drops = np.diff(tr) + slack
        if np.any(drops < 0):
            worst = int(np.argmin(drops))
            raise ParamValidationError(
                f"free energy decreased at step {worst + 1}: {tr[worst]!r} -> {tr[worst + 1]!r}"
            )
        tr.setflags(write=False)
        object.__setattr__(self, "free_energy_trace", tr)
        expected = map_labels(self.assignments)
        if not np.array_equal(expected.row_labels, self.map_labels.row_labels) or not np.array_equal(
            expected.col_labels, self.map_labels.col_labels
        ):
            raise ParamValidationError("map_labels inconsistent with assignments")

    @property
    def final_free_energy(self) -> float:
        return float(self.free_energy_trace[-1])


def map_labels(assignments: SoftAssignments) -> HardLabels:
    """Hard labels by per-row argmax; ties go to the smallest index. 1-based."""
    return HardLabels(
        assignments.row_probs.argmax(axis=1) + 1,
        assignments.col_probs.argmax(axis=1) + 1,
    )


def _block_predictors(y_aug: np.ndarray, coefs: np.ndarray):
    """eta[i,k,l] = y_aug_i . coefs[k,l] and its softplus, shapes (n,g,d)."""
    eta = np.tensordot(y_aug, coefs, axes=([1], [2]))
    return eta, np.logaddexp(0.0, eta)


def _softmax_rows(logits: np.ndarray) -> np.ndarray:
    probs = np.exp(logits - logsumexp(logits, axis=1, keepdims=True))
    # flush vanishing mass to exact zero: a subnormal residue here would
    # make the matching proportion underflow to 0 and 0*log 0 to -inf
    probs[probs < 1e-300] = 0.0
    return probs


def row_e_step(
    x: BinaryMatrix, y: CovariateTable, r, params: ModelParams, cov_weight: str = "m"
) -> np.ndarray:
    """Posterior over row clusters given column posteriors r and params.

    log t_ik, up to the per-row normalizer, is
        log pi_k + W log phi(y_i; mu_k, Sigma_k)
        + sum_l [ (x r)_il eta_ikl - r_.l softplus(eta_ikl) ]
    with W the covariate weight (m by default). Normalization is done by
    log-sum-exp so nothing underflows.
    """
    r = np.asarray(r, dtype=float)
    eta, sp = _block_predictors(y.augmented, params.coefs)
    xr = x.values @ r
    rmass = r.sum(axis=0)
    bern = np.einsum("il,ikl->ik", xr, eta) - sp @ rmass
    w = covariate_density_weight(cov_weight, x.m)
    with np.errstate(divide="ignore"):
        logpi = np.log(params.row_props)
    return _softmax_rows(logpi[None, :] + w * gaussian_cluster_logpdfs(y, params) + bern)


def _col_scores(x: BinaryMatrix, y: CovariateTable, t, params: ModelParams) -> np.ndarray:
    """Unnormalized column log-posteriors, one row per column of x."""
    t = np.asarray(t, dtype=float)
    eta, sp = _block_predictors(y.augmented, params.coefs)
    lin = np.einsum("ik,ikl->il", t, eta)
    base = np.einsum("ik,ikl->l", t, sp)
    with np.errstate(divide="ignore"):
        logrho = np.log(params.col_props)
    return logrho[None, :] + x.values.T @ lin - base[None, :]


def col_e_step(x: BinaryMatrix, y: CovariateTable, t, params: ModelParams) -> np.ndarray:
    """Posterior over column clusters given row posteriors t and params.

    The covariate density cancels in the column posterior (it does not
    involve w), so only the Bernoulli terms and log rho_l appear.
    """
    return _softmax_rows(_col_scores(x, y, t, params))


def m_step_proportions(t, r):
    """Closed-form proportion updates: pi_k = t_.k / n, rho_l = r_.l / m."""
    t = np.asarray(t, dtype=float)
    r = np.asarray(r, dtype=float)
    return t.sum(axis=0) / t.shape[0], r.sum(axis=0) / r.shape[0]


def m_step_gaussian(
    t, y: CovariateTable, ridge: float = 1e-8, min_cluster_mass: float = 1e-6
):
    """Weighted Gaussian MLE per row cluster, with a ridge on the covariance.

    Raises EmptyCluster when a cluster's posterior mass drops below
    min_cluster_mass; the fitting loop treats that restart as failed
    rather than reseeding mid-run (which would break monotonicity).
    """
    t = np.asarray(t, dtype=float)
    mass = t.sum(axis=0)
    low = np.flatnonzero(mass < min_cluster_mass)
    if low.size:
        raise EmptyCluster(
            f"row cluster {low[0] + 1} collapsed (mass {mass[low[0]]:.3e})"
        )
    g = t.shape[1]
    p = y.p
    means = (t.T @ y.values) / mass[:, None]
    diffs = y.values[None, :, :] - means[:, None, :]
    covs = np.einsum("ki,kip,kiq->kpq", t.T, diffs, diffs) / mass[:, None, None]
    covs = covs + ridge * np.eye(p)[None, :, :]
    if p == 0:
        covs = np.zeros((g, 0, 0))
    return means, covs


def weighted_logistic_objective(beta, y_aug, row_weights, success_counts, trial_mass) -> float:
    """Weighted binomial log-likelihood of one block's logistic problem.

    Row i contributes row_weights_i * (success_counts_i * eta_i -
    trial_mass * softplus(eta_i)), eta_i = y_aug_i . beta. In the block
    problem row_weights are the row posteriors t_ik, success_counts_i is
    the r-weighted count of ones in row i, and trial_mass is r_.l.
    """
    eta = y_aug @ beta
    return float(np.dot(row_weights, success_counts * eta - trial_mass * np.logaddexp(0.0, eta)))


def weighted_logistic_gradient(beta, y_aug, row_weights, success_counts, trial_mass) -> np.ndarray:
    eta = y_aug @ beta
    return y_aug.T @ (row_weights * (success_counts - trial_mass * expit(eta)))


def weighted_logistic_hessian(beta, y_aug, row_weights, success_counts, trial_mass) -> np.ndarray:
    eta = y_aug @ beta
    sig = expit(eta)
    w = row_weights * trial_mass * sig * (1.0 - sig)
    return -(y_aug.T * w) @ y_aug


def _newton_block(y_aug, row_weights, success_counts, trial_mass, beta_init, cfg: BemConfig):
    """Damped Newton ascent of one block's objective inside the predictor box.

    Steps are scaled so every linear predictor stays in
    [-predictor_bound, predictor_bound], then halved until the objective
    does not decrease. A singular Hessian is retried with ridge boosts.
    The gradient stop is relative to the block's Bernoulli mass so the
    iteration count does not grow with the data size. Returns
    (beta, clamped) where clamped records a binding box.
    """
    beta = np.array(beta_init, dtype=float)
    q = beta.size
    obj = weighted_logistic_objective(beta, y_aug, row_weights, success_counts, trial_mass)
    bound = cfg.predictor_bound
    eye = np.eye(q)
    grad_scale = 1.0 + trial_mass * float(np.sum(row_weights))

    for _ in range(cfg.nr_max_iters):
        grad = weighted_logistic_gradient(beta, y_aug, row_weights, success_counts, trial_mass)
        if np.max(np.abs(grad)) < cfg.nr_grad_tol * grad_scale:
            break
        hess = weighted_logistic_hessian(beta, y_aug, row_weights, success_counts, trial_mass)
        neg_h = -hess
        delta = None
        boost = 0.0
        for _ in range(8):
            try:
                cand = np.linalg.solve(neg_h + boost * eye, grad)
            except np.linalg.LinAlgError:
                cand = None
            if cand is not None and np.all(np.isfinite(cand)):
                delta = cand
                break
            boost = max(cfg.ridge, 1e-12) if boost == 0.0 else boost * 1e3
        if delta is None:
            break

        eta = y_aug @ beta
        deta = y_aug @ delta
        with np.errstate(divide="ignore", invalid="ignore"):
            caps = np.where(
                deta > 0,
                (bound - eta) / deta,
                np.where(deta < 0, (-bound - eta) / deta, np.inf),
            )
        s = min(1.0, float(caps.min())) if caps.size else 1.0
        if s <= 0.0:
            break
        accepted = False
        dmax = float(np.max(np.abs(delta)))
        bref = 1.0 + float(np.max(np.abs(beta)))
        for _ in range(60):
            cand_beta = beta + s * delta
            cand_obj = weighted_logistic_objective(
                cand_beta, y_aug, row_weights, success_counts, trial_mass
            )
            if cand_obj >= obj:
                beta, obj = cand_beta, cand_obj
                accepted = True
                break
            s *= 0.5
            if s * dmax < 1e-15 * bref:
                break
        if not accepted:
            break

    eta = y_aug @ beta
    clamped = bool(eta.size and np.max(np.abs(eta)) >= bound - 1e-6)
    return beta, clamped


def m_step_beta(x: BinaryMatrix, y: CovariateTable, t, r, beta_init, cfg: BemConfig):
    """Per-block logistic coefficient updates, warm-started from beta_init.

    Blocks are independent: block (k,l) maximizes
        sum_i t_ik [ (x r)_il eta_i - r_.l softplus(eta_i) ].
    A column cluster with zero mass leaves its coefficients at the warm
    start (its objective is identically zero).

    Returns (coefs, clamped): the (g,d,p+1) array and a (g,d) boolean
    array marking blocks where the separation guard was binding.
    """
    t = np.asarray(t, dtype=float)
    r = np.asarray(r, dtype=float)
    beta_init = np.asarray(beta_init, dtype=float)
    g, d = t.shape[1], r.shape[1]
    xr = x.values @ r
    rmass = r.sum(axis=0)
    coefs = np.empty_like(beta_init)
    clamped = np.zeros((g, d), dtype=bool)
    for k in range(g):
        for l in range(d):
            coefs[k, l], clamped[k, l] = _newton_block(
                y.augmented, t[:, k], xr[:, l], rmass[l], beta_init[k, l], cfg
            )
    return coefs, clamped


def free_energy(
    x: BinaryMatrix, y: CovariateTable, t, r, params: ModelParams, cov_weight: str = "m"
) -> float:
    """Variational lower bound on the log-likelihood at (t, r, params).

    Sum of the expected complete-data log-likelihood under the
    factorized posterior (mixing proportions, Bernoulli cells, covariate
    density with weight W) and the entropies of t and r; 0 log 0 is 0.
    """
    t = np.asarray(t, dtype=float)
    r = np.asarray(r, dtype=float)
    eta, sp = _block_predictors(y.augmented, params.coefs)
    xr = x.values @ r
    rmass = r.sum(axis=0)
    tmass = t.sum(axis=0)
    bern = float(np.einsum("ik,il,ikl->", t, xr, eta)) - float(
        np.einsum("ik,ikl,l->", t, sp, rmass)
    )
    w = covariate_density_weight(cov_weight, x.m)
    gauss = w * float(np.einsum("ik,ik->", t, gaussian_cluster_logpdfs(y, params)))
    mix = float(xlogy(tmass, params.row_props).sum()) + float(
        xlogy(rmass, params.col_props).sum()
    )
    entropy = -float(xlogy(t, t).sum()) - float(xlogy(r, r).sum())
    return mix + bern + gauss + entropy


def _standardize(feats: np.ndarray) -> np.ndarray:
    mu = feats.mean(axis=0)
    sd = feats.std(axis=0)
    sd[sd == 0] = 1.0
    return (feats - mu) / sd


def _kpp_centers(feats: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding: spread centers via squared-distance sampling."""
    n = feats.shape[0]
    centers = np.empty((k, feats.shape[1]))
    centers[0] = feats[rng.integers(n)]
    d2 = ((feats - centers[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total <= 0:
            centers[c:] = feats[rng.integers(n, size=k - c)]
            break
        centers[c] = feats[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, ((feats - centers[c]) ** 2).sum(axis=1))
    return centers


def _lloyd(feats: np.ndarray, k: int, rng: np.random.Generator, n_iter: int = 10) -> np.ndarray:
    """One k-means++ seeded Lloyd run; restart diversity comes from the rng."""
    n = feats.shape[0]
    if k == 1:
        return np.zeros(n, dtype=np.int64)
    centers = _kpp_centers(feats, k, rng)
    labels = np.zeros(n, dtype=np.int64)
    for _ in range(n_iter):
        d2 = ((feats[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        labels = d2.argmin(axis=1)
        for c in range(k):
            mask = labels == c
            if mask.any():
                centers[c] = feats[mask].mean(axis=0)
            else:
                centers[c] = feats[rng.integers(n)]
    return labels


def _soft_from_hard(labels: np.ndarray, k: int) -> np.ndarray:
    n = labels.size
    if k == 1:
        return np.ones((n, 1))
    probs = np.full((n, k), 0.1 / (k - 1))
    probs[np.arange(n), labels] = 0.9
    return probs


def _init_assignments(x, y, g, d, cfg: BemConfig, rng: np.random.Generator):
    """Starting soft assignments for one restart.

    kmeans_like first clusters rows on (covariates, row means), then
    clusters columns on per-row-cluster block means together with the
    within-cluster covariance between cells and covariates; the latter
    separates column clusters that differ only through covariate slopes.
    """
    if cfg.init_strategy == INIT_RANDOM_SOFT:
        t = rng.dirichlet(np.full(g, 1.5), size=x.n)
        r = rng.dirichlet(np.full(d, 1.5), size=x.m)
        return t, r
    row_feats = _standardize(np.hstack([y.values, x.values.mean(axis=1, keepdims=True)]))
    z0 = _lloyd(row_feats, g, rng)
    blocks = []
    for k in range(g):
        mask = z0 == k
        if mask.any():
            xk = x.values[mask]
            yk = y.values[mask] - y.values[mask].mean(axis=0)
            blocks.append(xk.mean(axis=0)[:, None])
            blocks.append(xk.T @ yk / mask.sum())
        else:
            blocks.append(np.zeros((x.m, 1)))
            blocks.append(np.zeros((x.m, y.p)))
    col_feats = _standardize(np.hstack(blocks))
    t = _soft_from_hard(z0, g)
    r = _soft_from_hard(_lloyd(col_feats, d, rng), d)
    return t, r


def _single_fit(x, y, g, d, cfg: BemConfig, rng: np.random.Generator, init=None) -> FitResult:
    t, r = _init_assignments(x, y, g, d, cfg, rng) if init is None else init
    pi, rho = m_step_proportions(t, r)
    means, covs = m_step_gaussian(t, y, cfg.ridge, cfg.min_cluster_mass)
    coefs, _ = m_step_beta(x, y, t, r, np.zeros((g, d, y.p + 1)), cfg)
    params = ModelParams(pi, rho, coefs, means, covs)

    trace = [free_energy(x, y, t, r, params, cfg.cov_weight)]
    converged = False
    n_iters = 0
    for _ in range(cfg.max_outer_iters):
        t = row_e_step(x, y, r, params, cfg.cov_weight)
        trace.append(free_energy(x, y, t, r, params, cfg.cov_weight))

        pi = t.sum(axis=0) / x.n
        means, covs = m_step_gaussian(t, y, cfg.ridge, cfg.min_cluster_mass)
        coefs, _ = m_step_beta(x, y, t, r, params.coefs, cfg)
        params = ModelParams(pi, params.col_props, coefs, means, covs)
        trace.append(free_energy(x, y, t, r, params, cfg.cov_weight))

        r = col_e_step(x, y, t, params)
        trace.append(free_energy(x, y, t, r, params, cfg.cov_weight))

        rho = r.sum(axis=0) / x.m
        coefs, _ = m_step_beta(x, y, t, r, params.coefs, cfg)
        params = ModelParams(params.row_props, rho, coefs, means, covs)
        trace.append(free_energy(x, y, t, r, params, cfg.cov_weight))

        n_iters += 1
        prev, cur = trace[-5], trace[-1]
        if cur - prev < cfg.free_energy_rel_tol * (abs(prev) + 1e-12):
            converged = True
            break

    assignments = SoftAssignments(t, r)
    return FitResult(
        params=params,
        assignments=assignments,
        free_energy_trace=np.array(trace),
        converged=converged,
        n_iters=n_iters,
        map_labels=map_labels(assignments),
    )


def _merge_split_candidates(
    x, y, result: FitResult, cfg: BemConfig, rng: np.random.Generator, n_moves: int = 3
):
    """Candidate (t0, r0) inits that merge one column cluster into another
    and split a heterogeneous cluster onto the freed index.

    Merge pairs are ranked by the column-score cost of reassigning the
    donor's columns (a cheap reassignment flags a duplicated cluster);
    for each pair the two most heterogeneous clusters are tried as split
    targets. Heterogeneity and the 2-means splits both use per-column
    score statistics of the target block's logistic fit, whitened by
    their Fisher scale: under a correct homogeneous block the whitened
    deviations are unit-scale noise for every block, so the ranking is
    not hijacked by mid-scale blocks' larger binomial variance, and
    clusters differing only through covariate slopes still separate.
    """
    t = result.assignments.row_probs
    d = result.assignments.col_probs.shape[1]
    if d < 2 or x.m < 4:
        return []
    w = result.assignments.col_probs.argmax(axis=1)
    scores = _col_scores(x, y, t, result.params)
    moves = []
    for b in range(d):
        cols = np.nonzero(w == b)[0]
        if cols.size == 0:
            continue
        loss = scores[cols, b][:, None] - scores[cols]
        tot = loss.sum(axis=0)
        for a in range(d):
            if a != b:
                moves.append((float(tot[a]), b, a))
    moves.sort()

    aug = y.augmented
    g = t.shape[1]

    def score_feats(cols, target):
        eta_c = aug @ result.params.coefs[:, target, :].T
        sig = expit(eta_c)
        dims = []
        for k in range(g):
            wk = t[:, k]
            cross = x.values[:, cols].T @ (wk[:, None] * aug)
            fisher = np.sqrt((wk * sig[:, k] * (1.0 - sig[:, k])) @ (aug**2) + 1e-12)
            dims.append(cross / fisher)
        return np.hstack(dims)

    def sharpen(cols, halves, iters=3):
        """Two-block column EM on x[:, cols] with fixed row posteriors and
        uniform mixing weights; purifies a noisy 2-means nucleation so the
        global refit does not wash the split back out."""
        xs = BinaryMatrix(x.values[:, cols])
        r = _soft_from_hard(halves, 2)
        beta = np.zeros((g, 2, aug.shape[1]))
        for _ in range(iters):
            beta, _ = m_step_beta(xs, y, t, r, beta, cfg)
            eta, sp = _block_predictors(aug, beta)
            lin = np.einsum("ik,ikl->il", t, eta)
            base = np.einsum("ik,ikl->l", t, sp)
            r = _softmax_rows(xs.values.T @ lin - base[None, :])
        return r.argmax(axis=1)

    candidates = []
    for _, b, a in moves[:n_moves]:
        merged = w.copy()
        merged[merged == b] = a
        ranked = []
        feats = {}
        for c in range(d):
            cols = np.nonzero(merged == c)[0]
            if cols.size < 2:
                continue
            sf = score_feats(cols, c)
            feats[c] = (cols, sf)
            dev = sf - sf.mean(axis=0)
            ranked.append((-float((dev**2).mean()), c))
        ranked.sort()
        for _, target in ranked[:2]:
            cols, sf = feats[target]
            halves = _lloyd(sf, 2, rng)
            if halves.min() == halves.max():
                continue
            halves = sharpen(cols, halves)
            if halves.min() == halves.max():
                continue
            lab = merged.copy()
            lab[cols[halves == 1]] = b
            candidates.append((t, _soft_from_hard(lab, d)))
    return candidates


def fit(x: BinaryMatrix, y: CovariateTable, g: int, d: int, cfg: BemConfig | None = None) -> FitResult:
    """Best-of-restarts block-EM fit with g row and d column clusters.

    Runs cfg.n_restarts independent initializations (sub-seeded from
    cfg.seed) and keeps the result with the highest final free energy,
    then attempts up to cfg.split_merge_rounds merge-and-split
    refinements of the column clustering, accepting a refit only when it
    improves the free energy. Restarts that collapse a cluster are
    skipped; if every restart collapses, AllRestartsFailed is raised.
    """
    if cfg is None:
        cfg = BemConfig()
    if x.n != y.n:
        raise LengthMismatch(f"x has {x.n} rows but y has {y.n}")
    if not (1 <= g <= x.n) or not (1 <= d <= x.m):
        raise ParamValidationError(
            f"need 1 <= g <= n and 1 <= d <= m, got g={g}, d={d}, n={x.n}, m={x.m}"
        )
    best = None
    last_error = None
    seq = np.random.SeedSequence(cfg.seed)
    for child in seq.spawn(cfg.n_restarts):
        rng = np.random.default_rng(child)
        try:
            result = _single_fit(x, y, g, d, cfg, rng)
        except (EmptyCluster, NotPositiveDefinite) as exc:
            last_error = exc
            continue
        if best is None or result.final_free_energy > best.final_free_energy:
            best = result
    if best is None:
        raise AllRestartsFailed(
            f"all {cfg.n_restarts} restarts failed; last failure: {last_error}"
        )
    for _ in range(cfg.split_merge_rounds):
        rng = np.random.default_rng(seq.spawn(1)[0])
        improved = None
        for init in _merge_split_candidates(x, y, best, cfg, rng):
            try:
                candidate = _single_fit(x, y, g, d, cfg, rng, init=init)
            except (EmptyCluster, NotPositiveDefinite):
                continue
            if candidate.final_free_energy > best.final_free_energy and (
                improved is None
                or candidate.final_free_energy > improved.final_free_energy
            ):
                improved = candidate
        if improved is None:
            break
        best = improved
    return best


def config_with_seed(cfg: BemConfig, seed: int) -> BemConfig:
    """Copy of cfg with a different seed (restarts re-derive from it)."""
    return replace(cfg, seed=int(seed))
