"""The contaminated Gaussian distribution.

A two-component Gaussian mixture sharing one mean: the "good" component
with covariance Sigma and prior weight alpha, and a "bad" component with
inflated covariance eta*Sigma. Provides the density, the dichotomous
scale-weight law, the posterior good/bad rule, and ECME fitting.
"""

import math
from dataclasses import dataclass

import numpy as np

from .config import NEAR_GAUSSIAN_ALPHA, NEAR_GAUSSIAN_ETA, FitConfig
from .errors import DegenerateScatter, InvalidSupport, NotPositiveDefinite
from .numerics import (
    ETA_MAX,
    LOG_2PI,
    BoxedPoint2,
    SpdFactor,
    nelder_mead_maximize,
    spd_factorize,
)


@dataclass(frozen=True)
class CnParams:
    """Parameters of one contaminated Gaussian distribution."""

    mu: np.ndarray     # (p,) location
    sigma: np.ndarray  # (p, p) scale of the good component
    alpha: float       # proportion of good points, in (0, 1)
    eta: float         # covariance inflation of the bad component, > 1

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float)
        sigma = np.asarray(self.sigma, dtype=float)
        if mu.ndim != 1 or sigma.shape != (mu.size, mu.size):
            raise ValueError("mu must be a p-vector and sigma a p x p matrix")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if not 1.0 < self.eta <= ETA_MAX:
            raise ValueError(f"eta must be in (1, {ETA_MAX}], got {self.eta}")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)

    @property
    def dim(self) -> int:
        return self.mu.size


@dataclass
class CnFitReport:
    """Everything the ECME fit produced besides the parameters themselves."""

    params: CnParams
    loglik_trace: np.ndarray
    iterations: int
    converged: bool
    weights: np.ndarray    # E[W | x_i], in (1/eta, 1)
    good_prob: np.ndarray  # posterior probability each point is good
    bad_flags: np.ndarray  # good_prob <= 1/2

    @property
    def loglik(self) -> float:
        return float(self.loglik_trace[-1])


def log_component_parts(quads, log_det, p, alpha, eta):
    """Log of the two weighted mixture terms from precomputed quadratic forms.

    Returns (log alpha*phi(x; mu, Sigma), log (1-alpha)*phi(x; mu, eta*Sigma))
    given quads = (x-mu)' Sigma^{-1} (x-mu) and log_det = log|Sigma|.
    """
    base = -0.5 * (p * LOG_2PI + log_det)
    log_good = math.log(alpha) + base - 0.5 * quads
    log_bad = math.log1p(-alpha) + base - 0.5 * p * math.log(eta) - 0.5 * quads / eta
    return log_good, log_bad


def _parts_for(x, params: CnParams):
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 1
    rows = np.atleast_2d(x) - params.mu
    fac = spd_factorize(params.sigma)
    lg, lb = log_component_parts(
        fac.quadform(rows), fac.log_det, params.dim, params.alpha, params.eta
    )
    return lg, lb, scalar


def _maybe_scalar(values, scalar):
    return float(values[0]) if scalar else values


def cn_logpdf(x, params: CnParams):
    """Log-density of the contaminated Gaussian at x (a p-vector or n x p rows)."""
    lg, lb, scalar = _parts_for(x, params)
    return _maybe_scalar(np.logaddexp(lg, lb), scalar)


def pc_pmf(w: float, alpha: float, eta: float) -> float:
    """Mass function of the dichotomous scale weight W on {1, 1/eta}."""
    if abs(w - 1.0) <= 1e-12:
        exp_good, exp_bad = 1.0, 0.0
    elif abs(w - 1.0 / eta) <= 1e-12:
        exp_good, exp_bad = 0.0, 1.0
    else:
        raise InvalidSupport(f"w={w} is neither 1 nor 1/eta={1.0 / eta}")
    return alpha ** exp_good * (1.0 - alpha) ** exp_bad


def posterior_good(x, params: CnParams):
    """Posterior probability that x came from the good component."""
    lg, lb, scalar = _parts_for(x, params)
    return _maybe_scalar(np.exp(lg - np.logaddexp(lg, lb)), scalar)


def estep_weight(x, params: CnParams):
    """Conditional expectation of the scale weight W given x; lies in (1/eta, 1)."""
    lg, lb, scalar = _parts_for(x, params)
    return _maybe_scalar(weights_from_parts(lg, lb, params.eta), scalar)


def weights_from_parts(log_good, log_bad, eta):
    num = np.logaddexp(log_good, log_bad - math.log(eta))
    return np.exp(num - np.logaddexp(log_good, log_bad))


def cm1_update(X, w):
    """Weighted location and scale: w-weighted mean, scatter with divisor n."""
    X = np.asarray(X, dtype=float)
    w = np.asarray(w, dtype=float)
    n, p = X.shape
    if n < p + 1:
        raise ValueError(f"need at least p+1={p + 1} observations, got {n}")
    if np.any(w <= 0.0):
        raise ValueError("all weights must be positive")
    mu = (w[:, None] * X).sum(axis=0) / w.sum()
    centered = X - mu
    sigma = (w[:, None] * centered).T @ centered / n
    try:
        spd_factorize(sigma)
    except NotPositiveDefinite as exc:
        raise DegenerateScatter(
            "weighted scatter is not positive definite; the data carry too "
            "little spread for a scale estimate"
        ) from exc
    return mu, sigma


def cn_objective(quads, log_det, p, weights=None):
    """Observed log-likelihood over (alpha, eta) with everything else fixed."""

    def objective(point: BoxedPoint2) -> float:
        lg, lb = log_component_parts(quads, log_det, p, point.alpha, point.eta)
        ll = np.logaddexp(lg, lb)
        return float(ll.sum() if weights is None else ll @ weights)

    return objective


def cm2_update(X, mu, sigma, start, alpha_min=0.5, nm_tol=1e-8, nm_max_evals=500):
    """Maximize the observed log-likelihood over (alpha, eta), location/scale fixed.

    ``start`` is an (alpha, eta) pair; the result never has a lower observed
    log-likelihood than the start. Returns (alpha, eta, loglik).
    """
    X = np.asarray(X, dtype=float)
    fac = spd_factorize(sigma)
    quads = fac.quadform(X - np.asarray(mu, dtype=float))
    objective = cn_objective(quads, fac.log_det, X.shape[1])
    start_point = BoxedPoint2(alpha=start[0], eta=start[1], alpha_min=alpha_min)
    best, value = nelder_mead_maximize(objective, start_point, nm_tol, nm_max_evals)
    return best.alpha, best.eta, value


def count_params_cn(p: int, contaminated: bool = True) -> int:
    """Free parameters of one (contaminated) Gaussian with unrestricted scale."""
    return p + p * (p + 1) // 2 + (2 if contaminated else 0)


def fit_cn(
    X,
    cfg: FitConfig = FitConfig(),
    freeze_contamination: tuple | None = None,
) -> CnFitReport:
    """Fit a contaminated Gaussian by ECME.

    Starts from the Gaussian MLE with (alpha, eta) at the near-Gaussian
    corner, iterates weight E-steps, weighted location/scale updates, and
    direct 2-D maximization of the observed log-likelihood, and stops by
    the Aitken rule. ``freeze_contamination`` pins (alpha, eta), turning
    the fit into a weighted Gaussian estimator; used for nesting checks.
    """
    from .selection import aitken_converged

    X = np.asarray(X, dtype=float)
    n, p = X.shape
    if n < p + 1:
        raise ValueError(f"need at least p+1={p + 1} observations, got {n}")

    mu = X.mean(axis=0)
    centered = X - mu
    sigma = centered.T @ centered / n
    if freeze_contamination is not None:
        alpha, eta = freeze_contamination
    else:
        alpha, eta = NEAR_GAUSSIAN_ALPHA, NEAR_GAUSSIAN_ETA

    def observed_loglik(fac: SpdFactor, mu_cur) -> float:
        lg, lb = log_component_parts(
            fac.quadform(X - mu_cur), fac.log_det, p, alpha, eta
        )
        return float(np.logaddexp(lg, lb).sum())

    fac = spd_factorize(sigma)
    trace = [observed_loglik(fac, mu)]
    converged = False
    iterations = 0
    for iterations in range(1, cfg.max_iter + 1):
        lg, lb = log_component_parts(fac.quadform(X - mu), fac.log_det, p, alpha, eta)
        w = weights_from_parts(lg, lb, eta)
        mu, sigma = cm1_update(X, w)
        fac = spd_factorize(sigma)
        if freeze_contamination is None:
            quads = fac.quadform(X - mu)
            objective = cn_objective(quads, fac.log_det, p)
            start = BoxedPoint2(alpha=alpha, eta=eta, alpha_min=cfg.alpha_min)
            best, value = nelder_mead_maximize(
                objective, start, cfg.nm_tol, cfg.nm_max_evals
            )
            alpha, eta = best.alpha, best.eta
            trace.append(value)
        else:
            trace.append(observed_loglik(fac, mu))
        if len(trace) >= 3 and aitken_converged(trace[-3:], cfg.epsilon):
            converged = True
            break

    params = CnParams(mu=mu, sigma=sigma, alpha=alpha, eta=eta)
    lg, lb = log_component_parts(fac.quadform(X - mu), fac.log_det, p, alpha, eta)
    good_prob = np.exp(lg - np.logaddexp(lg, lb))
    return CnFitReport(
        params=params,
        loglik_trace=np.asarray(trace),
        iterations=iterations,
        converged=converged,
        weights=weights_from_parts(lg, lb, eta),
        good_prob=good_prob,
        bad_flags=good_prob <= 0.5,
    )
