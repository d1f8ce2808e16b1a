"""AECM fitters for the factor-analysis family.

One engine drives all four fitters. Each iteration refreshes the
responsibilities and scale weights, then runs up to three cycles:
(1) mixing proportions and locations, (2) per-component (alpha, eta) by
direct 2-D maximization, (3) loadings and uniquenesses. The Gaussian
variants pin (alpha, eta) at the near-Gaussian corner and skip cycle 2,
which keeps them exactly nested inside the contaminated fitters.
"""

from dataclasses import dataclass, replace

import numpy as np

from .config import NEAR_GAUSSIAN_ALPHA, NEAR_GAUSSIAN_ETA, FitConfig
from .errors import EmptyComponent, InvalidRank
from .factor import CnfaParams, count_params_cnfa, eigen_init, psi_floor_for
from .mixture import (
    McnfaParams,
    count_params_mcnfa,
    cycle1_update,
    cycle2_update,
    cycle3_update,
    estep_responsibilities,
    estep_weights,
    kmeans_init,
    mixture_loglik,
    posterior_good_matrix,
    with_component_updates,
)
from .selection import aitken_converged, bic


@dataclass
class FitReport:
    """Fit summary for a single factor analyzer (Gaussian or contaminated)."""

    params: CnfaParams
    loglik_trace: np.ndarray
    iterations: int
    converged: bool
    weights: np.ndarray
    good_prob: np.ndarray
    bad_flags: np.ndarray
    bic: float
    cycle_trace: np.ndarray | None = None

    @property
    def loglik(self) -> float:
        return float(self.loglik_trace[-1])


@dataclass
class MixtureFitReport:
    """Fit summary for a mixture of factor analyzers."""

    params: McnfaParams
    loglik_trace: np.ndarray
    iterations: int
    converged: bool
    z: np.ndarray          # (n, G) responsibilities at the final parameters
    w: np.ndarray          # (n, G) scale weights at the final parameters
    labels: np.ndarray     # MAP component per observation
    good_prob: np.ndarray  # posterior good probability within the MAP component
    bad_flags: np.ndarray
    bic: float
    cycle_trace: np.ndarray | None = None

    @property
    def loglik(self) -> float:
        return float(self.loglik_trace[-1])


def _initial_params(X, n_components, q, cfg, alpha, eta) -> McnfaParams:
    """Hard k-means partition, then a spectral start per component."""
    n = X.shape[0]
    labels = kmeans_init(X, n_components, cfg.kmeans_restarts, cfg.seed)
    psi_floor = psi_floor_for(X)
    components, counts = [], []
    for g in range(n_components):
        block = X[labels == g]
        if block.shape[0] < q + 1:
            raise EmptyComponent(
                f"initial partition gives component {g} only {block.shape[0]} "
                f"points; need at least q+1={q + 1}"
            )
        mu = block.mean(axis=0)
        centered = block - mu
        sample_cov = centered.T @ centered / block.shape[0]
        lam, psi = eigen_init(sample_cov, q, psi_floor)
        components.append(
            CnfaParams(mu=mu, loadings=lam, uniquenesses=psi, alpha=alpha, eta=eta)
        )
        counts.append(block.shape[0])
    return McnfaParams(mixing=np.asarray(counts, dtype=float) / n,
                       components=tuple(components))


def _run_engine(X, n_components, q, cfg, frozen, init, track_cycles=False):
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    if not 1 <= q < p:
        raise InvalidRank(f"need 1 <= q < p, got q={q}, p={p}")
    if n <= p:
        raise ValueError(f"need more observations than variables, got n={n}, p={p}")

    psi_floor = psi_floor_for(X)
    if init is not None:
        params = init
    else:
        alpha, eta = frozen if frozen is not None else (NEAR_GAUSSIAN_ALPHA,
                                                        NEAR_GAUSSIAN_ETA)
        params = _initial_params(X, n_components, q, cfg, alpha, eta)

    trace = [mixture_loglik(X, params)]
    cycles = [trace[0]] if track_cycles else None
    converged = False
    iterations = 0
    for iterations in range(1, cfg.max_iter + 1):
        z = estep_responsibilities(X, params)
        w = estep_weights(X, params)

        mixing, mus = cycle1_update(X, z, w, q)
        params = replace(params, mixing=mixing)
        params = with_component_updates(params, mu=list(mus))
        if track_cycles:
            cycles.append(mixture_loglik(X, params))

        if frozen is None:
            z_mid = estep_responsibilities(X, params)
            pairs = cycle2_update(X, z_mid, params, cfg.alpha_min,
                                  cfg.nm_tol, cfg.nm_max_evals)
            params = with_component_updates(
                params,
                alpha=[a for a, _ in pairs],
                eta=[e for _, e in pairs],
            )
            if track_cycles:
                cycles.append(mixture_loglik(X, params))

        z_late = estep_responsibilities(X, params)
        w_late = estep_weights(X, params)
        updates = cycle3_update(X, z_late, w_late, params, psi_floor)
        params = with_component_updates(
            params,
            loadings=[lam for lam, _ in updates],
            uniquenesses=[psi for _, psi in updates],
        )

        loglik = mixture_loglik(X, params)
        trace.append(loglik)
        if track_cycles:
            cycles.append(loglik)
        if len(trace) >= 3 and aitken_converged(trace[-3:], cfg.epsilon):
            converged = True
            break

    z = estep_responsibilities(X, params)
    w = estep_weights(X, params)
    labels = z.argmax(axis=1)
    good = posterior_good_matrix(X, params)[np.arange(n), labels]
    m = count_params_mcnfa(n_components, p, q, contaminated=frozen is None)
    return MixtureFitReport(
        params=params,
        loglik_trace=np.asarray(trace),
        iterations=iterations,
        converged=converged,
        z=z,
        w=w,
        labels=labels,
        good_prob=good,
        bad_flags=good <= 0.5,
        bic=bic(trace[-1], m, n),
        cycle_trace=np.asarray(cycles) if track_cycles else None,
    )


def _single_report(report: MixtureFitReport, p, q, contaminated) -> tuple[CnfaParams, FitReport]:
    params = report.params.components[0]
    m = count_params_cnfa(p, q, contaminated=contaminated)
    return params, FitReport(
        params=params,
        loglik_trace=report.loglik_trace,
        iterations=report.iterations,
        converged=report.converged,
        weights=report.w[:, 0],
        good_prob=report.good_prob,
        bad_flags=report.bad_flags,
        bic=bic(report.loglik, m, report.z.shape[0]),
    )


def fit_gfa(X, q, cfg: FitConfig = FitConfig()) -> tuple[CnfaParams, FitReport]:
    """Gaussian factor analysis, run as a contaminated fit pinned at the
    near-Gaussian corner so it nests exactly inside ``fit_cnfa``."""
    X = np.asarray(X, dtype=float)
    report = _run_engine(X, 1, q, cfg,
                         frozen=(NEAR_GAUSSIAN_ALPHA, NEAR_GAUSSIAN_ETA), init=None)
    return _single_report(report, X.shape[1], q, contaminated=False)


def fit_cnfa(
    X,
    q,
    cfg: FitConfig = FitConfig(),
    init: CnfaParams | None = None,
    track_cycles: bool = False,
) -> tuple[CnfaParams, FitReport]:
    """Contaminated Gaussian factor analysis by the two-cycle algorithm,
    initialized from the Gaussian fit."""
    X = np.asarray(X, dtype=float)
    if init is None:
        init, _ = fit_gfa(X, q, cfg)
    start = McnfaParams(mixing=np.array([1.0]), components=(init,))
    report = _run_engine(X, 1, q, cfg, frozen=None, init=start,
                         track_cycles=track_cycles)
    params, single = _single_report(report, X.shape[1], q, contaminated=True)
    if track_cycles:
        single.cycle_trace = report.cycle_trace
    return params, single


def fit_mgfa(X, n_components, q, cfg: FitConfig = FitConfig()) -> tuple[McnfaParams, MixtureFitReport]:
    """Mixture of Gaussian factor analyzers (pinned near-Gaussian corner)."""
    report = _run_engine(np.asarray(X, dtype=float), n_components, q, cfg,
                         frozen=(NEAR_GAUSSIAN_ALPHA, NEAR_GAUSSIAN_ETA), init=None)
    return report.params, report


def fit_mcnfa(
    X,
    n_components,
    q,
    cfg: FitConfig = FitConfig(),
    init: McnfaParams | None = None,
    track_cycles: bool = False,
) -> tuple[McnfaParams, MixtureFitReport]:
    """Mixture of contaminated Gaussian factor analyzers by the three-cycle
    algorithm, initialized from the Gaussian mixture fit."""
    X = np.asarray(X, dtype=float)
    if init is None:
        init, _ = fit_mgfa(X, n_components, q, cfg)
    report = _run_engine(X, n_components, q, cfg, frozen=None, init=init,
                         track_cycles=track_cycles)
    return report.params, report
