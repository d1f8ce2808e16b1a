"""Convergence monitoring, information criteria, LR tests, and grid search."""

import math
from dataclasses import dataclass, field

import numpy as np

from .config import FitConfig
from .errors import AllCandidatesFailed, InvalidNesting
from .numerics import chi2_sf

_STALL_TOL = 1e-12


def aitken_converged(trace, epsilon: float) -> bool:
    """Stopping decision from the last three log-likelihood values.

    Extrapolates the trace to its asymptote and stops once the projected
    gain over the middle value falls below epsilon. A stalled trace
    (consecutive values closer than 1e-12) counts as converged; an
    acceleration ratio >= 1 means the asymptote estimate is invalid, so
    the decision is "keep going".
    """
    l0, l1, l2 = (float(v) for v in trace)
    if abs(l1 - l0) < _STALL_TOL:
        return True
    ratio = (l2 - l1) / (l1 - l0)
    if ratio >= 1.0:
        return False
    projected_gain = (l2 - l1) / (1.0 - ratio)
    return projected_gain < epsilon


@dataclass
class ConvergenceMonitor:
    """Accumulates a log-likelihood trace and applies the Aitken rule."""

    epsilon: float
    trace: list = field(default_factory=list)

    def update(self, loglik: float) -> bool:
        """Append a value; return True once the trace has converged."""
        self.trace.append(float(loglik))
        if len(self.trace) < 3:
            return False
        return aitken_converged(self.trace[-3:], self.epsilon)


def bic(loglik: float, m: int, n: int) -> float:
    """2*loglik - m*log(n); larger is better under this sign convention."""
    if m < 1:
        raise ValueError(f"free-parameter count must be positive, got {m}")
    if n < 1:
        raise ValueError(f"sample size must be positive, got {n}")
    return 2.0 * float(loglik) - m * math.log(n)


@dataclass(frozen=True)
class LrTestResult:
    statistic: float
    p_value: float


def lr_test(loglik_null: float, loglik_alt: float, df: int) -> LrTestResult:
    """Likelihood-ratio test of nested fits; tiny negative statistics clamp to 0."""
    if loglik_alt < loglik_null - 1e-6:
        raise InvalidNesting(
            f"alternative log-likelihood {loglik_alt} is below the null "
            f"{loglik_null} beyond tolerance"
        )
    statistic = max(0.0, 2.0 * (float(loglik_alt) - float(loglik_null)))
    return LrTestResult(statistic=statistic, p_value=chi2_sf(statistic, df))


@dataclass(frozen=True)
class ModelScore:
    """Outcome of one grid-search candidate."""

    family: str
    g: int
    q: int
    loglik: float | None
    m: int | None
    n: int
    bic: float | None
    status: str  # "fitted" or "failed"
    reason: str = ""


@dataclass
class GridSearchResult:
    scores: list          # ranked: fitted candidates by BIC, then failures
    best: ModelScore
    best_params: object
    best_report: object


_SINGLE_FAMILIES = ("gfa", "cnfa")
_MIXTURE_FAMILIES = ("mgfa", "mcnfa")


def grid_search(X, family: str, g_range, q_range, cfg: FitConfig = FitConfig()) -> GridSearchResult:
    """Fit every (G, q) candidate and rank by BIC.

    Individual candidate failures are recorded, not fatal; ties are broken
    by fewer free parameters, then fewer components, then fewer factors,
    making the outcome independent of enumeration order. Single-model
    families ignore g_range.
    """
    from . import aecm
    from .errors import CngaussError

    if family not in _SINGLE_FAMILIES + _MIXTURE_FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    g_values = [1] if family in _SINGLE_FAMILIES else sorted(set(int(g) for g in g_range))
    q_values = sorted(set(int(q) for q in q_range))
    if not g_values or not q_values:
        raise ValueError("g_range and q_range must be nonempty")

    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    fitted, failed = [], []
    for g in g_values:
        for q in q_values:
            try:
                params, report = _fit_candidate(aecm, family, X, g, q, cfg)
            except CngaussError as exc:
                failed.append(
                    ModelScore(family, g, q, None, None, n, None, "failed",
                               f"{type(exc).__name__}: {exc}")
                )
                continue
            m = _param_count(family, g, q, X.shape[1])
            score = ModelScore(family, g, q, float(report.loglik), m, n,
                               bic(report.loglik, m, n), "fitted")
            fitted.append((score, params, report))
    if not fitted:
        raise AllCandidatesFailed(
            f"no ({family}, G, q) candidate could be fitted; "
            f"failures: {[s.reason for s in failed]}"
        )
    fitted.sort(key=lambda t: (-t[0].bic, t[0].m, t[0].g, t[0].q))
    best_score, best_params, best_report = fitted[0]
    scores = [t[0] for t in fitted] + failed
    return GridSearchResult(scores=scores, best=best_score,
                            best_params=best_params, best_report=best_report)


def _fit_candidate(aecm, family, X, g, q, cfg):
    if family == "gfa":
        return aecm.fit_gfa(X, q, cfg)
    if family == "cnfa":
        return aecm.fit_cnfa(X, q, cfg)
    if family == "mgfa":
        return aecm.fit_mgfa(X, g, q, cfg)
    return aecm.fit_mcnfa(X, g, q, cfg)


def _param_count(family, g, q, p):
    from .factor import count_params_cnfa
    from .mixture import count_params_mcnfa

    if family in _SINGLE_FAMILIES:
        return count_params_cnfa(p, q, contaminated=(family == "cnfa"))
    return count_params_mcnfa(g, p, q, contaminated=(family == "mcnfa"))
