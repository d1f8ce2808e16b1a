"""Dense linear-algebra and optimization kernel.

Everything the model fitters need that is not model-specific lives here:
SPD factorization with a single jitter retry, Gaussian log-densities,
Woodbury-based inversion and log-determinants for low-rank-plus-diagonal
covariances, a derivative-free 2-D maximizer over a box, and chi-square
tail probabilities. All functions are pure and safe to call concurrently.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import expit, logit
from scipy.stats import chi2 as _chi2

from .errors import NonFiniteObjective, NotPositiveDefinite

LOG_2PI = math.log(2.0 * math.pi)

# Box for the (alpha, eta) search: alpha in (alpha_min, 1), eta in
# (1 + ETA_GAP, ETA_MAX]. The upper bound on eta is a numerical guard only.
ETA_GAP = 1e-6
ETA_MAX = 1000.0
_LOG_ETA_SPAN = math.log(ETA_MAX - 1.0 - ETA_GAP)
_LOG_ETA_MIN = math.log(1e-12)


@dataclass(frozen=True)
class SpdFactor:
    """Lower-triangular Cholesky factor of a symmetric positive-definite matrix.

    Caches the log-determinant and exposes solves and Mahalanobis-style
    quadratic forms without ever forming the inverse.
    """

    dim: int
    lower: np.ndarray
    log_det: float

    def solve(self, b: np.ndarray) -> np.ndarray:
        """Solve M x = b for the factored matrix M."""
        y = solve_triangular(self.lower, b, lower=True)
        return solve_triangular(self.lower, y, lower=True, trans="T")

    def quadform(self, rows: np.ndarray) -> np.ndarray:
        """Row-wise quadratic forms d' M^{-1} d for a (n, p) array of rows."""
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        y = solve_triangular(self.lower, rows.T, lower=True)
        return np.einsum("ij,ij->j", y, y)

    def reconstruct(self) -> np.ndarray:
        return self.lower @ self.lower.T


def spd_factorize(m: np.ndarray) -> SpdFactor:
    """Factor a symmetric positive-definite matrix.

    One jitter retry (1e-10 times the mean diagonal added to the diagonal)
    absorbs round-off on near-singular EM iterates; anything still failing
    raises NotPositiveDefinite.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    sym = 0.5 * (m + m.T)
    try:
        lower = np.linalg.cholesky(sym)
    except np.linalg.LinAlgError:
        jitter = 1e-10 * float(np.mean(np.diag(sym)))
        try:
            lower = np.linalg.cholesky(sym + jitter * np.eye(sym.shape[0]))
        except np.linalg.LinAlgError:
            raise NotPositiveDefinite(
                f"matrix of dimension {sym.shape[0]} is not positive definite "
                "(jitter retry failed)"
            ) from None
    log_det = 2.0 * float(np.sum(np.log(np.diag(lower))))
    if not math.isfinite(log_det):
        raise NotPositiveDefinite("log-determinant is not finite")
    return SpdFactor(dim=m.shape[0], lower=lower, log_det=log_det)


def gaussian_logpdf(x: np.ndarray, mu: np.ndarray, sigma_factor: SpdFactor) -> float:
    """Log-density of N(mu, Sigma) at x, with Sigma prefactored."""
    d = np.asarray(x, dtype=float) - np.asarray(mu, dtype=float)
    quad = float(sigma_factor.quadform(d[None, :])[0])
    return -0.5 * (sigma_factor.dim * LOG_2PI + sigma_factor.log_det + quad)


@dataclass(frozen=True)
class LowRankCov:
    """Covariance of the form loadings @ loadings' + diag(uniquenesses)."""

    loadings: np.ndarray      # (p, q)
    uniquenesses: np.ndarray  # (p,)

    def __post_init__(self):
        lam = np.asarray(self.loadings, dtype=float)
        psi = np.asarray(self.uniquenesses, dtype=float)
        if lam.ndim != 2:
            raise ValueError("loadings must be a p x q matrix")
        if psi.ndim != 1 or psi.shape[0] != lam.shape[0]:
            raise ValueError("uniquenesses must be a p-vector")
        if lam.shape[1] > lam.shape[0]:
            raise ValueError("rank q cannot exceed dimension p")
        if np.any(psi <= 0.0):
            raise ValueError("all uniquenesses must be positive")
        object.__setattr__(self, "loadings", lam)
        object.__setattr__(self, "uniquenesses", psi)

    @property
    def dim(self) -> int:
        return self.loadings.shape[0]

    def dense(self) -> np.ndarray:
        return self.loadings @ self.loadings.T + np.diag(self.uniquenesses)


def _inner_factor(cov: LowRankCov) -> tuple[np.ndarray, SpdFactor]:
    """Psi^{-1} Lambda and the factored q x q matrix I + Lambda' Psi^{-1} Lambda."""
    b = cov.loadings / cov.uniquenesses[:, None]
    a = np.eye(cov.loadings.shape[1]) + cov.loadings.T @ b
    return b, spd_factorize(a)


def woodbury_inverse(cov: LowRankCov) -> np.ndarray:
    """(Lambda Lambda' + Psi)^{-1} forming only q x q and diagonal inverses."""
    b, a_factor = _inner_factor(cov)
    return np.diag(1.0 / cov.uniquenesses) - b @ a_factor.solve(b.T)


def woodbury_logdet(cov: LowRankCov) -> float:
    """log|Lambda Lambda' + Psi| via the matrix determinant lemma."""
    _, a_factor = _inner_factor(cov)
    return a_factor.log_det + float(np.sum(np.log(cov.uniquenesses)))


class LowRankFactor:
    """Quadratic-form and log-determinant provider for a low-rank covariance.

    Duck-type twin of SpdFactor for the pieces the density code needs;
    precomputes the Woodbury ingredients once.
    """

    def __init__(self, cov: LowRankCov):
        self.dim = cov.dim
        self._psi_inv = 1.0 / cov.uniquenesses
        self._b, a_factor = _inner_factor(cov)
        self.log_det = a_factor.log_det + float(np.sum(np.log(cov.uniquenesses)))
        self._a_factor = a_factor

    def quadform(self, rows: np.ndarray) -> np.ndarray:
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        t = rows @ self._b
        sol = self._a_factor.solve(t.T).T
        return np.einsum("ij,ij->i", rows * self._psi_inv, rows) - np.einsum(
            "ij,ij->i", t, sol
        )


@dataclass(frozen=True)
class BoxedPoint2:
    """A feasible (alpha, eta) pair: alpha in (alpha_min, 1), eta in (1, ETA_MAX]."""

    alpha: float
    eta: float
    alpha_min: float = 0.5

    def __post_init__(self):
        if not self.alpha_min < self.alpha < 1.0:
            raise ValueError(
                f"alpha={self.alpha} is not strictly inside ({self.alpha_min}, 1)"
            )
        if not 1.0 + ETA_GAP < self.eta <= ETA_MAX:
            raise ValueError(f"eta={self.eta} is not inside (1+{ETA_GAP}, {ETA_MAX}]")


def to_unconstrained(point: BoxedPoint2) -> np.ndarray:
    """Map a feasible point to free coordinates (logit for alpha, log for eta)."""
    a = logit((point.alpha - point.alpha_min) / (1.0 - point.alpha_min))
    b = math.log(point.eta - 1.0 - ETA_GAP)
    return np.array([a, b], dtype=float)


def from_unconstrained(v: np.ndarray, alpha_min: float) -> BoxedPoint2:
    """Map free coordinates back to a strictly feasible (alpha, eta) pair."""
    s = float(np.clip(expit(v[0]), 1e-12, 1.0 - 1e-12))
    alpha = alpha_min + (1.0 - alpha_min) * s
    b = float(np.clip(v[1], _LOG_ETA_MIN, _LOG_ETA_SPAN))
    eta = 1.0 + ETA_GAP + math.exp(b)
    return BoxedPoint2(alpha=alpha, eta=min(eta, ETA_MAX), alpha_min=alpha_min)


def nelder_mead_maximize(
    f,
    start: BoxedPoint2,
    tol: float = 1e-8,
    max_evals: int = 500,
) -> tuple[BoxedPoint2, float]:
    """Maximize f over the (alpha, eta) box by a Nelder-Mead simplex.

    The search runs in the unconstrained coordinates of ``to_unconstrained``
    so every evaluated point is strictly feasible. Standard coefficients
    (reflect 1, expand 2, contract 0.5, shrink 0.5); stops when the simplex
    value spread drops below ``tol`` or after ``max_evals`` evaluations.
    The returned value is never below f(start).
    """
    f_start = float(f(start))
    if not math.isfinite(f_start):
        raise NonFiniteObjective("objective is not finite at the starting point")

    evals = 0

    def eval_at(v: np.ndarray) -> float:
        nonlocal evals
        evals += 1
        val = float(f(from_unconstrained(v, start.alpha_min)))
        return val if math.isfinite(val) else -math.inf

    v0 = to_unconstrained(start)
    step = 0.25
    sim = [v0, v0 + np.array([step, 0.0]), v0 + np.array([0.0, step])]
    vals = [f_start] + [eval_at(v) for v in sim[1:]]

    while evals < max_evals:
        order = np.argsort(vals)[::-1]  # best first
        sim = [sim[i] for i in order]
        vals = [vals[i] for i in order]
        if vals[0] - vals[-1] < tol:
            break
        centroid = 0.5 * (sim[0] + sim[1])
        reflected = centroid + (centroid - sim[2])
        f_r = eval_at(reflected)
        if f_r > vals[0]:
            expanded = centroid + 2.0 * (reflected - centroid)
            f_e = eval_at(expanded) if evals < max_evals else -math.inf
            if f_e > f_r:
                sim[2], vals[2] = expanded, f_e
            else:
                sim[2], vals[2] = reflected, f_r
        elif f_r > vals[1]:
            sim[2], vals[2] = reflected, f_r
        else:
            if f_r > vals[2]:
                contracted = centroid + 0.5 * (reflected - centroid)
            else:
                contracted = centroid - 0.5 * (centroid - sim[2])
            f_c = eval_at(contracted) if evals < max_evals else -math.inf
            if f_c > min(f_r, vals[2]):
                sim[2], vals[2] = contracted, f_c
            else:
                for i in (1, 2):
                    sim[i] = sim[0] + 0.5 * (sim[i] - sim[0])
                    vals[i] = eval_at(sim[i]) if evals < max_evals else -math.inf

    best = int(np.argmax(vals))
    if vals[best] < f_start:
        return start, f_start
    return from_unconstrained(sim[best], start.alpha_min), float(vals[best])


def chi2_sf(x: float, df: int) -> float:
    """Upper-tail probability of the chi-square distribution.

    Computed through the regularized upper incomplete gamma function; for
    df = 2 this equals exp(-x/2) exactly.
    """
    if x < 0:
        raise ValueError(f"x must be nonnegative, got {x}")
    if int(df) != df or df < 1:
        raise ValueError(f"df must be a positive integer, got {df}")
    return float(_chi2.sf(x, int(df)))
