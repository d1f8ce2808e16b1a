"""Contaminated Gaussian factor analysis: model pieces.

The latent-factor covariance is loadings @ loadings' + diag(uniquenesses).
This module holds the parameter type and the closed-form update machinery;
the AECM fitters that drive these updates live in ``aecm``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidRank, NotPositiveDefinite, SingularR
from .numerics import ETA_MAX, LowRankCov, woodbury_inverse


@dataclass(frozen=True)
class CnfaParams:
    """Parameters of one contaminated Gaussian factor analyzer."""

    mu: np.ndarray            # (p,)
    loadings: np.ndarray      # (p, q)
    uniquenesses: np.ndarray  # (p,) positive diagonal of the noise covariance
    alpha: float
    eta: float

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float)
        lam = np.asarray(self.loadings, dtype=float)
        psi = np.asarray(self.uniquenesses, dtype=float)
        p = mu.size
        if lam.ndim != 2 or lam.shape[0] != p or psi.shape != (p,):
            raise ValueError("inconsistent shapes for mu, loadings, uniquenesses")
        if not 1 <= lam.shape[1] < p:
            raise InvalidRank(f"need 1 <= q < p, got q={lam.shape[1]}, p={p}")
        if np.any(psi <= 0.0):
            raise ValueError("uniquenesses must be positive")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if not 1.0 < self.eta <= ETA_MAX:
            raise ValueError(f"eta must be in (1, {ETA_MAX}], got {self.eta}")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "loadings", lam)
        object.__setattr__(self, "uniquenesses", psi)

    @property
    def dim(self) -> int:
        return self.mu.size

    @property
    def n_factors(self) -> int:
        return self.loadings.shape[1]

    def lowrank(self) -> LowRankCov:
        return LowRankCov(self.loadings, self.uniquenesses)

    def covariance(self) -> np.ndarray:
        return self.lowrank().dense()


@dataclass(frozen=True)
class SecondCycleStats:
    """Sufficient pieces for one loading/uniqueness update."""

    s: np.ndarray      # (p, p) weighted scatter
    r: np.ndarray      # (q, q)
    gamma: np.ndarray  # (p, q)


def gamma_matrix(loadings, uniquenesses) -> np.ndarray:
    """(loadings loadings' + diag(uniquenesses))^{-1} loadings, via Woodbury."""
    cov = LowRankCov(loadings, uniquenesses)
    return woodbury_inverse(cov) @ cov.loadings


def second_cycle_stats(X, mu, weights, loadings, uniquenesses, divisor=None) -> SecondCycleStats:
    """Weighted scatter S plus the R and gamma matrices of the current model.

    S uses ``divisor`` (the sample size by default; a component's
    responsibility total in mixtures). gamma and R come from the loadings
    and uniquenesses as they stand before the update.
    """
    X = np.asarray(X, dtype=float)
    weights = np.asarray(weights, dtype=float)
    centered = X - np.asarray(mu, dtype=float)
    if divisor is None:
        divisor = X.shape[0]
    s = (weights[:, None] * centered).T @ centered / float(divisor)
    gamma = gamma_matrix(loadings, uniquenesses)
    lam = np.asarray(loadings, dtype=float)
    r = np.eye(lam.shape[1]) - gamma.T @ lam + gamma.T @ s @ gamma
    return SecondCycleStats(s=s, r=r, gamma=gamma)


def update_loadings(stats: SecondCycleStats, psi_floor) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form maximizer of the second-cycle objective.

    New loadings are S gamma R^{-1}; new uniquenesses the diagonal of
    S - loadings_new gamma' S, clamped elementwise at ``psi_floor``.
    """
    try:
        r_inv_gamma_t = np.linalg.solve(stats.r, stats.gamma.T)
    except np.linalg.LinAlgError as exc:
        raise SingularR("second-cycle q x q matrix is singular") from exc
    if not np.all(np.isfinite(r_inv_gamma_t)):
        raise SingularR("second-cycle q x q matrix produced non-finite solve")
    lam_new = stats.s @ r_inv_gamma_t.T
    psi_new = np.diag(stats.s - lam_new @ stats.gamma.T @ stats.s)
    return lam_new, np.maximum(psi_new, psi_floor)


def psi_floor_for(X) -> np.ndarray:
    """Per-variable lower bound for uniquenesses; guards Heywood collapse."""
    X = np.asarray(X, dtype=float)
    return np.maximum(1e-10, 1e-6 * X.var(axis=0))


def eigen_init(sample_cov, q, psi_floor) -> tuple[np.ndarray, np.ndarray]:
    """Spectral start: top-q eigenpairs scaled by root eigenvalues.

    Eigenvector signs are fixed (largest-magnitude entry positive) so the
    start is deterministic; residual diagonal becomes the uniquenesses.
    """
    sample_cov = np.asarray(sample_cov, dtype=float)
    values, vectors = np.linalg.eigh(sample_cov)
    top = vectors[:, ::-1][:, :q] * np.sqrt(np.maximum(values[::-1][:q], 0.0))
    for j in range(q):
        pivot = np.argmax(np.abs(top[:, j]))
        if top[pivot, j] < 0:
            top[:, j] = -top[:, j]
    psi = np.maximum(np.diag(sample_cov) - (top**2).sum(axis=1), psi_floor)
    return top, psi


def count_params_cnfa(p: int, q: int, contaminated: bool = True) -> int:
    """Free parameters of a (contaminated) Gaussian factor analyzer."""
    if not 1 <= q < p:
        raise InvalidRank(f"need 1 <= q < p, got q={q}, p={p}")
    m = p + (p * q - q * (q - 1) // 2) + p
    return m + 2 if contaminated else m
