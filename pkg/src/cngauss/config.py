"""Shared fitting configuration."""

from dataclasses import dataclass


@dataclass(frozen=True)
class FitConfig:
    """Knobs shared by all fitters.

    alpha_min is the lower constraint on the proportion of good points
    (at least half the data is assumed good by default). epsilon is the
    Aitken stopping threshold on the projected log-likelihood gap.
    """

    alpha_min: float = 0.5
    epsilon: float = 1e-3
    max_iter: int = 1000
    seed: int = 1
    kmeans_restarts: int = 10
    nm_tol: float = 1e-8
    nm_max_evals: int = 500

    def __post_init__(self):
        if not 0.0 < self.alpha_min < 1.0:
            raise ValueError(f"alpha_min must be in (0, 1), got {self.alpha_min}")
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


# Near-Gaussian corner used to initialize contaminated fits and to freeze
# the Gaussian variants of the factor models.
NEAR_GAUSSIAN_ALPHA = 0.999
NEAR_GAUSSIAN_ETA = 1.001
