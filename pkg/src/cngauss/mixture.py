"""Mixtures of contaminated Gaussian factor analyzers: model pieces.

Per-component densities, responsibilities and scale weights, the three
cycle updates of the fitting algorithm, and the k-means hard start. The
driver loop lives in ``aecm``.
"""

import math
from dataclasses import dataclass, replace

import numpy as np
from sklearn.cluster import KMeans

from .distribution import log_component_parts, weights_from_parts
from .errors import EmptyComponent, InvalidRank
from .factor import CnfaParams, second_cycle_stats, update_loadings
from .numerics import BoxedPoint2, LowRankFactor, nelder_mead_maximize


@dataclass(frozen=True)
class McnfaParams:
    """A G-component mixture of contaminated Gaussian factor analyzers."""

    mixing: np.ndarray               # (G,) positive, sums to one
    components: tuple[CnfaParams, ...]

    def __post_init__(self):
        pi = np.asarray(self.mixing, dtype=float)
        comps = tuple(self.components)
        if pi.ndim != 1 or pi.size != len(comps) or pi.size < 1:
            raise ValueError("mixing vector and component list disagree")
        if np.any(pi <= 0.0) or abs(pi.sum() - 1.0) > 1e-8:
            raise ValueError("mixing proportions must be positive and sum to 1")
        q = comps[0].n_factors
        if any(c.n_factors != q for c in comps):
            raise ValueError("all components must share one number of factors")
        object.__setattr__(self, "mixing", pi)
        object.__setattr__(self, "components", comps)

    @property
    def n_components(self) -> int:
        return len(self.components)

    @property
    def dim(self) -> int:
        return self.components[0].dim

    @property
    def n_factors(self) -> int:
        return self.components[0].n_factors


def _component_parts(X, comp: CnfaParams):
    """Log of the weighted good/bad mixture terms for one component."""
    ops = LowRankFactor(comp.lowrank())
    quads = ops.quadform(np.asarray(X, dtype=float) - comp.mu)
    return log_component_parts(quads, ops.log_det, comp.dim, comp.alpha, comp.eta)


def log_density_matrix(X, params: McnfaParams) -> np.ndarray:
    """(n, G) per-component contaminated log-densities (no mixing weights)."""
    cols = [np.logaddexp(*_component_parts(X, c)) for c in params.components]
    return np.column_stack(cols)


def mixture_loglik(X, params: McnfaParams) -> float:
    """Observed log-likelihood of the mixture."""
    scored = log_density_matrix(X, params) + np.log(params.mixing)
    max_per_row = scored.max(axis=1, keepdims=True)
    lse = max_per_row[:, 0] + np.log(np.exp(scored - max_per_row).sum(axis=1))
    return float(lse.sum())


def estep_responsibilities(X, params: McnfaParams) -> np.ndarray:
    """(n, G) posterior component probabilities; rows sum to one."""
    scored = log_density_matrix(X, params) + np.log(params.mixing)
    scored -= scored.max(axis=1, keepdims=True)
    z = np.exp(scored)
    z /= z.sum(axis=1, keepdims=True)
    return z


def estep_weights(X, params: McnfaParams) -> np.ndarray:
    """(n, G) conditional scale weights of each point under each component."""
    cols = []
    for comp in params.components:
        lg, lb = _component_parts(X, comp)
        cols.append(weights_from_parts(lg, lb, comp.eta))
    return np.column_stack(cols)


def posterior_good_matrix(X, params: McnfaParams) -> np.ndarray:
    """(n, G) posterior probability of being good within each component."""
    cols = []
    for comp in params.components:
        lg, lb = _component_parts(X, comp)
        cols.append(np.exp(lg - np.logaddexp(lg, lb)))
    return np.column_stack(cols)


def cycle1_update(X, z, w, q):
    """Mixing proportions and locations from responsibilities and weights.

    pi_g is the responsibility total over n; mu_g the z*w-weighted mean.
    A component whose responsibility mass drops below q+1 points (or whose
    proportion falls below 1/n) aborts with EmptyComponent.
    """
    X = np.asarray(X, dtype=float)
    z = np.asarray(z, dtype=float)
    w = np.asarray(w, dtype=float)
    n = X.shape[0]
    n_g = z.sum(axis=0)
    if np.any(n_g < q + 1) or np.any(n_g / n < 1.0 / n):
        raise EmptyComponent(
            f"component masses {np.round(n_g, 3)} fell below the minimum "
            f"of q+1={q + 1} responsibility points"
        )
    zw = z * w
    mus = (zw.T @ X) / zw.sum(axis=0)[:, None]
    return n_g / n, mus


def cycle2_update(X, z, params: McnfaParams, alpha_min=0.5, nm_tol=1e-8, nm_max_evals=500):
    """Per-component (alpha, eta) by responsibility-weighted 2-D maximization.

    Each component's objective is its responsibility-weighted contaminated
    log-likelihood with location and covariance held fixed; the search
    starts at the component's current pair and never returns a worse value.
    """
    X = np.asarray(X, dtype=float)
    z = np.asarray(z, dtype=float)
    out = []
    for g, comp in enumerate(params.components):
        ops = LowRankFactor(comp.lowrank())
        quads = ops.quadform(X - comp.mu)
        weights = z[:, g]

        def objective(point: BoxedPoint2) -> float:
            lg, lb = log_component_parts(
                quads, ops.log_det, comp.dim, point.alpha, point.eta
            )
            return float(np.logaddexp(lg, lb) @ weights)

        start = BoxedPoint2(alpha=comp.alpha, eta=comp.eta, alpha_min=alpha_min)
        best, _ = nelder_mead_maximize(objective, start, nm_tol, nm_max_evals)
        out.append((best.alpha, best.eta))
    return out


def cycle3_update(X, z, w, params: McnfaParams, psi_floor):
    """Per-component loadings and uniquenesses from z*w-weighted scatters."""
    X = np.asarray(X, dtype=float)
    z = np.asarray(z, dtype=float)
    w = np.asarray(w, dtype=float)
    out = []
    for g, comp in enumerate(params.components):
        n_g = z[:, g].sum()
        if n_g <= 0.0:
            raise EmptyComponent(f"component {g} has zero responsibility mass")
        stats = second_cycle_stats(
            X, comp.mu, z[:, g] * w[:, g], comp.loadings, comp.uniquenesses,
            divisor=n_g,
        )
        out.append(update_loadings(stats, psi_floor))
    return out


def kmeans_init(X, n_clusters: int, restarts: int = 10, seed: int = 1) -> np.ndarray:
    """Hard initial partition: best-of-restarts k-means on unit-variance data."""
    X = np.asarray(X, dtype=float)
    if n_clusters > X.shape[0]:
        raise ValueError("more clusters than observations")
    if n_clusters == 1:
        return np.zeros(X.shape[0], dtype=int)
    scale = X.std(axis=0)
    scale[scale == 0.0] = 1.0
    km = KMeans(n_clusters=n_clusters, init="k-means++", n_init=restarts,
                random_state=seed)
    return km.fit_predict(X / scale)


def count_params_mcnfa(g: int, p: int, q: int, contaminated: bool = True) -> int:
    """Free parameters of a G-component (contaminated) factor-analyzer mixture."""
    if not 1 <= q < p:
        raise InvalidRank(f"need 1 <= q < p, got q={q}, p={p}")
    if g < 1:
        raise ValueError(f"need at least one component, got G={g}")
    m = (g - 1) + g * p + g * (p * q - q * (q - 1) // 2) + g * p
    return m + 2 * g if contaminated else m


def with_component_updates(params: McnfaParams, **field_lists) -> McnfaParams:
    """Rebuild the mixture with per-component field replacements.

    Keyword values are sequences of length G, e.g.
    ``with_component_updates(params, mu=mus)``.
    """
    comps = []
    for g, comp in enumerate(params.components):
        updates = {name: values[g] for name, values in field_lists.items()}
        comps.append(replace(comp, **updates))
    return McnfaParams(mixing=params.mixing, components=tuple(comps))
