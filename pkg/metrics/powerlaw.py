import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import zeta
from scipy.stats import ks_2samp

from errors import InsufficientTail

logger = logging.getLogger(__name__)

K_MIN = 2
MAX_ALPHA = 10.0
VALID_D_K = 0.1
VALID_ALPHA = (2.0, 3.0)


@dataclass(frozen=True)
class PowerLawFit:
    alpha: float
    k_min: int
    d_k: float
    n_tail: int
    alpha_approx: float

    @property
    def valid(self):
        return self.d_k < VALID_D_K and VALID_ALPHA[0] <= self.alpha <= VALID_ALPHA[1]


def power_law_cdf(k, alpha, k_min=K_MIN):
    """P(K <= k) of the discrete power law on k >= k_min."""
    k = np.asarray(k, dtype=np.float64)
    return 1.0 - zeta(alpha, k + 1.0) / zeta(alpha, k_min)


def neg_log_likelihood(alpha, tail, k_min=K_MIN):
    return alpha * np.log(tail).sum() + len(tail) * np.log(zeta(alpha, k_min))


def ks_distance(tail, alpha, k_min=K_MIN):
    """Sup distance between the empirical tail CDF and the fitted model over integer k >= k_min."""
    values, counts = np.unique(tail, return_counts=True)
    empirical = np.cumsum(counts) / len(tail)
    gaps = [np.abs(empirical - power_law_cdf(values, alpha, k_min))]
    # the empirical CDF is flat until the next observed value while the model keeps rising
    before_next = values[1:] - 1
    gaps.append(np.abs(empirical[:-1] - power_law_cdf(before_next, alpha, k_min)))
    if values[0] > k_min:
        gaps.append(power_law_cdf(np.array([values[0] - 1]), alpha, k_min))
    return float(max(g.max() for g in gaps if len(g)))


def fit_power_law(degree_sequence, k_min=K_MIN):
    degrees = np.asarray(degree_sequence, dtype=np.float64)
    tail = degrees[degrees >= k_min]
    if len(tail) < 2:
        raise InsufficientTail(f"{len(tail)} degree(s) >= {k_min}; need at least 2")

    alpha_approx = 1.0 + len(tail) / np.log(tail / (k_min - 0.5)).sum()
    result = minimize_scalar(neg_log_likelihood, bounds=(1.01, MAX_ALPHA), args=(tail, k_min),
                             method="bounded", options={"xatol": 1e-6})
    alpha = float(result.x)
    return PowerLawFit(alpha, k_min, ks_distance(tail, alpha, k_min), int(len(tail)), float(alpha_approx))


def fit_all(degree_sequences, k_min=K_MIN):
    """Fits for every sequence with a usable tail; the others are skipped with a warning."""
    fits = []
    for i, sequence in enumerate(degree_sequences):
        try:
            fits.append(fit_power_law(sequence, k_min))
        except InsufficientTail as e:
            logger.warning(f"⚠️ graph {i} excluded from the power-law fit: {e}")
    return fits


def valid_metric(fits):
    if not fits:
        raise ValueError("valid_metric needs at least one fit")
    return sum(1 for fit in fits if fit.valid) / len(fits)


def d_k_cross(degrees_a, degrees_b):
    """Two-sample KS distance between two degree distributions."""
    if len(degrees_a) == 0 or len(degrees_b) == 0:
        raise InsufficientTail("d_k_cross needs two non-empty degree sequences")
    return float(ks_2samp(np.asarray(degrees_a), np.asarray(degrees_b)).statistic)
