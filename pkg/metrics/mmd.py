import logging
from collections import deque
from dataclasses import dataclass

import networkx as nx
import numpy as np
from scipy.special import expit
from scipy.stats import wasserstein_distance

from metrics.orbits import count_orbits
from metrics.powerlaw import fit_all, valid_metric

logger = logging.getLogger(__name__)

STATISTICS = ("degree", "clustering", "spectrum", "orbit")
CLUSTERING_BINS = 100
SPECTRUM_BINS = 200

GEM_FORMULA = "GEM = mean(1/(1+exp(MMD.D)), 1/(1+exp(MMD.C)), 1/(1+exp(MMD.S)), 1/(1+exp(MMD.O)), Valid)"


def gaussian_emd(x, y, sigma=1.0, distance_scaling=1.0):
    """Gaussian kernel with the squared distance replaced by the earth mover's distance
    between two histograms over the same bins."""
    size = max(len(x), len(y))
    x = np.pad(np.asarray(x, dtype=np.float64), (0, size - len(x)))
    y = np.pad(np.asarray(y, dtype=np.float64), (0, size - len(y)))
    support = np.arange(size, dtype=np.float64) / distance_scaling
    emd = wasserstein_distance(support, support, x, y)
    return float(np.exp(-emd * emd / (2.0 * sigma * sigma)))


def gaussian(x, y, sigma=1.0):
    d = np.asarray(x, dtype=np.float64) - np.asarray(y, dtype=np.float64)
    return float(np.exp(-np.dot(d, d) / (2.0 * sigma * sigma)))


def _disc(samples_a, samples_b, kernel, **kwargs):
    return float(np.mean([[kernel(a, b, **kwargs) for b in samples_b] for a in samples_a]))


def compute_mmd(samples_a, samples_b, kernel, normalize=True, **kwargs):
    if normalize:
        samples_a = [s / np.sum(s) for s in samples_a]
        samples_b = [s / np.sum(s) for s in samples_b]
    return (_disc(samples_a, samples_a, kernel, **kwargs) + _disc(samples_b, samples_b, kernel, **kwargs)
            - 2.0 * _disc(samples_a, samples_b, kernel, **kwargs))


def degree_histogram(G):
    return np.array(nx.degree_histogram(G), dtype=np.float64)


def clustering_histogram(G, bins=CLUSTERING_BINS):
    values = list(nx.clustering(G).values())
    hist, _ = np.histogram(values, bins=bins, range=(0.0, 1.0))
    return hist.astype(np.float64)


def spectrum_histogram(G, bins=SPECTRUM_BINS):
    eigenvalues = np.linalg.eigvalsh(nx.normalized_laplacian_matrix(G).toarray())
    hist, _ = np.histogram(eigenvalues, bins=bins, range=(-1e-5, 2.0))
    return hist.astype(np.float64)


def orbit_vector(G):
    return count_orbits(G).mean(axis=0)


def _prepare(graphs):
    kept = []
    for G in graphs:
        G = nx.Graph(G)
        G.remove_edges_from(nx.selfloop_edges(G))
        if G.number_of_nodes() > 0:
            kept.append(G)
    return kept


def mmd(set_a, set_b, statistic):
    set_a, set_b = _prepare(set_a), _prepare(set_b)
    if not set_a or not set_b:
        raise ValueError("mmd needs two non-empty sets of non-empty graphs")
    if statistic == "degree":
        return compute_mmd([degree_histogram(G) for G in set_a], [degree_histogram(G) for G in set_b],
                           gaussian_emd, sigma=1.0)
    if statistic == "clustering":
        return compute_mmd([clustering_histogram(G) for G in set_a], [clustering_histogram(G) for G in set_b],
                           gaussian_emd, sigma=0.1, distance_scaling=CLUSTERING_BINS)
    if statistic == "spectrum":
        return compute_mmd([spectrum_histogram(G) for G in set_a], [spectrum_histogram(G) for G in set_b],
                           gaussian_emd, sigma=1.0)
    if statistic == "orbit":
        return compute_mmd([orbit_vector(G) for G in set_a], [orbit_vector(G) for G in set_b],
                           gaussian, normalize=False, sigma=30.0)
    raise ValueError(f"unknown statistic '{statistic}', expected one of {STATISTICS}")


def sample_subgraphs(G, count, size, rng):
    """`count` snowball samples: breadth-first from a random start until `size` nodes are reached."""
    G = nx.Graph(G)
    nodes = list(G.nodes())
    if not nodes:
        return []
    samples = []
    for start in rng.integers(len(nodes), size=count):
        seen = {nodes[int(start)]: None}
        queue = deque(seen)
        while queue and len(seen) < size:
            for u in G[queue.popleft()]:
                if u not in seen and len(seen) < size:
                    seen[u] = None
                    queue.append(u)
        samples.append(G.subgraph(seen).copy())
    return samples


def gem(mmds, valid_fraction):
    """Mean of the four MMDs mapped through 1/(1+e^m) and the Valid fraction; see GEM_FORMULA."""
    return float(np.mean([*(expit(-m) for m in mmds), valid_fraction]))


@dataclass(frozen=True)
class MmdReport:
    mmd_degree: float
    mmd_clustering: float
    mmd_spectrum: float
    mmd_orbit: float
    valid_fraction: float
    gem: float


def mmd_report(generated, reference, valid=None):
    """MMD family of `generated` against `reference`. Valid is measured on `generated` unless given."""
    values = [max(mmd(generated, reference, statistic), 0.0) for statistic in STATISTICS]
    if valid is None:
        fits = fit_all([[d for _, d in nx.Graph(G).degree()] for G in generated])
        valid = valid_metric(fits) if fits else 0.0
    return MmdReport(*values, valid, gem(values, valid))
