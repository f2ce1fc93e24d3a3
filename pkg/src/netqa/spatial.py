"""Spatial weights and Moran autocorrelation statistics.

Weights are built on cell centroids, either k-nearest-neighbor or
distance-band, and always row-standardized. Inference is permutation
based: the global statistic permutes values across all cells, the local
statistics use conditional permutation (each cell's own value held fixed,
the rest shuffled). Every cell draws from its own random stream derived
from the run seed and the cell's position in the canonical cell order, so
results are bit-identical no matter how the work is scheduled.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import WeightsError, ZeroVarianceError

log = logging.getLogger(__name__)

__all__ = [
    "SpatialWeights",
    "MoranResult",
    "LisaResult",
    "knn_scheme",
    "distance_band_scheme",
    "build_weights",
    "global_moran",
    "local_moran",
]

QUADRANTS = ("HH", "LL", "HL", "LH")


def knn_scheme(k: int) -> dict:
    return {"kind": "knn", "k": int(k)}


def distance_band_scheme(distance_m: float) -> dict:
    return {"kind": "distance_band", "distance_m": float(distance_m)}


@dataclass(frozen=True)
class SpatialWeights:
    """Row-standardized neighbor structure over an ordered cell list.

    ``ids`` is the canonical (sorted) cell order; ``neighbors[i]`` holds
    indices into that order. Row weights are uniform within each row
    (1/degree), which is what row-standardizing a binary neighbor
    relation produces. ``islands`` lists cells with no neighbors.
    """

    ids: tuple
    neighbors: tuple
    weights: tuple
    scheme: str
    islands: tuple = ()

    @property
    def n(self) -> int:
        return len(self.ids)

    @property
    def s0(self) -> float:
        return float(sum(sum(row) for row in self.weights))

    def lag(self, z: np.ndarray) -> np.ndarray:
        row_idx, col_idx, wdata = self._flat()
        return np.bincount(row_idx, weights=wdata * z[col_idx], minlength=len(z))

    def _flat(self):
        cached = self.__dict__.get("_flat_arrays")
        if cached is None:
            row_idx = np.array(
                [i for i, nbrs in enumerate(self.neighbors) for _ in nbrs], dtype=np.intp
            )
            col_idx = np.array([j for nbrs in self.neighbors for j in nbrs], dtype=np.intp)
            wdata = np.array([x for row in self.weights for x in row], dtype=float)
            cached = (row_idx, col_idx, wdata)
            object.__setattr__(self, "_flat_arrays", cached)
        return cached


def build_weights(centroids: dict, scheme: dict) -> SpatialWeights:
    """Build spatial weights over cell centroids.

    Parameters
    ----------
    centroids : dict
        cell id -> object with x/y attributes (or an (x, y) pair). Only
        cells that actually carry the metric belong here; callers exclude
        empty cells before the neighbor search.
    scheme : dict
        ``knn_scheme(k)`` or ``distance_band_scheme(d)``. KNN ties at
        equal distance break on cell id.
    """
    if not centroids:
        raise WeightsError("no cells to build weights over")
    ids = tuple(sorted(centroids))
    n = len(ids)
    pts = [centroids[i] for i in ids]
    coords = np.array(
        [(p.x, p.y) if hasattr(p, "x") else (p[0], p[1]) for p in pts], dtype=float
    )
    diff = coords[:, None, :] - coords[None, :, :]
    dists = np.sqrt((diff * diff).sum(axis=2))

    kind = scheme.get("kind")
    neighbors: list[tuple[int, ...]] = []
    if kind == "knn":
        k = scheme["k"]
        if k < 1:
            raise WeightsError("knn needs k >= 1")
        if n <= k:
            raise WeightsError(f"knn with k={k} needs more than {k} cells, got {n}")
        order_idx = np.arange(n)
        for i in range(n):
            row = dists[i].copy()
            row[i] = np.inf
            picked = order_idx[np.lexsort((order_idx, row))][:k]
            neighbors.append(tuple(int(j) for j in picked))
        label = f"knn{k}"
    elif kind == "distance_band":
        d = scheme["distance_m"]
        if d <= 0:
            raise WeightsError("distance band must be > 0")
        for i in range(n):
            within = np.nonzero((dists[i] <= d) & (np.arange(n) != i))[0]
            neighbors.append(tuple(int(j) for j in within))
        label = f"band{d:g}"
    else:
        raise WeightsError(f"unknown weights scheme {kind!r}")

    weights = tuple(
        tuple(1.0 / len(nbrs) for _ in nbrs) if nbrs else () for nbrs in neighbors
    )
    islands = tuple(ids[i] for i, nbrs in enumerate(neighbors) if not nbrs)
    if islands:
        log.warning("%d cell(s) have no neighbors under scheme %s", len(islands), label)
    return SpatialWeights(ids=ids, neighbors=tuple(neighbors), weights=weights, scheme=label, islands=islands)


@dataclass(frozen=True)
class MoranResult:
    i: float
    expected_i: float
    pseudo_p: float
    n_permutations: int
    seed: int
    n: int
    scheme: str


def _aligned_values(values: dict, w: SpatialWeights) -> np.ndarray:
    missing = [i for i in w.ids if i not in values]
    if missing:
        raise WeightsError(f"values missing for {len(missing)} cell(s), e.g. {missing[0]!r}")
    return np.array([values[i] for i in w.ids], dtype=float)


def _moran_i(z: np.ndarray, lag: np.ndarray, s0: float) -> float:
    den = float((z * z).sum())
    return float(len(z) / s0 * (z * lag).sum() / den)


def global_moran(values: dict, w: SpatialWeights, n_perm: int = 999, seed: int = 0) -> MoranResult:
    """Global autocorrelation via the cross-product statistic.

    The pseudo p-value counts random relabelings of the values whose
    statistic deviates from the expected value -1/(n-1) at least as much
    as the observed one (two-sided), with the +1/(n_perm+1) correction.
    """
    v = _aligned_values(values, w)
    n = len(v)
    if n < 3:
        raise WeightsError(f"global autocorrelation needs >= 3 cells, got {n}")
    z = v - v.mean()
    if float((z * z).sum()) == 0.0:
        raise ZeroVarianceError("autocorrelation undefined for constant values")
    s0 = w.s0
    if s0 == 0.0:
        raise WeightsError("every cell is an island; no autocorrelation structure")
    observed = _moran_i(z, w.lag(z), s0)
    expected = -1.0 / (n - 1)

    rng = np.random.default_rng(seed)
    extreme = 0
    threshold = abs(observed - expected)
    for _ in range(n_perm):
        zp = rng.permutation(z)
        sim = _moran_i(zp, w.lag(zp), s0)
        if abs(sim - expected) >= threshold:
            extreme += 1
    pseudo_p = (extreme + 1.0) / (n_perm + 1.0)
    return MoranResult(
        i=observed,
        expected_i=expected,
        pseudo_p=pseudo_p,
        n_permutations=n_perm,
        seed=seed,
        n=n,
        scheme=w.scheme,
    )


@dataclass(frozen=True)
class LisaResult:
    local_i: dict
    quadrant: dict
    pseudo_p: dict
    significant: dict
    alpha: float
    n_permutations: int
    seed: int
    scheme: str


def _quadrant(z_i: float, lag_i: float) -> str:
    if z_i > 0:
        return "HH" if lag_i > 0 else "HL"
    return "LH" if lag_i > 0 else "LL"


def local_moran(
    values: dict,
    w: SpatialWeights,
    n_perm: int = 999,
    seed: int = 0,
    alpha: float = 0.05,
    threads: int = 1,
) -> LisaResult:
    """Local autocorrelation with conditional permutation inference.

    Local statistic: I_i = (n-1) * z_i * lag_i / sum(z²), with z the
    mean-deviated values; its mean over cells relates to the global
    statistic as mean(I_i) = I * S0 * (n-1) / n². Quadrants come from the
    signs of z_i and its spatial lag. For each cell, the permutations
    hold z_i fixed and draw its neighbors from the remaining cells; a
    cell's p-value is the smaller tail count with the +1 correction.
    Significance is strict: pseudo_p < alpha. Cells without neighbors get
    local I 0, pseudo p 1, and are never significant.
    """
    v = _aligned_values(values, w)
    n = len(v)
    if n < 3:
        raise WeightsError(f"local autocorrelation needs >= 3 cells, got {n}")
    z = v - v.mean()
    den = float((z * z).sum())
    if den == 0.0:
        raise ZeroVarianceError("autocorrelation undefined for constant values")
    lag = w.lag(z)
    local = (n - 1) * z * lag / den

    def p_for_cell(i: int) -> float:
        degree = len(w.neighbors[i])
        if degree == 0:
            return 1.0
        z_others = np.delete(z, i)
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(i,)))
        keys = rng.random((n_perm, n - 1))
        # row weights are uniform (see SpatialWeights), so an unordered
        # uniform subset of size `degree` is a faithful neighbor draw
        draw = np.argpartition(keys, degree - 1, axis=1)[:, :degree]
        sim_lag = z_others[draw].mean(axis=1)
        sims = (n - 1) * z[i] * sim_lag / den
        tail = int((sims >= local[i]).sum())
        tail = min(tail, n_perm - tail)
        return (tail + 1.0) / (n_perm + 1.0)

    indices = range(n)
    if threads <= 1:
        pvals = [p_for_cell(i) for i in indices]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            pvals = list(pool.map(p_for_cell, indices))

    ids = w.ids
    return LisaResult(
        local_i={ids[i]: float(local[i]) for i in range(n)},
        quadrant={ids[i]: _quadrant(z[i], lag[i]) for i in range(n)},
        pseudo_p={ids[i]: pvals[i] for i in range(n)},
        significant={ids[i]: pvals[i] < alpha and len(w.neighbors[i]) > 0 for i in range(n)},
        alpha=alpha,
        n_permutations=n_perm,
        seed=seed,
        scheme=w.scheme,
    )
