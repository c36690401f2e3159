"""Distances between point sets and the root/critical-point pairing counts.

The Prohorov distance between two discrete measures is computed by bisecting
on epsilon and testing feasibility of a transportation plan: mass may ship
from x to y only when |x - y| <= epsilon, and epsilon is feasible exactly
when the shippable mass reaches 1 - epsilon (the coupling form of the
distance). Small supports use exact rational max-flow; large supports use an
integer-capacity solver with the rounding slack absorbed into the tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_flow
from scipy.spatial import cKDTree

from .errors import ConfigurationError, PoleError
from .measures import RootSample
from .polyroots import CriticalPointSet

_WEIGHT_TOL = 1e-12
_EXACT_FLOW_MAX_ATOMS = 12   # per side; beyond this the int-capacity path runs
_FLOW_SCALE = 10**9          # int32-safe capacity scale for the large path


# ---------------------------------------------------------------------------
# Discrete measures
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiscreteMeasure:
    """Weighted atoms in the plane; weights strictly positive, summing to 1."""

    atoms: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        atoms = np.atleast_1d(np.asarray(self.atoms, dtype=complex))
        weights = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if len(atoms) != len(weights) or len(atoms) == 0:
            raise ConfigurationError("atoms and weights must be equal-length, nonempty")
        if (weights <= 0).any():
            raise ConfigurationError("weights must be strictly positive")
        if abs(weights.sum() - 1.0) > _WEIGHT_TOL:
            raise ConfigurationError("weights must sum to 1 within 1e-12")
        # merge duplicate locations
        uniq, inverse = np.unique(atoms, return_inverse=True)
        if len(uniq) < len(atoms):
            merged = np.zeros(len(uniq))
            np.add.at(merged, inverse, weights)
            atoms, weights = uniq, merged
        atoms.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_points(cls, points) -> "DiscreteMeasure":
        points = np.atleast_1d(np.asarray(points, dtype=complex))
        w = np.full(len(points), 1.0 / len(points))
        return cls(points, w)

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("re,im,weight\n")
            for a, w in zip(self.atoms, self.weights):
                fh.write(f"{a.real:.17g},{a.imag:.17g},{w:.17g}\n")

    @classmethod
    def from_csv(cls, path) -> "DiscreteMeasure":
        rows = np.atleast_2d(np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2))
        pts = rows[:, 0] + 1j * rows[:, 1]
        if rows.shape[1] >= 3:
            w = rows[:, 2]
            return cls(pts, w / w.sum())
        return cls.from_points(pts)


# ---------------------------------------------------------------------------
# Prohorov distance
# ---------------------------------------------------------------------------


def _maxflow_exact(wmu, wnu, edges) -> Fraction:
    """Edmonds-Karp with Fraction capacities on the bipartite transport graph."""
    p, q = len(wmu), len(wnu)
    source, sink = p + q, p + q + 1
    cap: dict[tuple[int, int], Fraction] = {}
    adj: dict[int, list[int]] = {i: [] for i in range(p + q + 2)}

    def add_edge(u, v, c):
        if (u, v) not in cap:
            adj[u].append(v)
            adj[v].append(u)
            cap[(u, v)] = Fraction(0)
            cap[(v, u)] = Fraction(0)
        cap[(u, v)] += c

    big = Fraction(2)
    for i, w in enumerate(wmu):
        add_edge(source, i, Fraction(w))
    for j, w in enumerate(wnu):
        add_edge(p + j, sink, Fraction(w))
    for i, j in edges:
        add_edge(i, p + j, big)

    flow = Fraction(0)
    while True:
        # BFS for a shortest augmenting path
        prev = {source: None}
        queue = [source]
        while queue and sink not in prev:
            u = queue.pop(0)
            for v in adj[u]:
                if v not in prev and cap[(u, v)] > 0:
                    prev[v] = u
                    queue.append(v)
        if sink not in prev:
            return flow
        bottleneck = None
        v = sink
        while prev[v] is not None:
            u = prev[v]
            c = cap[(u, v)]
            bottleneck = c if bottleneck is None else min(bottleneck, c)
            v = u
        v = sink
        while prev[v] is not None:
            u = prev[v]
            cap[(u, v)] -= bottleneck
            cap[(v, u)] += bottleneck
            v = u
        flow += bottleneck


def _feasible_exact(mu: DiscreteMeasure, nu: DiscreteMeasure, eps: float) -> bool:
    d = np.abs(mu.atoms[:, None] - nu.atoms[None, :])
    edges = [(i, j) for i, j in zip(*np.nonzero(d <= eps))]
    wmu = [Fraction(w) for w in mu.weights]
    wnu = [Fraction(w) for w in nu.weights]
    # normalize exactly to total 1 so the comparison below is exact
    tot_mu, tot_nu = sum(wmu), sum(wnu)
    wmu = [w / tot_mu for w in wmu]
    wnu = [w / tot_nu for w in wnu]
    flow = _maxflow_exact(wmu, wnu, edges)
    return flow >= 1 - Fraction(eps)


def _feasible_int(mu, nu, eps, tree_mu, tree_nu) -> bool:
    p, q = len(mu.atoms), len(nu.atoms)
    neighbor_lists = tree_mu.query_ball_tree(tree_nu, eps + 1e-300)
    rows, cols, caps = [], [], []
    source, sink = p + q, p + q + 1
    cmu = np.rint(mu.weights * _FLOW_SCALE).astype(np.int64)
    cnu = np.rint(nu.weights * _FLOW_SCALE).astype(np.int64)
    for i in range(p):
        rows.append(source); cols.append(i); caps.append(int(cmu[i]))
    for j in range(q):
        rows.append(p + j); cols.append(sink); caps.append(int(cnu[j]))
    for i, js in enumerate(neighbor_lists):
        for j in js:
            rows.append(i); cols.append(p + j); caps.append(_FLOW_SCALE)
    g = csr_matrix(
        (np.asarray(caps, dtype=np.int32), (rows, cols)),
        shape=(p + q + 2, p + q + 2),
    )
    flow = maximum_flow(g, source, sink).flow_value
    slack = p + q + 2  # weight rounding, absorbed into the caller's tol
    return flow + slack >= (1.0 - eps) * _FLOW_SCALE


def prohorov_distance(mu: DiscreteMeasure, nu: DiscreteMeasure, tol: float = 1e-6) -> float:
    """Prohorov distance between two discrete measures, within tol.

    Bisects on epsilon in [0, 1]; each feasibility test is a bipartite
    max-flow with edges allowed only between atoms at distance <= epsilon.
    The test is symmetric in (mu, nu) by construction, so the returned value
    is exactly symmetric as well.
    """
    if not tol > 0:
        raise ConfigurationError("tol must be positive")
    small = len(mu.atoms) <= _EXACT_FLOW_MAX_ATOMS and len(nu.atoms) <= _EXACT_FLOW_MAX_ATOMS
    if small:
        feasible = lambda e: _feasible_exact(mu, nu, e)
    else:
        pts_mu = np.column_stack([mu.atoms.real, mu.atoms.imag])
        pts_nu = np.column_stack([nu.atoms.real, nu.atoms.imag])
        tree_mu, tree_nu = cKDTree(pts_mu), cKDTree(pts_nu)
        feasible = lambda e: _feasible_int(mu, nu, e, tree_mu, tree_nu)
    if feasible(0.0):
        return 0.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return hi


# ---------------------------------------------------------------------------
# Kolmogorov-Smirnov statistic
# ---------------------------------------------------------------------------


def ks_statistic(sample, cdf) -> float:
    """sup_x |F_n(x) - F(x)|, evaluated exactly at the jump points.

    The cdf callable must be monotone into [0, 1]; it may accept arrays.
    """
    xs = np.sort(np.asarray(sample, dtype=float))
    n = len(xs)
    if n == 0:
        raise ConfigurationError("sample must be nonempty")
    try:
        F = np.asarray(cdf(xs), dtype=float)
        if F.shape != xs.shape:
            raise TypeError
    except (TypeError, ValueError):
        F = np.array([float(cdf(x)) for x in xs])
    above = np.max(np.arange(1, n + 1) / n - F)
    below = np.max(F - np.arange(0, n) / n)
    return float(max(above, below, 0.0))


# ---------------------------------------------------------------------------
# Empirical potential and its lower modulus
# ---------------------------------------------------------------------------


def empirical_potential(sample: RootSample, z: complex) -> complex:
    """V_n(z) = (1/n) sum 1/(z - X_j); PoleError on an exact root hit."""
    z = complex(z)
    hits = np.nonzero(sample.roots == z)[0]
    if len(hits):
        raise PoleError(int(hits[0]))
    return complex(np.mean(1.0 / (z - sample.roots)))


@dataclass(frozen=True)
class LowerModulus:
    """Grid-approximate lower modulus of |V_n| over a closed ball."""

    value: float
    center: complex
    radius: float
    grid_approximate: bool = True


def lower_modulus(sample: RootSample, center: complex, C: float, grid: int = 64) -> LowerModulus:
    """min |V_n| over grid points of the ball B_{C/n}(center), refined once.

    Returns 0 exactly when a root lies inside the ball (V has a pole there).
    The result is an upper bound on the true infimum.
    """
    if not C > 0:
        raise ConfigurationError("C must be positive")
    if grid < 8:
        raise ConfigurationError("grid must be >= 8")
    center = complex(center)
    radius = C / sample.n
    if np.min(np.abs(sample.roots - center)) <= radius:
        return LowerModulus(0.0, center, radius)
    angles = 2.0 * np.pi * np.arange(grid) / grid
    pts = np.concatenate([[center], center + radius * np.exp(1j * angles)])
    vals = np.abs(np.mean(1.0 / (pts[:, None] - sample.roots[None, :]), axis=1))
    k = int(np.argmin(vals))
    best_val, best_pt = float(vals[k]), pts[k]
    # one Newton step toward a zero of V, clamped into the ball
    v = np.mean(1.0 / (best_pt - sample.roots))
    dv = -np.mean(1.0 / (best_pt - sample.roots) ** 2)
    if dv != 0:
        cand = best_pt - v / dv
        if abs(cand - center) > radius:
            cand = center + radius * (cand - center) / abs(cand - center)
        if np.min(np.abs(sample.roots - cand)) > 0:
            cand_val = float(abs(np.mean(1.0 / (cand - sample.roots))))
            if cand_val < best_val:
                best_val = cand_val
    return LowerModulus(best_val, center, radius)


# ---------------------------------------------------------------------------
# Root-to-critical-point pairing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PairingReport:
    """Classification of roots by the Rouche pairing construction.

    A root is `crowded` when another root location sits closer than 2C/n,
    `matched` when exactly one critical-point location lies in the ball of
    radius C/n around it, and `unmatched` otherwise.
    """

    n: int
    C: float
    matched: int
    crowded: int
    unmatched: int
    max_match_dist: float

    def __post_init__(self):
        assert self.matched + self.crowded + self.unmatched == self.n


def pairing_report(roots: RootSample, cps: CriticalPointSet, C: float) -> PairingReport:
    """Classify every root against the certified critical points.

    Exactly coincident roots (multiplicity atoms) count as one location for
    the crowding test, mirroring how a multiplicity-m atom carries its own
    m-1 critical points.
    """
    if not C > 0:
        raise ConfigurationError("C must be positive")
    X = roots.roots
    n = len(X)
    r_pair = C / n
    r_crowd = 2.0 * C / n
    cp_locs = np.unique(cps.points)
    matched = crowded = unmatched = 0
    max_match = 0.0
    dist_roots = np.abs(X[:, None] - X[None, :])
    for i in range(n):
        others = dist_roots[i]
        near = others[(others > 0.0)]
        if len(near) and near.min() < r_crowd:
            crowded += 1
            continue
        d_cp = np.abs(cp_locs - X[i])
        inside = d_cp <= r_pair
        if inside.sum() == 1:
            matched += 1
            max_match = max(max_match, float(d_cp[inside][0]))
        else:
            unmatched += 1
    return PairingReport(n, C, matched, crowded, unmatched, max_match)


def min_gap_statistic(sample: RootSample) -> float:
    """min_j |X_j - X_n| with the last point in the role of the fresh draw."""
    if sample.n < 2:
        raise ConfigurationError("need n >= 2")
    return float(np.min(np.abs(sample.roots[:-1] - sample.roots[-1])))
