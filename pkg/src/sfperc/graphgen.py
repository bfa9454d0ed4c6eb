"""Sampling of the Poissonian rank-one multigraph and its percolated variants.

Sampling is Poissonized throughout: the total number of edge slots is
Poisson(ell_n / 2) and both endpoints of each slot are i.i.d. size-biased
marks, which makes the per-pair multiplicities independent Poissons with
rate w_i * w_j / ell_n (and w_i^2 / (2*ell_n) for self-loops).  Percolation
by pi is equivalent to sampling with weights pi * w, which is what the
"direct" samplers exploit; the coupled percolator realizes the simple-graph
and multigraph percolations on one uniform per pair so the former is always
a subgraph of the latter.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError
from .params import WeightSequence


@dataclass(frozen=True)
class MultiGraph:
    """Multigraph on vertices 1..n as a sorted list of pairs with multiplicities.

    ``src[k] <= dst[k]`` for every k, pairs are unique and lexicographically
    sorted, multiplicities are >= 1.  Self-loops keep src == dst.
    """

    n: int
    src: np.ndarray
    dst: np.ndarray
    mult: np.ndarray

    @property
    def pair_count(self) -> int:
        return int(self.src.size)

    @property
    def total_edge_count(self) -> int:
        """Number of edges counted with multiplicity."""
        return int(self.mult.sum())

    def degrees(self) -> np.ndarray:
        """Degree array indexed by vertex id (entry 0 unused); loops count twice."""
        deg = np.bincount(self.src, weights=self.mult, minlength=self.n + 1)
        deg += np.bincount(self.dst, weights=self.mult, minlength=self.n + 1)
        return deg.astype(np.int64)

    def as_tuples(self) -> list[tuple[int, int, int]]:
        return list(zip(self.src.tolist(), self.dst.tolist(), self.mult.tolist()))

    @classmethod
    def from_pairs(cls, n: int, pairs) -> "MultiGraph":
        """Build from an iterable of (i, j, mult); pairs are canonicalized and merged."""
        agg: dict[tuple[int, int], int] = {}
        for i, j, m in pairs:
            key = (i, j) if i <= j else (j, i)
            agg[key] = agg.get(key, 0) + int(m)
        keys = sorted(agg)
        src = np.array([k[0] for k in keys], dtype=np.int64)
        dst = np.array([k[1] for k in keys], dtype=np.int64)
        mult = np.array([agg[k] for k in keys], dtype=np.int64)
        g = cls(n=n, src=src, dst=dst, mult=mult)
        g.validate()
        return g

    def validate(self) -> None:
        """Structural invariants: endpoint ranges, canonical order, degree-sum identity."""
        if self.src.size != self.dst.size or self.src.size != self.mult.size:
            raise AssertionError("edge arrays have mismatched lengths")
        if self.src.size:
            if self.src.min() < 1 or self.dst.max() > self.n:
                raise AssertionError(f"edge endpoint outside [1, {self.n}]")
            if np.any(self.src > self.dst):
                raise AssertionError("pairs are not canonicalized (src <= dst)")
            if np.any(self.mult < 1):
                raise AssertionError("multiplicities must be >= 1")
            key = self.src * np.int64(self.n + 1) + self.dst
            if np.any(np.diff(key) <= 0):
                raise AssertionError("pairs are not sorted and unique")
        if int(self.degrees().sum()) != 2 * self.total_edge_count:
            raise AssertionError("degree-sum identity violated")


@dataclass(frozen=True)
class SimpleGraph:
    """Simple graph on vertices 1..n: unique sorted pairs with src < dst, no loops."""

    n: int
    src: np.ndarray
    dst: np.ndarray

    @property
    def edge_count(self) -> int:
        return int(self.src.size)

    def degrees(self) -> np.ndarray:
        deg = np.bincount(self.src, minlength=self.n + 1)
        deg += np.bincount(self.dst, minlength=self.n + 1)
        return deg.astype(np.int64)

    def as_tuples(self) -> list[tuple[int, int]]:
        return list(zip(self.src.tolist(), self.dst.tolist()))

    @classmethod
    def from_pairs(cls, n: int, pairs) -> "SimpleGraph":
        uniq = sorted({(i, j) if i < j else (j, i) for i, j in pairs})
        for i, j in uniq:
            if i == j:
                raise DomainError(f"simple graph cannot hold the loop ({i}, {j})")
        src = np.array([p[0] for p in uniq], dtype=np.int64)
        dst = np.array([p[1] for p in uniq], dtype=np.int64)
        g = cls(n=n, src=src, dst=dst)
        g.validate()
        return g

    def validate(self) -> None:
        if self.src.size:
            if self.src.min() < 1 or self.dst.max() > self.n:
                raise AssertionError(f"edge endpoint outside [1, {self.n}]")
            if np.any(self.src >= self.dst):
                raise AssertionError("simple edges need src < dst")
            key = self.src * np.int64(self.n + 1) + self.dst
            if np.any(np.diff(key) <= 0):
                raise AssertionError("pairs are not sorted and unique")
        if int(self.degrees().sum()) != 2 * self.edge_count:
            raise AssertionError("degree-sum identity violated")


# --------------------------------------------------------------------------
# mark sampling and the Poissonized edge generator
# --------------------------------------------------------------------------


def draw_marks(weights: WeightSequence, size: int, rng) -> np.ndarray:
    """i.i.d. size-biased marks, P(M = i) = w_i / ell_n, as 1-based vertex ids.

    Exact inverse-CDF sampling via binary search on the cumulative weights.
    """
    if size < 0:
        raise DomainError(f"sample size must be nonnegative, got {size}")
    u = rng.random(size) * weights.ell_n
    return np.searchsorted(weights.cum_weights, u, side="right").astype(np.int64) + 1


def _aggregate_pairs(n: int, a: np.ndarray, b: np.ndarray):
    """Canonicalize endpoint arrays into sorted unique (src, dst, mult)."""
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    key = lo * np.int64(n + 1) + hi
    uniq, counts = np.unique(key, return_counts=True)
    return uniq // (n + 1), uniq % (n + 1), counts.astype(np.int64)


def _sample_poissonized(n: int, ids: np.ndarray, eff_weights: np.ndarray,
                        ell_div: float, rng) -> MultiGraph:
    """Poissonized sampler restricted to ``ids``: the slot count is
    Poisson(W^2 / (2*ell_div)) with W = sum(eff_weights), endpoints i.i.d.
    proportional to eff_weights.  Pair (i, j) then carries an independent
    Poisson(w_i*w_j/ell_div) multiplicity (w_i^2/(2*ell_div) for loops)."""
    total = float(eff_weights.sum())
    m = int(rng.poisson(total * total / (2.0 * ell_div)))
    cum = np.cumsum(eff_weights)
    a = ids[np.searchsorted(cum, rng.random(m) * cum[-1], side="right")]
    b = ids[np.searchsorted(cum, rng.random(m) * cum[-1], side="right")]
    src, dst, mult = _aggregate_pairs(n, a, b)
    return MultiGraph(n=n, src=src, dst=dst, mult=mult)


def sample_mnr(weights: WeightSequence, rng) -> MultiGraph:
    """Sample the Poissonian multigraph: multiplicity of {i, j} is
    Poisson(w_i * w_j / ell_n), loops Poisson(w_i^2 / (2*ell_n))."""
    n = weights.n
    ids = np.arange(1, n + 1, dtype=np.int64)
    return _sample_poissonized(n, ids, weights.weights, weights.ell_n, rng)


def sample_percolated_mnr_direct(weights: WeightSequence, pi: float, rng) -> MultiGraph:
    """Sample the pi-percolated multigraph in one pass.

    Percolating Poisson multiplicities by pi is in law the same model with
    weights pi * w, so this draws Poisson(pi * ell_n / 2) slots with the
    original mark distribution.
    """
    _check_pi(pi)
    n = weights.n
    ids = np.arange(1, n + 1, dtype=np.int64)
    return _sample_poissonized(n, ids, pi * weights.weights, pi * weights.ell_n, rng)


def sample_percolated_mnr_subset(weights: WeightSequence, pi: float,
                                 vertices: np.ndarray, rng) -> MultiGraph:
    """Percolated multigraph restricted to ``vertices`` (1-based ids).

    Conditionally on removing the complement, the induced subgraph of the
    percolated model is again Poissonian with the same per-pair rates
    pi * w_i * w_j / ell_n, which is what this samples.
    """
    _check_pi(pi)
    ids = np.asarray(vertices, dtype=np.int64)
    if ids.size == 0:
        empty = np.empty(0, dtype=np.int64)
        return MultiGraph(n=weights.n, src=empty, dst=empty.copy(), mult=empty.copy())
    if ids.min() < 1 or ids.max() > weights.n:
        raise DomainError("subset contains vertex ids outside [1, n]")
    eff = pi * weights.weights[ids - 1]
    return _sample_poissonized(weights.n, ids, eff, pi * weights.ell_n, rng)


# --------------------------------------------------------------------------
# collapse and percolation operators
# --------------------------------------------------------------------------


def collapse_to_simple(g: MultiGraph) -> SimpleGraph:
    """Erase multiplicities and drop self-loops."""
    keep = g.src != g.dst
    return SimpleGraph(n=g.n, src=g.src[keep].copy(), dst=g.dst[keep].copy())


def percolate_multigraph(g: MultiGraph, pi: float, rng) -> MultiGraph:
    """Keep every edge copy independently with probability pi."""
    _check_pi(pi)
    kept = rng.binomial(g.mult, pi)
    mask = kept > 0
    return MultiGraph(n=g.n, src=g.src[mask].copy(), dst=g.dst[mask].copy(),
                      mult=kept[mask].astype(np.int64))


def percolate_coupled(g: MultiGraph, pi: float, rng) -> tuple[MultiGraph, SimpleGraph]:
    """Percolate the multigraph and its collapse on shared randomness.

    One uniform U per pair decides both sides: the collapsed simple edge is
    kept iff U <= pi, and the pair keeps at least one multigraph copy iff
    U <= 1 - (1-pi)^k.  The kept-copy count, given >= 1, follows the
    conditional Binomial(k, pi) law.  Since pi <= 1 - (1-pi)^k, every kept
    simple edge is also open in the multigraph, which is asserted on exit.
    """
    _check_pi(pi)
    k = g.mult
    u = rng.random(g.pair_count)
    if pi >= 1.0:
        p_any = np.ones(g.pair_count)
    else:
        p_any = -np.expm1(k * np.log1p(-pi))
    # The k == 1 case must use pi bit-for-bit so the coupling cannot leak.
    p_any = np.where(k == 1, pi, p_any)
    multi_keep = u <= p_any
    simple_keep = (u <= pi) & (g.src != g.dst)

    counts = np.zeros(g.pair_count, dtype=np.int64)
    counts[multi_keep & (k == 1)] = 1
    # Pairs with k >= 2 are rare; conditional binomial via rejection.
    for idx in np.nonzero(multi_keep & (k >= 2))[0]:
        ki = int(k[idx])
        while True:
            c = int(rng.binomial(ki, pi))
            if c >= 1:
                counts[idx] = c
                break

    if np.any(simple_keep & ~multi_keep):
        raise AssertionError("coupling violated: simple edge kept without a multigraph copy")

    gm = MultiGraph(n=g.n, src=g.src[multi_keep].copy(), dst=g.dst[multi_keep].copy(),
                    mult=counts[multi_keep])
    gs = SimpleGraph(n=g.n, src=g.src[simple_keep].copy(), dst=g.dst[simple_keep].copy())
    return gm, gs


def _check_pi(pi: float) -> None:
    if not (0.0 < pi <= 1.0):
        raise DomainError(f"retention probability must lie in (0, 1], got pi={pi}")


# --------------------------------------------------------------------------
# edge-list dumps
# --------------------------------------------------------------------------


def write_edge_list(g: MultiGraph | SimpleGraph, path) -> None:
    """Plain text dump: header "n m", then one "i j multiplicity" line per pair."""
    path = Path(path)
    lines = [f"{g.n} {g.src.size}"]
    if isinstance(g, MultiGraph):
        mult = g.mult
    else:
        mult = np.ones(g.src.size, dtype=np.int64)
    for i, j, m in zip(g.src.tolist(), g.dst.tolist(), mult.tolist()):
        lines.append(f"{i} {j} {m}")
    path.write_text("\n".join(lines) + "\n")


def read_edge_list(path) -> MultiGraph:
    """Inverse of write_edge_list (always returns a MultiGraph)."""
    text = Path(path).read_text().strip().splitlines()
    n, m = (int(tok) for tok in text[0].split())
    if len(text) - 1 != m:
        raise DomainError(f"edge list header promised {m} pairs, found {len(text) - 1}")
    triples = [tuple(int(tok) for tok in line.split()) for line in text[1:]]
    src = np.array([t[0] for t in triples], dtype=np.int64)
    dst = np.array([t[1] for t in triples], dtype=np.int64)
    mult = np.array([t[2] for t in triples], dtype=np.int64)
    g = MultiGraph(n=n, src=src, dst=dst, mult=mult)
    g.validate()
    return g
