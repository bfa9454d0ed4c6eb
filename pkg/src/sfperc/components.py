"""Connected components, the high-weight core, and its one-neighborhood.

Components are computed with a deterministic union-find (path halving, union
by size, ties attaching the larger root id under the smaller).  The giant is
the largest component, with ties broken by smallest contained vertex id, so
summaries are reproducible run to run.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError, RangeError
from .graphgen import MultiGraph, SimpleGraph
from .params import PercolationSchedule, WeightSequence, core_prefix_size


class UnionFind:
    """Disjoint sets over vertices 1..n; find uses path halving."""

    __slots__ = ("parent", "size")

    def __init__(self, n: int):
        self.parent = list(range(n + 1))
        self.size = [1] * (n + 1)

    def find(self, v: int) -> int:
        p = self.parent
        while p[v] != v:
            p[v] = p[p[v]]
            v = p[v]
        return v

    def union(self, u: int, v: int) -> int:
        ru, rv = self.find(u), self.find(v)
        if ru == rv:
            return ru
        su, sv = self.size[ru], self.size[rv]
        # union by size; equal sizes keep the smaller root id as root
        if sv > su or (sv == su and rv < ru):
            ru, rv = rv, ru
        self.parent[rv] = ru
        self.size[ru] = su + sv
        return ru

    def roots(self) -> np.ndarray:
        """Fully resolved root of every vertex, via vectorized pointer jumping."""
        p = np.asarray(self.parent, dtype=np.int64)
        while True:
            pp = p[p]
            if np.array_equal(pp, p):
                return p
            p = pp


@dataclass(frozen=True)
class ComponentSummary:
    """Component sizes in non-increasing order plus the giant's membership."""

    n: int
    sizes: np.ndarray
    giant_members: np.ndarray
    second_size: int

    @property
    def giant_size(self) -> int:
        return int(self.sizes[0])


def _union_edges(n: int, src: np.ndarray, dst: np.ndarray) -> UnionFind:
    uf = UnionFind(n)
    union = uf.union
    for u, v in zip(src.tolist(), dst.tolist()):
        if u != v:
            union(u, v)
    return uf


def component_sizes(g: MultiGraph | SimpleGraph) -> ComponentSummary:
    """All component sizes of the graph; loops and multiplicities are ignored."""
    uf = _union_edges(g.n, g.src, g.dst)
    roots = uf.roots()
    counts = np.bincount(roots[1:], minlength=g.n + 1)
    sizes = np.sort(counts[counts > 0])[::-1]
    giant_size = int(sizes[0])
    # Tie-break: among maximal components, pick the one holding the smallest id.
    is_max = counts[roots[1:]] == giant_size
    giant_root = int(roots[1:][np.argmax(is_max)])
    giant_members = np.nonzero(roots[1:] == giant_root)[0] + 1
    second = int(sizes[1]) if sizes.size > 1 else 0
    if int(sizes.sum()) != g.n:
        raise AssertionError("component sizes do not partition the vertex set")
    return ComponentSummary(n=g.n, sizes=sizes, giant_members=giant_members,
                            second_size=second)


def largest_component_among(g: MultiGraph | SimpleGraph, vertices: np.ndarray) -> int:
    """Size of the largest component restricted to the given vertex ids
    (components are counted by their members inside ``vertices``; 0 if empty)."""
    ids = np.asarray(vertices, dtype=np.int64)
    if ids.size == 0:
        return 0
    uf = _union_edges(g.n, g.src, g.dst)
    roots = uf.roots()
    counts = np.bincount(roots[ids], minlength=g.n + 1)
    return int(counts.max())


# --------------------------------------------------------------------------
# core extraction and kernel convergence
# --------------------------------------------------------------------------


def extract_core(g: SimpleGraph, core_size: int) -> SimpleGraph:
    """Induced subgraph on the top-weight prefix {1, ..., core_size}."""
    if not (1 <= core_size <= g.n):
        raise RangeError(f"core size {core_size} outside [1, {g.n}]")
    keep = g.dst <= core_size  # src < dst, so this bounds both endpoints
    return SimpleGraph(n=core_size, src=g.src[keep].copy(), dst=g.dst[keep].copy())


@dataclass(frozen=True)
class KernelCheckEntry:
    """One (u, v) evaluation of the finite-n core kernel against its limit."""

    u: float
    v: float
    empirical: float
    limit: float

    @property
    def ratio(self) -> float:
        return self.empirical / self.limit


def kernel_convergence_check(weights: WeightSequence, schedule: PercolationSchedule,
                             a: float, grid) -> list[KernelCheckEntry]:
    """Compare N_n(a) * p_edge(ceil(N_n u), ceil(N_n v)) with the limit kernel
    kappa_a(u, v) = a * (c_F^2 / mu) * (u v)^(-alpha) on a grid of type pairs.

    The edge probability is the percolated simple-graph one,
    pi_n * (1 - exp(-w_i w_j / ell_n)).
    """
    if schedule.mode != "single":
        raise DomainError("kernel check needs a single-mode schedule")
    params = schedule.params
    n_a = core_prefix_size(schedule, a)
    out = []
    for u, v in grid:
        if not (0.0 < u <= a and 0.0 < v <= a):
            raise DomainError(f"grid point ({u}, {v}) outside (0, a]^2 with a={a}")
        i = int(np.ceil(schedule.N_n * u))
        j = int(np.ceil(schedule.N_n * v))
        if i > weights.n or j > weights.n:
            raise RangeError(f"grid point ({u}, {v}) indexes past n={weights.n}")
        wi = weights.weight_of(i)
        wj = weights.weight_of(j)
        p_edge = schedule.pi_n * -np.expm1(-wi * wj / weights.ell_n)
        limit = a * params.c_F**2 / params.mu * (u * v) ** (-params.alpha)
        out.append(KernelCheckEntry(u=float(u), v=float(v),
                                    empirical=float(n_a * p_edge), limit=float(limit)))
    return out


# --------------------------------------------------------------------------
# core giant, its percolated weight, and the one-neighborhood
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CoreGiant:
    """Largest component of the core with its percolated weight sum."""

    size: int
    weight: float
    members: np.ndarray


def core_giant_and_weight(g_core: SimpleGraph, weights: WeightSequence,
                          schedule: PercolationSchedule) -> CoreGiant:
    """Largest core component and its percolated weight sum_{i in giant} pi_n w_i."""
    summary = component_sizes(g_core)
    members = summary.giant_members
    weight = float(schedule.pi_n * weights.weights[members - 1].sum())
    return CoreGiant(size=summary.giant_size, weight=weight, members=members)


def one_neighborhood(g_full: SimpleGraph, members: np.ndarray, core_size: int) -> int:
    """Number of vertices outside {1..core_size} adjacent to the given core set."""
    members = np.asarray(members, dtype=np.int64)
    if members.size and (members.min() < 1 or members.max() > core_size):
        raise DomainError("members must lie inside the core prefix")
    # src < dst, so a core-outside edge always has src in the core side.
    mask = (g_full.dst > core_size) & np.isin(g_full.src, members)
    return int(np.unique(g_full.dst[mask]).size)


@dataclass(frozen=True)
class CoreReport:
    """Summary of one core analysis at level a."""

    a: float
    core_size: int
    core_giant_size: int
    core_giant_weight: float
    one_neighborhood_size: int
    kernel_check: list[KernelCheckEntry]


def core_report(g_full: SimpleGraph, weights: WeightSequence,
                schedule: PercolationSchedule, a: float,
                kernel_grid=None) -> CoreReport:
    """Extract the level-a core from a percolated simple graph and summarize it.

    Also asserts the deterministic lower-bound chain: the component of the
    full graph containing the core giant is at least the core giant plus its
    one-neighborhood.
    """
    core_size = core_prefix_size(schedule, a)
    g_core = extract_core(g_full, core_size)
    giant = core_giant_and_weight(g_core, weights, schedule)
    n1 = one_neighborhood(g_full, giant.members, core_size)
    full_summary = component_sizes(g_full)
    if full_summary.giant_size < giant.size + n1:
        raise AssertionError(
            "largest full-graph component is smaller than core giant + one-neighborhood"
        )
    if kernel_grid is None:
        kernel_grid = [(a / 4, a / 4), (a / 4, a), (a, a)]
    checks = kernel_convergence_check(weights, schedule, a, kernel_grid)
    return CoreReport(a=a, core_size=core_size, core_giant_size=giant.size,
                      core_giant_weight=giant.weight, one_neighborhood_size=n1,
                      kernel_check=checks)


def write_component_table(summary: ComponentSummary, path) -> None:
    """CSV of component sizes by rank: header "rank,size"."""
    lines = ["rank,size"]
    lines.extend(f"{r},{s}" for r, s in enumerate(summary.sizes.tolist(), start=1))
    Path(path).write_text("\n".join(lines) + "\n")
