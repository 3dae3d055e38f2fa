"""Thresholded word-similarity graph and Louvain community detection.

The Louvain procedure alternates two phases until modularity stops
improving:

1. local moves: every node, visited in a fixed order, moves to the
   neighbouring community with the largest positive modularity gain;
2. aggregation: communities collapse into super-nodes (intra-community
   weight becomes a self-loop) and phase 1 restarts on the meta-graph.
"""
from __future__ import annotations

import json
import logging
import os
import random
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence


from .embeddings import SimilarityPairs
from .errors import InvariantViolation, PartitionMismatch, UnknownCommunityId

log = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 0.5
DEFAULT_MIN_GAIN = 1e-7


@dataclass(frozen=True, eq=False)
class WordGraph:
    """Undirected weighted graph over sorted tokens.

    ``edges`` holds ``(u, v, weight)`` node-index triples with ``u < v``.
    """

    nodes: tuple[str, ...]
    edges: tuple[tuple[int, int, float], ...]
    adjacency: tuple[dict[int, float], ...] = field(repr=False)
    total_weight: float = 0.0

    @classmethod
    def from_edges(cls, nodes: Iterable[str], edges: Iterable[tuple[str, str, float]]) -> "WordGraph":
        nodes = tuple(sorted(set(nodes)))
        index = {t: i for i, t in enumerate(nodes)}
        adjacency: list[dict[int, float]] = [{} for _ in nodes]
        out = []
        for a, b, w in edges:
            u, v = index[a], index[b]
            if u == v:
                raise ValueError(f"self-loop on {a!r}")
            if u > v:
                u, v = v, u
            if v in adjacency[u]:
                raise ValueError(f"duplicate edge {nodes[u]!r}-{nodes[v]!r}")
            w = float(w)
            if not w > 0:
                raise ValueError("edge weights must be positive")
            adjacency[u][v] = w
            adjacency[v][u] = w
            out.append((u, v, w))
        out.sort()
        return cls(nodes, tuple(out), tuple(adjacency), float(sum(w for _, _, w in out)))

    @property
    def isolated(self) -> frozenset[str]:
        return frozenset(t for t, nbrs in zip(self.nodes, self.adjacency) if not nbrs)

    def degree(self, i: int) -> float:
        return sum(self.adjacency[i].values())

    def __len__(self) -> int:
        return len(self.nodes)


def build_graph(
    pairs: SimilarityPairs | Iterable[tuple[str, str, float]],
    threshold: float = DEFAULT_THRESHOLD,
    nodes: Iterable[str] | None = None,
) -> WordGraph:
    """Keep pairs with similarity >= ``threshold`` as weighted edges.

    Every token seen in ``pairs`` (and in ``nodes``) stays in the graph, so
    tokens without a surviving edge show up in ``WordGraph.isolated``.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ValueError("threshold must lie in [0, 1]")
    all_nodes = set(nodes or ())
    if isinstance(pairs, SimilarityPairs):
        all_nodes.update(pairs.tokens)
        keep = pairs.sims >= threshold
        toks = pairs.tokens
        edges = [
            (toks[i], toks[j], min(s, 1.0))
            for i, j, s in zip(pairs.left[keep].tolist(), pairs.right[keep].tolist(), pairs.sims[keep].tolist())
        ]
    else:
        edges = []
        for a, b, s in pairs:
            all_nodes.update((a, b))
            if s >= threshold:
                edges.append((a, b, min(float(s), 1.0)))
    return WordGraph.from_edges(all_nodes, edges)


def is_complete(graph: WordGraph) -> bool:
    n = len(graph)
    return n > 2 and len(graph.edges) == n * (n - 1) // 2


@dataclass(frozen=True, eq=False)
class Partition:
    """Community assignment over token nodes.

    Pruned nodes live in ``unassigned``. ``quality`` carries the modularity
    reported by the algorithm that produced the partition, when known.
    """

    community_of: Mapping[str, int]
    communities: Mapping[int, frozenset[str]]
    unassigned: frozenset[str] = frozenset()
    quality: float | None = None

    @classmethod
    def from_labels(cls, labels: Mapping[str, int], unassigned: Iterable[str] = (), quality=None) -> "Partition":
        """Build a partition with ids renumbered densely by smallest member token."""
        groups: dict[int, set[str]] = {}
        for tok, c in labels.items():
            groups.setdefault(c, set()).add(tok)
        ordered = sorted(groups.values(), key=min)
        communities = {i: frozenset(g) for i, g in enumerate(ordered)}
        community_of = {t: i for i, g in communities.items() for t in sorted(g)}
        return cls(dict(sorted(community_of.items())), communities, frozenset(unassigned), quality)

    @property
    def sizes(self) -> dict[int, int]:
        return {c: len(g) for c, g in self.communities.items()}

    def __len__(self) -> int:
        return len(self.communities)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Partition):
            return NotImplemented
        return dict(self.community_of) == dict(other.community_of) and self.unassigned == other.unassigned

    def check(self, nodes: Iterable[str] | None = None) -> None:
        """Raise InvariantViolation unless the two maps agree and ids are dense."""
        from_groups = {t: c for c, g in self.communities.items() for t in g}
        if from_groups != dict(self.community_of):
            raise InvariantViolation("community_of and communities disagree")
        if sorted(self.communities) != list(range(len(self.communities))):
            raise InvariantViolation("community ids are not dense")
        if self.unassigned & set(self.community_of):
            raise InvariantViolation("node both assigned and unassigned")
        if nodes is not None and set(nodes) != set(self.community_of) | self.unassigned:
            raise InvariantViolation("partition does not cover the node set")


def modularity(graph: WordGraph, partition: Partition | Mapping[str, int]) -> float:
    """Weighted Newman modularity, 0 for an edgeless graph."""
    labels = partition.community_of if isinstance(partition, Partition) else partition
    missing = [t for t in graph.nodes if t not in labels]
    if missing:
        raise PartitionMismatch(f"{len(missing)} graph nodes lack a community, e.g. {missing[:3]}")
    m = graph.total_weight
    if m == 0:
        return 0.0
    comm = [labels[t] for t in graph.nodes]
    inside: dict[int, float] = {}
    total: dict[int, float] = {}
    for u, v, w in graph.edges:
        if comm[u] == comm[v]:
            inside[comm[u]] = inside.get(comm[u], 0.0) + 2.0 * w
    for i in range(len(graph)):
        total[comm[i]] = total.get(comm[i], 0.0) + graph.degree(i)
    two_m = 2.0 * m
    return sum(inside.get(c, 0.0) / two_m - (tot / two_m) ** 2 for c, tot in sorted(total.items()))


# --- Louvain ----------------------------------------------------------------

@dataclass
class _Level:
    """Graph at one aggregation level: neighbour maps without self-loops."""

    adj: list[dict[int, float]]
    loops: list[float]

    @property
    def degrees(self) -> list[float]:
        return [sum(a.values()) + 2.0 * l for a, l in zip(self.adj, self.loops)]


def _level_modularity(level: _Level, comm: Sequence[int], m: float) -> float:
    two_m = 2.0 * m
    inside: dict[int, float] = {}
    total: dict[int, float] = {}
    for i, (nbrs, loop) in enumerate(zip(level.adj, level.loops)):
        c = comm[i]
        total[c] = total.get(c, 0.0) + sum(nbrs.values()) + 2.0 * loop
        inner = 2.0 * loop + sum(w for j, w in nbrs.items() if comm[j] == c)
        inside[c] = inside.get(c, 0.0) + inner
    return sum(inside[c] / two_m - (total[c] / two_m) ** 2 for c in sorted(total))


def _local_moves(level: _Level, order: Sequence[int], m: float, min_gain: float, trace: list | None) -> list[int]:
    n = len(level.adj)
    comm = list(range(n))
    k = level.degrees
    tot = list(k)
    two_m = 2.0 * m
    moved = True
    while moved:
        moved = False
        for i in order:
            own = comm[i]
            links: dict[int, float] = {}
            for j, w in level.adj[i].items():
                links[comm[j]] = links.get(comm[j], 0.0) + w
            tot[own] -= k[i]
            # gain of joining c, measured against staying isolated, in units of 1/m
            own_gain = links.get(own, 0.0) - tot[own] * k[i] / two_m
            best_c, best_gain = own, own_gain
            for c in sorted(links):
                g = links[c] - tot[c] * k[i] / two_m
                if g > best_gain:
                    best_c, best_gain = c, g
            delta_q = (best_gain - own_gain) / m
            if best_c != own and delta_q > min_gain:
                comm[i] = best_c
                moved = True
                if trace is not None:
                    trace.append(delta_q)
            tot[comm[i]] += k[i]
    return comm


def _aggregate(level: _Level, comm: Sequence[int]) -> tuple[_Level, list[int]]:
    """Collapse communities into super-nodes; returns the meta-level and a dense relabeling."""
    dense: dict[int, int] = {}
    for c in comm:
        dense.setdefault(c, len(dense))
    relabel = [dense[c] for c in comm]
    n = len(dense)
    adj: list[dict[int, float]] = [{} for _ in range(n)]
    loops = [0.0] * n
    for i, (nbrs, loop) in enumerate(zip(level.adj, level.loops)):
        ci = relabel[i]
        loops[ci] += loop
        for j, w in nbrs.items():
            cj = relabel[j]
            if ci == cj:
                if i < j:
                    loops[ci] += w
            else:
                adj[ci][cj] = adj[ci].get(cj, 0.0) + w
    return _Level(adj, loops), relabel


@dataclass
class LouvainTrace:
    """Diagnostics from one run: per-move gains and modularity after each level."""

    move_gains: list[float] = field(default_factory=list)
    level_quality: list[float] = field(default_factory=list)


def louvain(
    graph: WordGraph,
    seed: int = 0,
    *,
    min_gain: float = DEFAULT_MIN_GAIN,
    shuffle: bool = False,
    trace: LouvainTrace | None = None,
) -> Partition:
    """Two-phase Louvain modularity optimization.

    Nodes are visited in token order; ``shuffle=True`` permutes that order
    with ``random.Random(seed)``. Gain ties go to the lowest community id.
    The returned partition's ``quality`` is its modularity.
    """
    n = len(graph)
    if n == 0:
        return Partition({}, {}, quality=0.0)
    m = graph.total_weight
    if m == 0:
        return Partition.from_labels({t: i for i, t in enumerate(graph.nodes)}, quality=0.0)

    rng = random.Random(seed)
    level = _Level([dict(a) for a in graph.adjacency], [0.0] * n)
    membership = list(range(n))  # original node -> current super-node
    quality = _level_modularity(level, list(range(n)), m)
    while True:
        order = list(range(len(level.adj)))
        if shuffle:
            rng.shuffle(order)
        comm = _local_moves(level, order, m, min_gain, trace.move_gains if trace else None)
        if len(set(comm)) == len(comm):
            break
        new_quality = _level_modularity(level, comm, m)
        level, relabel = _aggregate(level, comm)
        membership = [relabel[c] for c in membership]
        gained, quality = new_quality - quality, new_quality
        if trace is not None:
            trace.level_quality.append(quality)
        if gained <= min_gain:
            break

    part = Partition.from_labels(dict(zip(graph.nodes, membership)))
    q = modularity(graph, part)
    if abs(q - quality) > 1e-9:
        raise InvariantViolation(f"tracked modularity {quality} != recomputed {q}")
    return Partition(part.community_of, part.communities, part.unassigned, q)


def louvain_best_of(graph: WordGraph, seed: int = 0, restarts: int = 1, *, min_gain: float = DEFAULT_MIN_GAIN) -> Partition:
    """Run once in token order, then ``restarts - 1`` shuffled runs; keep the best modularity."""
    best = louvain(graph, seed, min_gain=min_gain)
    for r in range(1, restarts):
        cand = louvain(graph, seed + r, min_gain=min_gain, shuffle=True)
        if cand.quality > best.quality + 1e-12:
            best = cand
    return best


def prune_clusters(partition: Partition, min_size: int = 1, drop_ids: Iterable[int] = ()) -> Partition:
    """Unassign communities smaller than ``min_size`` and any listed id, then renumber."""
    if min_size < 1:
        raise ValueError("min_size must be >= 1")
    drop = set(drop_ids)
    unknown = drop - set(partition.communities)
    if unknown:
        raise UnknownCommunityId(f"unknown community ids {sorted(unknown)}")
    keep, gone = {}, set(partition.unassigned)
    for c, members in partition.communities.items():
        if c in drop or len(members) < min_size:
            gone.update(members)
        else:
            for t in members:
                keep[t] = c
    return Partition.from_labels(keep, unassigned=gone)


# --- export -----------------------------------------------------------------

def write_edge_list(graph: WordGraph, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for u, v, w in graph.edges:
            fh.write(f"{graph.nodes[u]} {graph.nodes[v]} {w!r}\n")


def read_edge_list(path: str | os.PathLike, nodes: Iterable[str] = ()) -> WordGraph:
    edges = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                a, b, w = line.split()
                edges.append((a, b, float(w)))
    return WordGraph.from_edges(set(nodes) | {x for e in edges for x in e[:2]}, edges)


def partition_to_json(partition: Partition) -> dict:
    return {
        "communities": {t: c for t, c in sorted(partition.community_of.items())},
        "unassigned": sorted(partition.unassigned),
    }


def write_partition(partition: Partition, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(partition_to_json(partition), fh, indent=2, ensure_ascii=False)
        fh.write("\n")


def read_partition(path: str | os.PathLike) -> Partition:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return Partition.from_labels({t: int(c) for t, c in data["communities"].items()}, data.get("unassigned", ()))
