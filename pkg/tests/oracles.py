"""Independent reference computations used by the tests.

Nothing here imports the code paths it checks: modularity is a plain double
loop over node pairs, partition optima come from exhaustive enumeration,
and the scoring oracle recomputes every formula from labeled mentions with
exact rationals.
"""
from __future__ import annotations

import itertools
import random
from collections import defaultdict
from fractions import Fraction

import numpy as np


# --- graphs -----------------------------------------------------------------

def adjacency_matrix(nodes, edges):
    index = {t: i for i, t in enumerate(nodes)}
    a = np.zeros((len(nodes), len(nodes)))
    for u, v, w in edges:
        a[index[u], index[v]] = w
        a[index[v], index[u]] = w
    return a


def brute_modularity(nodes, edges, labels):
    """Q = 1/(2m) sum_ij [A_ij - k_i k_j / 2m] delta(c_i, c_j), as a double loop."""
    a = adjacency_matrix(nodes, edges)
    k = a.sum(axis=1)
    two_m = a.sum()
    if two_m == 0:
        return 0.0
    q = 0.0
    for i in range(len(nodes)):
        for j in range(len(nodes)):
            if labels[nodes[i]] == labels[nodes[j]]:
                q += a[i, j] - k[i] * k[j] / two_m
    return q / two_m


def set_partitions(n):
    """All restricted growth strings of length n (one per set partition)."""
    def rec(prefix, mx):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for c in range(mx + 2):
            yield from rec(prefix + [c], max(mx, c))
    if n == 0:
        yield ()
        return
    yield from rec([0], 0)


def exhaustive_optimum(nodes, edges):
    """Best modularity over every partition of the node set (vectorized)."""
    a = adjacency_matrix(nodes, edges)
    k = a.sum(axis=1)
    two_m = a.sum()
    b = a - np.outer(k, k) / two_m
    labels = np.array(list(set_partitions(len(nodes))))
    same = labels[:, :, None] == labels[:, None, :]
    qs = (same * b).sum(axis=(1, 2)) / two_m
    best = int(np.argmax(qs))
    return float(qs[best]), labels[best]


def random_connected_graph(rng: random.Random, n: int, p: float = 0.4, wlo=0.5, whi=1.0):
    nodes = [f"v{i}" for i in range(n)]
    edges = {}
    order = nodes[:]
    rng.shuffle(order)
    for i in range(1, n):  # random spanning tree keeps it connected
        u, v = order[i], order[rng.randrange(i)]
        edges[tuple(sorted((u, v)))] = rng.uniform(wlo, whi)
    for pair in itertools.combinations(nodes, 2):
        key = tuple(sorted(pair))
        if key not in edges and rng.random() < p:
            edges[key] = rng.uniform(wlo, whi)
    return nodes, [(u, v, w) for (u, v), w in sorted(edges.items())]


def disjoint_cliques(sizes, weight=1.0, prefix="c"):
    nodes, edges = [], []
    for ci, size in enumerate(sizes):
        members = [f"{prefix}{ci}_{i}" for i in range(size)]
        nodes += members
        edges += [(u, v, weight) for u, v in itertools.combinations(members, 2)]
    return nodes, edges


# --- scoring ----------------------------------------------------------------

def oracle_polarity(tokens, polarities, negators, window):
    total = 0
    for p, tok in enumerate(tokens):
        if tok not in polarities:
            continue
        flip = False
        for q in range(max(0, p - window), p):
            if tokens[q] in negators:
                flip = True
        total += -polarities[tok] if flip else polarities[tok]
    if total > 0:
        return 1
    if total < 0:
        return -1
    return 0


def oracle_scores(reviews, seeds_to_aspect, polarities, negators, window, dims=None,
                  literal_eq1=False, sum_eq3=False):
    """Straight-line rational recomputation of review, listing and dimension scores.

    ``reviews``: list of (listing_id, review_id, [sentence token lists]).
    Returns (listing_scores, dimension_scores, review_counts, sentence_records).
    """
    review_scores = defaultdict(list)
    sentence_records = []
    for listing, review_id, sentences in reviews:
        per_aspect = defaultdict(Fraction)
        for tokens in sentences:
            mentions = [t for t in tokens if t in seeds_to_aspect]
            j = len(mentions)
            if j == 0:
                continue
            pol = oracle_polarity(tokens, polarities, negators, window)
            values = []
            for t in mentions:
                if literal_eq1:
                    denom = pol * j
                    val = Fraction(pol, denom) if denom else Fraction(0)
                else:
                    val = Fraction(pol, j)
                values.append(val)
                per_aspect[seeds_to_aspect[t]] += val
            sentence_records.append((pol, values))
        review_scores[listing].append(dict(per_aspect))
    listing_scores, dim_scores, counts = {}, {}, {}
    for listing, rows in review_scores.items():
        counts[listing] = len(rows)
        aspects = {a for r in rows for a in r}
        scores = {}
        for a in aspects:
            total = sum((r.get(a, Fraction(0)) for r in rows), Fraction(0))
            scores[a] = total if sum_eq3 else total / len(rows)
        if scores:
            listing_scores[listing] = scores
            if dims:
                dim_scores[listing] = {
                    d: sum((scores.get(a, Fraction(0)) for a in members), Fraction(0))
                    for d, members in dims.items() if any(a in scores for a in members)
                }
    return listing_scores, dim_scores, counts, sentence_records
