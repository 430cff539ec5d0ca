"""Shared helpers: exhaustive small-graph corpora and statistics utilities.

The graph atlas (connected graphs up to seven nodes) backs every exhaustive
claim; nodes are relabeled to ids 1..n so fixtures match the generators'
conventions.
"""

from __future__ import annotations

import math
from collections import deque
from functools import lru_cache

import networkx as nx
import numpy as np
import pytest

from diplab.netconfig import NetworkConfig
from diplab.pls import TreeCert


def nx_to_config(graph: nx.Graph, labels=None) -> NetworkConfig:
    """Relabel nodes to 1..n in sorted order and wrap as a NetworkConfig."""
    nodes = sorted(graph.nodes())
    rename = {node: i + 1 for i, node in enumerate(nodes)}
    edges = tuple(sorted((min(rename[u], rename[v]), max(rename[u], rename[v]))
                         for u, v in graph.edges()))
    return NetworkConfig(tuple(range(1, len(nodes) + 1)), edges, labels)


@lru_cache(maxsize=None)
def connected_configs(max_n: int, min_n: int = 1) -> tuple[NetworkConfig, ...]:
    """Every connected graph with min_n <= n <= max_n, ids 1..n."""
    out = []
    for g in nx.graph_atlas_g()[1:]:
        n = g.number_of_nodes()
        if min_n <= n <= max_n and nx.is_connected(g):
            out.append(nx_to_config(g))
    return tuple(out)


def config_to_nx(config: NetworkConfig) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(config.ids)
    g.add_edges_from(config.edge_set())
    return g


def is_triangle_free_nx(config: NetworkConfig) -> bool:
    return sum(nx.triangles(config_to_nx(config)).values()) == 0


def three_sigma(p: float, trials: int) -> float:
    """Binomial 3-sigma half-width around probability p."""
    return 3.0 * math.sqrt(max(p * (1.0 - p), 1e-12) / trials)


def spanning_tree_count(config: NetworkConfig) -> int:
    """Kirchhoff's theorem: determinant of the reduced Laplacian."""
    ids = sorted(config.ids)
    n = len(ids)
    if n == 1:
        return 1
    index = {v: i for i, v in enumerate(ids)}
    lap = np.zeros((n, n))
    for u, v in config.edge_set():
        i, j = index[u], index[v]
        lap[i, i] += 1
        lap[j, j] += 1
        lap[i, j] -= 1
        lap[j, i] -= 1
    return round(np.linalg.det(lap[1:, 1:]))


def is_tree_encoding(config: NetworkConfig, certs) -> bool:
    """Independent check that the certificates describe a spanning tree:
    one parentless node (the claimed root, at distance 0, named by every
    node), every other node's parent a neighbor one hop closer, and the
    root reachable from everywhere by following parents."""
    ids = sorted(config.ids)
    roots = [v for v in ids if certs[v].parent_id is None]
    if len(roots) != 1:
        return False
    root = roots[0]
    if certs[root].dist != 0 or certs[root].root_id != root:
        return False
    if any(certs[v].root_id != root for v in ids):
        return False
    for v in ids:
        if v == root:
            continue
        p = certs[v].parent_id
        if p not in config.neighbors(v) or certs[v].dist != certs[p].dist + 1:
            return False
    children: dict[int, list[int]] = {v: [] for v in ids}
    for v in ids:
        if v != root:
            children[certs[v].parent_id].append(v)
    seen, queue = {root}, deque([root])
    while queue:
        v = queue.popleft()
        for u in children[v]:
            if u not in seen:
                seen.add(u)
                queue.append(u)
    return len(seen) == len(ids)


def tree_claim_options(config: NetworkConfig, v: int, root_id: int) -> list[TreeCert]:
    """The certificates at v naming root_id that survive v's own solo
    checks: distance 0 is only coherent at the root itself, and any other
    claim needs a neighboring parent and a positive distance below n."""
    n = config.n
    opts = [TreeCert(root_id, 0, None)] if v == root_id else []
    opts += [TreeCert(root_id, d, p)
             for p in sorted(config.neighbors(v)) for d in range(1, n)]
    return opts


def tree_claim_assignments(config: NetworkConfig, root_id: int,
                           prune_pairs: bool = True):
    """All assignments over tree_claim_options, nodes in BFS order from the
    claimed root.  With prune_pairs, branches are cut as soon as two
    adjacent claims contradict each other (a parent pointer whose distances
    do not differ by exactly one); those are rejected locally no matter how
    the rest is filled in."""
    order, seen, queue = [], {root_id}, deque([root_id])
    while queue:
        v = queue.popleft()
        order.append(v)
        for u in sorted(config.neighbors(v)):
            if u not in seen:
                seen.add(u)
                queue.append(u)
    options = {v: tree_claim_options(config, v, root_id) for v in order}
    chosen: dict[int, TreeCert] = {}

    def clash(cert: TreeCert, v: int) -> bool:
        for u in config.neighbors(v):
            cu = chosen.get(u)
            if cu is None:
                continue
            if cert.parent_id == u and cu.dist != cert.dist - 1:
                return True
            if cu.parent_id == v and cert.dist != cu.dist - 1:
                return True
        return False

    def rec(i: int):
        if i == len(order):
            yield dict(chosen)
            return
        v = order[i]
        for cert in options[v]:
            if prune_pairs and clash(cert, v):
                continue
            chosen[v] = cert
            yield from rec(i + 1)
            del chosen[v]

    yield from rec(0)


@pytest.fixture
def announce(capsys):
    """Print a line that survives pytest's output capture."""
    def _print(line: str) -> None:
        with capsys.disabled():
            print(line)
    return _print
