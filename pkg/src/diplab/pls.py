"""Deterministic certification building blocks.

Four schemes where certificates carry the proof and verification is a fixed
local exchange:

* spanning-tree certification (root id, parent pointer, hop distance),
* node-count certification via subtree counts plus a distance-2 coloring,
* the full-input scheme for languages on 0/1-labeled oriented cycles,
* the universal two-round scheme for d-regular graphs: the prover scatters a
  balanced partition of the edge set and of the id/label set, and every node
  reassembles the entire configuration from its neighborhood.

Verification functions return per-node verdicts; the global verdict is their
conjunction.  Plain exchanges reveal neighbor ids alongside certificates;
the fingerprint mode of the tree scheme compresses comparisons to a few
parity bits per port under shared masks.
"""

from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

from .bits import encode, width_for
from .commprims import DEFAULT_EQ_REPETITIONS, eq_fingerprint
from .errors import GuardExceeded
from .netconfig import NetworkConfig, NodeView

REGULAR_PROVER_CAP_FACTOR = 50


# -- spanning trees ------------------------------------------------------


@dataclass(frozen=True)
class TreeCert:
    """Claimed position in a spanning tree: the root's id, the hop distance
    to it, and the parent's id (None exactly at the root)."""

    root_id: int
    dist: int
    parent_id: int | None = None

    def to_bits(self, id_width: int, dist_width: int) -> str:
        has_parent = self.parent_id is not None
        return (encode(int(has_parent), 1)
                + encode(self.root_id, id_width)
                + encode(self.parent_id if has_parent else 0, id_width)
                + encode(self.dist, dist_width))


def tree_cert_bits(config: NetworkConfig) -> int:
    """Encoded size of one tree certificate for this configuration."""
    id_width = width_for(max(config.ids))
    return 1 + 2 * id_width + width_for(config.n - 1)


def tree_prove(config: NetworkConfig, root: int | None = None) -> dict[int, TreeCert]:
    """BFS spanning tree from ``root`` (minimum id by default); among the
    neighbors one hop closer, the smallest id becomes the parent."""
    config.require_valid()
    ids = sorted(config.ids)
    if root is None:
        root = ids[0]
    if root not in config.ids:
        raise ValueError(f"root {root} is not a node")
    dist = {root: 0}
    queue = deque([root])
    while queue:
        v = queue.popleft()
        for u in config.neighbors(v):
            if u not in dist:
                dist[u] = dist[v] + 1
                queue.append(u)
    certs = {}
    for v in ids:
        if v == root:
            certs[v] = TreeCert(root, 0, None)
        else:
            parent = min(u for u in config.neighbors(v) if dist[u] == dist[v] - 1)
            certs[v] = TreeCert(root, dist[v], parent)
    return certs


def tree_verify(view: NodeView, cert: TreeCert,
                neighbors: Sequence[tuple[int, TreeCert]]) -> bool:
    """One node's tree checks against plaintext neighbor (id, cert) pairs.

    Accepts iff every neighbor names the same root, the node's own role is
    coherent (root iff dist 0 iff no parent, and the root is itself), its
    parent is a neighbor one hop closer, and every neighbor pointing at it
    is one hop farther.
    """
    if len(neighbors) != view.degree:
        return False
    if any(nc.root_id != cert.root_id for _, nc in neighbors):
        return False
    if cert.dist < 0:
        return False
    if cert.dist == 0:
        if cert.parent_id is not None or cert.root_id != view.own_id:
            return False
    else:
        if cert.parent_id is None:
            return False
        if not any(nid == cert.parent_id and nc.dist == cert.dist - 1
                   for nid, nc in neighbors):
            return False
    return all(nc.dist == cert.dist + 1
               for nid, nc in neighbors if nc.parent_id == view.own_id)


def tree_verify_all(config: NetworkConfig, certs: Mapping[int, TreeCert],
                    mode: str = "plain", repetitions: int = DEFAULT_EQ_REPETITIONS,
                    seed: int = 0) -> dict[int, bool]:
    """Tree checks at every node.

    Plain mode exchanges (id, cert) pairs verbatim.  Fingerprint mode
    exchanges three parity fingerprints per port (root id, id||dist,
    parent||dist) plus a claim bit on the port toward the parent, under
    shared random masks; wrong certificates survive each comparison with
    probability 2^-repetitions.
    """
    config.require_valid()
    views = {v: NodeView(v, config.label(v), config.degree(v)) for v in config.ids}
    if mode == "plain":
        return {
            v: tree_verify(views[v], certs[v],
                           [(u, certs[u]) for u in config.neighbors(v)])
            for v in config.ids
        }
    if mode != "fingerprint":
        raise ValueError("mode must be 'plain' or 'fingerprint'")

    id_width = width_for(max(config.ids))
    dist_width = width_for(config.n - 1)
    rng = random.Random(f"tree-fp/{seed}")
    masks_id = [rng.getrandbits(id_width) for _ in range(repetitions)]
    masks_pair = [rng.getrandbits(id_width + dist_width) for _ in range(repetitions)]

    def fp_id(value: int) -> str:
        return eq_fingerprint(encode(value, id_width),
                              [(id_width, m) for m in masks_id])

    def fp_pair(a: int, d: int) -> str:
        return eq_fingerprint(encode(a, id_width) + encode(d, dist_width),
                              [(id_width + dist_width, m) for m in masks_pair])

    # per-node broadcast: (root fp, own id||dist fp, parent||dist fp)
    sent = {}
    claim_port = {}
    for v in config.ids:
        c = certs[v]
        sent[v] = (fp_id(c.root_id),
                   fp_pair(v, c.dist),
                   fp_pair(c.parent_id, c.dist) if c.parent_id is not None else "")
        nbrs = config.neighbors(v)
        claim_port[v] = nbrs.index(c.parent_id) if c.parent_id in nbrs else None

    verdicts = {}
    for v in config.ids:
        c = certs[v]
        ok = c.dist >= 0
        if c.dist == 0:
            ok = ok and c.parent_id is None and c.root_id == v
        else:
            ok = ok and c.parent_id is not None and claim_port[v] is not None
        my_root = fp_id(c.root_id)
        for port, u in enumerate(config.neighbors(v)):
            root_fp, own_fp, parent_fp = sent[u]
            ok = ok and root_fp == my_root
            if claim_port[v] == port:
                ok = ok and own_fp == fp_pair(c.parent_id, c.dist - 1)
            if claim_port[u] is not None and config.neighbors(u)[claim_port[u]] == v:
                # u's claim bit arrives on this port; its (parent, dist) pair
                # must fingerprint-match (me, my dist + 1)
                ok = ok and parent_fp == fp_pair(v, c.dist + 1)
        verdicts[v] = ok
    return verdicts


# -- node count via subtree counts and a distance-2 coloring -------------


@dataclass(frozen=True)
class Dist2ColorCert:
    """Tree position plus the subtree's node count, the claimed total, and a
    color meant to be unique within distance two."""

    tree: TreeCert
    subtree_count: int
    n_claimed: int
    color: int

    def to_bits(self, id_width: int, dist_width: int, count_width: int,
                color_width: int) -> str:
        return (self.tree.to_bits(id_width, dist_width)
                + encode(self.subtree_count, count_width)
                + encode(self.n_claimed, count_width)
                + encode(self.color - 1, color_width))


def _distance2_coloring(config: NetworkConfig) -> dict[int, int]:
    """Greedy in id order; two hops of already-colored nodes are forbidden,
    so at most d^2 constraints and d^2+1 colors are ever needed."""
    colors: dict[int, int] = {}
    for v in sorted(config.ids):
        forbidden = set()
        for u in config.neighbors(v):
            if u in colors:
                forbidden.add(colors[u])
            for w in config.neighbors(u):
                if w != v and w in colors:
                    forbidden.add(colors[w])
        color = 1
        while color in forbidden:
            color += 1
        colors[v] = color
    return colors


def dist2_prove(config: NetworkConfig) -> dict[int, Dist2ColorCert]:
    """Tree certificates extended with subtree counts, the true node count,
    and a greedy distance-2 coloring (at most min(d^2+1, n) colors)."""
    tree = tree_prove(config)
    children: dict[int, list[int]] = {v: [] for v in config.ids}
    for v, cert in tree.items():
        if cert.parent_id is not None:
            children[cert.parent_id].append(v)
    counts: dict[int, int] = {}
    for v in sorted(config.ids, key=lambda v: -tree[v].dist):
        counts[v] = 1 + sum(counts[c] for c in children[v])
    colors = _distance2_coloring(config)
    n = config.n
    return {
        v: Dist2ColorCert(tree[v], counts[v], n, colors[v])
        for v in config.ids
    }


def dist2_verify(config: NetworkConfig, certs: Mapping[int, Dist2ColorCert]) -> dict[int, bool]:
    """Per-node checks: tree validity, count recursion (own count = 1 + sum
    of the counts of neighbors claiming this node as parent), agreement on
    the claimed total with the root owning all of it, color in range, and
    distance-2 properness seen from this node (own color differs from all
    neighbor colors, neighbor colors pairwise distinct)."""
    config.require_valid()
    verdicts = {}
    for v in config.ids:
        c = certs[v]
        view = NodeView(v, config.label(v), config.degree(v))
        nbrs = [(u, certs[u]) for u in config.neighbors(v)]
        ok = tree_verify(view, c.tree, [(u, nc.tree) for u, nc in nbrs])
        ok = ok and all(nc.n_claimed == c.n_claimed for _, nc in nbrs)
        child_total = sum(nc.subtree_count for _, nc in nbrs
                          if nc.tree.parent_id == v)
        ok = ok and c.subtree_count == 1 + child_total
        if c.tree.dist == 0:
            ok = ok and c.subtree_count == c.n_claimed
        ok = ok and 1 <= c.color <= c.n_claimed
        neighbor_colors = [nc.color for _, nc in nbrs]
        ok = ok and c.color not in neighbor_colors
        ok = ok and len(set(neighbor_colors)) == len(neighbor_colors)
        verdicts[v] = ok
    return verdicts


# -- languages on labeled oriented cycles --------------------------------


def cycle_positions(config: NetworkConfig) -> dict[int, int]:
    """1-based position of every node on an oriented cycle whose ids form a
    consecutive run; raises ValueError when the config is not such a cycle."""
    ids = sorted(config.ids)
    n = len(ids)
    if n < 3:
        raise ValueError("a cycle needs at least 3 nodes")
    if ids != list(range(ids[0], ids[0] + n)):
        raise ValueError("cycle ids must be consecutive")
    if any(config.degree(v) != 2 for v in ids):
        raise ValueError("not a cycle: degree != 2 somewhere")
    lo = ids[0]
    for i, v in enumerate(ids):
        succ = lo + (i + 1) % n
        if not config.has_edge(v, succ):
            raise ValueError("ids do not follow the cycle orientation")
    return {v: v - lo + 1 for v in ids}


def cycle_lcp_prove(config: NetworkConfig) -> dict[int, str]:
    """Every node receives the full input string s_1...s_n in position order."""
    pos = cycle_positions(config)
    if any(len(config.label(v)) != 1 for v in config.ids):
        raise ValueError("cycle labels must be single bits")
    word = "".join(lab for _, lab in sorted(
        ((pos[v], config.label(v)) for v in config.ids)))
    return {v: word for v in config.ids}


def cycle_lcp_verify(config: NetworkConfig, certs: Mapping[int, str],
                     membership: Callable[[str], bool]) -> dict[int, bool]:
    pos = cycle_positions(config)
    n = config.n
    verdicts = {}
    for v in config.ids:
        s = certs[v]
        ok = len(s) == n and set(s) <= {"0", "1"}
        ok = ok and all(certs[u] == s for u in config.neighbors(v))
        ok = ok and s[pos[v] - 1] == config.label(v)
        ok = ok and bool(membership(s))
        verdicts[v] = ok
    return verdicts


def cycle_lcp(config: NetworkConfig, membership: Callable[[str], bool]) -> dict[int, bool]:
    """Honest run of the full-input cycle scheme; exact (zero error)."""
    return cycle_lcp_verify(config, cycle_lcp_prove(config), membership)


def cycle_lcp_spec(config: NetworkConfig, membership: Callable[[str], bool]):
    """Engine wrapper: one prover phase of n-bit certificates, one exchange
    round carrying the full copy, deterministic verdicts."""
    from .engine import FunctionProver, LocalVerifier, MerlinPhase, ProtocolSpec

    pos = cycle_positions(config)
    n = config.n

    class _CycleVerifier(LocalVerifier):
        rounds = 1

        def messages(self, ctx, rnd):
            return [ctx.certs[0]] * ctx.view.degree

        def decide(self, ctx):
            s = ctx.certs[0]
            if len(s) != n or set(s) - {"0", "1"}:
                return False
            if any(m != s for m in ctx.inbox[0]):
                return False
            if s[pos[ctx.view.own_id] - 1] != ctx.view.own_label:
                return False
            return bool(membership(s))

    prover = FunctionProver(lambda cfg, phase, revealed: cycle_lcp_prove(cfg))
    return ProtocolSpec(name="cycle-lcp", schedule=(MerlinPhase(cap=n),),
                        prover=prover, verifier=_CycleVerifier())


# -- universal scheme for regular graphs ---------------------------------


@dataclass(frozen=True)
class RegularCert:
    """Per repetition: the index the prover assigned to this node plus the
    full content of that index's edge slice and id/label slice."""

    blocks: tuple[tuple[int, tuple[tuple[int, int], ...], tuple[tuple[int, str], ...]], ...]

    def to_bits(self) -> str:
        out = [encode(len(self.blocks), 16)]
        for index, edges, labeled in self.blocks:
            out.append(encode(index, 8))
            out.append(encode(len(edges), 16))
            for a, b in edges:
                out.append(encode(a, 16) + encode(b, 16))
            out.append(encode(len(labeled), 16))
            for v, lab in labeled:
                out.append(encode(v, 16) + encode(len(lab), 8) + lab)
        return "".join(out)


def _regular_partitions(config: NetworkConfig, d: int):
    edges = sorted(config.edge_set())
    edge_sets = [tuple(edges[j::d]) for j in range(d)]
    ids = sorted(config.ids)
    label_sets = [tuple((v, config.label(v)) for v in ids[j::d]) for j in range(d)]
    return edge_sets, label_sets


def regular_universal_prove(config: NetworkConfig, c: int = 4, seed: int = 0,
                            cap_factor: int = REGULAR_PROVER_CAP_FACTOR) -> dict[int, RegularCert]:
    """Scatter the balanced partitions: each repetition assigns every node a
    slice index, redrawn until every node's neighborhood has seen all d edge
    slices and all d label slices across the c*ceil(log2 n) repetitions.

    Raises GuardExceeded after cap_factor*n failed draws (the coverage event
    holds with overwhelming probability at the default repetition count).
    """
    config.require_valid()
    degrees = {config.degree(v) for v in config.ids}
    if len(degrees) != 1:
        raise ValueError("config is not regular")
    d = degrees.pop()
    if d < 1:
        raise ValueError("degenerate regular graph")
    n = config.n
    edge_sets, label_sets = _regular_partitions(config, d)
    reps = c * math.ceil(math.log2(n)) if n > 1 else c
    ids = sorted(config.ids)
    rng = random.Random(f"regular-universal/{n}/{d}/{c}/{seed}")
    cap = cap_factor * n
    for _ in range(cap):
        assign = [{v: rng.randrange(d) for v in ids} for _ in range(reps)]
        covered = all(
            {assign[r][u] for r in range(reps) for u in config.neighbors(v)}
            == set(range(d))
            for v in ids
        )
        if covered:
            return {
                v: RegularCert(tuple(
                    (assign[r][v], edge_sets[assign[r][v]], label_sets[assign[r][v]])
                    for r in range(reps)))
                for v in ids
            }
    raise GuardExceeded(f"no covering assignment in {cap} draws")


def regular_reconstruct(d: int, certs: Sequence[RegularCert]):
    """Reassemble (edge set, label map) from the slices seen in ``certs``.

    Returns None when some slice index is missing or two copies of the same
    index disagree.
    """
    edge_slices: dict[int, tuple] = {}
    label_slices: dict[int, tuple] = {}
    for cert in certs:
        for index, edges, labeled in cert.blocks:
            if edge_slices.get(index, edges) != edges:
                return None
            if label_slices.get(index, labeled) != labeled:
                return None
            edge_slices[index] = edges
            label_slices[index] = labeled
    if set(edge_slices) != set(range(d)):
        return None
    edge_set = frozenset(e for edges in edge_slices.values() for e in edges)
    labels = {v: lab for labeled in label_slices.values() for v, lab in labeled}
    return edge_set, labels


def regular_universal_verify(config: NetworkConfig, certs: Mapping[int, RegularCert],
                             membership: Callable[[frozenset, dict], bool]) -> dict[int, bool]:
    """Two-round verification: round 1 exchanges certificates (with sender
    ids) and every node reconstructs a candidate configuration; round 2
    cross-checks that neighbors reconstructed the same thing.  A node also
    checks its own incident edges, its own label, and membership."""
    config.require_valid()
    d = config.degree(sorted(config.ids)[0])
    recon = {
        v: regular_reconstruct(d, [certs[v]] + [certs[u] for u in config.neighbors(v)])
        for v in config.ids
    }
    verdicts = {}
    for v in config.ids:
        r = recon[v]
        ok = r is not None
        ok = ok and all(recon[u] == r for u in config.neighbors(v))
        if ok:
            edge_set, labels = r
            ok = labels.get(v) == config.label(v)
            incident = {e for e in edge_set if v in e}
            expected = {(min(v, u), max(v, u)) for u in config.neighbors(v)}
            ok = ok and incident == expected
            ok = ok and bool(membership(edge_set, labels))
        verdicts[v] = ok
    return verdicts
