"""Network configurations: connected labeled graphs with node identifiers.

A configuration bundles a simple graph, an injective integer identifier per
node, and a bit-string input label per node.  Nodes are addressed by their
identifier throughout the package.  Construction is permissive so that
``validate`` can report broken inputs; protocol code calls ``require_valid``.

Also home to the graph generators, the symmetry gadget used to couple two
bit vectors to a single graph, and a brute-force automorphism oracle.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .bits import is_bits
from .errors import GuardExceeded

ID_EXPONENT = 2  # identifiers are expected inside {0 .. n**ID_EXPONENT}

AUTOMORPHISM_NODE_GUARD = 24
REGULAR_RETRY_GUARD = 1000
GNP_RETRY_GUARD = 1000


@dataclass(frozen=True)
class NodeView:
    """A node's a-priori knowledge: its id, its input label, and how many
    ports it has.  Ports are 0..degree-1 in a fixed order; neighbor ids are
    not included unless a message reveals them."""

    own_id: int
    own_label: str
    degree: int


@dataclass(frozen=True)
class NetworkConfig:
    """Immutable (graph, id, label) triple.

    ``edges`` stores id pairs exactly as given (normalized to (low, high)
    and sorted) so duplicate or loop edges survive for ``validate`` to see.
    """

    ids: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    labels: tuple[str, ...]
    _adj: dict = field(default_factory=dict, repr=False, compare=False)

    def __init__(self, ids, edges, labels=None):
        ids = tuple(int(v) for v in ids)
        norm = tuple(sorted((min(int(u), int(v)), max(int(u), int(v))) for u, v in edges))
        if labels is None:
            labels = ("",) * len(ids)
        elif isinstance(labels, dict):
            labels = tuple(labels.get(v, "") for v in ids)
        else:
            labels = tuple(labels)
        if len(labels) != len(ids):
            raise ValueError("labels must align with ids")
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "edges", norm)
        object.__setattr__(self, "labels", labels)
        adj: dict[int, set[int]] = {v: set() for v in ids}
        for u, v in norm:
            if u in adj and v in adj and u != v:
                adj[u].add(v)
                adj[v].add(u)
        object.__setattr__(self, "_adj", {v: tuple(sorted(nb)) for v, nb in adj.items()})

    # -- basic views -------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.ids)

    def neighbors(self, v: int) -> tuple[int, ...]:
        """Neighbor ids in sorted order; this fixes the port numbering."""
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    @property
    def max_degree(self) -> int:
        return max((self.degree(v) for v in self.ids), default=0)

    def label(self, v: int) -> str:
        return self.labels[self.ids.index(v)]

    def label_map(self) -> dict[int, str]:
        return dict(zip(self.ids, self.labels))

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj.get(u, ())

    def with_labels(self, labels) -> "NetworkConfig":
        return NetworkConfig(self.ids, self.edges, labels)

    def edge_set(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.edges)

    # -- validation --------------------------------------------------

    def validate(self) -> str | None:
        """Return a violation description, or None when well-formed."""
        if not self.ids:
            return "empty node set"
        if len(set(self.ids)) != len(self.ids):
            return "id not injective"
        bound = max(1, self.n) ** ID_EXPONENT
        for v in self.ids:
            if v < 0 or v > bound:
                return f"id {v} outside {{0..n^{ID_EXPONENT}}}"
        for lab in self.labels:
            if not is_bits(lab):
                return "label is not a bit string"
        known = set(self.ids)
        for u, v in self.edges:
            if u == v:
                return f"self-loop at {u}"
            if u not in known or v not in known:
                return f"edge ({u},{v}) references unknown id"
        if len(set(self.edges)) != len(self.edges):
            return "duplicate edge"
        # connectivity by BFS from the first node
        seen = {self.ids[0]}
        frontier = [self.ids[0]]
        while frontier:
            nxt = []
            for u in frontier:
                for w in self._adj[u]:
                    if w not in seen:
                        seen.add(w)
                        nxt.append(w)
            frontier = nxt
        if len(seen) != self.n:
            return "disconnected"
        return None

    def require_valid(self) -> "NetworkConfig":
        problem = self.validate()
        if problem is not None:
            raise ValueError(f"invalid configuration: {problem}")
        return self

    # -- serialization -----------------------------------------------

    def to_text(self) -> str:
        """Deterministic text form: 'n m', edge lines, then id/label lines."""
        lines = [f"{self.n} {len(self.edges)}"]
        lines += [f"{u} {v}" for u, v in self.edges]
        lines += [f"{v} {lab}" for v, lab in sorted(zip(self.ids, self.labels))]
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        with open(path, "w", encoding="ascii") as fh:
            fh.write(self.to_text())

    @classmethod
    def from_text(cls, text: str) -> "NetworkConfig":
        rows = [ln.split() for ln in text.splitlines() if ln.strip()]
        if not rows or len(rows[0]) != 2:
            raise ValueError("missing 'n m' header")
        n, m = int(rows[0][0]), int(rows[0][1])
        if len(rows) not in (1 + m, 1 + m + n):
            raise ValueError("unexpected line count")
        edges = [(int(a), int(b)) for a, b in rows[1 : 1 + m]]
        if len(rows) == 1 + m + n:
            pairs = rows[1 + m :]
            ids = [int(r[0]) for r in pairs]
            labels = [r[1] if len(r) > 1 else "" for r in pairs]
        else:
            seen: list[int] = []
            for u, v in edges:
                for w in (u, v):
                    if w not in seen:
                        seen.append(w)
            ids, labels = sorted(seen), None
        return cls(ids, edges, labels)

    @classmethod
    def load(cls, path) -> "NetworkConfig":
        with open(path, encoding="ascii") as fh:
            return cls.from_text(fh.read())


# -- generators ------------------------------------------------------


def generate(kind: str, n: int, *, d: int | None = None, p: float | None = None,
             seed: int = 0, labels=None) -> NetworkConfig:
    """Build a standard configuration.

    Kinds: ``cycle`` (oriented, consecutive ids 0..n-1), ``path``,
    ``complete``, ``regular`` (d-regular via the pairing model, resampled
    until simple and connected), ``gnp`` (Erdos-Renyi, resampled until
    connected).  Except for cycles, ids are 1..n.
    """
    if n < 1:
        raise ValueError("need at least one node")
    if kind == "cycle":
        if n < 3:
            raise ValueError("cycle needs n >= 3")
        ids = list(range(n))
        edges = [(i, (i + 1) % n) for i in range(n)]
    elif kind == "path":
        ids = list(range(1, n + 1))
        edges = [(i, i + 1) for i in range(1, n)]
    elif kind == "complete":
        ids = list(range(1, n + 1))
        edges = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    elif kind == "regular":
        if d is None:
            raise ValueError("regular generator needs d")
        ids = list(range(1, n + 1))
        edges = _regular_edges(n, d, seed)
    elif kind == "gnp":
        if p is None:
            raise ValueError("gnp generator needs p")
        ids = list(range(1, n + 1))
        edges = _gnp_edges(n, p, seed)
    else:
        raise ValueError(f"unknown generator kind {kind!r}")
    return NetworkConfig(ids, edges, labels).require_valid()


def _regular_edges(n: int, d: int, seed: int) -> list[tuple[int, int]]:
    if n * d % 2 or d >= n or d < 1:
        raise ValueError("d-regular graph needs d < n and n*d even")
    rng = random.Random(f"regular/{n}/{d}/{seed}")
    for _ in range(REGULAR_RETRY_GUARD):
        stubs = [v for v in range(1, n + 1) for _ in range(d)]
        rng.shuffle(stubs)
        pairs = [(min(a, b), max(a, b)) for a, b in zip(stubs[::2], stubs[1::2])]
        if any(a == b for a, b in pairs) or len(set(pairs)) != len(pairs):
            continue
        cand = NetworkConfig(range(1, n + 1), pairs)
        if cand.validate() is None:
            return pairs
    raise GuardExceeded(f"no simple connected {d}-regular graph in {REGULAR_RETRY_GUARD} attempts")


def _gnp_edges(n: int, p: float, seed: int) -> list[tuple[int, int]]:
    if not 0.0 < p <= 1.0:
        raise ValueError("edge probability must be in (0, 1]")
    rng = random.Random(f"gnp/{n}/{p}/{seed}")
    for _ in range(GNP_RETRY_GUARD):
        edges = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)
                 if rng.random() < p]
        cand = NetworkConfig(range(1, n + 1), edges)
        if cand.validate() is None:
            return edges
    raise GuardExceeded(f"no connected draw in {GNP_RETRY_GUARD} attempts")


# -- symmetry gadget -------------------------------------------------


def build_sym_gadget(x, y) -> NetworkConfig:
    """Couple two nonzero bit vectors of equal length n to a 6n+2 node graph
    whose automorphism group is nontrivial exactly when x == y.

    Node order (ids 1..6n+2): a, b, a_1..a_n, b_1..b_n, u_1..u_n, v_1..v_n,
    y_1..y_n, z_1..z_n.  Each half is rigid: the u-clique's members have
    pairwise distinct degrees (u_i sees a_i..a_n plus exactly one ring node
    y_i), so an automorphism either fixes every u_i, which propagates to the
    whole half, or trades u_i for v_i wholesale, which forces the pendant
    patterns at a and b to coincide, i.e. x == y.
    """
    x = [int(b) for b in x]
    y = [int(b) for b in y]
    n = len(x)
    if n == 0 or len(y) != n:
        raise ValueError("x and y must be nonempty and of equal length")
    if not any(x) or not any(y):
        raise ValueError("zero vectors are rejected: an all-isolated side is degenerate")
    if any(b not in (0, 1) for b in x + y):
        raise ValueError("vectors must be 0/1")

    names = (["a", "b"]
             + [f"a{i}" for i in range(1, n + 1)] + [f"b{i}" for i in range(1, n + 1)]
             + [f"u{i}" for i in range(1, n + 1)] + [f"v{i}" for i in range(1, n + 1)]
             + [f"y{i}" for i in range(1, n + 1)] + [f"z{i}" for i in range(1, n + 1)])
    nid = {name: k + 1 for k, name in enumerate(names)}

    edges: set[tuple[int, int]] = set()

    def add(p: str, q: str) -> None:
        a, b = nid[p], nid[q]
        edges.add((min(a, b), max(a, b)))

    add("a", "b")
    for i in range(1, n + 1):
        if x[i - 1]:
            add("a", f"a{i}")
        if y[i - 1]:
            add("b", f"b{i}")
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            add(f"u{i}", f"a{j}")
            add(f"v{i}", f"b{j}")
        for j in range(i + 1, n + 1):
            add(f"u{i}", f"u{j}")
            add(f"v{i}", f"v{j}")
        add(f"u{i}", f"y{i}")
        add(f"v{i}", f"z{i}")
    for i in range(1, n):
        add(f"y{i}", f"y{i + 1}")
        add(f"z{i}", f"z{i + 1}")
    if n > 2:
        add("y1", f"y{n}")
        add("z1", f"z{n}")

    return NetworkConfig(range(1, 6 * n + 3), sorted(edges)).require_valid()


def has_nontrivial_automorphism(config: NetworkConfig, max_nodes: int = AUTOMORPHISM_NODE_GUARD) -> bool:
    """Exhaustive (pruned backtracking) search for a non-identity automorphism."""
    n = config.n
    if n > max_nodes:
        raise GuardExceeded(f"automorphism search limited to {max_nodes} nodes, got {n}")
    ids = sorted(config.ids)
    adj = {v: set(config.neighbors(v)) for v in ids}
    deg = {v: len(adj[v]) for v in ids}
    # map high-degree nodes first: their images are the most constrained
    order = sorted(ids, key=lambda v: (-deg[v], v))

    mapping: dict[int, int] = {}
    used: set[int] = set()

    def extend(i: int) -> bool:
        if i == n:
            return any(mapping[v] != v for v in ids)
        v = order[i]
        for w in ids:
            if w in used or deg[w] != deg[v]:
                continue
            if all((u in adj[v]) == (mapping[u] in adj[w]) for u in mapping):
                mapping[v] = w
                used.add(w)
                if extend(i + 1):
                    return True
                del mapping[v]
                used.discard(w)
        return False

    return extend(0)
