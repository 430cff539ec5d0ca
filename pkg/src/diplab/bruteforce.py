"""Small exhaustive solvers.

Honest provers need optimal witnesses and the tests need ground truth;
at package scale (n <= 16 or so) plain enumeration is the right tool.
Everything here is deterministic.
"""

from __future__ import annotations

from itertools import combinations, product

from .errors import GuardExceeded
from .netconfig import NetworkConfig

PROBLEMS = ("mds", "mis", "mvc")
SUBSET_GUARD = 1 << 22


def is_admissible(config: NetworkConfig, problem: str, chosen: frozenset[int]) -> bool:
    """Membership predicate of the solution family, checked globally."""
    if problem == "mds":
        return all(v in chosen or any(u in chosen for u in config.neighbors(v))
                   for v in config.ids)
    if problem == "mis":
        return all(not (u in chosen and v in chosen) for u, v in config.edges)
    if problem == "mvc":
        return all(u in chosen or v in chosen for u, v in config.edges)
    raise ValueError(f"unknown problem {problem!r}")


def best_admissible(config: NetworkConfig, problem: str, objective: str,
                    weights: dict[int, int] | None = None) -> tuple[int, frozenset[int]]:
    """Optimal admissible set and its weight; ties break toward the
    lexicographically smallest id tuple."""
    if problem not in PROBLEMS:
        raise ValueError(f"unknown problem {problem!r}")
    if objective not in ("minimize", "maximize"):
        raise ValueError("objective must be 'minimize' or 'maximize'")
    if (1 << config.n) > SUBSET_GUARD:
        raise GuardExceeded("subset enumeration too large")
    w = weights or {v: 1 for v in config.ids}
    ids = sorted(config.ids)
    best: tuple[int, tuple[int, ...]] | None = None
    for size in range(config.n + 1):
        for combo in combinations(ids, size):
            chosen = frozenset(combo)
            if not is_admissible(config, problem, chosen):
                continue
            weight = sum(w[v] for v in combo)
            key = (weight, combo) if objective == "minimize" else (-weight, combo)
            if best is None or key < best:
                best = key
    if best is None:
        raise ValueError("no admissible set exists")
    weight = best[0] if objective == "minimize" else -best[0]
    return weight, frozenset(best[1])


def domination_number(config: NetworkConfig) -> int:
    return best_admissible(config, "mds", "minimize")[0]


def has_triangle(config: NetworkConfig) -> bool:
    for u, v in config.edges:
        if set(config.neighbors(u)) & set(config.neighbors(v)):
            return True
    return False


def neighbor_sums(config: NetworkConfig, labeling: dict[int, int]) -> dict[int, int]:
    return {v: sum(labeling[u] for u in config.neighbors(v)) for v in config.ids}


def is_lucky(config: NetworkConfig, labeling: dict[int, int]) -> bool:
    """True when neighbor sums form a proper coloring."""
    sums = neighbor_sums(config, labeling)
    return all(sums[u] != sums[v] for u, v in config.edges)


def find_lucky_labeling(config: NetworkConfig, lam: int) -> dict[int, int] | None:
    """First labeling with values in 1..lam whose neighbor sums properly color
    the graph, in lexicographic order; None when there is none."""
    ids = sorted(config.ids)
    if lam ** len(ids) > SUBSET_GUARD:
        raise GuardExceeded("labeling enumeration too large")
    for combo in product(range(1, lam + 1), repeat=len(ids)):
        labeling = dict(zip(ids, combo))
        if is_lucky(config, labeling):
            return labeling
    return None


def lucky_number(config: NetworkConfig, cap: int | None = None) -> int:
    """Least lambda admitting a lucky labeling.  The generic guarantee
    Delta^2 - Delta + 1 bounds the search when no cap is given."""
    d = config.max_degree
    cap = cap if cap is not None else max(1, d * d - d + 1)
    for lam in range(1, cap + 1):
        if find_lucky_labeling(config, lam) is not None:
            return lam
    raise ValueError(f"no lucky labeling with labels up to {cap}")
