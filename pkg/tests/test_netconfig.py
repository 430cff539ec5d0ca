"""Configuration validity, generators, serialization, and the symmetry
gadget with its brute-force automorphism oracle (cross-checked against
networkx's VF2 matcher)."""

import itertools

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diplab.errors import GuardExceeded
from diplab.netconfig import (NetworkConfig, build_sym_gadget, generate,
                              has_nontrivial_automorphism)

from conftest import config_to_nx, connected_configs


# -- validation ------------------------------------------------------------


def test_validate_k3_ok():
    assert NetworkConfig((1, 2, 3), ((1, 2), (1, 3), (2, 3))).validate() is None


def test_validate_disconnected():
    msg = NetworkConfig((1, 2, 3, 4), ((1, 2), (3, 4))).validate()
    assert msg is not None and "disconnected" in msg


def test_validate_duplicate_ids():
    msg = NetworkConfig((1, 1, 3), ((1, 3),)).validate()
    assert msg is not None and "injective" in msg


def test_validate_self_loop_and_id_range():
    assert NetworkConfig((1, 2), ((1, 1), (1, 2))).validate() is not None
    # ids must stay within {1..n^2}
    assert NetworkConfig((1, 50), ((1, 50),)).validate() is not None


def test_require_valid_raises():
    with pytest.raises(ValueError):
        NetworkConfig((1, 2, 3, 4), ((1, 2), (3, 4))).require_valid()


# -- generators ------------------------------------------------------------


def test_generate_cycle_consecutive_ids():
    c = generate("cycle", 5)
    assert sorted(c.ids) == [0, 1, 2, 3, 4]
    assert all(c.degree(v) == 2 for v in c.ids)
    assert c.has_edge(0, 1) and c.has_edge(4, 0)


def test_generate_complete():
    c = generate("complete", 4)
    assert c.n == 4
    assert len(c.edge_set()) == 6
    assert all(c.degree(v) == 3 for v in c.ids)


def test_generate_regular_connected():
    c = generate("regular", 8, d=3, seed=1)
    assert c.validate() is None
    assert all(c.degree(v) == 3 for v in c.ids)


def test_generate_regular_infeasible():
    with pytest.raises(ValueError):
        generate("regular", 7, d=3, seed=0)  # nd odd


def test_generate_path_and_gnp_valid():
    assert generate("path", 6).validate() is None
    assert generate("gnp", 9, p=0.5, seed=3).validate() is None


@given(st.integers(3, 12), st.integers(0, 1000))
@settings(max_examples=30, deadline=None)
def test_generate_never_invalid(n, seed):
    for kind, kwargs in (("cycle", {}), ("path", {}), ("gnp", {"p": 0.4})):
        assert generate(kind, n, seed=seed, **kwargs).validate() is None


# -- serialization ---------------------------------------------------------


def test_text_round_trip(tmp_path):
    c = generate("gnp", 7, p=0.5, seed=2, labels={v: "10" for v in range(7)})
    path = tmp_path / "g.txt"
    c.save(path)
    back = NetworkConfig.load(path)
    assert back.ids == c.ids
    assert back.edge_set() == c.edge_set()
    assert back.label_map() == c.label_map()


def test_text_format_header():
    c = generate("cycle", 4)
    lines = c.to_text().splitlines()
    assert lines[0] == "4 4"
    assert len(lines) == 1 + 4 + 4  # header, edges, id/label lines


# -- automorphism oracle ---------------------------------------------------


def _vf2_has_nontrivial(config: NetworkConfig) -> bool:
    g = config_to_nx(config)
    matcher = nx.algorithms.isomorphism.GraphMatcher(g, g)
    return sum(1 for _ in itertools.islice(matcher.isomorphisms_iter(), 2)) > 1


def test_automorphism_c4_true():
    assert has_nontrivial_automorphism(generate("cycle", 4))


def test_automorphism_smallest_asymmetric_tree():
    # seven nodes: path 1-2-3-4-5-6 with an extra leaf at 3; the three
    # branches at the unique degree-3 node have pairwise distinct lengths
    tree = NetworkConfig(tuple(range(1, 8)),
                         ((1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (3, 7)))
    assert tree.validate() is None
    assert not has_nontrivial_automorphism(tree)
    assert not _vf2_has_nontrivial(tree)


def test_automorphism_matches_vf2_on_small_graphs():
    for config in connected_configs(5):
        assert has_nontrivial_automorphism(config) == _vf2_has_nontrivial(config)


def test_automorphism_guard():
    with pytest.raises(GuardExceeded):
        has_nontrivial_automorphism(generate("cycle", 25))


# -- symmetry gadget -------------------------------------------------------


def test_gadget_node_count():
    assert build_sym_gadget((1, 1), (1, 1)).n == 14
    assert build_sym_gadget((1, 0, 1), (1, 1, 0)).n == 20


def test_gadget_rejects_zero_vectors():
    with pytest.raises(ValueError):
        build_sym_gadget((0, 0), (1, 0))
    with pytest.raises(ValueError):
        build_sym_gadget((1, 0), (0, 0))


def test_gadget_equal_vectors_symmetric():
    assert has_nontrivial_automorphism(build_sym_gadget((1, 1), (1, 1)))


def test_gadget_distinct_vectors_asymmetric():
    assert not has_nontrivial_automorphism(build_sym_gadget((1, 0), (0, 1)))


def test_gadget_valid_config():
    assert build_sym_gadget((1, 0), (1, 1)).validate() is None
