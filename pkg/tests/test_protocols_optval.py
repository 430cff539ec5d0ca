"""Threshold certification of optimization values: wire layout, honest
completeness, the shifted-sum forgery, and local admissibility checks."""

import itertools
from fractions import Fraction

import pytest

from diplab.adversary import (exact_acceptance, forge_sum_cheater,
                              forged_sum_acceptance)
from diplab.bruteforce import best_admissible, domination_number, is_admissible
from diplab.engine import estimate
from diplab.netconfig import generate
from diplab.protocols import (opt_instance, optval_honest_certs,
                              optval_protocol, optval_wire)

from conftest import connected_configs, three_sigma


def _local_pass(problem, config, chosen):
    from diplab.protocols import _admissible_locally
    return all(
        _admissible_locally(problem, int(v in chosen),
                            [int(u in chosen) for u in config.neighbors(v)])
        for v in config.ids
    )


# -- wire layout ---------------------------------------------------------


def test_cert_bit_accounting():
    cfg = generate("cycle", 5)
    inst = opt_instance(cfg, "mds", 2)
    wire, _ = optval_wire(inst)
    assert wire.id_width == 3 and wire.dist_width == 3
    assert wire.port_width == 1 and wire.sum_width == 3
    assert wire.cert_bits == 2 + 2 * 3 + 3 + 1 + 3 == 15


def test_plain_mode_has_no_masks():
    inst = opt_instance(generate("cycle", 5), "mds", 2)
    wire, _ = optval_wire(inst, mode="plain")
    assert wire.mask_bits == 0


def test_weights_validated():
    cfg = generate("cycle", 4)
    with pytest.raises(ValueError):
        opt_instance(cfg, "mds", 2, weights={v: 0 for v in cfg.ids})
    with pytest.raises(ValueError):
        opt_instance(cfg, "mds", 2, weights={v: cfg.n ** 3 + 1 for v in cfg.ids})
    with pytest.raises(ValueError):
        opt_instance(cfg, "tsp", 2)


# -- honest completeness -------------------------------------------------


def test_c5_mds_honest_accepts():
    cfg = generate("cycle", 5)
    assert domination_number(cfg) == 2
    inst = opt_instance(cfg, "mds", 2)
    rep = estimate(optval_protocol(inst), cfg, 400, seed=5)
    assert rep.accept_all_fraction == 1.0
    assert exact_acceptance(optval_protocol(inst, mode="plain"), cfg,
                            optval_honest_certs(inst)) == 1


def test_honest_accepts_all_problems_small():
    for config in connected_configs(4):
        for problem, objective in (("mds", "minimize"), ("mis", "maximize"),
                                   ("mvc", "minimize")):
            best, _ = best_admissible(config, problem, objective)
            inst = opt_instance(config, problem, best)
            assert exact_acceptance(optval_protocol(inst, mode="plain"),
                                    config, optval_honest_certs(inst)) == 1


def test_fingerprint_mode_handles_edge_depths():
    # nodes whose dist+1 overflows the dist field (the deep end of a path,
    # or the only node of K1) have no children and must still verify
    for cfg in (generate("complete", 1), generate("path", 4)):
        inst = opt_instance(cfg, "mds", domination_number(cfg))
        rep = estimate(optval_protocol(inst, mode="fingerprint"), cfg, 60, seed=8)
        assert rep.accept_all_fraction == 1.0


def test_threshold_direction_minimize():
    cfg = generate("cycle", 5)
    # gamma(C5) = 2: threshold 3 is slack, threshold 1 unreachable
    slack = opt_instance(cfg, "mds", 3)
    assert exact_acceptance(optval_protocol(slack, mode="plain"), cfg,
                            optval_honest_certs(slack)) == 1
    tight = opt_instance(cfg, "mds", 1)
    assert exact_acceptance(optval_protocol(tight, mode="plain"), cfg,
                            optval_honest_certs(tight)) == 0


def test_threshold_direction_maximize():
    cfg = generate("cycle", 5)
    # alpha(C5) = 2: claiming >= 3 must fail with honest certificates
    inst = opt_instance(cfg, "mis", 3)
    assert exact_acceptance(optval_protocol(inst, mode="plain"), cfg,
                            optval_honest_certs(inst)) == 0


def test_weighted_instance():
    cfg = generate("path", 4)
    weights = {v: v + 2 for v in cfg.ids}  # ids 0..3 -> weights 2..5
    best, chosen = best_admissible(cfg, "mds", "minimize", weights)
    inst = opt_instance(cfg, "mds", best, weights=weights)
    assert exact_acceptance(optval_protocol(inst, mode="plain"), cfg,
                            optval_honest_certs(inst)) == 1


# -- forged partial sums ---------------------------------------------------


def test_forge_oracle_c14():
    cfg = generate("cycle", 14)
    inst = opt_instance(cfg, "mis", 13)  # alpha(C14) = 7: no-instance
    assert forged_sum_acceptance(inst, 6, pool_size=10) == Fraction(2, 10)


def test_forge_oracle_c9_default_pool():
    cfg = generate("cycle", 9)
    inst = opt_instance(cfg, "mds", 1)  # gamma(C9) = 3: no-instance
    assert forged_sum_acceptance(inst, -2) == Fraction(1, 72)


def test_forge_exact_matches_engine():
    cfg = generate("cycle", 9)
    inst = opt_instance(cfg, "mds", 1)
    cheat = forge_sum_cheater(inst, -2)
    spec = optval_protocol(inst, mode="plain", prover=cheat)
    certs = cheat.certificates(cfg, 0, [])
    assert exact_acceptance(spec, cfg, certs) == Fraction(1, 72)


def test_forge_reject_rate_monte_carlo():
    # plain mode shares the residue check, so the oracle rate carries over
    cfg = generate("cycle", 5)
    inst = opt_instance(cfg, "mds", 1)
    p = forged_sum_acceptance(inst, -2)
    assert p == Fraction(1, 60)
    spec = optval_protocol(inst, mode="plain", prover=forge_sum_cheater(inst, -2))
    trials = 6_000
    rep = estimate(spec, cfg, trials, seed=9)
    assert abs(rep.accept_all_fraction - float(p)) <= three_sigma(float(p), trials)


def test_forge_divisible_delta_always_caught_eventually():
    # delta with no divisor in the pool is rejected with certainty
    cfg = generate("cycle", 9)
    inst = opt_instance(cfg, "mds", 1)
    assert forged_sum_acceptance(inst, -1, pool_size=5) == 0


# -- admissibility ----------------------------------------------------------


def test_local_admissibility_matches_global():
    for config in connected_configs(4):
        nodes = sorted(config.ids)
        for bits in itertools.product((0, 1), repeat=len(nodes)):
            chosen = frozenset(v for v, b in zip(nodes, bits) if b)
            for problem in ("mds", "mis", "mvc"):
                assert (is_admissible(config, problem, chosen)
                        == _local_pass(problem, config, chosen)), (
                    config.edge_set(), problem, chosen)
