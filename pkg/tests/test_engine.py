"""Execution semantics: determinism, verdict aggregation, budget accounting,
schedule grammar, and the exact optimal-prover enumeration."""

from fractions import Fraction

import pytest

from diplab.engine import (ArthurPhase, BudgetViolation, FunctionProver,
                           LocalVerifier, MerlinPhase, NodeContext,
                           ProtocolSpec, RandomnessModel, RunReport,
                           best_prover_acceptance, estimate, run_once,
                           simulate_verdicts)
from diplab.errors import GuardExceeded
from diplab.netconfig import NetworkConfig, generate

from conftest import three_sigma


class _ConstVerifier(LocalVerifier):
    def __init__(self, verdict=True):
        self.verdict = verdict

    def decide(self, ctx):
        return self.verdict


class _RejectId1(LocalVerifier):
    def decide(self, ctx):
        return ctx.view.own_id != 1


class _SharedBitZero(LocalVerifier):
    def decide(self, ctx):
        return ctx.random[0] == "0"


def _null_prover(width: int = 0):
    return FunctionProver(lambda cfg, ph, rev: {v: "0" * width for v in cfg.ids})


def _spec(verifier, schedule=None, coins=None, prover=None, name="t"):
    return ProtocolSpec(name, schedule if schedule is not None else (MerlinPhase(),),
                        prover or _null_prover(), verifier, coins)


# -- verdict aggregation -----------------------------------------------------


def test_always_accept():
    accepted, transcript = run_once(_spec(_ConstVerifier(True)), generate("cycle", 4))
    assert accepted and all(transcript.verdicts.values())


def test_reject_iff_id_one():
    c3 = NetworkConfig((1, 2, 3), ((1, 2), (1, 3), (2, 3)))
    accepted, transcript = run_once(_spec(_RejectId1()), c3)
    assert not accepted
    assert transcript.verdicts == {1: False, 2: True, 3: True}


def test_probability_one_fraction():
    rep = estimate(_spec(_ConstVerifier(True)), generate("path", 3), 100, seed=1)
    assert rep.accept_all_fraction == 1.0


def test_shared_bit_half():
    spec = _spec(_SharedBitZero(), coins=ArthurPhase(bits=1, shared=True))
    rep = estimate(spec, generate("cycle", 5), 10_000, seed=9)
    assert abs(rep.accept_all_fraction - 0.5) <= three_sigma(0.5, 10_000)


def test_shared_strings_identical_across_nodes():
    spec = _spec(_ConstVerifier(True), coins=ArthurPhase(bits=16, shared=True))
    _, transcript = run_once(spec, generate("cycle", 6), seed=4)
    drawn = {entries[-1][1] for entries in transcript.entries.values()}
    assert len(drawn) == 1


def test_distributed_strings_vary():
    spec = _spec(_ConstVerifier(True), coins=ArthurPhase(bits=24, shared=False))
    _, transcript = run_once(spec, generate("cycle", 6), seed=4)
    drawn = {entries[-1][1] for entries in transcript.entries.values()}
    assert len(drawn) > 1


# -- determinism and merging -------------------------------------------------


def test_run_once_deterministic():
    spec = _spec(_SharedBitZero(), coins=ArthurPhase(bits=1, shared=True))
    cfg = generate("cycle", 4)
    a1, t1 = run_once(spec, cfg, seed=7)
    a2, t2 = run_once(spec, cfg, seed=7)
    assert a1 == a2 and t1.entries == t2.entries


def test_run_once_matches_estimate_trial0():
    spec = _spec(_SharedBitZero(), coins=ArthurPhase(bits=1, shared=True))
    cfg = generate("cycle", 4)
    single = estimate(spec, cfg, 1, seed=13)
    accepted, _ = run_once(spec, cfg, seed=13)
    assert single.accepted == int(accepted)


def test_report_merge_associative():
    spec = _spec(_SharedBitZero(), coins=ArthurPhase(bits=1, shared=True))
    cfg = generate("cycle", 4)
    reports = [estimate(spec, cfg, 50, seed=s) for s in (1, 2, 3)]
    left = reports[0].merge(reports[1]).merge(reports[2])
    right = reports[0].merge(reports[1].merge(reports[2]))
    assert left == right
    assert left.trials == 150


# -- budgets -----------------------------------------------------------------


def test_max_cert_bits_accounting():
    prover = FunctionProver(lambda cfg, ph, rev: {v: "1" * (3 if v == 2 else 1)
                                                  for v in cfg.ids})
    rep = estimate(_spec(_ConstVerifier(True), prover=prover), generate("path", 3), 5, seed=0)
    assert rep.max_cert_bits == 3


def test_cap_violation_raises():
    spec = _spec(_ConstVerifier(True), schedule=(MerlinPhase(cap=2),),
                 prover=_null_prover(width=5))
    with pytest.raises(BudgetViolation):
        run_once(spec, generate("path", 2))


def test_random_bits_accounting():
    spec = _spec(_ConstVerifier(True), coins=ArthurPhase(bits=11, shared=False))
    rep = estimate(spec, generate("path", 2), 3, seed=0)
    assert rep.max_random_bits == 11


def test_message_bits_accounting():
    class _Chatty(LocalVerifier):
        def messages(self, ctx, rnd):
            return ["10101"] * ctx.view.degree

        def decide(self, ctx):
            return True

    rep = estimate(_spec(_Chatty()), generate("cycle", 3), 2, seed=0)
    assert rep.max_msg_bits == 5


# -- schedule grammar ----------------------------------------------------------


def test_schedule_must_alternate():
    with pytest.raises(ValueError):
        _spec(_ConstVerifier(True), schedule=(MerlinPhase(), MerlinPhase()))


def test_schedule_must_end_with_merlin():
    with pytest.raises(ValueError):
        _spec(_ConstVerifier(True), schedule=(MerlinPhase(), ArthurPhase(bits=1)))


def test_interactions_count_includes_coins():
    spec = _spec(_SharedBitZero(), coins=ArthurPhase(bits=1, shared=True))
    assert spec.interactions == 2
    assert spec.verifier_randomized


def test_range_phase_width():
    ph = ArthurPhase(range_=5)
    assert ph.copy_width == 3
    assert set(ph.all_strings()) == {"000", "001", "010", "011", "100"}


# -- exact optimal prover ------------------------------------------------------


class _MatchLabel(LocalVerifier):
    def decide(self, ctx):
        return ctx.certs[0] == ctx.view.own_label


def test_best_prover_impossible():
    space = [{v: ["0", "1"] for v in (1, 2)}]
    spec = _spec(_ConstVerifier(False))
    cfg = NetworkConfig((1, 2), ((1, 2),))
    assert best_prover_acceptance(spec, cfg, space) == 0


def test_best_prover_copies_inputs():
    cfg = NetworkConfig((1, 2, 3), ((1, 2), (2, 3)), {1: "1", 2: "0", 3: "1"})
    space = [{v: ["0", "1"] for v in cfg.ids}]
    assert best_prover_acceptance(_spec(_MatchLabel()), cfg, space) == 1


def test_best_prover_dominates_fixed_strategies():
    cfg = NetworkConfig((1, 2), ((1, 2),), {1: "1", 2: "0"})

    class _LabelAndCoin(LocalVerifier):
        def decide(self, ctx):
            return ctx.certs[0] == ctx.view.own_label and ctx.random[0] == "0"

    spec = _spec(_LabelAndCoin(), coins=ArthurPhase(bits=1, shared=True))
    space = [{v: ["0", "1"] for v in cfg.ids}]
    best = best_prover_acceptance(spec, cfg, space)
    assert best == Fraction(1, 2)
    for bit1 in "01":
        for bit2 in "01":
            fixed = best_prover_acceptance(spec, cfg, [{1: [bit1], 2: [bit2]}])
            assert fixed <= best


def test_best_prover_guard():
    cfg = generate("cycle", 6)
    space = [{v: ["0" * 20, "1" * 20] for v in cfg.ids}]
    big = _spec(_ConstVerifier(True), coins=ArthurPhase(bits=30, shared=False))
    with pytest.raises(GuardExceeded):
        best_prover_acceptance(big, cfg, space)


def test_simulate_verdicts_bypasses_prover():
    cfg = NetworkConfig((1, 2), ((1, 2),), {1: "1", 2: "0"})
    spec = _spec(_MatchLabel())
    verdicts = simulate_verdicts(spec, cfg, [{1: "1", 2: "0"}], [])
    assert verdicts == {1: True, 2: True}
    verdicts = simulate_verdicts(spec, cfg, [{1: "0", 2: "0"}], [])
    assert verdicts == {1: False, 2: True}
