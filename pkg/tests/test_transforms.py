"""Compiler tests: majority boosting, shared-to-per-node randomness, and
the collapse of prover/referee/prover exchanges into referee-then-prover."""

import dataclasses
import math
from fractions import Fraction

import pytest

from diplab.engine import (FunctionProver, Prover, estimate,
                           simulate_verdicts)
from diplab.errors import GuardExceeded
from diplab.netconfig import generate
from diplab.pls import tree_cert_bits
from diplab.protocols import triangle_dma_shared, triangle_instance
from diplab.transforms import (boost, boost_repetitions, compile_damam_to_dam,
                               compile_dmam_to_dam, damam_spec,
                               derand_header_bits, derandomize_shared,
                               dmam_spec, shared_coin_spec, toy_damam,
                               toy_dmam)

from conftest import three_sigma


# -- majority boosting ---------------------------------------------------------


def test_boost_repetitions_exact_binomial():
    assert boost_repetitions(Fraction(2, 5), Fraction(1, 10)) == 41
    assert boost_repetitions(0, Fraction(1, 3)) == 1
    with pytest.raises(ValueError):
        boost_repetitions(Fraction(1, 2), Fraction(1, 10))
    with pytest.raises(ValueError):
        boost_repetitions(Fraction(1, 5), 0)


def test_boost_validation():
    cfg = generate("cycle", 4)
    base = shared_coin_spec()
    with pytest.raises(ValueError):
        boost(base, cfg, 4)
    inst = triangle_instance(generate("cycle", 5), alpha=1)
    with pytest.raises(ValueError):
        boost(triangle_dma_shared(inst), generate("cycle", 5), 3)  # coin toss


def test_boost_schedule_accounting():
    cfg = generate("cycle", 4)
    boosted = boost(shared_coin_spec(), cfg, 3)
    arthur, merlin = boosted.schedule
    assert arthur.count == 3 and arthur.shared
    # 3 length-prefixed empty blocks plus the tree-and-tally tail
    tail = 2 + 2 + 1 + 1 + 3 * 3
    assert merlin.cap == 3 * (0 + 16) + tail


def test_boost_preserves_certainty():
    cfg = generate("cycle", 4)
    always = shared_coin_spec(threshold=5, range_=5)
    assert estimate(always, cfg, 50, seed=1).accept_all_fraction == 1.0
    boosted = boost(always, cfg, 3)
    assert estimate(boosted, cfg, 150, seed=2).accept_all_fraction == 1.0


def test_boosted_two_fifths_majority_of_five():
    base = shared_coin_spec()  # accepts exactly when the draw is 0 or 1
    cfg = generate("path", 2)
    trials = 10_000
    rep = estimate(base, cfg, trials, seed=3)
    assert abs(rep.accept_all_fraction - 0.4) <= three_sigma(0.4, trials)
    boosted = boost(base, cfg, 5)
    expected = float(sum(Fraction(math.comb(5, j)) * Fraction(2, 5) ** j
                         * Fraction(3, 5) ** (5 - j) for j in range(3, 6)))
    assert expected == 0.31744
    rep = estimate(boosted, cfg, trials, seed=4)
    assert abs(rep.accept_all_fraction - expected) <= three_sigma(expected, trials)


class _TallyFlipper(Prover):
    """Delegates to the boosted prover, then flips the last tally bit of the
    minimum-id node's final certificate."""

    def __init__(self, inner: Prover):
        self.inner = inner

    def certificates(self, config, phase_index, revealed):
        out = dict(self.inner.certificates(config, phase_index, revealed))
        root = min(config.ids)
        cert = out[root]
        out[root] = cert[:-1] + ("1" if cert[-1] == "0" else "0")
        return out


def test_forged_tally_rejected():
    cfg = generate("cycle", 4)
    boosted = boost(shared_coin_spec(threshold=5, range_=5), cfg, 3)
    forged = dataclasses.replace(boosted, prover=_TallyFlipper(boosted.prover))
    rep = estimate(forged, cfg, 100, seed=5)
    assert rep.accept_all_fraction == 0.0


# -- shared-to-per-node randomness ----------------------------------------------


def test_derand_triangle_ma():
    cfg = generate("cycle", 5)
    inst = triangle_instance(cfg, alpha=1)
    base = triangle_dma_shared(inst)
    compiled = derandomize_shared(base, cfg)
    assert compiled.verifier_coins is None
    assert not compiled.uses_shared_randomness()
    headers = derand_header_bits(base, cfg)
    assert headers == [14]
    assert headers[0] <= 6 + tree_cert_bits(cfg)  # draw width + tree fields
    rep = estimate(compiled, cfg, 200, seed=6)
    assert rep.accept_all_fraction == 1.0


class _CommitmentTamper(Prover):
    """Flips every bit of the committed string in the final carrier phase."""

    def __init__(self, inner: Prover, r_width: int, last_phase: int):
        self.inner = inner
        self.r_width = r_width
        self.last_phase = last_phase

    def certificates(self, config, phase_index, revealed):
        out = dict(self.inner.certificates(config, phase_index, revealed))
        if phase_index != self.last_phase:
            return out
        flip = {"0": "1", "1": "0"}
        for v, cert in out.items():
            head, r = cert[:-self.r_width], cert[-self.r_width:]
            out[v] = head + "".join(flip[b] for b in r)
        return out


def test_derand_tampered_commitment_rejected():
    cfg = generate("cycle", 5)
    inst = triangle_instance(cfg, alpha=1)
    compiled = derandomize_shared(triangle_dma_shared(inst), cfg)
    last = len(compiled.merlin_phases) - 1
    forged = dataclasses.replace(
        compiled, prover=_CommitmentTamper(compiled.prover, 6, last))
    rep = estimate(forged, cfg, 150, seed=7)
    assert rep.accept_all_fraction == 0.0


def test_derand_am_mode_preserves_acceptance():
    # the coin protocol is not one-sided; the compiled acceptance tracks the
    # root's draw, so the rate stays 2/5
    cfg = generate("cycle", 5)
    base = shared_coin_spec()
    compiled = derandomize_shared(base, cfg)
    assert derand_header_bits(base, cfg) == [11]
    assert not compiled.uses_shared_randomness()
    trials = 4_000
    rep = estimate(compiled, cfg, trials, seed=8)
    assert abs(rep.accept_all_fraction - 0.4) <= three_sigma(0.4, trials)


def test_derand_mode_validation():
    cfg = generate("cycle", 5)
    inst = triangle_instance(cfg, alpha=1)
    with pytest.raises(ValueError):
        derandomize_shared(triangle_dma_shared(inst), cfg, mode="AM")
    with pytest.raises(ValueError):
        derandomize_shared(shared_coin_spec(), cfg, mode="MA")


# -- dMAM to dAM -------------------------------------------------------------------


def _yes_pair():
    return generate("path", 2, labels=["0", "0"])


def _no_pair():
    return generate("path", 2, labels=["0", "1"])


def _adaptive_claims(desc, cfg, draw, k):
    """Optimal compiled cheat: pick the claim whose mismatching node drew
    all-ones coins, if either did."""
    labels = {v: cfg.label(v) for v in cfg.ids}
    for b in ("0", "1"):
        losers = [v for v in cfg.ids if labels[v] != b]
        if all(all(draw[v][j] == "1" for j in range(k)) for v in losers):
            chosen = b
            break
    else:
        chosen = "0"
    certs = {}
    for v in cfg.ids:
        blocks = [str(int(draw[v][j]) ^ int(chosen == labels[v]))
                  for j in range(k)]
        certs[v] = chosen + "".join(blocks)
    return certs


def _exact_compiled_acceptance(cfg, k):
    from diplab.bits import iter_strings
    desc = toy_dmam(cfg)
    spec = compile_dmam_to_dam(desc, cfg, k=k)
    nodes = sorted(cfg.ids)
    total = 0
    hits = 0
    for bits in iter_strings(k * len(nodes)):
        draw = {v: bits[i * k:(i + 1) * k] for i, v in enumerate(nodes)}
        certs = _adaptive_claims(desc, cfg, draw, k)
        verdicts = simulate_verdicts(spec, cfg, [certs], [draw])
        total += 1
        hits += all(verdicts.values())
    return Fraction(hits, total)


def test_dmam_uncompiled_shape_and_soundness():
    yes = _yes_pair()
    spec = dmam_spec(toy_dmam(yes))
    assert spec.interactions == 3
    assert estimate(spec, yes, 200, seed=9).accept_all_fraction == 1.0

    no = _no_pair()
    spec = dmam_spec(toy_dmam(no))
    trials = 4_000
    rep = estimate(spec, no, trials, seed=10)
    assert abs(rep.accept_all_fraction - 0.5) <= three_sigma(0.5, trials)


def test_compiled_default_k_and_budgets():
    yes = _yes_pair()
    spec = compile_dmam_to_dam(toy_dmam(yes), yes)  # k = n * sigma = 2
    assert spec.interactions == 2
    rep = estimate(spec, yes, 200, seed=11)
    assert rep.accept_all_fraction == 1.0
    assert rep.max_cert_bits == 3  # (k + 1) * sigma
    assert rep.max_random_bits == 2  # k draws of rho bits each


def test_compiled_adaptive_soundness_exact():
    no = _no_pair()
    # seeing the referee strings first buys the prover a union: the claim can
    # chase whichever node drew all ones
    assert _exact_compiled_acceptance(no, 2) == Fraction(7, 16)
    assert _exact_compiled_acceptance(no, 4) == Fraction(31, 256)
    assert Fraction(31, 256) < Fraction(1, 3)


def test_compiled_adaptive_soundness_monte_carlo():
    no = _no_pair()
    desc = toy_dmam(no)
    k = 4
    base = compile_dmam_to_dam(desc, no, k=k)

    def cheat(cfg, phase, revealed):
        draw = revealed[0]
        sliced = {v: [bits[j] for j in range(k)] for v, bits in draw.items()}
        return _adaptive_claims(desc, cfg, {v: "".join(s) for v, s in sliced.items()}, k)

    spec = dataclasses.replace(base, prover=FunctionProver(cheat))
    trials = 6_000
    rep = estimate(spec, no, trials, seed=12)
    p = 31 / 256
    assert abs(rep.accept_all_fraction - p) <= three_sigma(p, trials)


def test_compile_guards():
    yes = _yes_pair()
    desc = toy_dmam(yes)
    with pytest.raises(GuardExceeded):
        compile_dmam_to_dam(desc, yes, k=30_000)
    with pytest.raises(ValueError):
        compile_dmam_to_dam(dataclasses.replace(desc, one_sided=False), yes)
    bad = dataclasses.replace(
        desc, messages=lambda view, y1, r, y2: ["00"] * view.degree)
    with pytest.raises(ValueError):
        estimate(compile_dmam_to_dam(bad, yes), yes, 1, seed=0)


# -- dAMAM fold ----------------------------------------------------------------------


def test_damam_uncompiled_and_folded():
    yes = _yes_pair()
    spec = damam_spec(toy_damam(yes))
    assert spec.interactions == 4
    assert estimate(spec, yes, 200, seed=13).accept_all_fraction == 1.0

    folded = compile_damam_to_dam(toy_damam(yes), yes)  # k = 2
    assert folded.interactions == 2
    arthur, merlin = folded.schedule
    assert arthur.bits == 1 + 2 * 1  # r0 plus k fresh strings
    assert merlin.cap == 3
    assert estimate(folded, yes, 200, seed=14).accept_all_fraction == 1.0


def test_damam_folded_completeness_exhaustive():
    yes = _yes_pair()
    desc = toy_damam(yes)
    folded = compile_damam_to_dam(desc, yes, k=2)
    nodes = sorted(yes.ids)
    from diplab.bits import iter_strings
    prover = folded.prover
    for bits in iter_strings(3 * len(nodes)):
        draw = {v: bits[i * 3:(i + 1) * 3] for i, v in enumerate(nodes)}
        certs = prover.certificates(yes, 0, [draw])
        verdicts = simulate_verdicts(folded, yes, [certs], [draw])
        assert all(verdicts.values()), draw
