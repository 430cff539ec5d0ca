"""Execution engine for distributed interactive verification protocols.

A protocol is a schedule of prover (certificate) and referee (randomness)
phases followed by a t-round synchronous verification stage in which every
node exchanges messages with its neighbors and then decides locally.  The
run accepts when every node accepts.

The engine enforces locality by construction: a node's verifier sees its own
view, its own certificates and random strings, and the messages delivered to
its ports -- nothing else.  Randomness drawn for a phase is either one string
shared by all nodes or an independent string per node; either way the prover
sees every string drawn in earlier phases.

Budgets are measured, not assumed: certificate bits per node per phase,
message bits per directed edge per round, and random bits per node per phase
are reported from actual traffic.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable, Sequence

from .bits import encode, is_bits, width_for
from .errors import BudgetViolation, GuardExceeded
from .netconfig import NetworkConfig, NodeView

ENUMERATION_GUARD = 10_000_000


# -- phase and model declarations -------------------------------------


@dataclass(frozen=True)
class RandomnessModel:
    """How referee strings are drawn: one string for everybody or one per node."""

    mode: str = "shared"
    bits_per_phase: int | None = None

    def __post_init__(self):
        if self.mode not in ("shared", "distributed"):
            raise ValueError("mode must be 'shared' or 'distributed'")


@dataclass(frozen=True)
class ArthurPhase:
    """One randomness phase.

    Exactly one of ``bits`` (uniform bit string) or ``range_`` (uniform value
    in [0, range_), encoded in the minimal width) must be set; ``count``
    draws that many independent copies and concatenates their encodings.
    ``shared`` overrides the run's randomness model when not None.
    """

    bits: int | None = None
    range_: int | None = None
    count: int = 1
    shared: bool | None = None

    def __post_init__(self):
        if (self.bits is None) == (self.range_ is None):
            raise ValueError("set exactly one of bits/range_")
        if self.bits is not None and self.bits < 1:
            raise ValueError("bits must be >= 1")
        if self.range_ is not None and self.range_ < 2:
            raise ValueError("range_ must be >= 2")
        if self.count < 1:
            raise ValueError("count must be >= 1")

    @property
    def copy_width(self) -> int:
        return self.bits if self.bits is not None else width_for(self.range_ - 1)

    @property
    def copy_values(self) -> int:
        return (1 << self.bits) if self.bits is not None else self.range_

    def draw(self, rng: random.Random) -> str:
        parts = []
        for _ in range(self.count):
            if self.bits is not None:
                parts.append(encode(rng.getrandbits(self.bits), self.bits))
            else:
                parts.append(encode(rng.randrange(self.range_), self.copy_width))
        return "".join(parts)

    def all_strings(self) -> list[str]:
        per_copy = [encode(v, self.copy_width) for v in range(self.copy_values)]
        return ["".join(combo) for combo in product(per_copy, repeat=self.count)]

    def is_shared(self, model: RandomnessModel) -> bool:
        return self.shared if self.shared is not None else model.mode == "shared"


@dataclass(frozen=True)
class MerlinPhase:
    """One certificate phase; ``cap`` bounds bits per node when set."""

    cap: int | None = None


Phase = ArthurPhase | MerlinPhase


# -- node-side data ----------------------------------------------------


class NodeContext:
    """Everything a node's verifier may legally consult."""

    __slots__ = ("view", "certs", "random", "inbox")

    def __init__(self, view: NodeView, certs: list[str], random: list[str],
                 inbox: list[list[str]]):
        self.view = view
        self.certs = certs
        self.random = random
        self.inbox = inbox


class LocalVerifier:
    """Base verifier: silent single round, subclasses override.

    ``messages(ctx, rnd)`` returns one bit string per port for round ``rnd``;
    ``decide(ctx)`` returns the node's verdict after all rounds.  Both must be
    deterministic pure functions of the context.
    """

    rounds: int = 1

    def messages(self, ctx: NodeContext, rnd: int) -> Sequence[str]:
        return [""] * ctx.view.degree

    def decide(self, ctx: NodeContext) -> bool:
        raise NotImplementedError


class Prover:
    """Certificate source.  ``revealed`` lists every randomness assignment
    drawn in phases before this one; honest provers ignore it or not."""

    def certificates(self, config: NetworkConfig, phase_index: int,
                     revealed: list[dict[int, str]]) -> dict[int, str]:
        raise NotImplementedError


class FunctionProver(Prover):
    def __init__(self, fn: Callable[[NetworkConfig, int, list[dict[int, str]]], dict[int, str]]):
        self._fn = fn

    def certificates(self, config, phase_index, revealed):
        return self._fn(config, phase_index, revealed)


# -- protocol spec -----------------------------------------------------


@dataclass
class ProtocolSpec:
    """Schedule plus verifier plus (honest) prover.

    The schedule must alternate phase kinds and, when nonempty, end with a
    MerlinPhase (the prover always gets the last word before verification).
    A randomized verifier is modeled by ``verifier_coins``: a final
    ArthurPhase whose string feeds the verifier but is never revealed to the
    prover.
    """

    name: str
    schedule: tuple[Phase, ...]
    prover: Prover
    verifier: LocalVerifier
    verifier_coins: ArthurPhase | None = None
    randomness: RandomnessModel = field(default_factory=RandomnessModel)

    def __post_init__(self):
        self.schedule = tuple(self.schedule)
        for a, b in zip(self.schedule, self.schedule[1:]):
            if isinstance(a, MerlinPhase) == isinstance(b, MerlinPhase):
                raise ValueError("schedule must alternate prover and referee phases")
        if self.schedule and not isinstance(self.schedule[-1], MerlinPhase):
            raise ValueError("a nonempty schedule must end with a MerlinPhase")
        if self.verifier.rounds < 1:
            raise ValueError("verifier needs at least one round")

    @property
    def verifier_randomized(self) -> bool:
        return self.verifier_coins is not None

    @property
    def interactions(self) -> int:
        return len(self.schedule) + (1 if self.verifier_coins is not None else 0)

    @property
    def merlin_phases(self) -> tuple[int, ...]:
        return tuple(i for i, ph in enumerate(self.schedule) if isinstance(ph, MerlinPhase))

    @property
    def arthur_phases(self) -> tuple[ArthurPhase, ...]:
        phases = [ph for ph in self.schedule if isinstance(ph, ArthurPhase)]
        if self.verifier_coins is not None:
            phases.append(self.verifier_coins)
        return tuple(phases)

    def uses_shared_randomness(self, rng: RandomnessModel | None = None) -> bool:
        model = rng or self.randomness
        return any(ph.is_shared(model) for ph in self.arthur_phases)


# -- results -----------------------------------------------------------


@dataclass(frozen=True)
class Transcript:
    """Per-node history in schedule order.

    ``entries[v]`` interleaves ('certificate', bits) and ('randomness', bits)
    items; when the schedule opens with a referee phase an empty certificate
    entry is prepended so the first item is always a certificate.  Verifier
    coins, if any, appear as the final randomness entry.
    """

    entries: dict[int, tuple[tuple[str, str], ...]]
    round_messages: tuple[dict[tuple[int, int], str], ...]
    verdicts: dict[int, bool]
    accepted: bool

    def cert_lengths(self, v: int) -> list[int]:
        return [len(bits) for kind, bits in self.entries[v] if kind == "certificate"]


@dataclass
class RunReport:
    """Aggregate of independent trials; merging is associative."""

    trials: int
    accepted: int
    max_cert_bits: int
    max_msg_bits: int
    max_random_bits: int
    seed: int

    @property
    def accept_all_fraction(self) -> float:
        return self.accepted / self.trials if self.trials else 0.0

    def merge(self, other: "RunReport") -> "RunReport":
        return RunReport(
            trials=self.trials + other.trials,
            accepted=self.accepted + other.accepted,
            max_cert_bits=max(self.max_cert_bits, other.max_cert_bits),
            max_msg_bits=max(self.max_msg_bits, other.max_msg_bits),
            max_random_bits=max(self.max_random_bits, other.max_random_bits),
            seed=self.seed,
        )


# -- engine internals --------------------------------------------------


class _Structure:
    """Port wiring precomputed per configuration."""

    __slots__ = ("ids", "views", "wiring")

    def __init__(self, config: NetworkConfig):
        config.require_valid()
        self.ids = tuple(sorted(config.ids))
        labels = config.label_map()
        self.views = {v: NodeView(v, labels[v], config.degree(v)) for v in self.ids}
        # wiring[v][p] = (neighbor, port of v in neighbor's list)
        nbrs = {v: config.neighbors(v) for v in self.ids}
        self.wiring = {
            v: tuple((u, nbrs[u].index(v)) for u in nbrs[v]) for v in self.ids
        }


_structure_cache: dict[int, tuple[NetworkConfig, _Structure]] = {}


def _structure(config: NetworkConfig) -> _Structure:
    cached = _structure_cache.get(id(config))
    if cached is not None and cached[0] is config:
        return cached[1]
    struct = _Structure(config)
    _structure_cache[id(config)] = (config, struct)
    if len(_structure_cache) > 64:
        _structure_cache.pop(next(iter(_structure_cache)))
    return struct


def _trial_rng(seed: int, trial: int) -> random.Random:
    return random.Random(f"{seed}:{trial}")


def _draw_phase(phase: ArthurPhase, model: RandomnessModel, ids: tuple[int, ...],
                rng: random.Random) -> dict[int, str]:
    if phase.is_shared(model):
        s = phase.draw(rng)
        return {v: s for v in ids}
    return {v: phase.draw(rng) for v in ids}


def _gather_phases(spec: ProtocolSpec, config: NetworkConfig, model: RandomnessModel,
                   rng: random.Random, struct: _Structure):
    """Play the schedule: draw randomness, query the prover, enforce caps."""
    certs: list[dict[int, str]] = []
    randoms: list[dict[int, str]] = []
    merlin_index = 0
    for ph in spec.schedule:
        if isinstance(ph, ArthurPhase):
            randoms.append(_draw_phase(ph, model, struct.ids, rng))
        else:
            assignment = spec.prover.certificates(config, merlin_index, list(randoms))
            merlin_index += 1
            for v in struct.ids:
                cert = assignment.get(v, "")
                if not is_bits(cert):
                    raise ValueError(f"prover produced a non-bit certificate at node {v}")
                if ph.cap is not None and len(cert) > ph.cap:
                    raise BudgetViolation(
                        f"certificate of {len(cert)} bits at node {v} exceeds cap {ph.cap}")
            certs.append({v: assignment.get(v, "") for v in struct.ids})
    if spec.verifier_coins is not None:
        randoms.append(_draw_phase(spec.verifier_coins, model, struct.ids, rng))
    return certs, randoms


def _execute(spec: ProtocolSpec, struct: _Structure, certs: list[dict[int, str]],
             randoms: list[dict[int, str]], collect_messages: bool = False):
    """Run the verification stage; returns (verdicts, budgets, messages)."""
    verifier = spec.verifier
    ctxs = {
        v: NodeContext(struct.views[v], [c[v] for c in certs], [r[v] for r in randoms], [])
        for v in struct.ids
    }
    max_msg = 0
    rounds_out: list[dict[tuple[int, int], str]] = []
    for rnd in range(verifier.rounds):
        outs = {}
        for v in struct.ids:
            msgs = verifier.messages(ctxs[v], rnd)
            if len(msgs) != struct.views[v].degree:
                raise ValueError(f"verifier at {v} produced {len(msgs)} messages "
                                 f"for {struct.views[v].degree} ports")
            outs[v] = msgs
        inboxes = {v: [""] * struct.views[v].degree for v in struct.ids}
        record: dict[tuple[int, int], str] = {}
        for v in struct.ids:
            for port, (u, back) in enumerate(struct.wiring[v]):
                m = outs[v][port]
                inboxes[u][back] = m
                if len(m) > max_msg:
                    max_msg = len(m)
                if collect_messages:
                    record[(v, u)] = m
        for v in struct.ids:
            ctxs[v].inbox.append(inboxes[v])
        if collect_messages:
            rounds_out.append(record)
    verdicts = {v: bool(verifier.decide(ctxs[v])) for v in struct.ids}
    max_cert = max((len(b) for c in certs for b in c.values()), default=0)
    max_rand = max((len(b) for r in randoms for b in r.values()), default=0)
    return verdicts, (max_cert, max_msg, max_rand), tuple(rounds_out)


# -- public operations ---------------------------------------------------


def simulate_verdicts(spec: ProtocolSpec, config: NetworkConfig,
                      certs: list[dict[int, str]],
                      randoms: list[dict[int, str]]) -> dict[int, bool]:
    """Verdicts of spec's verifier on explicit phase assignments.

    Used by compilers whose provers must anticipate per-node outcomes of a
    deterministic verifier; bypasses the prover and any budget caps.
    """
    struct = _structure(config)
    verdicts, _, _ = _execute(spec, struct, certs, randoms)
    return verdicts


def run_once(spec: ProtocolSpec, config: NetworkConfig,
             rng: RandomnessModel | None = None, seed: int = 0):
    """One full run; returns (accepted, Transcript).

    Deterministic in (spec, config, seed); the trial stream matches
    ``estimate``'s trial 0 for the same seed.
    """
    model = rng or spec.randomness
    struct = _structure(config)
    stream = _trial_rng(seed, 0)
    certs, randoms = _gather_phases(spec, config, model, stream, struct)
    verdicts, _, messages = _execute(spec, struct, certs, randoms, collect_messages=True)

    entries: dict[int, tuple[tuple[str, str], ...]] = {}
    arthur_opens = bool(spec.schedule) and isinstance(spec.schedule[0], ArthurPhase)
    for v in struct.ids:
        seq: list[tuple[str, str]] = [("certificate", "")] if arthur_opens else []
        ci = ri = 0
        for ph in spec.schedule:
            if isinstance(ph, MerlinPhase):
                seq.append(("certificate", certs[ci][v]))
                ci += 1
            else:
                seq.append(("randomness", randoms[ri][v]))
                ri += 1
        if spec.verifier_coins is not None:
            seq.append(("randomness", randoms[-1][v]))
        entries[v] = tuple(seq)

    accepted = all(verdicts.values())
    return accepted, Transcript(entries, messages, verdicts, accepted)


def estimate(spec: ProtocolSpec, config: NetworkConfig, trials: int,
             rng: RandomnessModel | None = None, seed: int = 0,
             trial_offset: int = 0) -> RunReport:
    """Monte-Carlo acceptance estimate over independent trials.

    Trial i draws from a stream derived from (seed, trial_offset + i), so a
    run may be split into chunks and the reports merged without changing the
    outcome.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    model = rng or spec.randomness
    struct = _structure(config)
    accepted = 0
    max_cert = max_msg = max_rand = 0
    for t in range(trials):
        stream = _trial_rng(seed, trial_offset + t)
        certs, randoms = _gather_phases(spec, config, model, stream, struct)
        verdicts, (mc, mm, mr), _ = _execute(spec, struct, certs, randoms)
        accepted += all(verdicts.values())
        max_cert = max(max_cert, mc)
        max_msg = max(max_msg, mm)
        max_rand = max(max_rand, mr)
    return RunReport(trials, accepted, max_cert, max_msg, max_rand, seed)


def best_prover_acceptance(spec: ProtocolSpec, config: NetworkConfig,
                           cert_space: Sequence[dict[int, Sequence[str]]],
                           rng: RandomnessModel | None = None,
                           guard: int = ENUMERATION_GUARD) -> Fraction:
    """Exact optimal acceptance probability over all prover strategies.

    ``cert_space`` lists, per prover phase, the candidate certificates of
    every node.  Backward enumeration over the phase tree: the prover picks
    the best assignment knowing all randomness revealed so far; referee
    levels average; leaves run the verification stage.  Guarded by total
    leaf count.
    """
    model = rng or spec.randomness
    struct = _structure(config)
    ids = struct.ids

    levels: list[tuple[str, object]] = []
    mi = 0
    for ph in spec.schedule:
        if isinstance(ph, MerlinPhase):
            levels.append(("M", cert_space[mi]))
            mi += 1
        else:
            levels.append(("A", ph))
    if mi != len(cert_space):
        raise ValueError(f"cert_space has {len(cert_space)} phases, spec has {mi}")
    if spec.verifier_coins is not None:
        levels.append(("A", spec.verifier_coins))

    leaves = 1
    for kind, data in levels:
        if kind == "M":
            for v in ids:
                leaves *= len(data[v])
        else:
            per = data.copy_values ** data.count
            leaves *= per if data.is_shared(model) else per ** len(ids)
        if leaves > guard:
            raise GuardExceeded(f"enumeration needs {leaves} leaves, guard is {guard}")

    msg_cache: dict[tuple, tuple[str, ...]] = {}
    verifier = spec.verifier

    def leaf(certs: list[dict[int, str]], randoms: list[dict[int, str]]) -> Fraction:
        if verifier.rounds == 1:
            # cache round-1 messages keyed by each node's own context
            outs = {}
            for v in ids:
                key = (v, tuple(c[v] for c in certs), tuple(r[v] for r in randoms))
                hit = msg_cache.get(key)
                if hit is None:
                    ctx = NodeContext(struct.views[v], [c[v] for c in certs],
                                      [r[v] for r in randoms], [])
                    hit = tuple(verifier.messages(ctx, 0))
                    if len(hit) != struct.views[v].degree:
                        raise ValueError("bad message arity")
                    msg_cache[key] = hit
                outs[v] = hit
            inboxes = {v: [""] * struct.views[v].degree for v in ids}
            for v in ids:
                for port, (u, back) in enumerate(struct.wiring[v]):
                    inboxes[u][back] = outs[v][port]
            for v in ids:
                ctx = NodeContext(struct.views[v], [c[v] for c in certs],
                                  [r[v] for r in randoms], [inboxes[v]])
                if not verifier.decide(ctx):
                    return Fraction(0)
            return Fraction(1)
        verdicts, _, _ = _execute(spec, struct, certs, randoms)
        return Fraction(1) if all(verdicts.values()) else Fraction(0)

    def walk(i: int, certs: list[dict[int, str]], randoms: list[dict[int, str]]) -> Fraction:
        if i == len(levels):
            return leaf(certs, randoms)
        kind, data = levels[i]
        if kind == "M":
            best = Fraction(0)
            for combo in product(*(data[v] for v in ids)):
                certs.append(dict(zip(ids, combo)))
                val = walk(i + 1, certs, randoms)
                certs.pop()
                if val > best:
                    best = val
                    if best == 1:
                        break
            return best
        strings = data.all_strings()
        if data.is_shared(model):
            total = Fraction(0)
            for s in strings:
                randoms.append({v: s for v in ids})
                total += walk(i + 1, certs, randoms)
                randoms.pop()
            return total / len(strings)
        total = Fraction(0)
        count = 0
        for combo in product(strings, repeat=len(ids)):
            randoms.append(dict(zip(ids, combo)))
            total += walk(i + 1, certs, randoms)
            randoms.pop()
            count += 1
        return total / count

    return walk(0, [], [])
