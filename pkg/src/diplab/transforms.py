"""Protocol-to-protocol compilers.

* ``boost``: run C independent copies of a protocol and let the prover
  aggregate per-copy reject counts up a spanning tree so the root can take
  the majority verdict.
* ``derandomize_shared``: replace shared random strings by per-node draws;
  the prover commits to the minimum-id node's string and ships it down a
  spanning tree, where the root checks it against its own draw.
* ``compile_dmam_to_dam``: collapse a one-sided
  prover/referee/prover exchange into referee-then-prover by sending k
  independent referee strings at once and simulating all k repetitions.

All compilers preserve one-sided completeness exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .bits import decode, encode, split_fields, take_fields, width_for
from .engine import (ArthurPhase, FunctionProver, LocalVerifier, MerlinPhase,
                     NodeContext, ProtocolSpec, Prover, simulate_verdicts)
from .errors import GuardExceeded
from .netconfig import NetworkConfig, NodeView
from .pls import tree_prove

BLOCK_PREFIX_BITS = 16
REPETITION_GUARD = 10_001
COMPILE_K_GUARD = 20_000


# -- majority boosting ----------------------------------------------------


def boost_repetitions(p: Fraction | float, target: Fraction | float) -> int:
    """Minimal odd C for which C independent trials, each accepted with
    probability p < 1/2, produce a majority of acceptances with probability
    at most ``target``.  Exact binomial tail, no bounds."""
    p = Fraction(p).limit_denominator(10 ** 12) if isinstance(p, float) else Fraction(p)
    target = (Fraction(target).limit_denominator(10 ** 12)
              if isinstance(target, float) else Fraction(target))
    if not 0 <= p < Fraction(1, 2):
        raise ValueError("per-repetition acceptance must be below 1/2")
    if target <= 0:
        raise ValueError("target must be positive")
    for c in range(1, REPETITION_GUARD, 2):
        tail = sum(Fraction(math.comb(c, j)) * p ** j * (1 - p) ** (c - j)
                   for j in range((c + 1) // 2, c + 1))
        if tail <= target:
            return c
    raise GuardExceeded(f"no odd C below {REPETITION_GUARD} reaches {target}")


def _boost_phase(phase, c: int):
    if isinstance(phase, MerlinPhase):
        cap = None if phase.cap is None else c * (phase.cap + BLOCK_PREFIX_BITS)
        return MerlinPhase(cap=cap)
    return ArthurPhase(bits=phase.bits, range_=phase.range_,
                       count=phase.count * c, shared=phase.shared)


def _pack_blocks(blocks: list[str]) -> str:
    return "".join(encode(len(b), BLOCK_PREFIX_BITS) + b for b in blocks)


def _unpack_blocks(bits: str, count: int) -> list[str] | None:
    out = []
    rest = bits
    for _ in range(count):
        if len(rest) < BLOCK_PREFIX_BITS:
            return None
        length = decode(rest[:BLOCK_PREFIX_BITS])
        rest = rest[BLOCK_PREFIX_BITS:]
        if len(rest) < length:
            return None
        out.append(rest[:length])
        rest = rest[length:]
    return out if not rest else None


def _rep_slices(phase: ArthurPhase, compiled: str, c: int) -> list[str]:
    per_rep = phase.count * phase.copy_width
    return [compiled[j * per_rep:(j + 1) * per_rep] for j in range(c)]


@dataclass(frozen=True)
class _BoostWire:
    id_width: int
    dist_width: int
    port_width: int
    count_width: int
    copies: int

    @property
    def tail_bits(self) -> int:
        return (self.id_width + self.dist_width + 1 + self.port_width
                + self.copies * self.count_width)

    @property
    def msg_bits(self) -> int:
        return self.id_width + self.dist_width + 1 + self.copies * self.count_width


def _boost_wire(config: NetworkConfig, c: int) -> _BoostWire:
    return _BoostWire(
        id_width=width_for(max(config.ids)),
        dist_width=width_for(config.n - 1),
        port_width=width_for(max(config.max_degree - 1, 0)),
        count_width=width_for(config.n),
        copies=c,
    )


class _BoostProver(Prover):
    def __init__(self, base: ProtocolSpec, config: NetworkConfig, wire: _BoostWire):
        self.base = base
        self.config = config
        self.wire = wire
        self.tree = tree_prove(config)
        self.last = len(base.merlin_phases) - 1
        self.arthur = [ph for ph in base.schedule if isinstance(ph, ArthurPhase)]

    def _per_rep_revealed(self, revealed):
        c = self.wire.copies
        per_rep = [[] for _ in range(c)]
        for phase, assignment in zip(self.arthur, revealed):
            sliced = {v: _rep_slices(phase, bits, c) for v, bits in assignment.items()}
            for j in range(c):
                per_rep[j].append({v: s[j] for v, s in sliced.items()})
        return per_rep

    def certificates(self, config, phase_index, revealed):
        c = self.wire.copies
        per_rep = self._per_rep_revealed(revealed)
        assignments = [self.base.prover.certificates(config, phase_index, per_rep[j])
                       for j in range(c)]
        out = {v: _pack_blocks([assignments[j].get(v, "") for j in range(c)])
               for v in config.ids}
        if phase_index != self.last:
            return out

        # final phase: append the tree encoding and per-copy reject tallies
        counts = self._reject_counts(config, per_rep)
        w = self.wire
        for v in config.ids:
            t = self.tree[v]
            has_parent = t.parent_id is not None
            port = config.neighbors(v).index(t.parent_id) if has_parent else 0
            tail = (encode(t.root_id, w.id_width)
                    + encode(t.dist, w.dist_width)
                    + encode(int(has_parent), 1)
                    + encode(port, w.port_width)
                    + "".join(encode(counts[j][v], w.count_width) for j in range(c)))
            out[v] = out[v] + tail
        return out

    def _reject_counts(self, config, per_rep):
        """Per copy, the number of rejecting nodes in each node's subtree;
        requires the base verifier to be deterministic."""
        c = self.wire.copies
        merlins = self.base.merlin_phases
        counts = []
        for j in range(c):
            certs = []
            queried = 0
            for i, ph in enumerate(self.base.schedule):
                if isinstance(ph, MerlinPhase):
                    revealed = [a for k, a in enumerate(per_rep[j]) if k < _arthur_before(self.base, i)]
                    assignment = self.base.prover.certificates(config, queried, revealed)
                    certs.append({v: assignment.get(v, "") for v in config.ids})
                    queried += 1
            verdicts = simulate_verdicts(self.base, config, certs, per_rep[j])
            tally = {}
            for v in sorted(config.ids, key=lambda v: -self.tree[v].dist):
                children = [u for u in config.neighbors(v)
                            if self.tree[u].parent_id == v]
                tally[v] = int(not verdicts[v]) + sum(tally[u] for u in children)
            counts.append(tally)
        return counts


def _arthur_before(spec: ProtocolSpec, index: int) -> int:
    return sum(1 for ph in spec.schedule[:index] if isinstance(ph, ArthurPhase))


class _BoostVerifier(LocalVerifier):
    def __init__(self, base: ProtocolSpec, wire: _BoostWire):
        self.base = base
        self.wire = wire
        self.rounds = base.verifier.rounds + 1
        self.arthur = [ph for ph in base.schedule if isinstance(ph, ArthurPhase)]
        self.n_merlin = len(base.merlin_phases)

    def _parse(self, ctx):
        """Per-copy certificate and randomness slices plus the tree tail."""
        c = self.wire.copies
        certs = []
        for i, packed in enumerate(ctx.certs):
            raw = packed
            tail = None
            if i == self.n_merlin - 1:
                if len(raw) < self.wire.tail_bits:
                    return None
                raw, tail = raw[:-self.wire.tail_bits], raw[-self.wire.tail_bits:]
            blocks = _unpack_blocks(raw, c)
            if blocks is None:
                return None
            certs.append(blocks)
        randoms = [_rep_slices(ph, bits, c)
                   for ph, bits in zip(self.arthur, ctx.random)]
        w = self.wire
        fields = split_fields(tail, [w.id_width, w.dist_width, 1, w.port_width]
                              + [w.count_width] * c)
        root, dist, hp, port = (decode(f) for f in fields[:4])
        counts = [decode(f) for f in fields[4:]]
        return certs, randoms, (root, dist, bool(hp), port, counts)

    def _rep_ctx(self, ctx, parsed, j: int, upto_round: int):
        certs, randoms, _ = parsed
        inbox = []
        for rnd in range(upto_round):
            row = []
            for bits in ctx.inbox[rnd]:
                blocks = _unpack_blocks(bits, self.wire.copies)
                if blocks is None:
                    return None
                row.append(blocks[j])
            inbox.append(row)
        return NodeContext(ctx.view, [cs[j] for cs in certs],
                           [rs[j] for rs in randoms], inbox)

    def messages(self, ctx, rnd):
        parsed = self._parse(ctx)
        degree = ctx.view.degree
        if rnd < self.base.verifier.rounds:
            if parsed is None:
                return [""] * degree
            outs = []
            for j in range(self.wire.copies):
                rep = self._rep_ctx(ctx, parsed, j, rnd)
                if rep is None:
                    return [""] * degree
                outs.append(self.base.verifier.messages(rep, rnd))
            return [_pack_blocks([outs[j][p] for j in range(self.wire.copies)])
                    for p in range(degree)]
        # tally round
        if parsed is None:
            return [""] * degree
        root, dist, hp, port, counts = parsed[2]
        w = self.wire
        base = (encode(root, w.id_width) + encode(dist, w.dist_width))
        tail = "".join(encode(x, w.count_width) for x in counts)
        return [base + ("1" if hp and p == port else "0") + tail
                for p in range(degree)]

    def decide(self, ctx):
        parsed = self._parse(ctx)
        if parsed is None:
            return False
        root, dist, hp, port, counts = parsed[2]
        if hp != (dist > 0) or (hp and port >= ctx.view.degree):
            return False
        if not hp and root != ctx.view.own_id:
            return False
        w = self.wire
        widths = [w.id_width, w.dist_width, 1] + [w.count_width] * w.copies
        last = self.base.verifier.rounds
        neighbors = []
        for bits in ctx.inbox[last]:
            if len(bits) != w.msg_bits:
                return False
            fields = split_fields(bits, widths)
            neighbors.append((decode(fields[0]), decode(fields[1]), fields[2],
                              [decode(f) for f in fields[3:]]))
        if any(nr != root for nr, _, _, _ in neighbors):
            return False
        if hp and neighbors[port][1] != dist - 1:
            return False
        if any(nd != dist + 1 for _, nd, claim, _ in neighbors if claim == "1"):
            return False
        for j in range(w.copies):
            rep = self._rep_ctx(ctx, parsed, j, self.base.verifier.rounds)
            if rep is None:
                return False
            mine = int(not self.base.verifier.decide(rep))
            from_children = sum(nc[j] for _, _, claim, nc in neighbors if claim == "1")
            if counts[j] != mine + from_children:
                return False
        if dist == 0:
            zeros = sum(1 for j in range(w.copies) if counts[j] == 0)
            return zeros >= (w.copies + 1) // 2
        return True


def boost(spec: ProtocolSpec, config: NetworkConfig, copies: int) -> ProtocolSpec:
    """Majority vote over ``copies`` parallel executions.

    Requires an odd copy count, at least two phases, and a deterministic
    verifier (the prover must be able to anticipate every copy's verdicts to
    aggregate reject counts; a final coin toss would make that impossible).
    """
    if copies < 1 or copies % 2 == 0:
        raise ValueError("copies must be odd")
    if len(spec.schedule) < 2:
        raise ValueError("boost needs at least two phases")
    if spec.verifier_coins is not None:
        raise ValueError("boost requires a deterministic verifier")
    config.require_valid()
    wire = _boost_wire(config, copies)
    schedule = tuple(_boost_phase(ph, copies) for ph in spec.schedule)
    tail_cap = schedule[-1].cap
    schedule = schedule[:-1] + (MerlinPhase(
        cap=None if tail_cap is None else tail_cap + wire.tail_bits),)
    return ProtocolSpec(
        name=f"boost[{copies}]({spec.name})",
        schedule=schedule,
        prover=_BoostProver(spec, config, wire),
        verifier=_BoostVerifier(spec, wire),
        randomness=spec.randomness,
    )


def shared_coin_spec(threshold: int = 2, range_: int = 5) -> ProtocolSpec:
    """Synthetic two-phase fixture: one shared draw from [0, range_), empty
    certificates, accept everywhere iff the draw is below the threshold."""

    class _CoinVerifier(LocalVerifier):
        rounds = 1

        def decide(self, ctx):
            return decode(ctx.random[0]) < threshold

    return ProtocolSpec(
        name=f"shared-coin[{threshold}/{range_}]",
        schedule=(ArthurPhase(range_=range_, shared=True), MerlinPhase(cap=0)),
        prover=FunctionProver(lambda cfg, phase, revealed: {}),
        verifier=_CoinVerifier(),
    )


# -- shared-to-distributed randomness --------------------------------------


@dataclass(frozen=True)
class _DerandWire:
    """Header accounting.  ``shared`` flags, per referee phase of the base
    spec (coins last), whether that phase is being replaced by per-node
    draws; only those phases get headers and message prefixes."""

    id_width: int
    dist_width: int
    port_width: int
    r_widths: tuple[int, ...]
    shared: tuple[bool, ...]

    def header_bits(self, arthur_index: int) -> int:
        return (self.id_width + self.dist_width + 1 + self.port_width
                + self.r_widths[arthur_index])

    @property
    def shared_indices(self) -> tuple[int, ...]:
        return tuple(i for i, s in enumerate(self.shared) if s)

    def prefix_bits(self) -> int:
        return sum(self.id_width + self.dist_width + self.r_widths[i]
                   for i in self.shared_indices)


def derand_header_bits(spec: ProtocolSpec, config: NetworkConfig) -> list[int]:
    """Certificate overhead per replaced phase of the compiled spec."""
    wire = _derand_wire(spec, config)
    return [wire.header_bits(i) for i in wire.shared_indices]


def _derand_wire(spec: ProtocolSpec, config: NetworkConfig) -> _DerandWire:
    phases = spec.arthur_phases  # includes verifier coins, when present
    return _DerandWire(
        id_width=width_for(max(config.ids)),
        dist_width=width_for(config.n - 1),
        port_width=width_for(max(config.max_degree - 1, 0)),
        r_widths=tuple(ph.count * ph.copy_width for ph in phases),
        shared=tuple(ph.is_shared(spec.randomness) for ph in phases),
    )


class _DerandProver(Prover):
    def __init__(self, base: ProtocolSpec, config: NetworkConfig, wire: _DerandWire):
        self.base = base
        self.wire = wire
        self.tree = tree_prove(config)
        self.root = min(config.ids)
        self.config = config
        self.base_merlins = len(base.merlin_phases)

    def _header(self, v: int, chosen: str) -> str:
        w = self.wire
        t = self.tree[v]
        has_parent = t.parent_id is not None
        port = (self.config.neighbors(v).index(t.parent_id) if has_parent else 0)
        return (encode(t.root_id, w.id_width)
                + encode(t.dist, w.dist_width)
                + encode(int(has_parent), 1)
                + encode(port, w.port_width)
                + chosen)

    def certificates(self, config, phase_index, revealed):
        # replaced phases arrive as per-node draws; the prover elects the
        # minimum-id node's string and presents it to the base prover as
        # the shared string it expects
        base_view = []
        for i, assignment in enumerate(revealed):
            if self.wire.shared[i]:
                base_view.append({v: assignment[self.root] for v in config.ids})
            else:
                base_view.append(assignment)
        if phase_index < self.base_merlins:
            base = self.base.prover.certificates(config, phase_index, base_view)
        else:
            base = {v: "" for v in config.ids}  # appended commitment phase
        last = len(revealed) - 1
        out = {}
        for v in config.ids:
            cert = base.get(v, "")
            if revealed and self.wire.shared[last]:
                cert = self._header(v, revealed[last][self.root]) + cert
            out[v] = cert
        return out


class _DerandVerifier(LocalVerifier):
    def __init__(self, base: ProtocolSpec, wire: _DerandWire, ma_mode: bool):
        self.base = base
        self.wire = wire
        self.ma_mode = ma_mode
        self.rounds = base.verifier.rounds
        # headered[m] = referee phase whose string Merlin phase m carries,
        # or None; a header exists when the directly preceding phase was
        # replaced.  MA mode appends one more carrier for the coins.
        self.headered: list[int | None] = []
        arthur_seen = 0
        for ph in base.schedule:
            if isinstance(ph, MerlinPhase):
                carried = arthur_seen - 1 if arthur_seen else None
                if carried is not None and not wire.shared[carried]:
                    carried = None
                self.headered.append(carried)
            else:
                arthur_seen += 1
        if ma_mode:
            self.headered.append(arthur_seen)

    def _split(self, ctx):
        """Strip headers: returns (base certs, chosen strings, tree claims)."""
        w = self.wire
        base_certs = []
        chosen = {}
        claims = {}
        for cert, phase in zip(ctx.certs, self.headered):
            if phase is None:
                base_certs.append(cert)
                continue
            widths = [w.id_width, w.dist_width, 1, w.port_width, w.r_widths[phase]]
            if len(cert) < sum(widths):
                return None
            fields, rest = take_fields(cert, widths)
            claims[phase] = (decode(fields[0]), decode(fields[1]),
                             bool(decode(fields[2])), decode(fields[3]))
            chosen[phase] = fields[4]
            base_certs.append(rest)
        if self.ma_mode:
            base_certs = base_certs[:-1]
        return base_certs, chosen, claims

    def _base_ctx(self, ctx, split, upto: int):
        base_certs, chosen, _ = split
        randoms = [chosen[i] if shared else ctx.random[i]
                   for i, shared in enumerate(self.wire.shared)]
        prefix = self.wire.prefix_bits()
        inbox = []
        for rnd in range(upto):
            row = ctx.inbox[rnd]
            if rnd == 0:
                if any(len(m) < prefix for m in row):
                    return None
                row = [m[prefix:] for m in row]
            inbox.append(list(row))
        return NodeContext(ctx.view, base_certs, randoms, inbox)

    def _prefix(self, split) -> str:
        _, chosen, claims = split
        w = self.wire
        parts = []
        for i in w.shared_indices:
            root, dist, _, _ = claims[i]
            parts.append(encode(root, w.id_width) + encode(dist, w.dist_width)
                         + chosen[i])
        return "".join(parts)

    def messages(self, ctx, rnd):
        split = self._split(ctx)
        if split is None:
            return [""] * ctx.view.degree
        base = self._base_ctx(ctx, split, rnd)
        if base is None:
            return [""] * ctx.view.degree
        msgs = self.base.verifier.messages(base, rnd)
        if rnd == 0:
            head = self._prefix(split)
            msgs = [head + m for m in msgs]
        return msgs

    def decide(self, ctx):
        split = self._split(ctx)
        if split is None:
            return False
        _, chosen, claims = split
        w = self.wire
        own = ctx.view.own_id
        for i in w.shared_indices:
            root, dist, hp, port = claims[i]
            if root > own or hp != (dist > 0):
                return False
            if hp and port >= ctx.view.degree:
                return False
            if not hp:
                # distance 0 pins the root: its id must match and the
                # committed string must equal its own draw for that phase
                if root != own or chosen[i] != ctx.random[i]:
                    return False
        widths = []
        for i in w.shared_indices:
            widths.extend([w.id_width, w.dist_width, w.r_widths[i]])
        for p, bits in enumerate(ctx.inbox[0]):
            if len(bits) < w.prefix_bits():
                return False
            fields = split_fields(bits[:w.prefix_bits()], widths)
            for k, i in enumerate(w.shared_indices):
                nroot, ndist, nr = fields[3 * k], fields[3 * k + 1], fields[3 * k + 2]
                root, dist, hp, port = claims[i]
                if decode(nroot) != root or nr != chosen[i]:
                    return False
                if hp and p == port and decode(ndist) != dist - 1:
                    return False
        base = self._base_ctx(ctx, split, self.base.verifier.rounds)
        if base is None:
            return False
        return self.base.verifier.decide(base)


def derandomize_shared(spec: ProtocolSpec, config: NetworkConfig,
                       mode: str | None = None) -> ProtocolSpec:
    """Shared strings become per-node draws; the prover ships the
    minimum-id node's string down a spanning tree, each certificate carrying
    (tree fields, string) for the phase it answers, and the root rejects any
    string that is not its own draw.  Referee phases that already draw per
    node pass through untouched.

    MA mode (a final coin toss) appends one more prover phase carrying the
    commitment to the coins, making the compiled verifier deterministic.
    """
    config.require_valid()
    if mode is None:
        mode = "MA" if spec.verifier_coins is not None else "AM"
    if mode not in ("AM", "MA"):
        raise ValueError("mode must be 'AM' or 'MA'")
    if (mode == "MA") != (spec.verifier_coins is not None):
        raise ValueError("MA mode needs verifier coins; AM mode forbids them")
    if mode == "MA" and not spec.verifier_coins.is_shared(spec.randomness):
        raise ValueError("MA mode expects shared verifier coins")
    wire = _derand_wire(spec, config)

    schedule = []
    arthur_seen = 0
    for ph in spec.schedule:
        if isinstance(ph, ArthurPhase):
            if ph.is_shared(spec.randomness):
                ph = ArthurPhase(bits=ph.bits, range_=ph.range_,
                                 count=ph.count, shared=False)
            schedule.append(ph)
            arthur_seen += 1
        else:
            cap = ph.cap
            if arthur_seen and wire.shared[arthur_seen - 1] and cap is not None:
                cap += wire.header_bits(arthur_seen - 1)
            schedule.append(MerlinPhase(cap=cap))
    if mode == "MA":
        coins = spec.verifier_coins
        schedule.append(ArthurPhase(bits=coins.bits, range_=coins.range_,
                                    count=coins.count, shared=False))
        schedule.append(MerlinPhase(cap=wire.header_bits(len(wire.shared) - 1)))

    return ProtocolSpec(
        name=f"derand({spec.name})",
        schedule=tuple(schedule),
        prover=_DerandProver(spec, config, wire),
        verifier=_DerandVerifier(spec, wire, mode == "MA"),
    )


# -- prover/referee/prover to referee/prover -------------------------------


@dataclass(frozen=True)
class DmamDescription:
    """A one-round prover/referee/prover protocol in normal form.

    ``prover1`` answers before any randomness; ``prover2`` sees the per-node
    strings of the middle referee phase.  ``messages`` returns exactly
    ``msg_width`` bits per port; ``decide`` consumes the per-port inbox.
    """

    sigma: int
    rho: int
    msg_width: int
    one_sided: bool
    prover1: Callable[[NetworkConfig], dict[int, str]]
    prover2: Callable[[NetworkConfig, dict[int, str]], dict[int, str]]
    messages: Callable[[NodeView, str, str, str], list[str]]
    decide: Callable[[NodeView, str, str, str, list[str]], bool]


def dmam_spec(desc: DmamDescription) -> ProtocolSpec:
    """The uncompiled three-phase form."""

    class _Verifier(LocalVerifier):
        rounds = 1

        def messages(self, ctx, rnd):
            return desc.messages(ctx.view, ctx.certs[0], ctx.random[0], ctx.certs[1])

        def decide(self, ctx):
            return desc.decide(ctx.view, ctx.certs[0], ctx.random[0],
                               ctx.certs[1], ctx.inbox[0])

    def prove(cfg, phase, revealed):
        return desc.prover1(cfg) if phase == 0 else desc.prover2(cfg, revealed[0])

    return ProtocolSpec(
        name="dmam",
        schedule=(MerlinPhase(cap=desc.sigma),
                  ArthurPhase(bits=desc.rho, shared=False),
                  MerlinPhase(cap=desc.sigma)),
        prover=FunctionProver(prove),
        verifier=_Verifier(),
    )


class _CompiledVerifier(LocalVerifier):
    rounds = 1

    def __init__(self, desc: DmamDescription, k: int):
        self.desc = desc
        self.k = k

    def _blocks(self, ctx):
        d = self.desc
        cert = ctx.certs[0]
        if len(cert) != (self.k + 1) * d.sigma:
            return None
        y1, rest = cert[:d.sigma], cert[d.sigma:]
        y2 = [rest[j * d.sigma:(j + 1) * d.sigma] for j in range(self.k)]
        r = [ctx.random[0][j * d.rho:(j + 1) * d.rho] for j in range(self.k)]
        return y1, y2, r

    def messages(self, ctx, rnd):
        blocks = self._blocks(ctx)
        if blocks is None:
            return [""] * ctx.view.degree
        y1, y2, r = blocks
        per_rep = []
        for j in range(self.k):
            msgs = self.desc.messages(ctx.view, y1, r[j], y2[j])
            if any(len(m) != self.desc.msg_width for m in msgs):
                raise ValueError("description produced off-width messages")
            per_rep.append(msgs)
        return ["".join(per_rep[j][p] for j in range(self.k))
                for p in range(ctx.view.degree)]

    def decide(self, ctx):
        blocks = self._blocks(ctx)
        if blocks is None:
            return False
        y1, y2, r = blocks
        w = self.desc.msg_width
        for bits in ctx.inbox[0]:
            if len(bits) != self.k * w:
                return False
        for j in range(self.k):
            inbox_j = [bits[j * w:(j + 1) * w] for bits in ctx.inbox[0]]
            if not self.desc.decide(ctx.view, y1, r[j], y2[j], inbox_j):
                return False
        return True


def compile_dmam_to_dam(desc: DmamDescription, config: NetworkConfig,
                        k: int | None = None,
                        guard: int = COMPILE_K_GUARD) -> ProtocolSpec:
    """Send k independent referee strings up front; the prover answers with
    one y1 block and k y2 blocks; every node simulates all k repetitions and
    accepts only unanimous success.  Defaults to k = n * sigma."""
    if not desc.one_sided:
        raise ValueError("the compiler requires a one-sided description")
    config.require_valid()
    if k is None:
        k = config.n * desc.sigma
    if not 1 <= k <= guard:
        raise GuardExceeded(f"k={k} outside 1..{guard}")

    def prove(cfg, phase, revealed):
        y1 = desc.prover1(cfg)
        reps = []
        for j in range(k):
            r_j = {v: bits[j * desc.rho:(j + 1) * desc.rho]
                   for v, bits in revealed[0].items()}
            reps.append(desc.prover2(cfg, r_j))
        return {v: y1.get(v, "") + "".join(rep.get(v, "") for rep in reps)
                for v in cfg.ids}

    return ProtocolSpec(
        name=f"dam-compiled[k={k}]",
        schedule=(ArthurPhase(bits=desc.rho, count=k, shared=False),
                  MerlinPhase(cap=(k + 1) * desc.sigma)),
        prover=FunctionProver(prove),
        verifier=_CompiledVerifier(desc, k),
    )


@dataclass(frozen=True)
class DamamDescription:
    """A referee/prover/referee/prover protocol; the leading referee phase
    feeds the first prover, which is what the fold into the two-phase
    compiler exploits."""

    sigma: int
    rho0: int
    rho: int
    msg_width: int
    one_sided: bool
    prover1: Callable[[NetworkConfig, dict[int, str]], dict[int, str]]
    prover2: Callable[[NetworkConfig, dict[int, str], dict[int, str]], dict[int, str]]
    messages: Callable[[NodeView, str, str, str, str], list[str]]
    decide: Callable[[NodeView, str, str, str, str, list[str]], bool]


def damam_spec(desc: DamamDescription) -> ProtocolSpec:
    class _Verifier(LocalVerifier):
        rounds = 1

        def messages(self, ctx, rnd):
            return desc.messages(ctx.view, ctx.random[0], ctx.certs[0],
                                 ctx.random[1], ctx.certs[1])

        def decide(self, ctx):
            return desc.decide(ctx.view, ctx.random[0], ctx.certs[0],
                               ctx.random[1], ctx.certs[1], ctx.inbox[0])

    def prove(cfg, phase, revealed):
        if phase == 0:
            return desc.prover1(cfg, revealed[0])
        return desc.prover2(cfg, revealed[0], revealed[1])

    return ProtocolSpec(
        name="damam",
        schedule=(ArthurPhase(bits=desc.rho0, shared=False),
                  MerlinPhase(cap=desc.sigma),
                  ArthurPhase(bits=desc.rho, shared=False),
                  MerlinPhase(cap=desc.sigma)),
        prover=FunctionProver(prove),
        verifier=_Verifier(),
    )


def compile_damam_to_dam(desc: DamamDescription, config: NetworkConfig,
                         k: int | None = None,
                         guard: int = COMPILE_K_GUARD) -> ProtocolSpec:
    """Fold the leading referee phase into the prover's input: the compiled
    referee phase draws (r0, r_1..r_k) at once, then one prover phase
    answers with y1 (a function of r0) and the k y2 blocks."""
    if not desc.one_sided:
        raise ValueError("the compiler requires a one-sided description")
    config.require_valid()
    if k is None:
        k = config.n * desc.sigma
    if not 1 <= k <= guard:
        raise GuardExceeded(f"k={k} outside 1..{guard}")
    rho0, rho = desc.rho0, desc.rho

    def slices(bits: str):
        r0 = bits[:rho0]
        return r0, [bits[rho0 + j * rho:rho0 + (j + 1) * rho] for j in range(k)]

    class _Verifier(LocalVerifier):
        rounds = 1

        def _blocks(self, ctx):
            cert = ctx.certs[0]
            if len(cert) != (k + 1) * desc.sigma:
                return None
            y1 = cert[:desc.sigma]
            y2 = [cert[(j + 1) * desc.sigma:(j + 2) * desc.sigma] for j in range(k)]
            r0, r = slices(ctx.random[0])
            return y1, y2, r0, r

        def messages(self, ctx, rnd):
            blocks = self._blocks(ctx)
            if blocks is None:
                return [""] * ctx.view.degree
            y1, y2, r0, r = blocks
            out = []
            for j in range(k):
                msgs = desc.messages(ctx.view, r0, y1, r[j], y2[j])
                if any(len(m) != desc.msg_width for m in msgs):
                    raise ValueError("description produced off-width messages")
                out.append(msgs)
            return ["".join(out[j][p] for j in range(k))
                    for p in range(ctx.view.degree)]

        def decide(self, ctx):
            blocks = self._blocks(ctx)
            if blocks is None:
                return False
            y1, y2, r0, r = blocks
            w = desc.msg_width
            for bits in ctx.inbox[0]:
                if len(bits) != k * w:
                    return False
            for j in range(k):
                inbox_j = [bits[j * w:(j + 1) * w] for bits in ctx.inbox[0]]
                if not desc.decide(ctx.view, r0, y1, r[j], y2[j], inbox_j):
                    return False
            return True

    def prove(cfg, phase, revealed):
        r0 = {v: bits[:rho0] for v, bits in revealed[0].items()}
        y1 = desc.prover1(cfg, r0)
        out = {v: y1.get(v, "") for v in cfg.ids}
        for j in range(k):
            r_j = {v: bits[rho0 + j * rho:rho0 + (j + 1) * rho]
                   for v, bits in revealed[0].items()}
            rep = desc.prover2(cfg, r0, r_j)
            for v in cfg.ids:
                out[v] += rep.get(v, "")
        return out

    return ProtocolSpec(
        name=f"dam-compiled-folded[k={k}]",
        schedule=(ArthurPhase(bits=rho0 + k * rho, shared=False),
                  MerlinPhase(cap=(k + 1) * desc.sigma)),
        prover=FunctionProver(prove),
        verifier=_Verifier(),
    )


# -- toy fixtures ------------------------------------------------------------


def _common_bit(config: NetworkConfig) -> str:
    return config.label(min(config.ids))


def toy_dmam(config: NetworkConfig) -> DmamDescription:
    """Fixture language: all 1-bit labels equal.

    The first prover claims the common bit; the referee hands every node a
    coin; the second prover echoes coin XOR agreement.  A node rejects when
    neighbors disagree on the claim, the echo is off, or its label
    contradicts the claim while its coin came up 0.  Yes-instances pass with
    probability 1; on a no-instance a contradicted node survives only its
    own coin, so the best prover wins with probability 1/2 per repetition.
    """
    if any(len(config.label(v)) != 1 for v in config.ids):
        raise ValueError("toy fixture needs 1-bit labels")

    def prover1(cfg):
        return {v: _common_bit(cfg) for v in cfg.ids}

    def prover2(cfg, r):
        b = _common_bit(cfg)
        return {v: str(int(r[v]) ^ int(b == cfg.label(v))) for v in cfg.ids}

    def messages(view, y1, r, y2):
        bit = y1 if y1 in ("0", "1") else "0"
        return [bit] * view.degree

    def decide(view, y1, r, y2, inbox):
        if y1 not in ("0", "1") or y2 not in ("0", "1") or r not in ("0", "1"):
            return False
        if any(m != y1 for m in inbox):
            return False
        match = y1 == view.own_label
        if y2 != str(int(r) ^ int(match)):
            return False
        return match or r == "1"

    return DmamDescription(sigma=1, rho=1, msg_width=1, one_sided=True,
                           prover1=prover1, prover2=prover2,
                           messages=messages, decide=decide)


def toy_damam(config: NetworkConfig) -> DamamDescription:
    """Same language, but the first prover's claim is masked by the leading
    referee draw: the honest y1 is (common bit XOR r0), so folding the
    leading phase into the prover is observable."""
    if any(len(config.label(v)) != 1 for v in config.ids):
        raise ValueError("toy fixture needs 1-bit labels")

    def prover1(cfg, r0):
        b = _common_bit(cfg)
        return {v: str(int(b) ^ int(r0[v])) for v in cfg.ids}

    def prover2(cfg, r0, r):
        b = _common_bit(cfg)
        return {v: str(int(r[v]) ^ int(b == cfg.label(v))) for v in cfg.ids}

    def messages(view, r0, y1, r, y2):
        if y1 in ("0", "1") and r0 in ("0", "1"):
            return [str(int(y1) ^ int(r0))] * view.degree
        return ["0"] * view.degree

    def decide(view, r0, y1, r, y2, inbox):
        if any(b not in ("0", "1") for b in (r0, y1, r, y2)):
            return False
        claim = str(int(y1) ^ int(r0))
        if any(m != claim for m in inbox):
            return False
        match = claim == view.own_label
        if y2 != str(int(r) ^ int(match)):
            return False
        return match or r == "1"

    return DamamDescription(sigma=1, rho0=1, rho=1, msg_width=1, one_sided=True,
                            prover1=prover1, prover2=prover2,
                            messages=messages, decide=decide)
