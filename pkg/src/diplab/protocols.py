"""Concrete randomized certification protocols.

* Triangle-freeness with a tunable split between certificate size and
  message size: certificates are low-degree polynomials over a prime field,
  random evaluation points catch forged ones.  Three randomness variants:
  one shared point, per-node points with a two-round exchange, and per-node
  points with per-edge certificates in a single round.
* Threshold certification of optimization values (dominating set,
  independent set, vertex cover): a solution bit, a spanning tree, and
  partial sums, checked with constant-bit fingerprints and a residue test.
* Proper-coloring verification from differing-bit positions.
* Lucky-labeling verification composing the coloring mechanics with the
  residue test.

Every constructor returns an engine ProtocolSpec whose measured certificate
and message sizes match the closed-form bit counts exposed alongside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

from .algebra import FieldPoly, PrimeField, interpolate, select_prime
from .bits import decode, encode, split_fields, width_for
from .bruteforce import PROBLEMS, best_admissible, find_lucky_labeling
from .commprims import DEFAULT_EQ_REPETITIONS, SumZeroTest, eq_fingerprint
from .engine import (ArthurPhase, FunctionProver, LocalVerifier, MerlinPhase,
                     ProtocolSpec, Prover)
from .netconfig import NetworkConfig
from .pls import dist2_prove, tree_prove

DEFAULT_SOUNDNESS_C = 12


# -- triangle-freeness ----------------------------------------------------


@dataclass(frozen=True)
class TriangleInstance:
    """A configuration prepared for the polynomial triangle test.

    Node ids are mapped into slice/tag pairs (i, t) with i in 1..slices and
    t in 1..alpha; ``members[u]`` is the pair set of u's neighborhood.
    """

    config: NetworkConfig
    alpha: int
    c: int
    field: PrimeField
    slices: int
    pairs: dict[int, tuple[int, int]] = field(repr=False)
    members: dict[int, frozenset] = field(repr=False)

    @property
    def coeff_width(self) -> int:
        return width_for(self.field.q - 1)

    @property
    def poly_coeffs(self) -> int:
        return 2 * self.slices - 1

    def sigma_bits(self) -> int:
        """Certificate bits per node (shared and 2-round variants)."""
        return self.poly_coeffs * self.coeff_width

    def gamma_bits(self) -> int:
        """Message bits per edge per round (shared variant)."""
        return self.alpha * self.coeff_width


def triangle_instance(config: NetworkConfig, alpha: int,
                      c: int = DEFAULT_SOUNDNESS_C,
                      compress_ids: bool = False) -> TriangleInstance:
    """Map ids into the pair space and fix the field.

    Ids must already form 1..n (or 0..n-1, shifted up); with
    ``compress_ids`` a certified distance-2 coloring supplies small ids that
    are distinct within every 2-ball, which is all the pair sets need.
    """
    config.require_valid()
    n = config.n
    if not 1 <= alpha <= n:
        raise ValueError("alpha must be in 1..n")
    ids = sorted(config.ids)
    if compress_ids:
        small = {v: cert.color for v, cert in dist2_prove(config).items()}
    elif ids == list(range(1, n + 1)):
        small = {v: v for v in ids}
    elif ids == list(range(n)):
        small = {v: v + 1 for v in ids}
    else:
        raise ValueError("ids are not 1..n; pass compress_ids=True")
    slices = math.ceil(n / alpha)
    pairs = {
        v: ((z - 1) // alpha + 1, (z - 1) % alpha + 1)
        for v, z in small.items()
    }
    members = {
        v: frozenset(pairs[u] for u in config.neighbors(v))
        for v in ids
    }
    return TriangleInstance(config, alpha, c, PrimeField(select_prime(n, alpha, c)),
                            slices, pairs, members)


def triangle_neighbor_polys(instance: TriangleInstance, u: int) -> dict[int, FieldPoly]:
    """Per tag t, the degree <= slices-1 polynomial interpolating the 0/1
    indicator of u's neighbor pairs with tag t on the slice points."""
    f = instance.field
    out = {}
    for t in range(1, instance.alpha + 1):
        points = [(i, 1 if (i, t) in instance.members[u] else 0)
                  for i in range(1, instance.slices + 1)]
        out[t] = interpolate(f, points)
    return out


def triangle_edge_poly(instance: TriangleInstance, u: int, v: int) -> FieldPoly:
    """Sum over tags of the product of u's and v's tag polynomials; nonzero
    values on slice points witness triangles through the edge (u, v)."""
    pu = triangle_neighbor_polys(instance, u)
    pv = triangle_neighbor_polys(instance, v)
    total = FieldPoly.zero(instance.field)
    for t in range(1, instance.alpha + 1):
        total = total.add(pu[t].multiply(pv[t]))
    return total


def triangle_honest_cert(instance: TriangleInstance, u: int) -> FieldPoly:
    """The true neighborhood polynomial: sum over incident edges of the
    edge polynomials; degree <= 2(slices-1), zero on all slice points iff u
    is in no triangle."""
    total = FieldPoly.zero(instance.field)
    for v in instance.config.neighbors(u):
        total = total.add(triangle_edge_poly(instance, u, v))
    return total


def serialize_poly(instance: TriangleInstance, poly: FieldPoly) -> str:
    coeffs = list(poly.coeffs) + [0] * (instance.poly_coeffs - len(poly.coeffs))
    if len(coeffs) != instance.poly_coeffs:
        raise ValueError("polynomial degree exceeds the certificate layout")
    w = instance.coeff_width
    return "".join(encode(c, w) for c in coeffs)


def deserialize_poly(instance: TriangleInstance, bits: str) -> FieldPoly | None:
    """Parse a fixed-width coefficient block; None when malformed."""
    w = instance.coeff_width
    if len(bits) != instance.poly_coeffs * w:
        return None
    coeffs = [decode(bits[k * w:(k + 1) * w]) for k in range(instance.poly_coeffs)]
    if any(c >= instance.field.q for c in coeffs):
        return None
    return FieldPoly.make(instance.field, coeffs)


def _honest_triangle_prover(instance: TriangleInstance) -> Prover:
    assignment = {
        u: serialize_poly(instance, triangle_honest_cert(instance, u))
        for u in instance.config.ids
    }
    return FunctionProver(lambda cfg, phase, revealed: assignment)


def _honest_edge_prover(instance: TriangleInstance) -> Prover:
    assignment = {}
    for u in instance.config.ids:
        parts = [serialize_poly(instance, triangle_edge_poly(instance, u, v))
                 for v in instance.config.neighbors(u)]
        assignment[u] = "".join(parts)
    return FunctionProver(lambda cfg, phase, revealed: assignment)


class _TriangleVerifierBase(LocalVerifier):
    def __init__(self, instance: TriangleInstance):
        self.instance = instance
        self.polys = {u: triangle_neighbor_polys(instance, u)
                      for u in instance.config.ids}
        self._parsed: dict[tuple[int, str], tuple[FieldPoly, bool] | None] = {}

    def _own_evals(self, u: int, point: int) -> list[int]:
        return [self.polys[u][t].evaluate(point)
                for t in range(1, self.instance.alpha + 1)]

    def _eval_block(self, u: int, point: int) -> str:
        w = self.instance.coeff_width
        return "".join(encode(e, w) for e in self._own_evals(u, point))

    def _parse_eval_block(self, bits: str) -> list[int] | None:
        inst = self.instance
        w = inst.coeff_width
        if len(bits) != inst.alpha * w:
            return None
        vals = [decode(bits[k * w:(k + 1) * w]) for k in range(inst.alpha)]
        return None if any(x >= inst.field.q for x in vals) else vals

    def _cert_poly(self, u: int, bits: str):
        """Parsed certificate plus its slice-point zero check, memoized per
        (node, bits) since certificates rarely vary across trials."""
        key = (u, bits)
        hit = self._parsed.get(key, False)
        if hit is not False:
            return hit
        poly = deserialize_poly(self.instance, bits)
        if poly is None:
            result = None
        else:
            zero_ok = all(poly.evaluate(i) == 0
                          for i in range(1, self.instance.slices + 1))
            result = (poly, zero_ok)
        if len(self._parsed) > 4096:
            self._parsed.clear()
        self._parsed[key] = result
        return result


class _SharedTriangleVerifier(_TriangleVerifierBase):
    rounds = 1

    def messages(self, ctx, rnd):
        point = decode(ctx.random[0])
        return [self._eval_block(ctx.view.own_id, point)] * ctx.view.degree

    def decide(self, ctx):
        parsed = self._cert_poly(ctx.view.own_id, ctx.certs[0])
        if parsed is None or not parsed[1]:
            return False
        poly, _ = parsed
        point = decode(ctx.random[0])
        own = self._own_evals(ctx.view.own_id, point)
        f = self.instance.field
        total = 0
        for bits in ctx.inbox[0]:
            theirs = self._parse_eval_block(bits)
            if theirs is None:
                return False
            for mine, recv in zip(own, theirs):
                total = f.add(total, f.mul(mine, recv))
        return poly.evaluate(point) == total


class _TwoRoundTriangleVerifier(_TriangleVerifierBase):
    rounds = 2

    def messages(self, ctx, rnd):
        if rnd == 0:
            return [ctx.random[0]] * ctx.view.degree
        u = ctx.view.own_id
        out = []
        for bits in ctx.inbox[0]:
            point = decode(bits)
            if point >= self.instance.field.q:
                out.append("")
            else:
                out.append(self._eval_block(u, point))
        return out

    def decide(self, ctx):
        parsed = self._cert_poly(ctx.view.own_id, ctx.certs[0])
        if parsed is None or not parsed[1]:
            return False
        poly, _ = parsed
        point = decode(ctx.random[0])
        own = self._own_evals(ctx.view.own_id, point)
        f = self.instance.field
        total = 0
        for bits in ctx.inbox[1]:
            theirs = self._parse_eval_block(bits)
            if theirs is None:
                return False
            for mine, recv in zip(own, theirs):
                total = f.add(total, f.mul(mine, recv))
        return poly.evaluate(point) == total


class _OneRoundTriangleVerifier(_TriangleVerifierBase):
    rounds = 1

    def messages(self, ctx, rnd):
        u = ctx.view.own_id
        point = decode(ctx.random[0])
        block = ctx.random[0] + self._eval_block(u, point)
        return [block] * ctx.view.degree

    def decide(self, ctx):
        inst = self.instance
        u = ctx.view.own_id
        w = inst.coeff_width
        piece = inst.poly_coeffs * w
        cert = ctx.certs[0]
        if len(cert) != ctx.view.degree * piece:
            return False
        polys = []
        total = FieldPoly.zero(inst.field)
        for p in range(ctx.view.degree):
            parsed = deserialize_poly(inst, cert[p * piece:(p + 1) * piece])
            if parsed is None:
                return False
            polys.append(parsed)
            total = total.add(parsed)
        if any(total.evaluate(i) != 0 for i in range(1, inst.slices + 1)):
            return False
        f = inst.field
        for p, bits in enumerate(ctx.inbox[0]):
            if len(bits) != (1 + inst.alpha) * w:
                return False
            point = decode(bits[:w])
            theirs = self._parse_eval_block(bits[w:])
            if point >= f.q or theirs is None:
                return False
            own = self._own_evals(u, point)
            s = 0
            for mine, recv in zip(own, theirs):
                s = f.add(s, f.mul(mine, recv))
            if polys[p].evaluate(point) != s:
                return False
        return True


def triangle_dma_shared(instance: TriangleInstance, prover: Prover | None = None) -> ProtocolSpec:
    """One certificate phase, one shared random evaluation point, one
    exchange round of per-tag evaluations."""
    return ProtocolSpec(
        name="triangle-shared",
        schedule=(MerlinPhase(cap=instance.sigma_bits()),),
        prover=prover or _honest_triangle_prover(instance),
        verifier=_SharedTriangleVerifier(instance),
        verifier_coins=ArthurPhase(range_=instance.field.q, shared=True),
    )


def triangle_dma_distributed_2round(instance: TriangleInstance,
                                    prover: Prover | None = None) -> ProtocolSpec:
    """Per-node evaluation points: round 1 ships the points, round 2 the
    evaluations at the point each neighbor asked for."""
    return ProtocolSpec(
        name="triangle-distributed-2round",
        schedule=(MerlinPhase(cap=instance.sigma_bits()),),
        prover=prover or _honest_triangle_prover(instance),
        verifier=_TwoRoundTriangleVerifier(instance),
        verifier_coins=ArthurPhase(range_=instance.field.q, shared=False),
    )


def triangle_dma_distributed_1round(instance: TriangleInstance,
                                    prover: Prover | None = None) -> ProtocolSpec:
    """Per-edge certificates: each node holds one polynomial per incident
    edge and tests it at the neighbor's point, all in a single round."""
    sigma = {u: instance.config.degree(u) * instance.poly_coeffs * instance.coeff_width
             for u in instance.config.ids}
    return ProtocolSpec(
        name="triangle-distributed-1round",
        schedule=(MerlinPhase(cap=max(sigma.values())),),
        prover=prover or _honest_edge_prover(instance),
        verifier=_OneRoundTriangleVerifier(instance),
        verifier_coins=ArthurPhase(range_=instance.field.q, shared=False),
    )


# -- optimization-value certification -------------------------------------


@dataclass(frozen=True)
class OptInstance:
    """A weighted threshold question: does an admissible solution of weight
    within ``threshold`` exist?  minimize: weight <= k; maximize: >= k."""

    config: NetworkConfig
    problem: str
    threshold: int
    weights: Mapping[int, int]
    objective: str

    @property
    def total_weight(self) -> int:
        return sum(self.weights.values())


_DEFAULT_OBJECTIVE = {"mds": "minimize", "mis": "maximize", "mvc": "minimize"}


def opt_instance(config: NetworkConfig, problem: str, threshold: int,
                 weights: Mapping[int, int] | None = None) -> OptInstance:
    config.require_valid()
    if problem not in PROBLEMS:
        raise ValueError(f"problem must be one of {PROBLEMS}")
    if weights is None:
        weights = {v: 1 for v in config.ids}
    bound = config.n ** 3
    for v in config.ids:
        w = weights.get(v)
        if not isinstance(w, int) or not 1 <= w <= bound:
            raise ValueError(f"weight at {v} must be an integer in 1..n^3")
    return OptInstance(config, problem, threshold, dict(weights),
                       _DEFAULT_OBJECTIVE[problem])


@dataclass(frozen=True)
class OptWire:
    """Field widths of the optimization certificate and messages."""

    id_width: int
    dist_width: int
    port_width: int
    sum_width: int
    repetitions: int
    mask_bits: int
    pool_size: int
    residue_width: int

    @property
    def cert_bits(self) -> int:
        # x, root, dist, has-parent, parent, parent-port, partial sum
        return 2 + 2 * self.id_width + self.dist_width + self.port_width + self.sum_width


def optval_wire(instance: OptInstance, mode: str = "fingerprint",
                repetitions: int = DEFAULT_EQ_REPETITIONS,
                pool_size: int | None = None) -> tuple[OptWire, SumZeroTest]:
    config = instance.config
    id_width = width_for(max(config.ids))
    dist_width = width_for(config.n - 1)
    port_width = width_for(max(config.max_degree - 1, 0))
    sum_width = width_for(instance.total_weight)
    szt = SumZeroTest(instance.total_weight, config.max_degree + 2,
                      pool_size or 0)
    if mode == "fingerprint":
        mask_bits = repetitions * (2 * id_width + 2 * dist_width)
    elif mode == "plain":
        mask_bits = 0
    else:
        raise ValueError("mode must be 'fingerprint' or 'plain'")
    wire = OptWire(id_width, dist_width, port_width, sum_width,
                   repetitions, mask_bits, len(szt.pool), szt.residue_bits)
    return wire, szt


def optval_honest_certs(instance: OptInstance) -> dict[int, str]:
    """Optimal solution, its spanning-tree encoding, and subtree sums."""
    config = instance.config
    wire, _ = optval_wire(instance)
    _, chosen = best_admissible(config, instance.problem, instance.objective,
                                instance.weights)
    tree = tree_prove(config)
    children: dict[int, list[int]] = {v: [] for v in config.ids}
    for v, cert in tree.items():
        if cert.parent_id is not None:
            children[cert.parent_id].append(v)
    sums: dict[int, int] = {}
    for v in sorted(config.ids, key=lambda v: -tree[v].dist):
        own = instance.weights[v] if v in chosen else 0
        sums[v] = own + sum(sums[c] for c in children[v])
    out = {}
    for v in config.ids:
        t = tree[v]
        has_parent = t.parent_id is not None
        port = config.neighbors(v).index(t.parent_id) if has_parent else 0
        out[v] = (encode(int(v in chosen), 1)
                  + encode(t.root_id, wire.id_width)
                  + encode(t.dist, wire.dist_width)
                  + encode(int(has_parent), 1)
                  + encode(t.parent_id if has_parent else 0, wire.id_width)
                  + encode(port, wire.port_width)
                  + encode(sums[v], wire.sum_width))
    return out


def _admissible_locally(problem: str, own: int, received: list[int]) -> bool:
    if problem == "mds":
        return own == 1 or any(received)
    if problem == "mis":
        return own == 0 or not any(received)
    return all(own == 1 or r == 1 for r in received)  # mvc


class _OptValVerifier(LocalVerifier):
    rounds = 1

    def __init__(self, instance: OptInstance, mode: str, wire: OptWire,
                 szt: SumZeroTest):
        self.instance = instance
        self.mode = mode
        self.wire = wire
        self.szt = szt
        w = wire
        self.cert_widths = [1, w.id_width, w.dist_width, 1, w.id_width,
                            w.port_width, w.sum_width]
        if mode == "fingerprint":
            self.msg_widths = [w.repetitions] * 3 + [1, 1, w.residue_width]
        else:
            self.msg_widths = [w.id_width, w.id_width, w.dist_width,
                               1, 1, w.residue_width]

    # randomness layout: one uniform draw over pool_size * 2^mask_bits;
    # quotient selects the modulus, remainder supplies the mask bits
    def _split_random(self, bits: str) -> tuple[int, str]:
        value = decode(bits)
        index, masks = divmod(value, 1 << self.wire.mask_bits)
        return self.szt.pool[index], encode(masks, self.wire.mask_bits)

    def _parse_cert(self, bits: str):
        if len(bits) != self.wire.cert_bits:
            return None
        x, root, dist, hp, parent, port, s = (
            decode(f) for f in split_fields(bits, self.cert_widths))
        return x, root, dist, bool(hp), parent, port, s

    def _masks(self, mask_bits: str):
        w = self.wire
        t = w.repetitions
        per = [w.id_width] * t + [w.id_width + w.dist_width] * t + [w.dist_width] * t
        fields = split_fields(mask_bits, per)
        return fields[:t], fields[t:2 * t], fields[2 * t:]

    def messages(self, ctx, rnd):
        parsed = self._parse_cert(ctx.certs[0])
        w = self.wire
        if parsed is None:
            return [""] * ctx.view.degree
        x, root, dist, hp, parent, port, s = parsed
        modulus, mask_bits = self._split_random(ctx.random[0])
        residue = encode(s % modulus, w.residue_width)
        if self.mode == "fingerprint":
            m_root, m_pair, m_dist = self._masks(mask_bits)
            base = (eq_fingerprint(encode(root, w.id_width), m_root)
                    + eq_fingerprint(encode(ctx.view.own_id, w.id_width)
                                     + encode(dist, w.dist_width), m_pair)
                    + eq_fingerprint(encode(dist, w.dist_width), m_dist))
        else:
            base = (encode(root, w.id_width)
                    + encode(ctx.view.own_id, w.id_width)
                    + encode(dist, w.dist_width))
        out = []
        for p in range(ctx.view.degree):
            claim = "1" if hp and p == port else "0"
            out.append(base + encode(x, 1) + claim + residue)
        return out

    def decide(self, ctx):
        inst = self.instance
        w = self.wire
        parsed = self._parse_cert(ctx.certs[0])
        if parsed is None:
            return False
        x, root, dist, hp, parent, port, s = parsed
        if hp != (dist > 0):
            return False
        if hp and port >= ctx.view.degree:
            return False
        if not hp and root != ctx.view.own_id:
            return False
        modulus, mask_bits = self._split_random(ctx.random[0])
        ports = []
        for bits in ctx.inbox[0]:
            if len(bits) != sum(self.msg_widths):
                return False
            ports.append(split_fields(bits, self.msg_widths))

        if self.mode == "fingerprint":
            m_root, m_pair, m_dist = self._masks(mask_bits)
            my_root = eq_fingerprint(encode(root, w.id_width), m_root)
            if any(f[0] != my_root for f in ports):
                return False
            if hp:
                expect = eq_fingerprint(encode(parent, w.id_width)
                                        + encode(dist - 1, w.dist_width), m_pair)
                if ports[port][1] != expect:
                    return False
            claimed = [f for f in ports if f[4] == "1"]
            if claimed:
                # a child one hop farther needs dist+1 to fit the dist field
                if dist + 1 >= (1 << w.dist_width):
                    return False
                child_dist = eq_fingerprint(encode(dist + 1, w.dist_width), m_dist)
                if any(f[2] != child_dist for f in claimed):
                    return False
        else:
            if any(decode(f[0]) != root for f in ports):
                return False
            if hp and (decode(ports[port][1]) != parent
                       or decode(ports[port][2]) != dist - 1):
                return False
            if any(f[4] == "1" and decode(f[2]) != dist + 1 for f in ports):
                return False

        received_x = [decode(f[3]) for f in ports]
        if not _admissible_locally(inst.problem, x, received_x):
            return False
        child_residues = sum(decode(f[5]) for f in ports if f[4] == "1")
        lhs = (x * inst.weights[ctx.view.own_id] - s + child_residues) % modulus
        if lhs != 0:
            return False
        if dist == 0:
            if inst.objective == "minimize" and s > inst.threshold:
                return False
            if inst.objective == "maximize" and s < inst.threshold:
                return False
        return True


def optval_protocol(instance: OptInstance, mode: str = "fingerprint",
                    repetitions: int = DEFAULT_EQ_REPETITIONS,
                    pool_size: int | None = None,
                    prover: Prover | None = None) -> ProtocolSpec:
    """Certificate: solution bit, tree position, partial sum.  Verification
    compares tree fields across edges (fingerprints or verbatim), checks
    local admissibility from the solution bits, and runs the residue test on
    the subtree sums; the root applies the threshold."""
    wire, szt = optval_wire(instance, mode, repetitions, pool_size)
    if prover is None:
        assignment = optval_honest_certs(instance)
        prover = FunctionProver(lambda cfg, phase, revealed: assignment)
    coins = ArthurPhase(range_=wire.pool_size * (1 << wire.mask_bits), shared=True)
    return ProtocolSpec(
        name=f"optval-{instance.problem}-{mode}",
        schedule=(MerlinPhase(cap=wire.cert_bits),),
        prover=prover,
        verifier=_OptValVerifier(instance, mode, wire, szt),
        verifier_coins=coins,
    )


# -- proper-coloring verification ------------------------------------------


@dataclass(frozen=True)
class ColoringWire:
    color_width: int
    pos_width: int
    repetitions: int

    def cert_bits(self, degree: int) -> int:
        return degree * self.pos_width


def coloring_wire(num_colors: int,
                  repetitions: int = DEFAULT_EQ_REPETITIONS) -> ColoringWire:
    if num_colors < 2:
        raise ValueError("need at least 2 colors")
    color_width = width_for(num_colors - 1)
    return ColoringWire(color_width, width_for(color_width - 1), repetitions)


def _color_bit(code: int, position: int) -> str:
    return str((code >> (position - 1)) & 1)


def _honest_positions(config: NetworkConfig, codes: Mapping[int, int]) -> dict[int, list[int]]:
    """Per node, per port: the lowest bit position where the two endpoint
    color codes differ (position 1 when the colors collide; the exchanged
    bits are then equal and verification fails there, as it must)."""
    out = {}
    for v in config.ids:
        row = []
        for u in config.neighbors(v):
            diff = codes[v] ^ codes[u]
            row.append((diff & -diff).bit_length() if diff else 1)
        out[v] = row
    return out


class _ColoringVerifier(LocalVerifier):
    rounds = 1

    def __init__(self, colors: Mapping[int, int], wire: ColoringWire, mode: str):
        self.colors = colors
        self.wire = wire
        self.mode = mode
        # with 2 colors the only position is 1 and the field vanishes
        if wire.pos_width == 0:
            self.field_len = 0
        else:
            self.field_len = wire.pos_width if mode == "plain" else wire.repetitions

    def _positions(self, ctx) -> list[int] | None:
        w = self.wire.pos_width
        if len(ctx.certs[0]) != ctx.view.degree * w:
            return None
        return [decode(ctx.certs[0][p * w:(p + 1) * w]) + 1
                for p in range(ctx.view.degree)]

    def _pos_field(self, position: int, ctx) -> str:
        if self.field_len == 0:
            return ""
        enc = encode(position - 1, self.wire.pos_width)
        if self.mode == "plain":
            return enc
        t = self.wire.repetitions
        masks = split_fields(ctx.random[0], [self.wire.pos_width] * t)
        return eq_fingerprint(enc, masks)

    def messages(self, ctx, rnd):
        positions = self._positions(ctx)
        if positions is None:
            return [""] * ctx.view.degree
        code = self.colors[ctx.view.own_id] - 1
        return [self._pos_field(p, ctx) + _color_bit(code, p)
                for p in positions]

    def decide(self, ctx):
        positions = self._positions(ctx)
        if positions is None:
            return False
        code = self.colors[ctx.view.own_id] - 1
        for port, position in enumerate(positions):
            bits = ctx.inbox[0][port]
            if len(bits) != self.field_len + 1:
                return False
            if bits[:self.field_len] != self._pos_field(position, ctx):
                return False
            if bits[self.field_len] == _color_bit(code, position):
                return False
        return True


def coloring_ma(config: NetworkConfig, colors: Mapping[int, int],
                num_colors: int | None = None, mode: str = "fingerprint",
                repetitions: int = DEFAULT_EQ_REPETITIONS,
                prover: Prover | None = None) -> ProtocolSpec:
    """Properness from differing-bit positions: the certificate names, per
    port, a bit position where the endpoint colors differ; endpoints agree
    on the position (verbatim or fingerprinted) and exchange their own color
    bit there, accepting iff the bits differ.  Plain mode is deterministic.
    """
    config.require_valid()
    if mode not in ("fingerprint", "plain"):
        raise ValueError("mode must be 'fingerprint' or 'plain'")
    num_colors = num_colors or max(colors.values())
    if any(not 1 <= colors[v] <= num_colors for v in config.ids):
        raise ValueError("colors must lie in 1..num_colors")
    wire = coloring_wire(num_colors, repetitions)
    if prover is None:
        codes = {v: colors[v] - 1 for v in config.ids}
        positions = _honest_positions(config, codes)
        assignment = {
            v: "".join(encode(p - 1, wire.pos_width) for p in positions[v])
            for v in config.ids
        }
        prover = FunctionProver(lambda cfg, phase, revealed: assignment)
    coins = (ArthurPhase(bits=repetitions * wire.pos_width, shared=True)
             if mode == "fingerprint" and wire.pos_width > 0 else None)
    return ProtocolSpec(
        name=f"coloring-{mode}",
        schedule=(MerlinPhase(cap=wire.cert_bits(config.max_degree)),),
        prover=prover,
        verifier=_ColoringVerifier(colors, wire, mode),
        verifier_coins=coins,
    )


# -- lucky labelings --------------------------------------------------------


@dataclass(frozen=True)
class LuckyInstance:
    """Is there a labeling with values in 1..lam whose neighbor sums properly
    color the graph?  ``labels`` may be pinned for testing; the honest prover
    searches for one otherwise."""

    config: NetworkConfig
    lam: int
    labels: Mapping[int, int] | None = None


def lucky_instance(config: NetworkConfig, lam: int,
                   labels: Mapping[int, int] | None = None) -> LuckyInstance:
    config.require_valid()
    if lam < 1:
        raise ValueError("lam must be >= 1")
    if labels is not None and any(not 1 <= labels[v] <= lam for v in config.ids):
        raise ValueError("labels must lie in 1..lam")
    return LuckyInstance(config, lam, dict(labels) if labels else None)


@dataclass(frozen=True)
class LuckyWire:
    label_width: int
    sum_width: int
    pos_width: int
    repetitions: int
    pool_size: int
    residue_width: int

    def cert_bits(self, degree: int) -> int:
        return self.label_width + self.sum_width + degree * self.pos_width


def lucky_wire(instance: LuckyInstance, repetitions: int = DEFAULT_EQ_REPETITIONS,
               pool_size: int | None = None) -> tuple[LuckyWire, SumZeroTest]:
    config = instance.config
    max_sum = config.max_degree * instance.lam
    sum_width = width_for(max_sum)
    szt = SumZeroTest(max_sum, config.max_degree + 1, pool_size or 0)
    return LuckyWire(width_for(instance.lam - 1), sum_width,
                     width_for(sum_width - 1), repetitions,
                     len(szt.pool), szt.residue_bits), szt


class _LuckyVerifier(LocalVerifier):
    rounds = 1

    def __init__(self, instance: LuckyInstance, wire: LuckyWire,
                 szt: SumZeroTest, mode: str):
        self.instance = instance
        self.wire = wire
        self.szt = szt
        self.mode = mode

    def _split_random(self, bits: str) -> tuple[int, str]:
        mask_bits = (self.wire.repetitions * self.wire.pos_width
                     if self.mode == "fingerprint" else 0)
        value = decode(bits)
        index, masks = divmod(value, 1 << mask_bits)
        return self.szt.pool[index], encode(masks, mask_bits)

    def _parse_cert(self, ctx):
        w = self.wire
        expected = w.cert_bits(ctx.view.degree)
        if len(ctx.certs[0]) != expected:
            return None
        widths = [w.label_width, w.sum_width] + [w.pos_width] * ctx.view.degree
        fields = split_fields(ctx.certs[0], widths)
        label = decode(fields[0]) + 1
        total = decode(fields[1])
        positions = [decode(f) + 1 for f in fields[2:]]
        return label, total, positions

    def _pos_field(self, position: int, mask_bits: str) -> str:
        enc = encode(position - 1, self.wire.pos_width)
        if self.mode == "plain":
            return enc
        t = self.wire.repetitions
        masks = split_fields(mask_bits, [self.wire.pos_width] * t)
        return eq_fingerprint(enc, masks)

    def messages(self, ctx, rnd):
        parsed = self._parse_cert(ctx)
        if parsed is None:
            return [""] * ctx.view.degree
        label, total, positions = parsed
        modulus, mask_bits = self._split_random(ctx.random[0])
        residue = encode(label % modulus, self.wire.residue_width)
        return [self._pos_field(p, mask_bits) + _color_bit(total, p) + residue
                for p in positions]

    def decide(self, ctx):
        parsed = self._parse_cert(ctx)
        if parsed is None:
            return False
        label, total, positions = parsed
        if not 1 <= label <= self.instance.lam:
            return False
        modulus, mask_bits = self._split_random(ctx.random[0])
        field_len = (self.wire.pos_width if self.mode == "plain"
                     else self.wire.repetitions)
        residue_sum = 0
        for port, position in enumerate(positions):
            bits = ctx.inbox[0][port]
            if len(bits) != field_len + 1 + self.wire.residue_width:
                return False
            if bits[:field_len] != self._pos_field(position, mask_bits):
                return False
            if bits[field_len] == _color_bit(total, position):
                return False
            residue_sum += decode(bits[field_len + 1:])
        return (residue_sum - total) % modulus == 0


def lucky_honest_certs(instance: LuckyInstance, wire: LuckyWire) -> dict[int, str]:
    config = instance.config
    labels = instance.labels
    if labels is None:
        labels = find_lucky_labeling(config, instance.lam)
        if labels is None:
            raise ValueError(f"no lucky labeling with lam={instance.lam}")
    sums = {v: sum(labels[u] for u in config.neighbors(v)) for v in config.ids}
    positions = _honest_positions(config, sums)
    out = {}
    for v in config.ids:
        out[v] = (encode(labels[v] - 1, wire.label_width)
                  + encode(sums[v], wire.sum_width)
                  + "".join(encode(p - 1, wire.pos_width) for p in positions[v]))
    return out


def lucky_protocol(instance: LuckyInstance, mode: str = "fingerprint",
                   repetitions: int = DEFAULT_EQ_REPETITIONS,
                   pool_size: int | None = None,
                   prover: Prover | None = None) -> ProtocolSpec:
    """Certificate: the label, the claimed neighbor sum, and per-port
    differing-bit positions for the sums.  Verification runs the coloring
    mechanics on the sums and ties each claimed sum to the neighbors' labels
    with the residue test."""
    if mode not in ("fingerprint", "plain"):
        raise ValueError("mode must be 'fingerprint' or 'plain'")
    wire, szt = lucky_wire(instance, repetitions, pool_size)
    if prover is None:
        assignment = lucky_honest_certs(instance, wire)
        prover = FunctionProver(lambda cfg, phase, revealed: assignment)
    mask_bits = repetitions * wire.pos_width if mode == "fingerprint" else 0
    coins = ArthurPhase(range_=wire.pool_size * (1 << mask_bits), shared=True)
    return ProtocolSpec(
        name=f"lucky-{mode}",
        schedule=(MerlinPhase(cap=wire.cert_bits(instance.config.max_degree)),),
        prover=prover,
        verifier=_LuckyVerifier(instance, wire, szt, mode),
        verifier_coins=coins,
    )
