"""Cheating-prover strategies and exact small-instance acceptance oracles.

The strategies are the strongest cheats we know how to write for each
protocol; the oracles compute their exact acceptance by full enumeration so
Monte-Carlo soundness measurements have a ground truth to match.  The
oracles deliberately avoid the engine's verifier code paths where possible:
an oracle that ran the code under test would prove nothing.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .algebra import interpolate
from .bits import encode, iter_strings, width_for
from .bruteforce import has_triangle
from .commprims import SumZeroTest
from .engine import (ENUMERATION_GUARD, FunctionProver, ProtocolSpec, Prover,
                     RandomnessModel, best_prover_acceptance)
from .errors import GuardExceeded
from .netconfig import NetworkConfig
from .protocols import (OptInstance, TriangleInstance, deserialize_poly,
                        optval_honest_certs, optval_wire, serialize_poly,
                        triangle_honest_cert)

ORACLE_FIELD_GUARD = 10_000


# -- triangle: interpolation cheat ---------------------------------------


def _zero_checked_forgery(instance: TriangleInstance, u: int) -> str:
    """The unique polynomial of degree <= 2(slices-1) vanishing on every
    slice point and agreeing with the true neighborhood polynomial on
    slices-1 probe points just above them.  Nothing of higher agreement
    passes the zero check: the two constraints already pin 2*slices-1
    coefficients."""
    m = instance.slices
    honest = triangle_honest_cert(instance, u)
    points = [(i, 0) for i in range(1, m + 1)]
    points += [(i, honest.evaluate(i)) for i in range(m + 1, 2 * m)]
    return serialize_poly(instance, interpolate(instance.field, points))


def interpolation_cheater(instance: TriangleInstance) -> Prover:
    """Certificates that always pass the zero check and agree with the true
    polynomials on as many probe points as the degree budget allows.  Nodes
    whose true polynomial already vanishes on the slice points keep it."""
    if not has_triangle(instance.config):
        raise ValueError("triangle-free input: the honest certificate works")
    m = instance.slices
    assignment = {}
    for u in instance.config.ids:
        honest = triangle_honest_cert(instance, u)
        if all(honest.evaluate(i) == 0 for i in range(1, m + 1)):
            assignment[u] = serialize_poly(instance, honest)
        else:
            assignment[u] = _zero_checked_forgery(instance, u)
    return FunctionProver(lambda cfg, phase, revealed: assignment)


def triangle_agreement_fraction(instance: TriangleInstance,
                                assignment: dict[int, str] | Prover) -> Fraction:
    """Exact acceptance of fixed certificates under the shared-point
    verifier, computed from the polynomials alone: the run accepts at point
    i iff every certificate passes the zero check and matches its node's
    true polynomial at i.  Full field evaluation, guarded."""
    q = instance.field.q
    if q > ORACLE_FIELD_GUARD:
        raise GuardExceeded(f"field size {q} exceeds oracle guard {ORACLE_FIELD_GUARD}")
    if isinstance(assignment, Prover):
        assignment = assignment.certificates(instance.config, 0, [])
    m = instance.slices
    truth = {u: triangle_honest_cert(instance, u) for u in instance.config.ids}
    forged = {}
    for u, bits in assignment.items():
        poly = deserialize_poly(instance, bits)
        if poly is None or any(poly.evaluate(i) != 0 for i in range(1, m + 1)):
            return Fraction(0)
        forged[u] = poly
    good = sum(
        1 for i in range(q)
        if all(forged[u].evaluate(i) == truth[u].evaluate(i) for u in forged)
    )
    return Fraction(good, q)


# -- optimization values: forged partial sum ------------------------------


def forge_sum_cheater(instance: OptInstance, delta: int) -> Prover:
    """Honest certificates with the root's claimed total shifted by delta.

    The shift flips the root's threshold verdict on a no-instance; when it
    would not change that verdict there is nothing to gain and the strategy
    returns the honest certificates unchanged.  Exactly one node's residue
    check then sees a discrepancy of delta, so acceptance is the fraction of
    pool moduli dividing it.
    """
    if delta == 0:
        raise ValueError("delta must be nonzero")
    assignment = dict(optval_honest_certs(instance))
    wire, _ = optval_wire(instance)
    root = min(instance.config.ids)
    cert = assignment[root]
    w = wire.sum_width
    s = int(cert[-w:], 2)
    forged = s + delta

    def passes(total: int) -> bool:
        if instance.objective == "minimize":
            return total <= instance.threshold
        return total >= instance.threshold

    if not 0 <= forged < (1 << w):
        raise ValueError(f"shifted sum {forged} does not fit in {w} bits")
    if passes(forged) != passes(s):
        assignment[root] = cert[:-w] + encode(forged, w)
    return FunctionProver(lambda cfg, phase, revealed: assignment)


def forged_sum_acceptance(instance: OptInstance, delta: int,
                          pool_size: int | None = None) -> Fraction:
    """Divisor-count oracle for the forged-sum strategy: the residue test is
    the only check the forgery can trip, and it accepts exactly when the
    drawn modulus divides the discrepancy."""
    _, szt = optval_wire(instance, pool_size=pool_size)
    return szt.false_accept_exact(delta)


# -- exhaustive search ------------------------------------------------------


def exhaustive_prover(spec: ProtocolSpec, config: NetworkConfig,
                      cert_space: Sequence[dict[int, Sequence[str]]],
                      rng: RandomnessModel | None = None,
                      guard: int = ENUMERATION_GUARD) -> Fraction:
    """Exact optimum over every prover strategy drawing certificates from
    the given per-phase alphabets."""
    return best_prover_acceptance(spec, config, cert_space, rng, guard)


def exact_acceptance(spec: ProtocolSpec, config: NetworkConfig,
                     certs: dict[int, str] | Sequence[dict[int, str]],
                     guard: int = ENUMERATION_GUARD) -> Fraction:
    """Exact acceptance of one fixed certificate assignment: exhaustive
    search over singleton alphabets, which reduces to averaging the verdict
    over all randomness."""
    if isinstance(certs, dict):
        certs = [certs]
    space = [{v: [bits] for v, bits in phase.items()} for phase in certs]
    return best_prover_acceptance(spec, config, space, guard=guard)


def full_alphabet(config: NetworkConfig, width: int) -> dict[int, list[str]]:
    """Every bit string of the given width, for every node."""
    strings = list(iter_strings(width))
    return {v: list(strings) for v in config.ids}


def triangle_zero_alphabet(instance: TriangleInstance) -> dict[int, list[str]]:
    """Per node, the certificates that pass the zero check and lie on the
    agreement grid: vanish on all slice points, and at each probe point take
    either 0 or the true polynomial's value.  2^(slices-1) certificates per
    node; the all-agree corner is the interpolation cheat."""
    m = instance.slices
    probes = list(range(m + 1, 2 * m))
    out = {}
    for u in instance.config.ids:
        honest = triangle_honest_cert(instance, u)
        certs = []
        for mask in range(1 << len(probes)):
            points = [(i, 0) for i in range(1, m + 1)]
            points += [
                (p, honest.evaluate(p) if (mask >> k) & 1 else 0)
                for k, p in enumerate(probes)
            ]
            certs.append(serialize_poly(instance, interpolate(instance.field, points)))
        out[u] = sorted(set(certs))
    return out


def optval_restricted_alphabet(instance: OptInstance) -> dict[int, list[str]]:
    """Certificates that keep the honest spanning-tree fields and range over
    solution bit and claimed partial sum; tree forgeries are covered by the
    dedicated tree tests, and fixing them keeps exhaustive search feasible."""
    wire, _ = optval_wire(instance)
    honest = optval_honest_certs(instance)
    w = wire.sum_width
    out = {}
    for v, cert in honest.items():
        tree_fields = cert[1:-w]
        out[v] = [
            x + tree_fields + encode(s, w)
            for x in ("0", "1")
            for s in range(instance.total_weight + 1)
        ]
    return out
