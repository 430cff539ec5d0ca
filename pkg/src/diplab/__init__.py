"""Randomized distributed certification lab.

Protocols where an untrusted prover hands every node of a network a short
certificate and the nodes verify it locally with bounded randomness and one
or two message exchanges.  The package bundles the execution engine, the
concrete protocols, protocol-to-protocol compilers, cheating provers with
exact acceptance oracles, and a batch experiment CLI.
"""

from .engine import (ArthurPhase, FunctionProver, LocalVerifier, MerlinPhase,
                     NodeContext, ProtocolSpec, Prover, RandomnessModel,
                     RunReport, Transcript, best_prover_acceptance, estimate,
                     run_once, simulate_verdicts)
from .errors import BudgetViolation, GuardExceeded
from .netconfig import (NetworkConfig, NodeView, build_sym_gadget, generate,
                        has_nontrivial_automorphism)

__all__ = [
    "ArthurPhase",
    "BudgetViolation",
    "FunctionProver",
    "GuardExceeded",
    "LocalVerifier",
    "MerlinPhase",
    "NetworkConfig",
    "NodeContext",
    "NodeView",
    "ProtocolSpec",
    "Prover",
    "RandomnessModel",
    "RunReport",
    "Transcript",
    "best_prover_acceptance",
    "build_sym_gadget",
    "estimate",
    "generate",
    "has_nontrivial_automorphism",
    "run_once",
    "simulate_verdicts",
]

__version__ = "0.1.0"
