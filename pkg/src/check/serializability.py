"""
Serializability of interleaved service executions.

Every terminal configuration of the interleaved exploration must match,
on object attributes and Error flags, the outcome of running the same
injections one at a time in some order.
"""

import itertools
import logging
from typing import Dict, FrozenSet, List, Sequence, Set, Tuple

from src.config import DEFAULT_STATE_BOUND
from src.core.messages import Message
from src.core.printing import format_assignment, format_message
from src.core.values import VarAssignment
from src.semantics.step import ChaosPolicy
from src.sim.configuration import Configuration
from src.sim.explore import explore
from src.sim.runner import Script
from src.sim.trace import Trace
from src.spec.report import Finding, Severity

logger = logging.getLogger(__name__)

Outcome = Tuple[Tuple[str, VarAssignment, bool], ...]


def outcome(cfg: Configuration) -> Outcome:
    """Attributes and Error flag of every object; channels are ignored."""
    return tuple((str(obj), state.at, state.error is not None) for obj, state in cfg.objects)


def format_outcome(result: Outcome) -> str:
    return " ".join(f"{obj}{format_assignment(at)}" + ("!error" if failed else "")
                    for obj, at, failed in result)


def _terminals(cfg: Configuration, message: Message, bound: int,
               policy: ChaosPolicy) -> Dict[str, Configuration]:
    return explore(cfg, Script.of([message]), bound, policy).terminal_configurations


def serial_outcomes(cfg: Configuration, injections: Sequence[Message],
                    bound: int = DEFAULT_STATE_BOUND,
                    policy: ChaosPolicy = ChaosPolicy.REJECT) -> Set[Outcome]:
    """
    Outcomes of every one-at-a-time execution order.

    Each injection runs alone to quiescence before the next one is
    sent; nondeterministic services contribute every terminal they reach.

    Raises:
        BudgetExceeded: a single injection does not finish within ``bound``
    """
    results: Set[Outcome] = set()
    for order in itertools.permutations(range(len(injections))):
        frontier: Dict[str, Configuration] = {cfg.digest(): cfg}
        for position in order:
            reached: Dict[str, Configuration] = {}
            for start in frontier.values():
                reached.update(_terminals(start, injections[position], bound, policy))
            frontier = reached
        results |= {outcome(c) for c in frontier.values()}
    return results


def compact(trace: Trace) -> str:
    """One-line rendering of a trace's deliveries."""
    return " ; ".join(f"{d.step}:{format_message(d.message)}" for d in trace.deliveries())


def serializability_check(cfg: Configuration, injections: Sequence[Message],
                          bound: int = DEFAULT_STATE_BOUND,
                          policy: ChaosPolicy = ChaosPolicy.REJECT) -> List[Finding]:
    """
    Find interleavings whose final attributes no serial order produces.

    Args:
        cfg: Starting configuration
        injections: Environment messages to interleave
        bound: Configuration budget for every exploration
        policy: Chaos policy for unmatched inputs

    Returns:
        NOT_SERIALIZABLE errors, one per offending terminal configuration,
        each carrying a shortest interleaved trace as witness

    Raises:
        BudgetExceeded: an exploration hit ``bound``
    """
    interleaved = explore(cfg, Script.of(injections), bound, policy)
    serial: FrozenSet[Outcome] = frozenset(serial_outcomes(cfg, injections, bound, policy))
    findings: List[Finding] = []
    for index, digest in enumerate(interleaved.terminals):
        result = outcome(interleaved.terminal_configurations[digest])
        if result in serial:
            continue
        trace = interleaved.witness(digest)
        findings.append(Finding(
            Severity.ERROR, "NOT_SERIALIZABLE", f"terminal {index}",
            f"{format_outcome(result)} matches no serial order",
            witness=compact(trace), key=(index,), trace=trace))
    logger.info("serializability: %d terminal(s), %d serial outcome(s), %d finding(s)",
                len(interleaved.terminals), len(serial), len(findings))
    return findings
