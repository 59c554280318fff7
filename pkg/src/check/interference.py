"""
Exclusion interference: services that may change what a suspended
invocation still reads.
"""

import logging
from typing import List, Set

from src.spec.ast import BehaviorDescription, DiagramTransition, ServiceSTD, free_vars
from src.spec.report import Finding, Severity

logger = logging.getLogger(__name__)


def _continuation(service: ServiceSTD, state_id: str) -> List[DiagramTransition]:
    """Transitions the invocation suspended at ``state_id`` can still take."""
    seen = {state_id}
    frontier = [state_id]
    found: List[DiagramTransition] = []
    while frontier:
        current = frontier.pop()
        for _, t in service.leaving(current):
            found.append(t)
            if t.target not in seen and t.target not in service.initial:
                seen.add(t.target)
                frontier.append(t.target)
    return found


def _reads(beh: BehaviorDescription, service: ServiceSTD, transitions: List[DiagramTransition]) -> Set[str]:
    names: Set[str] = set()
    for t in transitions:
        exprs = [service.state(t.source).label, t.pre, t.post]
        for template in t.outputs:
            exprs.extend(expr for _, expr in template.args)
            if template.target is not None:
                exprs.append(template.target)
        for expr in exprs:
            names |= {name for name, primed in free_vars(expr) if not primed}
    return names & set(beh.attribute_names())


def _writes(beh: BehaviorDescription, service: ServiceSTD) -> Set[str]:
    names: Set[str] = set()
    for t in service.transitions:
        names |= {name for name, primed in free_vars(t.post) if primed}
        names |= set(t.havoc)
    return names & set(beh.attribute_names())


def interference_report(beh: BehaviorDescription) -> List[Finding]:
    """
    Warn about services an exclusion set lets run during a wait.

    For every wait-state ``u`` and every service not excluded at ``u``,
    the attributes that service may write are intersected with the
    attributes the rest of the suspended invocation reads.

    Returns:
        INTERFERENCE warnings ordered by service, state and interfering service
    """
    writes = {service.name: _writes(beh, service) for service in beh.services}
    findings: List[Finding] = []
    for service in beh.services:
        waits = service.wait_states()
        for position, state in enumerate(service.states):
            if state.id not in waits:
                continue
            reads = _reads(beh, service, _continuation(service, state.id))
            for other in beh.services:
                if other.name in state.exclusions:
                    continue
                shared = sorted(reads & writes[other.name])
                if shared:
                    findings.append(Finding(
                        Severity.WARNING, "INTERFERENCE", f"{service.name}/{state.id}",
                        f"{other.name} may change {', '.join(shared)} while {service.name} waits",
                        witness=other.name, key=(service.name, position, other.name)))
    logger.info("interference of %s: %d finding(s)", beh.name, len(findings))
    return findings
