"""
Input-enabledness gaps of a behavior.

Every message shape that can reach a service is checked against the
whole attribute space: calls that start the service at its initial
states, and inputs that resume an invocation suspended at a diagram
state. An assignment is a gap when no candidate transition has a true
source state predicate, a true precondition and a satisfiable
postcondition. Those are exactly the places where a run falls back to
the chaos policy.
"""

import logging
from typing import Dict, List, Optional, Sequence, Tuple

from src.core.errors import IOStarError
from src.core.state import SELF
from src.core.values import ObjectId, VarAssignment
from src.spec.ast import BehaviorDescription, DiagramTransition, ServiceSTD
from src.spec.domains import Domain, IdDomain
from src.spec.enumerate import assignments, attribute_space
from src.spec.evaluate import eval_pred
from src.spec.frames import post_states
from src.spec.report import Finding, Severity, witness_of
from src.spec.validate import default_ids

logger = logging.getLogger(__name__)

Shape = Tuple[str, int]
Group = List[Tuple[int, DiagramTransition]]


def _entries(service: ServiceSTD) -> List[Tuple[int, str, Shape, bool, Group]]:
    """(position, subject, shape, starting, candidates) for every way an input reaches the service."""
    start = [(index, t) for index, t in enumerate(service.transitions)
             if t.source in service.initial and t.pattern.service == service.name]
    found = [(-1, f"{service.name}/{','.join(service.initial)}",
              (service.name, len(service.params)), True, start)]
    for position, state in enumerate(service.states):
        shapes: Dict[Shape, Group] = {}
        for index, t in service.leaving(state.id):
            if state.id in service.initial and t.pattern.service == service.name:
                continue
            shapes.setdefault((t.pattern.service, len(t.pattern.binders)), []).append((index, t))
        for shape, group in sorted(shapes.items()):
            found.append((position, f"{service.name}/{state.id}", shape, False, group))
    return found


def _message_domains(service: ServiceSTD, group: Group, starting: bool) -> Optional[List[Tuple[str, Domain]]]:
    """Names and domains of the message arguments, by position."""
    if starting:
        return [(decl.name, decl.domain) for decl in service.params]
    declared = {decl.name: decl for decl in service.params + service.locals}
    binders = group[0][1].pattern.binders
    if any(name not in declared for name in binders):
        return None
    return [(name, declared[name].domain) for name in binders]


def _enabled(beh: BehaviorDescription, service: ServiceSTD, t: DiagramTransition,
             point: VarAssignment, message_names: Sequence[str], sender: Optional[str],
             starting: bool, ids: Sequence[ObjectId]) -> bool:
    binding = dict(zip(t.pattern.binders, (point.lookup(n) for n in message_names)))
    if t.pattern.sender and sender:
        binding[t.pattern.sender] = point.lookup(sender)
    defaults = {decl.name: decl.domain.default() for decl in service.locals}
    attrs = point.restrict(beh.attribute_names() + (SELF,))
    if starting:
        args = VarAssignment.of({n: v for n, v in binding.items() if n in service.param_names()})
        local_values = VarAssignment.of(defaults)
    else:
        args = point.restrict(service.param_names())
        defaults.update(point.restrict(defaults).as_dict())
        defaults.update({n: v for n, v in binding.items() if n in defaults})
        local_values = VarAssignment.of(defaults)
    env = attrs.update(args).update(local_values).update(binding)
    if not eval_pred(t.pre, env):
        return False
    return next(post_states(beh, service, t, env, ids), None) is not None


def _gap(beh: BehaviorDescription, service: ServiceSTD, starting: bool, group: Group,
         space: Sequence[VarAssignment],
         ids: Sequence[ObjectId]) -> Optional[Tuple[VarAssignment, int, int, int]]:
    message = _message_domains(service, group, starting) if group or starting else None
    if message is None:
        return None
    message_names = [name for name, _ in message]
    domains: Dict[str, Domain] = dict(message)
    if not starting:
        domains.update({d.name: d.domain for d in service.params if d.name not in domains})
        domains.update({d.name: d.domain for d in service.locals if d.name not in domains})
    sender = next((t.pattern.sender for _, t in group if t.pattern.sender), None)
    if sender:
        domains[sender] = IdDomain()

    witness, gaps, unlabelled, total = None, 0, 0, 0
    for attrs in space:
        live = [t for _, t in group if eval_pred(service.state(t.source).label, attrs)]
        for point in assignments(domains, ids, attrs):
            total += 1
            if any(_enabled(beh, service, t, point, message_names, sender, starting, ids)
                   for t in live):
                continue
            gaps += 1
            if not live:
                unlabelled += 1
            if witness is None:
                witness = point
    return (witness, gaps, unlabelled, total) if witness is not None else None


def enabledness_report(beh: BehaviorDescription,
                       ids: Optional[Sequence[ObjectId]] = None) -> List[Finding]:
    """
    Report where inputs find no enabled transition.

    Entries whose predicates fail to evaluate are skipped.

    Args:
        beh: Validated behavior
        ids: Object identities; the first one plays ``self``

    Returns:
        INPUT_GAP warnings ordered by service, state and message shape,
        each with the smallest gap assignment as witness
    """
    ids = tuple(ids) if ids else default_ids()
    findings: List[Finding] = []
    space = list(attribute_space(beh, ids[0], ids))
    for service in beh.services:
        for position, subject, shape, starting, group in _entries(service):
            try:
                found = _gap(beh, service, starting, group, space, ids)
            except IOStarError as e:
                logger.debug("enabledness of %s skipped: %s", subject, e)
                continue
            if found is None:
                continue
            witness, gaps, unlabelled, total = found
            message = f"no transition enabled for {shape[0]}/{shape[1]} in {gaps} of {total} assignment(s)"
            if unlabelled:
                message += f", {unlabelled} with no source state predicate true"
            findings.append(Finding(
                Severity.WARNING, "INPUT_GAP", subject, message,
                witness=witness_of(witness), assignment=witness,
                key=(service.name, position, f"{shape[0]}/{shape[1]}")))
    logger.info("enabledness of %s: %d gap(s)", beh.name, len(findings))
    return findings
