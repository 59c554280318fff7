"""
Successor computation for one diagram transition.

Attributes and locals that occur primed in the postcondition (or are
listed in ``havoc``) are enumerated over their domains; every other
variable keeps its value (implicit frame).
"""

from typing import Dict, Iterator, Sequence

from src.core.state import SELF
from src.core.values import ObjectId, Value, VarAssignment

from .ast import BehaviorDescription, DiagramTransition, ServiceSTD, TRUE, primed_names
from .domains import Domain
from .enumerate import assignments
from .evaluate import eval_pred, primed


def changed_variables(beh: BehaviorDescription, service: ServiceSTD,
                      transition: DiagramTransition) -> Dict[str, Domain]:
    """
    Variables a transition may change, with their domains.

    Returns:
        Mapping of attribute/local names that are primed in the
        postcondition or listed in ``havoc``
    """
    wanted = primed_names(transition.post) | set(transition.havoc)
    domains: Dict[str, Domain] = {}
    for decl in beh.attributes + service.locals:
        if decl.name in wanted:
            domains[decl.name] = decl.domain
    return domains


def successor_env(beh: BehaviorDescription, service: ServiceSTD, env: VarAssignment,
                  candidate: VarAssignment) -> VarAssignment:
    """
    Extend ``env`` with primed entries for every attribute and local.

    Changed variables take their value from ``candidate``; the others
    keep their value from ``env``.
    """
    values = candidate.as_dict()
    merged: Dict[str, Value] = env.as_dict()
    for name in beh.attribute_names() + tuple(d.name for d in service.locals):
        if name in values:
            merged[primed(name)] = values[name]
        elif name in merged:
            merged[primed(name)] = merged[name]
    return VarAssignment.of(merged)


def post_states(beh: BehaviorDescription, service: ServiceSTD, transition: DiagramTransition,
                env: VarAssignment, ids: Sequence[ObjectId]) -> Iterator[VarAssignment]:
    """
    Enumerate the new values of the changed variables.

    A candidate is kept when it satisfies the postcondition (unprimed
    names read ``env``, primed names read the candidate) and the label of
    the target state holds on the resulting attributes.

    Args:
        beh: Behavior the service belongs to
        service: Service whose transition fires
        transition: Fired transition
        env: Attributes, self, invocation variables and binding
        ids: Object identities for ``id`` domains

    Yields:
        VarAssignment: New values of the changed variables, unprimed names
    """
    domains = changed_variables(beh, service, transition)
    target = service.state(transition.target)
    label = target.label if target is not None else TRUE
    attribute_names = beh.attribute_names()
    base = env.as_dict()

    for candidate in assignments(domains, ids):
        if not eval_pred(transition.post, successor_env(beh, service, env, candidate)):
            continue
        values = candidate.as_dict()
        after = {name: values.get(name, base[name]) for name in attribute_names}
        after[SELF] = base[SELF]
        if eval_pred(label, VarAssignment.of(after)):
            yield candidate
