"""
Machine transitions derived from service diagrams.

:func:`step` computes every (successor, output) pair one input message
can cause in one object state:

1. select candidate transitions: a message on an idle tag starts a new
   execution at an initial state of the called service; a message on a
   busy tag resumes the top invocation at its program counter
2. gate new executions by the exclusion sets of every stacked invocation
3. keep candidates whose source label and precondition hold
4. enumerate successors that satisfy the postcondition and target label
5. evaluate outputs, allocating one fresh tag per concurrent call
6. apply the stack effect selected by input kind and last output kind
7. with no enabled candidate, fall back to the chaos policy
"""

import logging
from dataclasses import replace
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

from src.core.errors import IllegalInput, TypeMismatch
from src.core.messages import Message, MessageKind, RET
from src.core.printing import format_message, format_state
from src.core.state import (SELF, ObjectState, ServiceInvocation, StepResult, alloc_tag, stack_pop,
                            stack_push, stack_top)
from src.core.values import ObjectId, VarAssignment
from src.spec.ast import BehaviorDescription, DiagramTransition, ServiceSTD, transition_location
from src.spec.domains import require
from src.spec.enumerate import attribute_domains, assignments
from src.spec.evaluate import eval_expr, eval_pred
from src.spec.frames import post_states, successor_env
from src.spec.patterns import match_pattern

logger = logging.getLogger(__name__)


class ChaosPolicy(Enum):
    """What an object does with an input no transition is enabled for."""
    REJECT = "reject"
    HAVOC = "havoc"

    def __str__(self) -> str:
        return self.value


def excluded_services(beh: BehaviorDescription, s: ObjectState) -> Dict[str, Tuple[str, str]]:
    """
    Services that may not start in ``s``.

    Returns:
        Mapping from excluded service name to the (service, state) of the
        stacked invocation whose exclusion set names it
    """
    blocked: Dict[str, Tuple[str, str]] = {}
    for inv in s.invocations():
        service = beh.service(inv.service)
        state = service.state(inv.pc) if service is not None else None
        if state is None:
            continue
        for name in state.exclusions:
            blocked.setdefault(name, (inv.service, inv.pc))
    return blocked


def _candidates(beh: BehaviorDescription, s: ObjectState, m: Message,
                top: Optional[ServiceInvocation]) -> List[Tuple[ServiceSTD, int, DiagramTransition]]:
    if top is not None:
        service = beh.service(top.service)
        if service is None:
            return []
        return [(service, index, t) for index, t in service.leaving(top.pc)
                if t.pattern.service == m.mn]
    service = beh.service(m.mn)
    if service is None or not service.callable.admits(m.kind):
        return []
    return [(service, index, t) for index, t in enumerate(service.transitions)
            if t.source in service.initial and t.pattern.service == m.mn]


def step(beh: BehaviorDescription, s: ObjectState, m: Message,
         policy: ChaosPolicy = ChaosPolicy.REJECT,
         ids: Optional[Sequence[ObjectId]] = None) -> List[StepResult]:
    """
    Every machine transition of ``s`` on input ``m``.

    Args:
        beh: Behavior of the receiving object
        s: Current state of the receiver
        m: Input message addressed to the receiver
        policy: Treatment of inputs no transition is enabled for
        ids: Object identities ``id`` variables range over

    Returns:
        StepResults sorted by successor digest, never empty

    Raises:
        IllegalInput: ``ret`` on an idle tag, concurrent call on a busy
            tag, or a message addressed to another object
        TagPoolExhausted: a concurrent output found the pool empty
        DomainOverflow: an argument or returned value left its declared domain
        ArityMismatch: a pattern does not fit the message
    """
    self_id = s.self_id
    ids = tuple(ids) if ids else (self_id,)
    if m.rec != self_id:
        raise IllegalInput(f"message for {m.rec} delivered to {self_id}")
    if s.error is not None:
        return [StepResult(s, (), None, chaos=True)]

    stack = s.stack(m.tt)
    if m.kind is MessageKind.RET and not stack:
        raise IllegalInput(f"ret on tag {m.tt} with no suspended invocation")
    if m.kind is MessageKind.CONC and stack:
        raise IllegalInput(f"concurrent call on busy tag {m.tt}")
    top = stack_top(stack) if stack else None

    blocked = excluded_services(beh, s) if top is None else {}
    if m.mn in blocked:
        holder = blocked[m.mn]
        logger.debug("%s: %s excluded by %s@%s", self_id, m.mn, *holder)
        return _chaos(beh, s, policy, ids, f"{m.mn} excluded at {holder[0]}@{holder[1]}")

    results: List[StepResult] = []
    for service, index, t in _candidates(beh, s, m, top):
        binding = match_pattern(t.pattern, m)
        if binding is None:
            continue
        results.extend(_fire(beh, s, m, top, service, index, t, binding, ids))

    if not results:
        return _chaos(beh, s, policy, ids, f"no transition enabled for {m.mn}")
    return _canonical(results)


def _fire(beh: BehaviorDescription, s: ObjectState, m: Message, top: Optional[ServiceInvocation],
          service: ServiceSTD, index: int, t: DiagramTransition, binding: VarAssignment,
          ids: Sequence[ObjectId]) -> List[StepResult]:
    if not eval_pred(service.state(t.source).label, s.at):
        return []

    if top is None:
        arg_names = set(t.pattern.binders)
        args = binding.restrict(arg_names)
        for decl in service.params:
            if decl.name in args:
                require(decl.domain, args.lookup(decl.name), f"{service.name}.{decl.name}")
        local_values = VarAssignment.of({d.name: d.domain.default() for d in service.locals})
        caller, mode = m.snd, m.kind
    else:
        args = top.args
        for decl in service.locals:
            if decl.name in binding:
                require(decl.domain, binding.lookup(decl.name), f"{service.name}.{decl.name}")
        local_values = top.locals.update(binding.restrict(top.locals.names()))
        caller, mode = top.caller, top.mode
    env = s.at.update(args).update(local_values).update(binding)
    if not eval_pred(t.pre, env):
        return []

    fired = transition_location(service, index)
    attribute_names = set(beh.attribute_names())
    results = []
    for candidate in post_states(beh, service, t, env, ids):
        after = successor_env(beh, service, env, candidate)
        new_at = s.at.update(candidate.restrict(attribute_names))
        new_locals = local_values.update(candidate.restrict(local_values.names()))
        state = replace(s, at=new_at)
        out, state = _outputs(beh, t, after, state, m, caller, mode)
        last = out[-1].kind if out and out[-1].kind is not MessageKind.CONC else None

        stack = s.stack(m.tt)
        if top is None:
            if last is MessageKind.SEQU:
                stack = stack_push(stack, ServiceInvocation(
                    service.name, t.target, caller, args, new_locals, mode))
        elif last is MessageKind.RET:
            stack = stack_pop(stack)
        else:
            stack = stack_push(stack_pop(stack), replace(top, pc=t.target, locals=new_locals))
        results.append(StepResult(state.with_stack(m.tt, stack), tuple(out), fired))
    logger.debug("%s fired %s: %d successor(s)", s.self_id, fired, len(results))
    return results


def _outputs(beh: BehaviorDescription, t: DiagramTransition, env: VarAssignment, state: ObjectState,
             m: Message, caller: ObjectId, mode: MessageKind) -> Tuple[List[Message], ObjectState]:
    """
    Evaluate output templates left to right; ret to a concurrent caller is dropped.

    Arguments of a call to a service the behavior itself declares are
    checked against that service's parameter domains.
    """
    out: List[Message] = []
    self_id = state.self_id
    for template in t.outputs:
        args = VarAssignment([(name, eval_expr(expr, env)) for name, expr in template.args])
        called = beh.service(template.name) if template.kind is not MessageKind.RET else None
        if called is not None:
            for decl in called.params:
                if decl.name in args:
                    require(decl.domain, args.lookup(decl.name), f"{template.name}.{decl.name}")
        if template.kind is MessageKind.RET:
            if mode is MessageKind.CONC:
                continue
            out.append(Message(self_id, caller, m.tt, RET, args, MessageKind.RET))
            continue
        receiver = eval_expr(template.target, env)
        if not isinstance(receiver, ObjectId):
            raise TypeMismatch(f"receiver of {template.name} is not an object id")
        if template.kind is MessageKind.SEQU:
            out.append(Message(self_id, receiver, m.tt, template.name, args, MessageKind.SEQU))
        else:
            tag, state = alloc_tag(state)
            out.append(Message(self_id, receiver, tag, template.name, args, MessageKind.CONC))
    return out, state


def _chaos(beh: BehaviorDescription, s: ObjectState, policy: ChaosPolicy,
           ids: Sequence[ObjectId], reason: str) -> List[StepResult]:
    if policy is ChaosPolicy.REJECT:
        return [StepResult(replace(s, error=reason), (), None, chaos=True)]
    base = VarAssignment.of({SELF: s.self_id})
    results = [StepResult(replace(s, at=at), (), None, chaos=True)
               for at in assignments(attribute_domains(beh), ids, base)]
    return _canonical(results)


def result_key(result: StepResult) -> Tuple[str, Tuple[str, ...]]:
    """Digest of a step result: printed successor and outputs."""
    return format_state(result.successor), tuple(format_message(m) for m in result.out)


def _canonical(results: List[StepResult]) -> List[StepResult]:
    unique: Dict[Tuple[str, Tuple[str, ...]], StepResult] = {}
    for result in results:
        unique.setdefault(result_key(result), result)
    return [unique[key] for key in sorted(unique)]
