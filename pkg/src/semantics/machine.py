"""
Explicit I/O*-state machines.

:func:`enumerate_machine` unfolds the transition relation of one object
breadth-first from its initial states under a closed input alphabet:
calls of every service with every argument combination from every peer
on each of that peer's first ``peer_tags`` tags, and returns for every
busy tag. Only admissible pairs are inputs (no ``ret`` on an idle tag,
no concurrent call on a busy one), so a fresh call can arrive while
another invocation of the same object is suspended.

Export format::

    # iostar-machine v1
    # behavior Account self acc1 policy havoc
    S0 | <state>
    <state> | <input> | <state'> | <output> ; <output>   (``-`` for none)
    # truncated
"""

import itertools
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Deque, Dict, FrozenSet, List, Optional, Sequence, Tuple

from src.config import DEFAULT_PEER_TAGS, ENVIRONMENT_ID
from src.core.errors import BudgetExceeded
from src.core.messages import Message, MessageKind, RET
from src.core.printing import format_message, format_state
from src.core.state import ObjectState, StepResult
from src.core.values import ObjectId, Tag, VarAssignment
from src.spec.ast import BehaviorDescription

from .initial import initial_states
from .step import ChaosPolicy, step

logger = logging.getLogger(__name__)

MACHINE_HEADER = "# iostar-machine v1"


@dataclass
class ExplicitMachine:
    """
    Reachable part of an I/O*-state machine.

    Attributes:
        behavior: Behavior name
        self_id: Identity of the unfolded object
        policy: Chaos policy used for unmatched inputs
        initial: Digests of the initial states
        states: Digest to state, in discovery order
        transitions: (source digest, input, destination digest, outputs)
        truncated: True when the state budget cut the unfolding short
    """
    behavior: str
    self_id: ObjectId
    policy: ChaosPolicy
    initial: List[str] = field(default_factory=list)
    states: Dict[str, ObjectState] = field(default_factory=dict)
    transitions: List[Tuple[str, Message, str, Tuple[Message, ...]]] = field(default_factory=list)
    truncated: bool = False

    def render(self) -> str:
        lines = [MACHINE_HEADER, f"# behavior {self.behavior} self {self.self_id} policy {self.policy}"]
        lines.extend(f"S0 | {digest}" for digest in self.initial)
        for source, message, target, out in self.transitions:
            outputs = " ; ".join(format_message(m) for m in out) if out else "-"
            lines.append(f"{source} | {format_message(message)} | {target} | {outputs}")
        if self.truncated:
            lines.append("# truncated")
        return "\n".join(lines) + "\n"


def machine_inputs(beh: BehaviorDescription, s: ObjectState, peers: Sequence[ObjectId],
                   ids: Sequence[ObjectId], peer_tags: int = 1) -> List[Message]:
    """
    The admissible inputs of ``s``.

    Calls come from every peer on each of its first ``peer_tags`` tags;
    returns come on every busy tag with argument values over the domains of the
    locals the awaiting ``ret`` patterns bind.
    """
    self_id = s.self_id
    inputs: List[Message] = []
    for service in beh.services:
        domains = [decl.domain.values(ids) for decl in service.params]
        names = service.param_names()
        for values in itertools.product(*domains):
            args = VarAssignment(zip(names, values))
            for peer, index in itertools.product(peers, range(peer_tags)):
                tag = Tag(peer.name, index)
                for kind in (MessageKind.SEQU, MessageKind.CONC):
                    if not service.callable.admits(kind):
                        continue
                    if kind is MessageKind.CONC and s.stack(tag):
                        continue
                    inputs.append(Message(peer, self_id, tag, service.name, args, kind))

    for tag, stack in s.stacks:
        top = stack.frames[-1]
        service = beh.service(top.service)
        if service is None:
            continue
        shapes = {t.pattern.binders for _, t in service.leaving(top.pc) if t.pattern.is_return}
        for binders in sorted(shapes):
            domains = [service.local_decl(name).domain.values(ids) for name in binders]
            for values in itertools.product(*domains):
                args = VarAssignment(zip(binders, values))
                for peer in peers:
                    inputs.append(Message(peer, self_id, tag, RET, args, MessageKind.RET))
    return inputs


def enumerate_machine(beh: BehaviorDescription, obj_id: ObjectId, pool: FrozenSet[Tag],
                      bound: int, peers: Optional[Sequence[ObjectId]] = None,
                      policy: ChaosPolicy = ChaosPolicy.HAVOC,
                      peer_tags: int = DEFAULT_PEER_TAGS) -> ExplicitMachine:
    """
    Unfold the machine of one object breadth-first.

    Args:
        beh: Validated behavior
        obj_id: Identity of the object
        pool: Its tag pool
        bound: Maximum number of states
        peers: Objects that send inputs (default: the environment)
        policy: Chaos policy for unmatched inputs
        peer_tags: Number of tags each peer calls on

    Returns:
        ExplicitMachine: Complete reachable machine

    Raises:
        BudgetExceeded: with the partial machine (``truncated`` set)
    """
    peers = tuple(peers) if peers else (ObjectId(ENVIRONMENT_ID),)
    ids = tuple(sorted(set(peers) | {obj_id}))
    machine = ExplicitMachine(beh.name, obj_id, policy)
    queue: Deque[str] = deque()

    def admit(state: ObjectState) -> str:
        digest = format_state(state)
        if digest not in machine.states:
            if len(machine.states) >= bound:
                machine.truncated = True
                raise BudgetExceeded(f"machine of {obj_id} exceeds {bound} states", machine)
            machine.states[digest] = state
            queue.append(digest)
        return digest

    for state in initial_states(beh, obj_id, pool, ids):
        machine.initial.append(admit(state))

    while queue:
        source = queue.popleft()
        state = machine.states[source]
        for message in machine_inputs(beh, state, peers, ids, peer_tags):
            results: List[StepResult] = step(beh, state, message, policy, ids)
            for result in results:
                target = admit(result.successor)
                machine.transitions.append((source, message, target, result.out))

    logger.info("machine of %s: %d state(s), %d transition(s)",
                obj_id, len(machine.states), len(machine.transitions))
    return machine
