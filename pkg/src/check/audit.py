"""
Independent audit of a recorded trace.

The audit trusts nothing the simulator computed: each step is rebuilt
from the recorded source state, consumed message, emitted messages and
recorded successor, then checked against the machine restrictions. The
whole trace is also checked for FIFO delivery, tag pools that only
shrink, and sequential calls that get exactly one ``ret``.
"""

import logging
from collections import Counter, deque
from typing import Deque, Dict, List, Optional, Set, Tuple

from src.core.legality import check_step_legal
from src.core.messages import Message, MessageKind
from src.core.printing import format_message
from src.core.state import ObjectState, StepResult
from src.core.values import ObjectId
from src.sim.trace import STOP_QUIESCENT, Abort, Deliver, Emit, Inject, StateDigest, Trace
from src.spec.report import Finding, Severity

logger = logging.getLogger(__name__)


class _Audit:
    def __init__(self, trace: Trace):
        self.trace = trace
        self.states: Dict[ObjectId, ObjectState] = {}
        self.channels: Dict[Tuple[ObjectId, ObjectId], Deque[Message]] = {}
        self.calls: Counter = Counter()
        self.findings: List[Finding] = []

    def report(self, step: int, code: str, message: str, witness: Optional[str] = None) -> None:
        self.findings.append(Finding(Severity.ERROR, code, f"step {step}", message,
                                     witness=witness, key=(step,)))

    def send(self, step: int, message: Message) -> None:
        self.channels.setdefault(message.channel, deque()).append(message)
        if message.kind is MessageKind.SEQU:
            self.calls[(message.snd, message.rec, message.tt)] += 1
        elif message.kind is MessageKind.RET:
            key = (message.rec, message.snd, message.tt)
            if self.calls[key] <= 0:
                self.report(step, "UNEXPECTED_RET", f"ret on tag {message.tt} answers no open call",
                            format_message(message))
            else:
                self.calls[key] -= 1

    def observe(self, step: int, obj: ObjectId, state: ObjectState) -> None:
        before = self.states.get(obj)
        if before is not None and not state.pt <= before.pt:
            grown = ", ".join(str(tag) for tag in sorted(state.pt - before.pt))
            self.report(step, "POOL_GROWTH", f"tag pool of {obj} regained {grown}")
        self.states[obj] = state

    def consume(self, delivery: Deliver) -> None:
        message = delivery.message
        queue = self.channels.get(message.channel)
        if not queue or message not in queue:
            self.report(delivery.step, "FIFO_ORDER", "delivered message was never sent",
                        format_message(message))
            return
        if queue[0] != message:
            self.report(delivery.step, "FIFO_ORDER", "delivered message overtook an earlier one",
                        format_message(message))
        queue.remove(message)

    def step(self, delivery: Deliver, outs: List[Message], successor: ObjectState) -> None:
        message = delivery.message
        source = self.states.get(message.rec)
        if source is None:
            self.report(delivery.step, "UNKNOWN_OBJECT", f"no recorded state for {message.rec}",
                        format_message(message))
            return
        result = StepResult(successor, tuple(outs), delivery.fired, chaos=delivery.fired is None)
        legality = check_step_legal(source, message, result)
        if not legality.legal:
            self.report(delivery.step, "ILLEGAL_STEP",
                        "; ".join(str(v) for v in legality.violations), format_message(message))
        if delivery.fired is None and message.kind is MessageKind.SEQU:
            key = (message.snd, message.rec, message.tt)
            self.calls[key] = max(0, self.calls[key] - 1)
        self.observe(delivery.step, message.rec, successor)

    def run(self) -> List[Finding]:
        events = self.trace.events
        position = 0
        steps = 0
        while position < len(events):
            event = events[position]
            position += 1
            if isinstance(event, StateDigest):
                self.observe(steps, event.obj, event.state)
            elif isinstance(event, Inject):
                self.send(steps, event.message)
            elif isinstance(event, Abort):
                break
            elif isinstance(event, Deliver):
                steps = event.step + 1
                self.consume(event)
                outs: List[Message] = []
                while position < len(events) and isinstance(events[position], Emit):
                    outs.append(events[position].message)
                    position += 1
                after = events[position] if position < len(events) else None
                if isinstance(after, StateDigest) and after.obj == event.message.rec:
                    position += 1
                    self.step(event, outs, after.state)
                elif not isinstance(after, Abort):
                    self.report(event.step, "MISSING_STATE",
                                f"no state of {event.message.rec} recorded after delivery")
                for out in outs:
                    self.send(event.step, out)
            elif isinstance(event, Emit):
                self.report(steps, "STRAY_EMIT", "emit outside a delivery",
                            format_message(event.message))
        if self.trace.stop == STOP_QUIESCENT:
            self.open_calls(steps)
        return sorted(self.findings, key=lambda f: (f.key, f.code, f.message))

    def open_calls(self, steps: int) -> None:
        leaked: Set[Tuple[str, str]] = {(obj, tag) for obj, tag, _ in self.trace.leaked}
        for (caller, callee, tag), count in sorted(self.calls.items()):
            if count <= 0 or (str(callee), str(tag)) in leaked:
                continue
            state = self.states.get(callee)
            if state is not None and state.error is not None:
                continue
            self.report(steps, "MISSING_RETURN",
                        f"sequential call from {caller} to {callee} on tag {tag} never answered")


def audit_trace(trace: Trace) -> List[Finding]:
    """
    Audit a trace against the machine restrictions.

    Args:
        trace: Recorded (or parsed) trace

    Returns:
        Findings ordered by step then code; empty for every trace the
        simulator records
    """
    findings = _Audit(trace).run()
    logger.info("trace audit: %d finding(s) over %d step(s)", len(findings), len(trace.deliveries()))
    return findings
