"""
Legality rules for I/O*-state machine transitions.

:func:`check_step_legal` audits one (source, input, result) triple
against the restrictions on stack, tag pool and output shape. The rows
of the stack table are selected by the kind of the input message and
the kind of the last output message:

    input       last output     stack of the input tag
    sequ        ret             unchanged
    sequ/conc   sequ            one invocation pushed
    conc        conc or none    unchanged
    ret         ret             popped
    ret         sequ            top replaced
    ret         conc or none    same depth, top pc/locals may change
"""

from dataclasses import dataclass
from typing import List, Optional, Set, Tuple

from .messages import Message, MessageKind
from .state import InvocationStack, ObjectState, StepResult, SELF

RULES = ("a", "b", "c", "d", "e", "f", "g", "h")


@dataclass(frozen=True)
class Violation:
    """
    One broken rule.

    Attributes:
        rule: Rule letter ``a``..``h`` (or ``input`` for a misdirected message)
        message: Human-readable description
    """
    rule: str
    message: str

    def __str__(self) -> str:
        return f"({self.rule}) {self.message}"


@dataclass(frozen=True)
class LegalityReport:
    """Result of auditing one step; empty means legal."""
    violations: Tuple[Violation, ...] = ()

    @property
    def legal(self) -> bool:
        return not self.violations

    def rules(self) -> Set[str]:
        return {violation.rule for violation in self.violations}


def _last_kind(out: Tuple[Message, ...]) -> Optional[MessageKind]:
    """Kind of the last output, or None for concurrent-only/empty output."""
    if out and out[-1].kind is not MessageKind.CONC:
        return out[-1].kind
    return None


def check_step_legal(source: ObjectState, input: Message, result: StepResult) -> LegalityReport:
    """
    Check one transition against the machine restrictions.

    Args:
        source: State before the step
        input: Consumed message
        result: Successor state and output sequence

    Returns:
        LegalityReport: Every violated rule, in rule order
    """
    found: List[Violation] = []

    def violate(rule: str, text: str) -> None:
        found.append(Violation(rule, text))

    succ = result.successor
    tag = input.tt
    out = result.out
    self_id = source.at.get(SELF)

    if input.rec != self_id:
        violate("input", f"message for {input.rec} delivered to {self_id}")

    # (a) only the stack of the input tag may change
    tags = {t for t, _ in source.stacks} | {t for t, _ in succ.stacks}
    for other in sorted(tags - {tag}):
        if source.stack(other) != succ.stack(other):
            violate("a", f"stack of tag {other} changed while processing tag {tag}")

    before = source.stack(tag)
    after = succ.stack(tag)
    last_kind = _last_kind(out)
    invoked_concurrently = input.kind is MessageKind.CONC or (
        input.kind is MessageKind.RET and bool(before) and before.frames[-1].mode is MessageKind.CONC
    )

    # (b) stack effect
    _check_stack_effect(input, before, after, last_kind, result.chaos, violate)

    # (c) only the last output may be non-concurrent
    for position, message in enumerate(out[:-1]):
        if message.kind is not MessageKind.CONC:
            violate("c", f"output {position} is {message.kind} but is not the last message")

    # (d) every concurrent output consumes a fresh tag from the pool
    conc_tags = [m.tt for m in out if m.kind is MessageKind.CONC]
    if len(set(conc_tags)) != len(conc_tags):
        violate("d", "two concurrent outputs share a tag")
    for fresh in conc_tags:
        if fresh not in source.pt:
            violate("d", f"concurrent output uses tag {fresh} that is not in the pool")
    if succ.pt != source.pt - set(conc_tags):
        violate("d", "tag pool does not shrink by exactly the allocated tags")

    # (e) the sequential or return output stays on the input tag
    if last_kind is not None:
        last = out[-1]
        if last.tt != tag:
            violate("e", f"{last.kind} output carries tag {last.tt}, expected {tag}")
        if last_kind is MessageKind.RET:
            if input.kind is MessageKind.RET:
                expected = before.frames[-1].caller if before else None
            else:
                expected = input.snd
            if expected is not None and last.rec != expected:
                violate("e", f"ret addressed to {last.rec}, caller is {expected}")

    # (f) a concurrently invoked service never answers with ret
    if invoked_concurrently and last_kind is MessageKind.RET:
        violate("f", "concurrently invoked service emits ret")

    # (g) attribute names and self are immutable
    if set(source.at.names()) != set(succ.at.names()):
        violate("g", "attribute name set changed")
    elif succ.at.get(SELF) != self_id:
        violate("g", "value of self changed")
    for message in out:
        if message.snd != self_id:
            violate("g", f"output sent on behalf of {message.snd}")

    # (h) a changed top invocation keeps its arguments
    if before and after and len(before) == len(after):
        old_top, new_top = before.frames[-1], after.frames[-1]
        if old_top != new_top and (
            old_top.args != new_top.args
            or old_top.service != new_top.service
            or old_top.caller != new_top.caller
            or old_top.mode != new_top.mode
        ):
            violate("h", f"top invocation of {tag} changed its arguments or identity")

    return LegalityReport(tuple(found))


def _check_stack_effect(input, before: InvocationStack, after: InvocationStack,
                        last_kind: Optional[MessageKind], chaos: bool, violate) -> None:
    """Rule (b): compare the stack of the input tag with the table row."""
    if chaos:
        if after != before:
            violate("b", "chaos step changed the stack")
        return

    if input.kind is not MessageKind.RET:
        if last_kind is MessageKind.RET:
            if after != before:
                violate("b", "sequ/ret row requires the stack unchanged")
        elif last_kind is MessageKind.SEQU:
            if len(after) != len(before) + 1 or after.frames[:-1] != before.frames:
                violate("b", "call/sequ row requires exactly one pushed invocation")
            else:
                pushed = after.frames[-1]
                if pushed.caller != input.snd or pushed.mode is not input.kind:
                    violate("b", "pushed invocation does not record caller and mode of the call")
        elif input.kind is MessageKind.SEQU:
            violate("b", "sequential call left pending without suspension or ret")
        elif after != before:
            violate("b", "conc/conc row requires the stack unchanged")
        return

    if not before:
        violate("b", "ret input on an empty stack")
        return
    if last_kind is MessageKind.RET:
        if after.frames != before.frames[:-1]:
            violate("b", "ret/ret row requires the stack popped")
    elif len(after) != len(before) or after.frames[:-1] != before.frames[:-1]:
        row = "ret/sequ" if last_kind is MessageKind.SEQU else "ret/conc"
        violate("b", f"{row} row requires only the top invocation replaced")
