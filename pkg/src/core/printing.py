"""
Canonical printed forms of kernel values.

The printed forms are used as state digests (for deduplication and
diffable exports) and as the payload of trace files, so every
``format_*`` function has a ``parse_*`` counterpart.

    value        42 | -3 | true | false | @acc1 | closed
    assignment   {a=2,dst=@acc2}
    tag          acc1:0
    message      seq env->acc1 [env:0] deposit(a=3)
    invocation   transfer@Wait<env,conc>{a=2,dst=@acc2}{ok=false}
    state        at{...} st{env:0=[inv;inv]} pt{acc1:0,acc1:1} err{reason}
"""

import re
from typing import List, Tuple

from .messages import Message, MessageKind
from .state import InvocationStack, ObjectState, ServiceInvocation
from .values import EnumConst, ObjectId, Tag, Value, VarAssignment

_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_INT = re.compile(r"-?\d+")


def format_value(value: Value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, ObjectId):
        return f"@{value.name}"
    if isinstance(value, EnumConst):
        return value.name
    raise TypeError(f"not a kernel value: {value!r}")


def format_assignment(assignment: VarAssignment) -> str:
    inner = ",".join(f"{name}={format_value(value)}" for name, value in assignment.items)
    return "{" + inner + "}"


def format_message(message: Message) -> str:
    args = ",".join(f"{name}={format_value(value)}" for name, value in message.ar.items)
    return f"{message.kind} {message.snd}->{message.rec} [{message.tt}] {message.mn}({args})"


def format_invocation(inv: ServiceInvocation) -> str:
    return (f"{inv.service}@{inv.pc}<{inv.caller},{inv.mode}>"
            f"{format_assignment(inv.args)}{format_assignment(inv.locals)}")


def format_stack(stack: InvocationStack) -> str:
    return "[" + ";".join(format_invocation(inv) for inv in stack.frames) + "]"


def format_state(state: ObjectState) -> str:
    """
    Canonical one-line print of an object state.

    Args:
        state: State to print

    Returns:
        str: Print usable as a digest (equal states print equally)
    """
    stacks = ",".join(f"{tag}={format_stack(stack)}" for tag, stack in state.stacks)
    pool = ",".join(str(tag) for tag in sorted(state.pt))
    text = f"at{format_assignment(state.at)} st{{{stacks}}} pt{{{pool}}}"
    if state.error is not None:
        text += f" err{{{state.error}}}"
    return text


class _Reader:
    """Cursor over a printed form."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def fail(self, expected: str) -> None:
        raise ValueError(f"expected {expected} at column {self.pos + 1} of {self.text!r}")

    def peek(self, literal: str) -> bool:
        return self.text.startswith(literal, self.pos)

    def expect(self, literal: str) -> None:
        if not self.peek(literal):
            self.fail(repr(literal))
        self.pos += len(literal)

    def match(self, pattern: "re.Pattern", what: str) -> str:
        found = pattern.match(self.text, self.pos)
        if not found:
            self.fail(what)
        self.pos = found.end()
        return found.group(0)

    def name(self) -> str:
        return self.match(_NAME, "a name")

    def until(self, stop: str) -> str:
        end = self.text.find(stop, self.pos)
        if end < 0:
            self.fail(repr(stop))
        chunk = self.text[self.pos:end]
        self.pos = end
        return chunk

    def done(self) -> None:
        if self.pos != len(self.text):
            self.fail("end of input")

    def value(self) -> Value:
        if self.peek("@"):
            self.pos += 1
            return ObjectId(self.name())
        if _INT.match(self.text, self.pos):
            return int(self.match(_INT, "an integer"))
        word = self.name()
        if word == "true":
            return True
        if word == "false":
            return False
        return EnumConst(word)

    def pairs(self, close: str) -> List[Tuple[str, Value]]:
        items = []
        while not self.peek(close):
            if items:
                self.expect(",")
            key = self.name()
            self.expect("=")
            items.append((key, self.value()))
        self.expect(close)
        return items

    def assignment(self) -> VarAssignment:
        self.expect("{")
        return VarAssignment(self.pairs("}"))

    def tag(self) -> Tag:
        owner = self.name()
        self.expect(":")
        return Tag(owner, int(self.match(_INT, "a tag index")))

    def kind(self) -> MessageKind:
        return MessageKind(self.name())

    def message(self) -> Message:
        kind = self.kind()
        self.expect(" ")
        snd = ObjectId(self.name())
        self.expect("->")
        rec = ObjectId(self.name())
        self.expect(" [")
        tt = self.tag()
        self.expect("] ")
        mn = self.name()
        self.expect("(")
        return Message(snd, rec, tt, mn, VarAssignment(self.pairs(")")), kind)

    def invocation(self) -> ServiceInvocation:
        service = self.name()
        self.expect("@")
        pc = self.name()
        self.expect("<")
        caller = ObjectId(self.name())
        self.expect(",")
        mode = self.kind()
        self.expect(">")
        args = self.assignment()
        local_vars = self.assignment()
        return ServiceInvocation(service, pc, caller, args, local_vars, mode)

    def stack(self) -> InvocationStack:
        self.expect("[")
        frames = []
        while not self.peek("]"):
            if frames:
                self.expect(";")
            frames.append(self.invocation())
        self.expect("]")
        return InvocationStack(tuple(frames))

    def state(self) -> ObjectState:
        self.expect("at")
        at = self.assignment()
        self.expect(" st{")
        stacks = []
        while not self.peek("}"):
            if stacks:
                self.expect(",")
            tag = self.tag()
            self.expect("=")
            stacks.append((tag, self.stack()))
        self.expect("} pt{")
        pool = []
        while not self.peek("}"):
            if pool:
                self.expect(",")
            pool.append(self.tag())
        self.expect("}")
        error = None
        if self.peek(" err{"):
            self.expect(" err{")
            error = self.until("}")
            self.expect("}")
        return ObjectState(at, tuple(stacks), frozenset(pool), error)


def parse_value(text: str) -> Value:
    reader = _Reader(text)
    value = reader.value()
    reader.done()
    return value


def parse_assignment(text: str) -> VarAssignment:
    reader = _Reader(text)
    assignment = reader.assignment()
    reader.done()
    return assignment


def parse_message(text: str) -> Message:
    reader = _Reader(text)
    message = reader.message()
    reader.done()
    return message


def parse_state(text: str) -> ObjectState:
    reader = _Reader(text)
    state = reader.state()
    reader.done()
    return state
