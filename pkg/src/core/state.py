"""
Object states, invocation stacks and machine transitions.

This module provides the stack services (push, pop, top, empty), the
tag pool allocation rule and the value types that describe one
transition of an I/O*-state machine.
"""

from dataclasses import dataclass, field, replace
from typing import FrozenSet, Iterable, Iterator, Optional, Tuple

from .errors import StackUnderflow, TagPoolExhausted
from .messages import Message, MessageKind
from .values import ObjectId, Tag, VarAssignment, EMPTY

SELF = "self"


@dataclass(frozen=True)
class ServiceInvocation:
    """
    A suspended (or pending) service invocation.

    Attributes:
        service: Name of the invoked service
        pc: Diagram state the invocation is pending at
        caller: Object a possible ``ret`` goes to
        args: Argument entries (immutable once pushed)
        locals: Local variable entries
        mode: How the service was invoked (sequential or concurrent)
    """
    service: str
    pc: str
    caller: ObjectId
    args: VarAssignment = EMPTY
    locals: VarAssignment = EMPTY
    mode: MessageKind = MessageKind.SEQU

    @property
    def env(self) -> VarAssignment:
        """Arguments and locals together."""
        return self.args.update(self.locals)


@dataclass(frozen=True)
class InvocationStack:
    """
    Finite stack of service invocations.

    Attributes:
        frames: Invocations from bottom to top
    """
    frames: Tuple[ServiceInvocation, ...] = ()

    def __len__(self) -> int:
        return len(self.frames)

    def __bool__(self) -> bool:
        return bool(self.frames)

    def __iter__(self) -> Iterator[ServiceInvocation]:
        return iter(self.frames)


EMPTY_STACK = InvocationStack()


def stack_push(stack: InvocationStack, inv: ServiceInvocation) -> InvocationStack:
    """
    Push an invocation.

    Args:
        stack: Source stack
        inv: Invocation to place on top

    Returns:
        InvocationStack: Stack one deeper with ``inv`` on top
    """
    return InvocationStack(stack.frames + (inv,))


def stack_pop(stack: InvocationStack) -> InvocationStack:
    """
    Remove the top invocation.

    Raises:
        StackUnderflow: if the stack is empty
    """
    if not stack.frames:
        raise StackUnderflow("pop of empty invocation stack")
    return InvocationStack(stack.frames[:-1])


def stack_top(stack: InvocationStack) -> ServiceInvocation:
    """
    Return the top invocation.

    Raises:
        StackUnderflow: if the stack is empty
    """
    if not stack.frames:
        raise StackUnderflow("top of empty invocation stack")
    return stack.frames[-1]


@dataclass(frozen=True)
class ObjectState:
    """
    State of one live object.

    Attributes:
        at: Attribute assignment, including the immutable ``self``
        stacks: Nonempty stacks keyed by tag, sorted by tag
            (absent tags map to the empty stack)
        pt: Tag pool; only ever shrinks
        error: Reason the object entered the Error state, if it did
    """
    at: VarAssignment
    stacks: Tuple[Tuple[Tag, InvocationStack], ...] = ()
    pt: FrozenSet[Tag] = frozenset()
    error: Optional[str] = None

    @property
    def self_id(self) -> ObjectId:
        return self.at.lookup(SELF)

    def stack(self, tag: Tag) -> InvocationStack:
        """Stack of ``tag`` (empty when the tag is not in use)."""
        for owner, stack in self.stacks:
            if owner == tag:
                return stack
        return EMPTY_STACK

    def with_stack(self, tag: Tag, stack: InvocationStack) -> "ObjectState":
        """Return a copy where ``tag`` maps to ``stack``."""
        others = [(t, s) for t, s in self.stacks if t != tag]
        if stack:
            others.append((tag, stack))
        return replace(self, stacks=tuple(sorted(others, key=lambda pair: pair[0])))

    def invocations(self) -> Iterable[ServiceInvocation]:
        """Every invocation somewhere on some stack."""
        for _, stack in self.stacks:
            yield from stack.frames


@dataclass(frozen=True)
class StepResult:
    """
    One machine transition out of a given state and input.

    Attributes:
        successor: Destination state
        out: Output messages, only the last one may be non-concurrent
        fired: ``service#index`` of the diagram transition that fired
            (None for chaos steps)
        chaos: True when the step resolves unmatched input
    """
    successor: ObjectState
    out: Tuple[Message, ...] = ()
    fired: Optional[str] = None
    chaos: bool = field(default=False)


def alloc_tag(state: ObjectState) -> Tuple[Tag, ObjectState]:
    """
    Remove the minimum tag from the pool.

    Args:
        state: Object state whose pool is used

    Returns:
        The allocated tag and the state with the diminished pool

    Raises:
        TagPoolExhausted: if the pool is empty
    """
    if not state.pt:
        raise TagPoolExhausted(f"tag pool of {state.self_id} is exhausted")
    tag = min(state.pt)
    return tag, replace(state, pt=state.pt - {tag})


def make_pool(owner: ObjectId, size: int) -> FrozenSet[Tag]:
    """Pool of ``size`` fresh tags owned by ``owner``."""
    return frozenset(Tag(owner.name, index) for index in range(size))
