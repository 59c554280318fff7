"""
Trace model and the line-oriented trace file format.

Example::

    # iostar-trace v1
    # scheduler random
    # seed 7
    # policy reject
    # meta load bank.iostd sha256:...
    state | acc1 | at{bal=5,self=@acc1} st{} pt{acc1:0,acc1:1}
    inject | conc env->acc1 [env:0] deposit(a=3)
    deliver | 0 | conc env->acc1 [env:0] deposit(a=3) | 0/1 | deposit#0
    state | acc1 | at{bal=8,self=@acc1} st{} pt{acc1:0,acc1:1}
    # stop: quiescent

``deliver`` records the step, the consumed message and the chosen step
result as ``position/count`` plus the diagram transition that fired
(``chaos`` for chaos steps). Every ``deliver`` is followed by its
``emit`` lines and by the new ``state`` of the receiver. An aborted run
ends with one ``abort`` event naming the phase, the message, the error
type and its text.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

from src.core.messages import Message
from src.core.printing import format_message, format_state, parse_message, parse_state
from src.core.state import ObjectState
from src.core.values import ObjectId

TRACE_HEADER = "# iostar-trace v1"
SEPARATOR = " | "
CHAOS = "chaos"

STOP_QUIESCENT = "quiescent"
STOP_BUDGET = "budget"
STOP_ABORT = "abort"


@dataclass(frozen=True)
class StateDigest:
    obj: ObjectId
    state: ObjectState

    def render(self) -> str:
        return SEPARATOR.join(("state", str(self.obj), format_state(self.state)))


@dataclass(frozen=True)
class Inject:
    message: Message

    def render(self) -> str:
        return SEPARATOR.join(("inject", format_message(self.message)))


@dataclass(frozen=True)
class Deliver:
    """
    One delivery.

    Attributes:
        step: Delivery number, starting at 0
        message: Consumed message
        choice: Position of the chosen step result
        options: Number of step results offered
        fired: ``service#index`` of the fired transition, None for chaos
    """
    step: int
    message: Message
    choice: int
    options: int
    fired: Optional[str] = None

    def render(self) -> str:
        return SEPARATOR.join(("deliver", str(self.step), format_message(self.message),
                               f"{self.choice}/{self.options}", self.fired or CHAOS))


@dataclass(frozen=True)
class Emit:
    message: Message

    def render(self) -> str:
        return SEPARATOR.join(("emit", format_message(self.message)))


@dataclass(frozen=True)
class Abort:
    """
    The event that stopped a run with an error.

    Attributes:
        step: Delivery number at which the run stopped
        phase: ``inject``, ``deliver`` or ``emit``
        message: Message being injected, delivered or enqueued
        error: Exception type name (or ``LegalityViolation``)
        detail: Error text
    """
    step: int
    phase: str
    message: Message
    error: str
    detail: str

    def render(self) -> str:
        return SEPARATOR.join(("abort", str(self.step), self.phase,
                               format_message(self.message), self.error, self.detail))


Event = Union[StateDigest, Inject, Deliver, Emit, Abort]


@dataclass
class Trace:
    """
    Recorded run.

    Attributes:
        scheduler: Scheduler name
        seed: Seed of the random scheduler, if any
        policy: Chaos policy name
        meta: Extra header entries (manifest files and digests)
        events: Events in recording order
        stop: Why the run stopped
        leaked: (object, tag, invocation) printed for every invocation
            still awaiting a caller's ret at quiescence
    """
    scheduler: str
    seed: Optional[int] = None
    policy: str = "reject"
    meta: List[Tuple[str, str]] = field(default_factory=list)
    events: List[Event] = field(default_factory=list)
    stop: Optional[str] = None
    leaked: List[Tuple[str, str, str]] = field(default_factory=list)

    def header(self) -> "Trace":
        """An empty trace with the same header."""
        return Trace(self.scheduler, self.seed, self.policy, list(self.meta))

    def deliveries(self) -> List[Deliver]:
        return [event for event in self.events if isinstance(event, Deliver)]

    @property
    def abort(self) -> Optional[Abort]:
        if self.events and isinstance(self.events[-1], Abort):
            return self.events[-1]
        return None

    def render(self) -> str:
        lines = [TRACE_HEADER, f"# scheduler {self.scheduler}"]
        if self.seed is not None:
            lines.append(f"# seed {self.seed}")
        lines.append(f"# policy {self.policy}")
        lines.extend(f"# meta {key} {value}" for key, value in self.meta)
        lines.extend(event.render() for event in self.events)
        if self.stop is not None:
            lines.append(f"# stop: {self.stop}")
        lines.extend(f"# leaked: {SEPARATOR.join(entry)}" for entry in self.leaked)
        return "\n".join(lines) + "\n"


def _event(line: str) -> Event:
    kind, _, rest = line.partition(SEPARATOR)
    if kind == "state":
        obj, text = rest.split(SEPARATOR, 1)
        return StateDigest(ObjectId(obj), parse_state(text))
    if kind == "inject":
        return Inject(parse_message(rest))
    if kind == "emit":
        return Emit(parse_message(rest))
    if kind == "deliver":
        step, message, picked, fired = rest.split(SEPARATOR)
        choice, options = picked.split("/")
        return Deliver(int(step), parse_message(message), int(choice), int(options),
                       None if fired == CHAOS else fired)
    if kind == "abort":
        step, phase, message, error, detail = rest.split(SEPARATOR, 4)
        return Abort(int(step), phase, parse_message(message), error, detail)
    raise ValueError(f"unknown trace event '{kind}'")


def parse_trace(text: str) -> Trace:
    """
    Read a trace file back.

    Args:
        text: Contents of a trace file

    Returns:
        Trace: Equal to the trace that rendered ``text``

    Raises:
        ValueError: if a line is malformed (with its line number)
    """
    lines = text.splitlines()
    if not lines or lines[0] != TRACE_HEADER:
        raise ValueError(f"line 1: expected '{TRACE_HEADER}'")
    trace = Trace(scheduler="")
    for number, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        try:
            if line.startswith("# stop: "):
                trace.stop = line[len("# stop: "):]
            elif line.startswith("# leaked: "):
                obj, tag, inv = line[len("# leaked: "):].split(SEPARATOR)
                trace.leaked.append((obj, tag, inv))
            elif line.startswith("# "):
                key, _, value = line[2:].partition(" ")
                if key == "scheduler":
                    trace.scheduler = value
                elif key == "seed":
                    trace.seed = int(value)
                elif key == "policy":
                    trace.policy = value
                elif key == "meta":
                    name, _, detail = value.partition(" ")
                    trace.meta.append((name, detail))
                else:
                    raise ValueError(f"unknown header '{key}'")
            else:
                trace.events.append(_event(line))
        except ValueError as e:
            raise ValueError(f"line {number}: {e}") from None
    return trace
