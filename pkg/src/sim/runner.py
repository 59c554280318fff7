"""
Scheduled runs of a configuration and their replay.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

from src.config import DEFAULT_STEP_LIMIT
from src.core.errors import DivergenceAt, IllegalInput, IOStarError
from src.core.legality import check_step_legal
from src.core.messages import Message, MessageKind
from src.core.printing import format_invocation, format_message
from src.core.state import StepResult
from src.core.values import ObjectId, Tag
from src.semantics.step import ChaosPolicy, result_key, step

from .configuration import Configuration, channel_label
from .scheduler import Exhaustive, Scheduler
from .trace import (STOP_ABORT, STOP_BUDGET, STOP_QUIESCENT, Abort, Deliver, Emit, Inject,
                    StateDigest, Trace)

logger = logging.getLogger(__name__)


def env_tag(env: ObjectId, index: int) -> Tag:
    """The ``index``-th tag of the environment's reserved pool."""
    return Tag(env.name, index)


@dataclass(frozen=True)
class Injection:
    """
    A message the environment sends.

    Attributes:
        message: Message with an environment sender and tag
        at_step: Number of deliveries to wait for before sending
    """
    message: Message
    at_step: int = 0


@dataclass(frozen=True)
class Script:
    """
    Environment script.

    Attributes:
        injections: Injection directives, released in order of ``at_step``
        step_limit: Delivery budget; a run stops with ``budget`` when hit
    """
    injections: Tuple[Injection, ...] = ()
    step_limit: int = DEFAULT_STEP_LIMIT

    @classmethod
    def of(cls, messages: Iterable[Message], step_limit: int = DEFAULT_STEP_LIMIT) -> "Script":
        """Script sending every message before the first delivery."""
        return cls(tuple(Injection(m) for m in messages), step_limit)

    def messages(self) -> List[Message]:
        return [injection.message for injection in self.injections]


def check_injections(cfg: Configuration, script: Script) -> None:
    """
    Raises:
        IllegalInput: an injection does not come from the environment on
            an environment tag
    """
    for injection in script.injections:
        message = injection.message
        if message.snd != cfg.env or message.tt.owner != cfg.env.name:
            raise IllegalInput(f"{format_message(message)}: injections must come from "
                               f"{cfg.env} on a {cfg.env} tag")


def result_label(result: StepResult) -> str:
    """Printed step result offered to the scheduler."""
    successor, out = result_key(result)
    return f"{successor} / {' ; '.join(out)}"


def leaked_invocations(cfg: Configuration) -> List[Tuple[str, str, str]]:
    """
    Invocations that still owe or await a ``ret``.

    A sequentially invoked service left on a stack never answered its
    caller; any invocation parked at a wait-state never got its answer.
    A finished concurrent invocation owes nothing.
    """
    leaked = []
    for obj, state in cfg.objects:
        beh = cfg.behavior(obj)
        for tag, stack in state.stacks:
            for inv in stack:
                service = beh.service(inv.service)
                waiting = service is not None and inv.pc in service.wait_states()
                if inv.mode is MessageKind.SEQU or waiting:
                    leaked.append((str(obj), str(tag), format_invocation(inv)))
    return leaked


class Simulation:
    """
    One run in progress.

    Attributes:
        cfg: Current configuration
        trace: Events recorded so far
        steps: Deliveries made so far
    """

    def __init__(self, cfg: Configuration, script: Script, scheduler: Scheduler,
                 policy: ChaosPolicy = ChaosPolicy.REJECT,
                 meta: Sequence[Tuple[str, str]] = (), header: Optional[Trace] = None):
        check_injections(cfg, script)
        self.cfg = cfg
        self.script = script
        self.scheduler = scheduler
        self.policy = policy
        self.trace = header.header() if header else Trace(
            scheduler.name, scheduler.seed, str(policy), list(meta))
        self.pending: List[Injection] = sorted(script.injections, key=lambda i: i.at_step)
        self.steps = 0
        self.choices = 0
        for obj, state in cfg.objects:
            self.trace.events.append(StateDigest(obj, state))

    @property
    def stopped(self) -> bool:
        return self.trace.stop is not None

    def _choose(self, options: Sequence[str]) -> int:
        picked = self.scheduler.choose(self.choices, options)
        self.choices += 1
        return picked

    def _abort(self, phase: str, message: Message, error: str, detail: str) -> None:
        logger.warning("run aborted at step %d (%s %s): %s: %s",
                       self.steps, phase, format_message(message), error, detail)
        self.trace.events.append(Abort(self.steps, phase, message, error, detail))
        self.trace.stop = STOP_ABORT

    def _release(self, force: bool = False) -> None:
        if not self.pending:
            return
        due = self.pending[0].at_step if force else self.steps
        while self.pending and self.pending[0].at_step <= due:
            message = self.pending.pop(0).message
            try:
                self.cfg = self.cfg.enqueue(message)
            except IOStarError as e:
                self._abort("inject", message, type(e).__name__, str(e))
                return
            self.trace.events.append(Inject(message))

    def _finish(self, reason: str) -> None:
        self.trace.stop = reason
        if reason == STOP_QUIESCENT:
            self.trace.leaked = leaked_invocations(self.cfg)
            for obj, tag, inv in self.trace.leaked:
                logger.warning("LeakedInvocation %s on %s: %s", obj, tag, inv)
        logger.info("run stopped (%s) after %d step(s)", reason, self.steps)

    def advance(self) -> bool:
        """
        Make one delivery.

        Returns:
            bool: False once the run has stopped
        """
        if self.stopped:
            return False
        self._release()
        if not self.stopped and self.cfg.quiescent() and self.pending:
            self._release(force=True)
        if self.stopped:
            return False

        channels = self.cfg.deliverable()
        if not channels:
            self._finish(STOP_QUIESCENT)
            return False
        if self.steps >= self.script.step_limit:
            self._finish(STOP_BUDGET)
            return False

        channel = channels[self._choose([channel_label(c) for c in channels])]
        message = self.cfg.head(channel)
        receiver = message.rec
        source = self.cfg.state(receiver)
        try:
            results = step(self.cfg.behavior(receiver), source, message, self.policy, self.cfg.ids())
        except IOStarError as e:
            self._abort("deliver", message, type(e).__name__, str(e))
            return False

        position = self._choose([result_label(r) for r in results])
        result = results[position]
        self.trace.events.append(Deliver(self.steps, message, position, len(results), result.fired))
        logger.debug("step %d: %s -> %s", self.steps, format_message(message),
                     result.fired or "chaos")
        report = check_step_legal(source, message, result)
        if not report.legal:
            detail = "; ".join(str(v) for v in report.violations)
            self._abort("legality", message, "LegalityViolation", detail)
            return False

        _, cfg = self.cfg.dequeue(channel)
        self.cfg = cfg.with_state(receiver, result.successor)
        for out in result.out:
            try:
                self.cfg = self.cfg.enqueue(out)
            except IOStarError as e:
                self._abort("emit", out, type(e).__name__, str(e))
                return False
            self.trace.events.append(Emit(out))
        self.trace.events.append(StateDigest(receiver, result.successor))
        self.steps += 1
        return True


def run(cfg: Configuration, script: Script, sched: Scheduler,
        policy: ChaosPolicy = ChaosPolicy.REJECT,
        meta: Sequence[Tuple[str, str]] = ()) -> Trace:
    """
    Execute a script under a scheduler.

    Args:
        cfg: Starting configuration (behaviors validated)
        script: Environment injections and step budget
        sched: SeededRandom or RoundRobin
        policy: Chaos policy for unmatched inputs
        meta: Header entries copied into the trace

    Returns:
        Trace: Complete trace; an aborted run ends with its Abort event

    Raises:
        ValueError: for the exhaustive scheduler
        IllegalInput: an injection does not come from the environment
    """
    if isinstance(sched, Exhaustive):
        raise ValueError("run needs a random or round-robin scheduler; use explore")
    sim = Simulation(cfg, script, sched, policy, meta)
    while sim.advance():
        pass
    return sim.trace


class _Recorded(Scheduler):
    """Answers every choice the way a recorded trace did."""
    name = "replay"

    def __init__(self, trace: Trace):
        self.deliveries = trace.deliveries()
        self.abort = trace.abort

    def _target(self, number: int) -> Tuple[int, Message]:
        if number < len(self.deliveries):
            delivery = self.deliveries[number]
            return delivery.step, delivery.message
        if self.abort is not None and self.abort.phase == "deliver":
            return self.abort.step, self.abort.message
        raise DivergenceAt(number, "the run continues past the end of the trace")

    def choose(self, index: int, options: Sequence[str]) -> int:
        number = index // 2
        at, message = self._target(number)
        if index % 2 == 0:
            wanted = channel_label(message.channel)
            if wanted not in options:
                raise DivergenceAt(at, f"channel {wanted} has nothing to deliver")
            return options.index(wanted)
        if number >= len(self.deliveries):
            raise DivergenceAt(at, "the recorded run aborted before choosing a step result")
        delivery = self.deliveries[number]
        if delivery.options != len(options):
            raise DivergenceAt(at, f"{len(options)} step result(s) where "
                                   f"{delivery.options} were recorded")
        return delivery.choice


def _script_of(trace: Trace) -> Script:
    injections = []
    done = 0
    for event in trace.events:
        if isinstance(event, Deliver):
            done += 1
        elif isinstance(event, Inject):
            injections.append(Injection(event.message, done))
        elif isinstance(event, Abort) and event.phase == "inject":
            injections.append(Injection(event.message, done))
    limit = done if trace.stop == STOP_BUDGET else max(DEFAULT_STEP_LIMIT, done + 1)
    return Script(tuple(injections), limit)


def _step_of(events: Sequence, position: int) -> int:
    step_no = 0
    for event in events[:position + 1]:
        if isinstance(event, (Deliver, Abort)):
            step_no = event.step
    return step_no


def replay(trace: Trace, cfg: Configuration) -> Trace:
    """
    Re-execute a recorded trace from its starting configuration.

    Args:
        trace: Recorded trace
        cfg: Configuration equal to the one the trace started from

    Returns:
        Trace: The reproduced trace; renders identically to ``trace``

    Raises:
        DivergenceAt: a recorded choice is unavailable or leads elsewhere
    """
    sim = Simulation(cfg, _script_of(trace), _Recorded(trace),
                     ChaosPolicy(trace.policy), header=trace)
    while sim.advance():
        pass
    produced = sim.trace
    for position, (expected, actual) in enumerate(zip(trace.events, produced.events)):
        if expected != actual:
            raise DivergenceAt(_step_of(trace.events, position),
                               f"recorded '{expected.render()}', got '{actual.render()}'")
    if len(trace.events) != len(produced.events):
        raise DivergenceAt(_step_of(trace.events, len(trace.events) - 1),
                           f"{len(produced.events)} event(s) where {len(trace.events)} were recorded")
    if produced.render() != trace.render():
        raise DivergenceAt(produced.deliveries()[-1].step if produced.deliveries() else 0,
                           "footer differs")
    return produced
