"""
Bounded breadth-first exploration of every interleaving.

Each configuration is expanded by every (channel, step result) choice a
scheduler could make. Configurations are deduplicated by their digest
and remember the choice that first reached them, so the witness for a
property violation is a shortest path and can be re-run as an ordinary
trace.
"""

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Deque, Dict, List, Optional, Sequence, Tuple

from src.core.errors import BudgetExceeded, IOStarError
from src.core.legality import check_step_legal
from src.core.values import VarAssignment
from src.semantics.step import ChaosPolicy, step
from src.spec.ast import Expr
from src.spec.evaluate import eval_pred, pending_key

from .configuration import Configuration
from .runner import Script, check_injections, run
from .scheduler import FixedChoices
from .trace import Trace

logger = logging.getLogger(__name__)

REPORT_HEADER = "# iostar-exploration v1"
ABORT = "abort"
LEGALITY = "legality"


@dataclass(frozen=True)
class Invariant:
    """
    A named predicate over configurations.

    Attributes:
        name: Name used in reports
        expr: Predicate over ``obj.attr``, ``obj.error`` and ``pending(obj, State)``
        terminal: Only checked on terminal (quiescent) configurations
    """
    name: str
    expr: Expr
    terminal: bool = False


def invariant_env(cfg: Configuration) -> VarAssignment:
    """
    Variables an invariant may mention.

    ``acc1.bal`` is attribute ``bal`` of ``acc1``; ``acc1.error`` tells
    whether ``acc1`` is in the Error state; ``pending(acc1, Wait)``
    counts the invocations of ``acc1`` stacked at diagram state ``Wait``.
    """
    entries = {}
    for obj, state in cfg.objects:
        for name, value in state.at.items:
            entries[f"{obj}.{name}"] = value
        entries[f"{obj}.error"] = state.error is not None
        counts = {s.id: 0 for service in cfg.behavior(obj).services for s in service.states}
        for inv in state.invocations():
            counts[inv.pc] = counts.get(inv.pc, 0) + 1
        for state_id, count in counts.items():
            entries[pending_key(obj.name, state_id)] = count
    return VarAssignment.of(entries)


@dataclass
class InvariantViolation:
    """
    Shortest witness of a violated property.

    Attributes:
        invariant: Invariant name, ``abort`` or ``legality``
        digest: Digest of the offending configuration
        trace: Trace that reaches it from the start
        detail: Error text for aborts and legality violations
    """
    invariant: str
    digest: str
    trace: Trace
    detail: str = ""


@dataclass
class ExplorationReport:
    """
    Result of an exploration.

    Attributes:
        configurations: Distinct configurations reached
        transitions: (configuration, choice) pairs expanded
        terminals: Digests of quiescent configurations, in discovery order
        errors: Configurations with at least one object in the Error state
        violations: One shortest witness per violated property
        truncated: True when the budget cut the search short
        reachable: Every reached digest
        terminal_configurations: Terminal digest to configuration
    """
    configurations: int = 0
    transitions: int = 0
    terminals: List[str] = field(default_factory=list)
    errors: int = 0
    violations: List[InvariantViolation] = field(default_factory=list)
    truncated: bool = False
    reachable: Dict[str, None] = field(default_factory=dict, repr=False)
    terminal_configurations: Dict[str, Configuration] = field(default_factory=dict, repr=False)
    explorer: Any = field(default=None, repr=False, compare=False)

    def witness(self, digest: str) -> Trace:
        """Shortest trace from the start to the configuration with ``digest``."""
        return self.explorer.witness(self.explorer.choices(digest))

    def violated(self) -> List[str]:
        return [v.invariant for v in self.violations]

    def render(self) -> str:
        lines = [REPORT_HEADER,
                 f"configurations {self.configurations}",
                 f"transitions {self.transitions}",
                 f"terminals {len(self.terminals)}",
                 f"errors {self.errors}",
                 f"violations {len(self.violations)}"]
        if self.truncated:
            lines.append("# truncated")
        for violation in self.violations:
            steps = len(violation.trace.deliveries())
            line = f"violation {violation.invariant} after {steps} step(s)"
            if violation.detail:
                line += f": {violation.detail}"
            lines.append(line)
            lines.extend("  " + row for row in violation.trace.render().splitlines())
        return "\n".join(lines) + "\n"


Parent = Optional[Tuple[str, int, int]]


class _Explorer:
    def __init__(self, cfg: Configuration, script: Script, bound: int, policy: ChaosPolicy,
                 invariants: Sequence[Invariant]):
        self.origin = cfg
        self.script = script
        self.bound = bound
        self.policy = policy
        self.invariants = list(invariants)
        self.report = ExplorationReport(explorer=self)
        self.parents: Dict[str, Parent] = {}
        self.pending: Dict[str, Configuration] = {}
        self.queue: Deque[str] = deque()
        self.reported: Dict[str, None] = {}

    def choices(self, digest: str) -> List[int]:
        path: List[int] = []
        parent = self.parents[digest]
        while parent is not None:
            source, channel, result = parent
            path[:0] = [channel, result]
            parent = self.parents[source]
        return path

    def witness(self, choices: List[int]) -> Trace:
        script = Script.of(self.script.messages(), len(choices) // 2 + len(choices) % 2)
        return run(self.origin, script, FixedChoices(choices), self.policy)

    def violate(self, name: str, digest: str, extra: Sequence[int] = (), detail: str = "") -> None:
        if name in self.reported:
            return
        self.reported[name] = None
        trace = self.witness(self.choices(digest) + list(extra))
        self.report.violations.append(InvariantViolation(name, digest, trace, detail))
        logger.warning("violation of %s found after %d step(s)", name, len(trace.deliveries()))

    def check(self, cfg: Configuration, digest: str, terminal: bool) -> None:
        watched = [inv for inv in self.invariants if inv.terminal == terminal]
        if not watched:
            return
        env = invariant_env(cfg)
        for invariant in watched:
            if not eval_pred(invariant.expr, env):
                self.violate(invariant.name, digest)

    def admit(self, cfg: Configuration, parent: Parent) -> None:
        digest = cfg.digest()
        if digest in self.parents:
            return
        if len(self.parents) >= self.bound:
            self.report.truncated = True
            self.report.configurations = len(self.parents)
            raise BudgetExceeded(f"exploration exceeds {self.bound} configurations", self.report)
        self.parents[digest] = parent
        self.report.reachable[digest] = None
        self.pending[digest] = cfg
        self.queue.append(digest)
        if cfg.failed():
            self.report.errors += 1
        self.check(cfg, digest, terminal=False)

    def expand(self, digest: str) -> None:
        cfg = self.pending.pop(digest)
        channels = cfg.deliverable()
        if not channels:
            self.report.terminals.append(digest)
            self.report.terminal_configurations[digest] = cfg
            self.check(cfg, digest, terminal=True)
            return
        ids = cfg.ids()
        for position, channel in enumerate(channels):
            message = cfg.head(channel)
            receiver = message.rec
            source = cfg.state(receiver)
            try:
                results = step(cfg.behavior(receiver), source, message, self.policy, ids)
            except IOStarError as e:
                self.violate(ABORT, digest, [position], f"{type(e).__name__}: {e}")
                continue
            for index, result in enumerate(results):
                report = check_step_legal(source, message, result)
                if not report.legal:
                    self.violate(LEGALITY, digest, [position, index],
                                 "; ".join(str(v) for v in report.violations))
                    continue
                _, successor = cfg.dequeue(channel)
                successor = successor.with_state(receiver, result.successor)
                try:
                    successor = successor.enqueue_all(result.out)
                except IOStarError as e:
                    self.violate(ABORT, digest, [position, index], f"{type(e).__name__}: {e}")
                    continue
                self.report.transitions += 1
                self.admit(successor, (digest, position, index))

    def explore(self) -> ExplorationReport:
        self.admit(self.origin.enqueue_all(self.script.messages()), None)
        while self.queue:
            self.expand(self.queue.popleft())
        self.report.configurations = len(self.parents)
        return self.report


def explore(cfg: Configuration, script: Script, bound: int,
            policy: ChaosPolicy = ChaosPolicy.REJECT,
            invariants: Sequence[Invariant] = ()) -> ExplorationReport:
    """
    Explore every interleaving breadth-first.

    All script injections are sent before the first delivery; the
    script's step limit is not used.

    Args:
        cfg: Starting configuration (behaviors validated)
        script: Environment injections
        bound: Maximum number of distinct configurations
        policy: Chaos policy for unmatched inputs
        invariants: Properties to check on every (or every terminal) configuration

    Returns:
        ExplorationReport: Counts, terminals and shortest witnesses

    Raises:
        BudgetExceeded: with the partial report
        IllegalInput: an injection does not come from the environment
    """
    check_injections(cfg, script)
    report = _Explorer(cfg, script, bound, policy, invariants).explore()
    logger.info("explored %d configuration(s), %d terminal(s), %d violation(s)",
                report.configurations, len(report.terminals), len(report.violations))
    return report
