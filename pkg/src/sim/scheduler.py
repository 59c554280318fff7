"""
Schedulers resolve the nondeterminism of a run.

A run asks its scheduler two questions per delivery: which nonempty
channel delivers next, and which of the receiver's step results is
taken. Every question carries a running choice index and the printed
candidate list, so a scheduler is a pure function of those inputs.
"""

import random
from dataclasses import dataclass, field
from typing import List, Sequence


class Scheduler:
    """Base class; ``name`` is recorded in the trace header."""
    name = "scheduler"
    seed = None

    def choose(self, index: int, options: Sequence[str]) -> int:
        """
        Pick one candidate.

        Args:
            index: Running number of this choice within the run
            options: Printed candidates in canonical order (never empty)

        Returns:
            int: Position of the chosen candidate
        """
        raise NotImplementedError


@dataclass
class SeededRandom(Scheduler):
    """Uniform choice seeded by (seed, choice index, candidate list)."""
    seed: int = 0
    name = "random"

    def choose(self, index: int, options: Sequence[str]) -> int:
        if len(options) == 1:
            return 0
        rng = random.Random(f"{self.seed}/{index}/" + "\n".join(options))
        return rng.randrange(len(options))


@dataclass
class RoundRobin(Scheduler):
    """Rotates over the candidates with the choice index."""
    name = "roundrobin"

    def choose(self, index: int, options: Sequence[str]) -> int:
        return (index // 2) % len(options)


@dataclass
class Exhaustive(Scheduler):
    """Marker for breadth-first exploration of every choice; never used by run."""
    bound: int = 0
    name = "exhaustive"

    def choose(self, index: int, options: Sequence[str]) -> int:
        raise TypeError("the exhaustive scheduler only drives exploration")


@dataclass
class FixedChoices(Scheduler):
    """
    Replays a recorded list of choice positions.

    Used to rebuild witness traces for paths found by exploration.
    """
    choices: List[int] = field(default_factory=list)
    name = "fixed"

    def choose(self, index: int, options: Sequence[str]) -> int:
        return self.choices[index] if index < len(self.choices) else 0


def make_scheduler(name: str, seed: int = 0, bound: int = 0) -> Scheduler:
    """
    Build a scheduler by name.

    Raises:
        ValueError: for an unknown name
    """
    if name == SeededRandom.name:
        return SeededRandom(seed)
    if name == RoundRobin.name:
        return RoundRobin()
    if name == Exhaustive.name:
        return Exhaustive(bound)
    raise ValueError(f"unknown scheduler '{name}'")
