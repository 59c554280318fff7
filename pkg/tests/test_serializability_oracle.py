"""
Serializability findings against a recursive reference model.

The model is a hand-written transition system for the cell corpus:
attribute values, suspended moves and per-pair FIFO channels, explored
by plain recursion without the simulator. An outcome the interleavings
reach but no one-at-a-time order reaches must be exactly what the
checker reports.
"""

import functools
import itertools
from dataclasses import replace
from typing import FrozenSet, Set, Tuple

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.check.serializability import serializability_check
from src.core.messages import MessageKind
from src.core.state import make_pool
from src.core.values import ObjectId
from src.dsl.parser import parse
from src.semantics.initial import initial_states
from src.sim.configuration import Configuration
from src.sim.trace import StateDigest
from src.spec.validate import validate

from .helpers import ENV, corpus_text, env_tag, message

C1, C2 = ObjectId("c1"), ObjectId("c2")
CELLS = ("c1", "c2")

# v, busy, failed, tags of suspended moves
Cell = Tuple[int, bool, bool, FrozenSet[int]]
# service, tag index, argument, sender
Sent = Tuple[str, int, object, str]
Channels = Tuple[Tuple[Tuple[str, str], Tuple[Sent, ...]], ...]
Outcome = Tuple[Tuple[str, int, bool, bool], ...]


@pytest.fixture(scope="module")
def cell():
    return parse(corpus_text("cell.iostd"), "cell.iostd")


def receive(me: str, state: Cell, sent: Sent):
    """Successor of one cell and the messages it sends to other cells."""
    v, busy, failed, waiting = state
    service, tag, arg, sender = sent
    if failed:
        return state, []
    if service == "ret":
        assert tag in waiting and busy
        return (0, False, False, waiting - {tag}), []
    if service == "set":
        answer = [] if sender == "env" else [((me, sender), ("ret", tag, True, me))]
        return (arg, busy, False, waiting), answer
    if busy:
        return (v, busy, True, waiting), []
    if arg == me:
        return state, []
    return (v, True, False, waiting | {tag}), [((me, arg), ("set", tag, v, me))]


def _send(queues: dict, outputs) -> Channels:
    for channel, sent in outputs:
        queues[channel] = queues.get(channel, ()) + (sent,)
    return tuple(sorted((channel, queue) for channel, queue in queues.items() if queue))


@functools.lru_cache(maxsize=None)
def terminals(cells: Tuple[Tuple[str, Cell], ...], channels: Channels) -> FrozenSet:
    """Every quiescent cell tuple reachable by delivering channel heads in any order."""
    if not channels:
        return frozenset({cells})
    found: Set = set()
    for position, ((snd, rec), queue) in enumerate(channels):
        queues = dict(channels)
        queues[(snd, rec)] = queue[1:]
        states = dict(cells)
        states[rec], outputs = receive(rec, states[rec], queue[0])
        found |= terminals(tuple(sorted(states.items())), _send(queues, outputs))
    return frozenset(found)


def outcome_of(cells) -> Outcome:
    return tuple((name, v, busy, failed) for name, (v, busy, failed, _) in cells)


def model_findings(values: Tuple[int, int], injections) -> Set[Outcome]:
    start = tuple((name, (value, False, False, frozenset())) for name, value in zip(CELLS, values))
    sent = [(target, (service, index, arg, "env"))
            for index, (service, target, arg, _) in enumerate(injections)]
    interleaved = {outcome_of(end) for end in terminals(start, _send({}, [
        (("env", target), item) for target, item in sent]))}
    serial: Set[Outcome] = set()
    for order in itertools.permutations(sent):
        frontier = {start}
        for target, item in order:
            frontier = {end for cells in frontier
                        for end in terminals(cells, _send({}, [(("env", target), item)]))}
        serial |= {outcome_of(end) for end in frontier}
    return interleaved - serial


def configuration(cell, values: Tuple[int, int]) -> Configuration:
    ids = (C1, C2, ENV)
    entries = []
    for obj, value in zip((C1, C2), values):
        state = initial_states(cell, obj, make_pool(obj, 2), ids)[0]
        entries.append((obj, cell, replace(state, at=state.at.update({"v": value}))))
    return Configuration.create(entries)


def engine_findings(cell, values: Tuple[int, int], injections) -> Set[Outcome]:
    messages = []
    for index, (service, target, arg, kind) in enumerate(injections):
        args = {"dst": ObjectId(arg)} if service == "move" else {"x": arg}
        messages.append(message(ENV, ObjectId(target), env_tag(index), service, kind, **args))
    found = set()
    for finding in serializability_check(configuration(cell, values), messages):
        final = {e.obj.name: e.state for e in finding.trace.events if isinstance(e, StateDigest)}
        found.add(tuple((name, final[name].at.lookup("v"), final[name].at.lookup("busy"),
                         final[name].error is not None) for name in CELLS))
    return found


def test_cell_is_valid(cell):
    assert validate(cell).ok


def test_crossed_moves_clear_both_cells(cell):
    injections = [("move", "c1", "c2", MessageKind.CONC), ("move", "c2", "c1", MessageKind.CONC)]
    expected = {(("c1", 0, False, False), ("c2", 0, False, False))}
    assert model_findings((2, 1), injections) == expected
    assert engine_findings(cell, (2, 1), injections) == expected


def test_second_move_while_waiting_fails_the_cell(cell):
    injections = [("move", "c1", "c2", MessageKind.SEQU), ("move", "c1", "c2", MessageKind.SEQU)]
    found = engine_findings(cell, (3, 0), injections)
    assert found == model_findings((3, 0), injections)
    assert (("c1", 3, True, True), ("c2", 3, False, False)) in found


def test_independent_sets_serialize(cell):
    injections = [("set", "c1", 1, MessageKind.CONC), ("set", "c2", 2, MessageKind.SEQU)]
    assert model_findings((0, 0), injections) == set()
    assert engine_findings(cell, (0, 0), injections) == set()


kinds = st.sampled_from([MessageKind.SEQU, MessageKind.CONC])
injection = st.one_of(
    st.tuples(st.just("move"), st.sampled_from(CELLS), st.sampled_from(CELLS), kinds),
    st.tuples(st.just("set"), st.sampled_from(CELLS), st.integers(0, 3), kinds),
)


@settings(max_examples=80, deadline=None)
@given(values=st.tuples(st.integers(0, 3), st.integers(0, 3)),
       injections=st.lists(injection, min_size=1, max_size=2))
def test_findings_match_reference_model(cell, values, injections):
    assert engine_findings(cell, values, injections) == model_findings(values, injections)
