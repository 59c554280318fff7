"""
Shared fixtures: the bank corpus, manifests and hand-built states.
"""

from dataclasses import replace
from typing import Callable

import pytest

from src.cli.manifest import RunManifest
from src.core.state import ObjectState, make_pool
from src.core.values import ObjectId
from src.dsl.parser import parse
from src.semantics.initial import initial_states
from src.spec.ast import BehaviorDescription

from .helpers import ACC1, CORPUS, IDS, corpus_text


@pytest.fixture(scope="session")
def bank() -> BehaviorDescription:
    return parse(corpus_text("bank.iostd"), "bank.iostd")


@pytest.fixture(scope="session")
def bank_noexcl() -> BehaviorDescription:
    return parse(corpus_text("mutants/bank-noexcl.iostd"))


@pytest.fixture(scope="session")
def bank_latedebit() -> BehaviorDescription:
    return parse(corpus_text("mutants/bank-latedebit.iostd"))


@pytest.fixture
def manifest() -> Callable[[str], RunManifest]:
    """Load a corpus manifest by file name."""
    def load(name: str) -> RunManifest:
        return RunManifest.load(CORPUS / name)
    return load


@pytest.fixture
def account(bank) -> Callable[..., ObjectState]:
    """Open idle account state of ``acc1`` (or ``obj``) with the given attributes bound."""
    def build(obj: ObjectId = ACC1, **attrs) -> ObjectState:
        state = initial_states(bank, obj, make_pool(obj, 4), IDS)[0]
        at = state.at.update({"open": True, "busy": False, "paid": 0, **attrs})
        return replace(state, at=at)
    return build
