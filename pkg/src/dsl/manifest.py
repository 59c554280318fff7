"""
Syntax tree of run manifests.

A manifest names the behavior files to load, the objects to create,
the environment injections and the run parameters::

    manifest {
      load "bank.iostd";
      object acc1: Account pool 4 select { open and bal = 4 };
      inject conc acc1.transfer(a = 2, dst = @acc2) at 0;
      scheduler random; seed 7; policy reject; bound 20000; steps 500;
      invariant conserved: acc1.bal + acc2.bal = 8;
      terminal idle: pending(acc1, Wait) = 0;
    }
"""

from dataclasses import dataclass
from typing import Optional, Tuple

from src.config import DEFAULT_POOL_SIZE
from src.core.messages import MessageKind
from src.core.values import Value
from src.spec.ast import Expr, TRUE


@dataclass(frozen=True)
class ObjectDecl:
    """
    One object of the run.

    Attributes:
        name: Object id
        behavior: Behavior (class) name
        pool: Size of the object's tag pool
        select: Picks the initial attribute state among those satisfying init
    """
    name: str
    behavior: str
    pool: int = DEFAULT_POOL_SIZE
    select: Expr = TRUE


@dataclass(frozen=True)
class InjectDecl:
    """
    One message sent by the environment.

    Attributes:
        kind: Sequential call, concurrent call or return
        target: Receiving object
        service: Service name (``ret`` for returns)
        args: Named literal arguments in send order
        at_step: Delivery count after which the message is enqueued
    """
    kind: MessageKind
    target: str
    service: str
    args: Tuple[Tuple[str, Value], ...] = ()
    at_step: int = 0


@dataclass(frozen=True)
class InvariantDecl:
    """
    Named configuration predicate.

    ``terminal`` invariants are only checked on configurations without
    successors; the others on every reachable configuration.
    """
    name: str
    expr: Expr
    terminal: bool = False


@dataclass(frozen=True)
class ManifestSource:
    """Everything a manifest file states; unset run parameters are None."""
    loads: Tuple[str, ...] = ()
    objects: Tuple[ObjectDecl, ...] = ()
    injections: Tuple[InjectDecl, ...] = ()
    invariants: Tuple[InvariantDecl, ...] = ()
    scheduler: Optional[str] = None
    seed: Optional[int] = None
    policy: Optional[str] = None
    bound: Optional[int] = None
    steps: Optional[int] = None
