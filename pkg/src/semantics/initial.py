"""
Initial machine states of a behavior.
"""

from typing import FrozenSet, List, Optional, Sequence

from src.core.errors import EmptyInitialSet
from src.core.state import ObjectState
from src.core.values import ObjectId, Tag
from src.spec.ast import BehaviorDescription
from src.spec.enumerate import attribute_space
from src.spec.evaluate import eval_pred


def initial_states(beh: BehaviorDescription, obj_id: ObjectId, pool: FrozenSet[Tag],
                   ids: Optional[Sequence[ObjectId]] = None) -> List[ObjectState]:
    """
    Every state satisfying init, with empty stacks and a full pool.

    Args:
        beh: Behavior of the object
        obj_id: Identity of the object (its ``self``)
        pool: The object's tag pool
        ids: Object identities ``id`` attributes range over

    Returns:
        States in canonical attribute order

    Raises:
        EmptyInitialSet: if init is unsatisfiable
    """
    ids = tuple(ids) if ids else (obj_id,)
    states = [ObjectState(at, (), frozenset(pool))
              for at in attribute_space(beh, obj_id, ids) if eval_pred(beh.init, at)]
    if not states:
        raise EmptyInitialSet(f"init of {beh.name} admits no state for {obj_id}")
    return states
