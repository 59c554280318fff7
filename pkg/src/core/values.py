"""
Kernel value types: object identities, thread tags, values and
variable assignments.

All types here are immutable and hashable so they can be shared
freely between configurations, successor sets and traces.
"""

from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, Mapping, Optional, Tuple, Union

from .errors import UnboundVariable


@dataclass(frozen=True, order=True)
class ObjectId:
    """
    Opaque, totally ordered identity of an object.

    Attributes:
        name: Printable identifier (e.g. ``acc1`` or ``env``)
    """
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, order=True)
class Tag:
    """
    Thread identifier drawn from the pool of its owning object.

    Pools of different objects are disjoint because the owner is part
    of the tag.

    Attributes:
        owner: Name of the object whose pool the tag comes from
        index: Position of the tag in that pool
    """
    owner: str
    index: int

    def __str__(self) -> str:
        return f"{self.owner}:{self.index}"


@dataclass(frozen=True, order=True)
class EnumConst:
    """
    Constant of a declared enumeration.

    Attributes:
        name: Constant name as written in the behavior file
    """
    name: str

    def __str__(self) -> str:
        return self.name


Value = Union[bool, int, ObjectId, EnumConst]


def value_kind(value: Value) -> str:
    """
    Name the kind of a value (bool is checked before int).

    Args:
        value: Any kernel value

    Returns:
        str: One of ``bool``, ``int``, ``id``, ``enum``
    """
    if isinstance(value, bool):
        return "bool"
    if isinstance(value, int):
        return "int"
    if isinstance(value, ObjectId):
        return "id"
    if isinstance(value, EnumConst):
        return "enum"
    raise TypeError(f"not a kernel value: {value!r}")


def same_value(left: Value, right: Value) -> bool:
    """Equality that never confuses ``true`` with ``1``."""
    return value_kind(left) == value_kind(right) and left == right


class VarAssignment:
    """
    Immutable partial mapping from variable names to values.

    The assignment keeps the order its entries were given in. Attribute
    and environment assignments are built sorted (see :meth:`of`);
    message arguments keep their send order because patterns bind them
    by position.
    """

    __slots__ = ("_items", "_index", "_hash")

    def __init__(self, items: Iterable[Tuple[str, Value]] = ()):
        pairs = tuple(items)
        index: Dict[str, Value] = {}
        for name, value in pairs:
            if name in index:
                raise ValueError(f"duplicate variable '{name}' in assignment")
            index[name] = value
        self._items = pairs
        self._index = index
        self._hash = hash(tuple((name, value_kind(value), value) for name, value in pairs))

    @classmethod
    def of(cls, mapping: Optional[Mapping[str, Value]] = None, **values: Value) -> "VarAssignment":
        """
        Build an assignment with entries sorted by name.

        Args:
            mapping: Entries to include
            **values: More entries given as keywords

        Returns:
            VarAssignment: Canonically ordered assignment
        """
        merged: Dict[str, Value] = dict(mapping or {})
        merged.update(values)
        return cls(sorted(merged.items()))

    @property
    def items(self) -> Tuple[Tuple[str, Value], ...]:
        """Entries in stored order."""
        return self._items

    def names(self) -> Tuple[str, ...]:
        """Variable names in stored order."""
        return tuple(name for name, _ in self._items)

    def values(self) -> Tuple[Value, ...]:
        """Values in stored order."""
        return tuple(value for _, value in self._items)

    def lookup(self, name: str) -> Value:
        """
        Look up a variable.

        Args:
            name: Variable name

        Returns:
            The bound value

        Raises:
            UnboundVariable: if the name is not bound
        """
        try:
            return self._index[name]
        except KeyError:
            raise UnboundVariable(name) from None

    def get(self, name: str, default: Optional[Value] = None) -> Optional[Value]:
        return self._index.get(name, default)

    def bind(self, name: str, value: Value) -> "VarAssignment":
        """Return a copy with ``name`` (re)bound, keeping canonical order."""
        merged = dict(self._index)
        merged[name] = value
        return VarAssignment.of(merged)

    def update(self, other: Union["VarAssignment", Mapping[str, Value]]) -> "VarAssignment":
        """Return a sorted copy where entries of ``other`` win."""
        merged = dict(self._index)
        merged.update(other.as_dict() if isinstance(other, VarAssignment) else other)
        return VarAssignment.of(merged)

    def restrict(self, names: Iterable[str]) -> "VarAssignment":
        """Return the sorted sub-assignment on ``names`` that are bound."""
        wanted = set(names)
        return VarAssignment.of({n: v for n, v in self._index.items() if n in wanted})

    def as_dict(self) -> Dict[str, Value]:
        return dict(self._index)

    def __contains__(self, name: object) -> bool:
        return name in self._index

    def __iter__(self) -> Iterator[str]:
        return iter(self.names())

    def __len__(self) -> int:
        return len(self._items)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, VarAssignment):
            return NotImplemented
        if len(self._items) != len(other._items):
            return False
        return all(
            ln == rn and same_value(lv, rv)
            for (ln, lv), (rn, rv) in zip(self._items, other._items)
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        inner = ", ".join(f"{name}={value!r}" for name, value in self._items)
        return f"VarAssignment({inner})"


EMPTY = VarAssignment()
