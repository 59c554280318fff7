"""
Global configurations: object states plus order-preserving channels.

Channels are per (sender, receiver) pair. Messages addressed to the
environment stay queued on their channel; the environment never
consumes them, so a configuration is quiescent when every channel to a
configured object is empty.
"""

from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from src.config import ENVIRONMENT_ID
from src.core.errors import UnknownReceiver
from src.core.messages import Message
from src.core.printing import format_message, format_state
from src.core.state import ObjectState
from src.core.values import ObjectId
from src.spec.ast import BehaviorDescription

Channel = Tuple[ObjectId, ObjectId]


def channel_label(channel: Channel) -> str:
    return f"{channel[0]}->{channel[1]}"


@dataclass(frozen=True)
class Configuration:
    """
    Snapshot of a multi-object system.

    Attributes:
        objects: (id, state) pairs sorted by id
        channels: Nonempty FIFO queues keyed and sorted by (sender, receiver)
        behaviors: (id, behavior) pairs; not part of equality
        env: Identity of the environment
    """
    objects: Tuple[Tuple[ObjectId, ObjectState], ...]
    channels: Tuple[Tuple[Channel, Tuple[Message, ...]], ...] = ()
    behaviors: Tuple[Tuple[ObjectId, BehaviorDescription], ...] = field(
        default=(), compare=False, hash=False, repr=False)
    env: ObjectId = ObjectId(ENVIRONMENT_ID)

    @classmethod
    def create(cls, entries: Iterable[Tuple[ObjectId, BehaviorDescription, ObjectState]],
               env: ObjectId = ObjectId(ENVIRONMENT_ID)) -> "Configuration":
        """
        Build a configuration with empty channels.

        Args:
            entries: (id, behavior, initial state) per object
            env: Environment identity
        """
        rows = sorted(entries, key=lambda row: row[0])
        return cls(tuple((obj, state) for obj, _, state in rows), (),
                   tuple((obj, beh) for obj, beh, _ in rows), env)

    def ids(self) -> Tuple[ObjectId, ...]:
        """Object ids plus the environment, sorted."""
        return tuple(sorted({obj for obj, _ in self.objects} | {self.env}))

    def object_ids(self) -> Tuple[ObjectId, ...]:
        return tuple(obj for obj, _ in self.objects)

    def state(self, obj: ObjectId) -> ObjectState:
        for owner, state in self.objects:
            if owner == obj:
                return state
        raise UnknownReceiver(f"no object {obj}")

    def behavior(self, obj: ObjectId) -> BehaviorDescription:
        for owner, beh in self.behaviors:
            if owner == obj:
                return beh
        raise UnknownReceiver(f"no object {obj}")

    def with_state(self, obj: ObjectId, state: ObjectState) -> "Configuration":
        objects = tuple((owner, state if owner == obj else old) for owner, old in self.objects)
        return replace(self, objects=objects)

    def queue(self, channel: Channel) -> Tuple[Message, ...]:
        for key, messages in self.channels:
            if key == channel:
                return messages
        return ()

    def _with_queue(self, channel: Channel, messages: Tuple[Message, ...]) -> "Configuration":
        queues: Dict[Channel, Tuple[Message, ...]] = dict(self.channels)
        if messages:
            queues[channel] = messages
        else:
            queues.pop(channel, None)
        return replace(self, channels=tuple(sorted(queues.items(), key=lambda item: item[0])))

    def enqueue(self, message: Message) -> "Configuration":
        """
        Append a message to the tail of its channel.

        Raises:
            UnknownReceiver: the receiver is neither an object nor the environment
        """
        if message.rec != self.env and message.rec not in self.object_ids():
            raise UnknownReceiver(f"{format_message(message)}: no object {message.rec}")
        return self._with_queue(message.channel, self.queue(message.channel) + (message,))

    def enqueue_all(self, messages: Sequence[Message]) -> "Configuration":
        cfg = self
        for message in messages:
            cfg = cfg.enqueue(message)
        return cfg

    def deliverable(self) -> List[Channel]:
        """Nonempty channels to configured objects, in canonical order."""
        return [key for key, _ in self.channels if key[1] != self.env]

    def head(self, channel: Channel) -> Message:
        return self.queue(channel)[0]

    def dequeue(self, channel: Channel) -> Tuple[Message, "Configuration"]:
        messages = self.queue(channel)
        return messages[0], self._with_queue(channel, messages[1:])

    def quiescent(self) -> bool:
        return not self.deliverable()

    def failed(self) -> List[ObjectId]:
        """Objects in the Error state."""
        return [obj for obj, state in self.objects if state.error is not None]

    def digest(self) -> str:
        """Canonical print; equal configurations print equally."""
        lines = [f"{obj} | {format_state(state)}" for obj, state in self.objects]
        for channel, messages in self.channels:
            queued = " ; ".join(format_message(m) for m in messages)
            lines.append(f"{channel_label(channel)} | {queued}")
        return "\n".join(lines)

    def find(self, name: str) -> Optional[ObjectId]:
        for obj, _ in self.objects:
            if obj.name == name:
                return obj
        return None
