"""
Messages exchanged between objects.

A message is the tuple (sender, receiver, tag, name, arguments) plus an
explicit kind: sequential call, concurrent call or return.
"""

from dataclasses import dataclass
from enum import Enum

from .values import ObjectId, Tag, VarAssignment, EMPTY

RET = "ret"


class MessageKind(Enum):
    """Kind of a message; exactly one per message."""
    SEQU = "seq"
    CONC = "conc"
    RET = "ret"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Message:
    """
    A tagged message.

    Attributes:
        snd: Sender identity
        rec: Receiver identity
        tt: Thread tag the message belongs to
        mn: Service name, or ``ret`` for return messages
        ar: Arguments in send order (return values ride here)
        kind: Sequential call, concurrent call or return
    """
    snd: ObjectId
    rec: ObjectId
    tt: Tag
    mn: str
    ar: VarAssignment = EMPTY
    kind: MessageKind = MessageKind.SEQU

    def __post_init__(self) -> None:
        if (self.kind is MessageKind.RET) != (self.mn == RET):
            raise ValueError(f"message '{self.mn}' cannot have kind {self.kind}")

    @property
    def channel(self):
        """The (sender, receiver) pair whose FIFO carries this message."""
        return self.snd, self.rec
