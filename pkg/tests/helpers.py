"""
Helpers shared by the test modules.
"""

from pathlib import Path

from src.core.messages import Message, MessageKind
from src.core.values import ObjectId, Tag, VarAssignment

CORPUS = Path(__file__).resolve().parent.parent / "corpus"

ENV = ObjectId("env")
ACC1 = ObjectId("acc1")
ACC2 = ObjectId("acc2")
IDS = (ACC1, ACC2, ENV)


def corpus_text(name: str) -> str:
    return (CORPUS / name).read_text(encoding="utf-8")


def message(snd: ObjectId, rec: ObjectId, tag: Tag, name: str,
            kind: MessageKind = MessageKind.SEQU, **args) -> Message:
    """Message with arguments in keyword order."""
    return Message(snd, rec, tag, name, VarAssignment(list(args.items())), kind)


def env_tag(index: int = 0) -> Tag:
    return Tag("env", index)
