"""
Run manifests: loading, digests and the configuration they describe.
"""

import hashlib
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Set, Tuple

from src.config import DEFAULT_STATE_BOUND, DEFAULT_STEP_LIMIT, ENVIRONMENT_ID
from src.core.errors import EmptyInitialSet, IOStarError, ManifestError
from src.core.messages import Message
from src.core.state import ObjectState, make_pool
from src.core.values import ObjectId, VarAssignment
from src.dsl.manifest import ManifestSource, ObjectDecl
from src.dsl.parser import parse, parse_manifest, resolve_constants
from src.semantics.initial import initial_states
from src.semantics.step import ChaosPolicy
from src.sim.configuration import Configuration
from src.sim.explore import Invariant
from src.sim.runner import Injection, Script, env_tag
from src.sim.scheduler import Scheduler, make_scheduler
from src.spec.ast import BehaviorDescription
from src.spec.domains import EnumDomain
from src.spec.evaluate import eval_pred

logger = logging.getLogger(__name__)


def file_digest(data: bytes) -> str:
    return "sha256:" + hashlib.sha256(data).hexdigest()


def load_behavior(path: Path) -> Tuple[BehaviorDescription, str]:
    """
    Read and parse one behavior file.

    Returns:
        The behavior and the digest of the file contents

    Raises:
        OSError: the file cannot be read
        DslSyntaxError: the file does not parse
    """
    data = path.read_bytes()
    return parse(data.decode("utf-8"), str(path)), file_digest(data)


def enum_constants(beh: BehaviorDescription) -> Set[str]:
    """Enumeration constants of the attribute domains that are not attribute names."""
    constants = {name for decl in beh.attributes if isinstance(decl.domain, EnumDomain)
                 for name in decl.domain.constants}
    return constants - set(beh.attribute_names())


@dataclass
class RunManifest:
    """
    A fully determined run.

    Attributes:
        path: Manifest file
        source: Parsed manifest contents
        behaviors: Loaded behaviors by name
        files: (file name, digest) of the manifest and every loaded file
        scheduler: Scheduler name
        seed: Seed of the random scheduler
        policy: Chaos policy
        bound: Configuration budget for exploration
        steps: Delivery budget for runs
    """
    path: Path
    source: ManifestSource
    behaviors: Dict[str, BehaviorDescription] = field(default_factory=dict)
    files: List[Tuple[str, str]] = field(default_factory=list)
    scheduler: str = "random"
    seed: int = 0
    policy: ChaosPolicy = ChaosPolicy.REJECT
    bound: int = DEFAULT_STATE_BOUND
    steps: int = DEFAULT_STEP_LIMIT

    @classmethod
    def load(cls, path: Path) -> "RunManifest":
        """
        Read a manifest and every behavior file it loads.

        Load paths are relative to the manifest's directory.

        Raises:
            OSError: a file cannot be read
            DslSyntaxError: a file does not parse
            ManifestError: two loaded behaviors share a name
        """
        data = path.read_bytes()
        source = parse_manifest(data.decode("utf-8"), str(path))
        manifest = cls(path, source, files=[(path.name, file_digest(data))])
        for name in source.loads:
            beh, digest = load_behavior(path.parent / name)
            if beh.name in manifest.behaviors:
                raise ManifestError(f"{path}: behavior {beh.name} loaded twice")
            manifest.behaviors[beh.name] = beh
            manifest.files.append((name, digest))
        manifest.scheduler = source.scheduler or manifest.scheduler
        manifest.seed = source.seed if source.seed is not None else manifest.seed
        manifest.policy = ChaosPolicy(source.policy) if source.policy else manifest.policy
        manifest.bound = source.bound if source.bound is not None else manifest.bound
        manifest.steps = source.steps if source.steps is not None else manifest.steps
        logger.info("manifest %s: %d behavior(s), %d object(s), %d injection(s)",
                    path, len(manifest.behaviors), len(source.objects), len(source.injections))
        return manifest

    def override(self, scheduler: Optional[str] = None, seed: Optional[int] = None,
                 policy: Optional[str] = None, bound: Optional[int] = None,
                 steps: Optional[int] = None) -> "RunManifest":
        """Copy with the given command-line values replacing the manifest's."""
        changes = {}
        if scheduler is not None:
            changes["scheduler"] = scheduler
        if seed is not None:
            changes["seed"] = seed
        if policy is not None:
            changes["policy"] = ChaosPolicy(policy)
        if bound is not None:
            changes["bound"] = bound
        if steps is not None:
            changes["steps"] = steps
        return replace(self, **changes)

    def meta(self) -> List[Tuple[str, str]]:
        """Trace header entries: file digests and budgets."""
        rows = [("manifest", f"{self.files[0][0]} {self.files[0][1]}")]
        rows.extend(("load", f"{name} {digest}") for name, digest in self.files[1:])
        rows.append(("steps", str(self.steps)))
        return rows

    def ids(self) -> Tuple[ObjectId, ...]:
        names = {ObjectId(decl.name) for decl in self.source.objects}
        return tuple(sorted(names | {ObjectId(ENVIRONMENT_ID)}))

    def behavior_of(self, decl: ObjectDecl) -> BehaviorDescription:
        beh = self.behaviors.get(decl.behavior)
        if beh is None:
            raise ManifestError(f"object {decl.name}: unknown behavior {decl.behavior}")
        return beh

    def _initial_state(self, decl: ObjectDecl, beh: BehaviorDescription) -> ObjectState:
        obj = ObjectId(decl.name)
        try:
            states = initial_states(beh, obj, make_pool(obj, decl.pool), self.ids())
        except EmptyInitialSet as e:
            raise ManifestError(f"object {decl.name}: {e}") from None
        select = resolve_constants(decl.select, enum_constants(beh))
        try:
            chosen = next((s for s in states if eval_pred(select, s.at)), None)
        except IOStarError as e:
            raise ManifestError(f"object {decl.name}: select: {e}") from None
        if chosen is None:
            raise ManifestError(f"object {decl.name}: no initial state satisfies select")
        return chosen

    def configuration(self) -> Configuration:
        """
        Build the starting configuration.

        Each object starts in the first initial state (canonical order)
        that satisfies its ``select`` predicate.

        Raises:
            ManifestError: unknown behavior, duplicate object or no selectable state
        """
        seen: Set[str] = set()
        entries = []
        for decl in self.source.objects:
            if decl.name in seen or decl.name == ENVIRONMENT_ID:
                raise ManifestError(f"object {decl.name} declared twice or reserved")
            seen.add(decl.name)
            beh = self.behavior_of(decl)
            entries.append((ObjectId(decl.name), beh, self._initial_state(decl, beh)))
        return Configuration.create(entries, ObjectId(ENVIRONMENT_ID))

    def messages(self) -> List[Message]:
        """Injected messages, each on its own environment tag."""
        env = ObjectId(ENVIRONMENT_ID)
        return [Message(env, ObjectId(decl.target), env_tag(env, index), decl.service,
                        VarAssignment(decl.args), decl.kind)
                for index, decl in enumerate(self.source.injections)]

    def script(self) -> Script:
        injections = tuple(Injection(message, decl.at_step)
                           for message, decl in zip(self.messages(), self.source.injections))
        return Script(injections, self.steps)

    def invariants(self) -> List[Invariant]:
        return [Invariant(decl.name, decl.expr, decl.terminal) for decl in self.source.invariants]

    def make_scheduler(self) -> Scheduler:
        return make_scheduler(self.scheduler, self.seed, self.bound)
