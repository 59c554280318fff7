"""
Static well-formedness checks for object behavior descriptions.

Every check is decided by exhaustive enumeration over the declared
finite domains, so each satisfiability finding comes with a concrete
witness assignment. Checks:

    names        declarations resolve, patterns fit their service
    shape        only the last output template may be non-concurrent
    init         the init predicate is satisfiable
    labels       every state predicate is satisfiable; the predicates of
                 two states of one service exclude each other
    post         whenever label and precondition hold, some successor
                 satisfies the postcondition and the target label
    ret          sequentially callable services always end in exactly one
                 ret; concurrently callable ones never end in ret
    outputs      call arguments stay inside the parameter domains of the
                 called service, for services the behavior declares
"""

import logging
from typing import Dict, List, Optional, Sequence, Set, Tuple

from src.config import VALIDATION_IDS
from src.core.errors import IOStarError
from src.core.messages import MessageKind, RET
from src.core.printing import format_value
from src.core.state import SELF
from src.core.values import ObjectId, VarAssignment

from .ast import (BehaviorDescription, Callable, DiagramTransition, Expr, ServiceSTD,
                  free_vars, transition_location)
from .domains import Domain, IdDomain
from .enumerate import assignments, attribute_space
from .evaluate import eval_expr, eval_pred
from .frames import post_states, successor_env
from .report import Finding, Severity, ValidationReport, witness_of

logger = logging.getLogger(__name__)


def default_ids() -> Tuple[ObjectId, ...]:
    return tuple(ObjectId(name) for name in VALIDATION_IDS)


class _Collector:
    """Accumulates findings with their sort keys."""

    def __init__(self) -> None:
        self.findings: List[Finding] = []

    def add(self, severity: Severity, code: str, subject: str, message: str,
            key: Tuple, assignment: Optional[VarAssignment] = None) -> None:
        self.findings.append(Finding(
            severity, code, subject, message,
            witness=witness_of(assignment) if assignment is not None else None,
            assignment=assignment, key=key))

    def error(self, code: str, subject: str, message: str, key: Tuple,
              assignment: Optional[VarAssignment] = None) -> None:
        self.add(Severity.ERROR, code, subject, message, key, assignment)

    def warning(self, code: str, subject: str, message: str, key: Tuple,
                assignment: Optional[VarAssignment] = None) -> None:
        self.add(Severity.WARNING, code, subject, message, key, assignment)


def invocation_domains(service: ServiceSTD, transition: DiagramTransition,
                       waits: Set[str]) -> Tuple[Dict[str, Domain], VarAssignment]:
    """
    Variables a transition reads besides the attributes.

    Returns:
        (enumerated domains, fixed entries). A starting transition sees
        its arguments and sender enumerated and locals at their defaults;
        a resuming transition sees arguments and locals enumerated
    """
    domains: Dict[str, Domain] = {decl.name: decl.domain for decl in service.params}
    fixed: Dict[str, object] = {}
    if transition.pattern.is_return or transition.source in waits:
        domains.update({decl.name: decl.domain for decl in service.locals})
    else:
        fixed.update({decl.name: decl.domain.default() for decl in service.locals})
    if transition.pattern.sender:
        domains[transition.pattern.sender] = IdDomain()
    return domains, VarAssignment.of(fixed)


def validate(beh: BehaviorDescription, ids: Optional[Sequence[ObjectId]] = None) -> ValidationReport:
    """
    Check a behavior description.

    Args:
        beh: Behavior to check
        ids: Object identities ``id`` variables range over; the first
            plays ``self`` (defaults to ``VALIDATION_IDS``)

    Returns:
        ValidationReport: Findings ordered by service, location, code
    """
    ids = tuple(ids) if ids else default_ids()
    out = _Collector()
    names_ok = _check_behavior_names(beh, out)
    if names_ok:
        _check_init(beh, ids, out)

    for service in beh.services:
        if not _check_service_names(beh, service, out) or not names_ok:
            continue
        _check_shape(service, out)
        _check_ret_discipline(service, out)
        _check_labels(beh, service, ids, out)
        _check_posts(beh, service, ids, out)

    report = ValidationReport(out.findings)
    logger.info("validated %s: %d finding(s), %d error(s)",
                beh.name, len(report), len(report.errors()))
    return report


# ---------------------------------------------------------------------------
# names
# ---------------------------------------------------------------------------

def _duplicates(names: Sequence[str]) -> List[str]:
    seen: Set[str] = set()
    dups = []
    for name in names:
        if name in seen and name not in dups:
            dups.append(name)
        seen.add(name)
    return dups


def _scope_errors(expr: Expr, allowed: Set[str], primed_ok: Set[str]) -> List[str]:
    problems = []
    for name, is_primed in sorted(free_vars(expr)):
        if is_primed and name not in primed_ok:
            problems.append(f"{name}'")
        elif not is_primed and name not in allowed:
            problems.append(name)
    return problems


def _check_guard(out: _Collector, expr: Expr, allowed: Set[str], subject: str,
                 what: str, key: Tuple) -> None:
    """Guards (init, labels, preconditions) read source values only."""
    primed = sorted(f"{name}'" for name, is_primed in free_vars(expr) if is_primed)
    if primed:
        out.error("PRIMED_IN_GUARD", subject, f"{what} refers to " + ", ".join(primed), key)
    unknown = [name for name in _scope_errors(expr, allowed, set()) if name not in primed]
    if unknown:
        out.error("UNKNOWN_NAME", subject, f"{what} refers to " + ", ".join(unknown), key)


def _check_behavior_names(beh: BehaviorDescription, out: _Collector) -> bool:
    ok = True
    key = ("", 0, 0, "")
    attributes = beh.attribute_names()
    for name in _duplicates(attributes):
        out.error("DUPLICATE_NAME", beh.name, f"attribute '{name}' declared twice", key)
        ok = False
    if SELF in attributes:
        out.error("DUPLICATE_NAME", beh.name, "attribute 'self' is implicit", key)
        ok = False
    for name in _duplicates([s.name for s in beh.services]):
        out.error("DUPLICATE_NAME", beh.name, f"service '{name}' declared twice", key)
        ok = False
    before = len(out.findings)
    _check_guard(out, beh.init, set(attributes) | {SELF}, beh.name, "init", key)
    return ok and len(out.findings) == before


def _check_service_names(beh: BehaviorDescription, service: ServiceSTD, out: _Collector) -> bool:
    before = len(out.findings)
    name = service.name
    attributes = set(beh.attribute_names()) | {SELF}
    params = service.param_names()
    local_names = tuple(d.name for d in service.locals)
    state_ids = [s.id for s in service.states]
    known_services = {s.name for s in beh.services}
    key = (name, 0, 0, "")

    for dup in _duplicates(list(params) + list(local_names)):
        out.error("DUPLICATE_NAME", name, f"variable '{dup}' declared twice", key)
    for clash in sorted((set(params) | set(local_names)) & attributes):
        out.error("DUPLICATE_NAME", name, f"variable '{clash}' shadows an attribute", key)
    for dup in _duplicates(state_ids):
        out.error("DUPLICATE_NAME", name, f"state '{dup}' declared twice", key)
    if not service.initial:
        out.error("UNKNOWN_NAME", name, "no initial state", key)
    for initial in service.initial:
        if initial not in state_ids:
            out.error("UNKNOWN_NAME", name, f"initial state '{initial}' is not declared", key)

    for index, state in enumerate(service.states):
        skey = (name, 1, index, "")
        subject = f"{name}/{state.id}"
        _check_guard(out, state.label, attributes, subject, "label", skey)
        for excluded in state.exclusions:
            if excluded not in known_services:
                out.error("UNKNOWN_NAME", subject, f"exclusion names unknown service '{excluded}'", skey)

    waits = service.wait_states()
    for index, t in enumerate(service.transitions):
        tkey = (name, 2, index, "")
        subject = transition_location(service, index)
        for endpoint in (t.source, t.target):
            if endpoint not in state_ids:
                out.error("UNKNOWN_NAME", subject, f"state '{endpoint}' is not declared", tkey)
        pattern = t.pattern
        if pattern.service not in (name, RET):
            out.error("UNKNOWN_NAME", subject,
                      f"pattern '{pattern.service}' is neither '{name}' nor 'ret'", tkey)
        elif pattern.is_return:
            for binder in pattern.binders:
                if binder not in local_names:
                    out.error("UNKNOWN_NAME", subject,
                              f"ret binder '{binder}' is not a declared local", tkey)
        elif pattern.binders != params:
            out.error("ARITY", subject,
                      f"pattern binds ({', '.join(pattern.binders)}) but the service "
                      f"declares ({', '.join(params)})", tkey)
        for dup in _duplicates(list(pattern.bound_names())):
            out.error("DUPLICATE_NAME", subject, f"binder '{dup}' used twice", tkey)
        if pattern.sender and pattern.sender in attributes | set(params) | set(local_names):
            out.error("DUPLICATE_NAME", subject,
                      f"sender binder '{pattern.sender}' shadows a variable", tkey)

        scope = attributes | set(params) | set(local_names) | set(pattern.bound_names())
        changeable = set(beh.attribute_names()) | set(local_names)
        _check_guard(out, t.pre, scope, subject, "precondition", tkey)
        bad = _scope_errors(t.post, scope, changeable)
        if bad:
            out.error("UNKNOWN_NAME", subject, "postcondition refers to " + ", ".join(bad), tkey)
        for var in t.havoc:
            if var not in changeable:
                out.error("UNKNOWN_NAME", subject, f"havoc names '{var}'", tkey)
        for template in t.outputs:
            exprs = [expr for _, expr in template.args]
            if template.target is not None:
                exprs.append(template.target)
            for expr in exprs:
                bad = _scope_errors(expr, scope, changeable)
                if bad:
                    out.error("UNKNOWN_NAME", subject, "output refers to " + ", ".join(bad), tkey)

    return len(out.findings) == before


# ---------------------------------------------------------------------------
# shape and ret discipline
# ---------------------------------------------------------------------------

def _check_shape(service: ServiceSTD, out: _Collector) -> None:
    for index, t in enumerate(service.transitions):
        tkey = (service.name, 2, index, "")
        subject = transition_location(service, index)
        for position, template in enumerate(t.outputs):
            is_last = position == len(t.outputs) - 1
            if (template.name == RET) != (template.kind is MessageKind.RET):
                out.error("OUTPUT_SHAPE", subject,
                          f"output {position} mixes 'ret' with kind {template.kind}", tkey)
            if template.kind is MessageKind.RET and template.target is not None:
                out.error("OUTPUT_SHAPE", subject, f"output {position}: ret goes to the caller", tkey)
            if template.kind is not MessageKind.RET and template.target is None:
                out.error("OUTPUT_SHAPE", subject, f"output {position} has no receiver", tkey)
            if not is_last and template.kind is not MessageKind.CONC:
                out.error("OUTPUT_SHAPE", subject,
                          f"output {position} is {template.kind} but only the last output "
                          f"may be sequential or ret", tkey)


def _completing_states(service: ServiceSTD) -> Set[str]:
    """Wait states from which some run of returns reaches a final ret."""
    done: Set[str] = set()
    changed = True
    while changed:
        changed = False
        for t in service.transitions:
            if t.source in done or not t.pattern.is_return:
                continue
            if t.last_kind is MessageKind.RET or (
                    t.last_kind is MessageKind.SEQU and t.target in done):
                done.add(t.source)
                changed = True
    return done


def _check_ret_discipline(service: ServiceSTD, out: _Collector) -> None:
    name = service.name
    waits = service.wait_states()
    sequential = service.callable in (Callable.SEQ, Callable.BOTH)

    for index, t in enumerate(service.transitions):
        tkey = (name, 2, index, "")
        subject = transition_location(service, index)
        if t.source in waits and not t.pattern.is_return:
            out.error("WAIT_INPUT", subject,
                      f"wait state '{t.source}' may only continue on ret, not '{t.pattern.service}'", tkey)
        if t.pattern.is_return and t.source not in waits:
            out.error("WAIT_INPUT", subject,
                      f"ret pattern at '{t.source}', where no call is outstanding", tkey)
        if not t.pattern.is_return and t.source not in service.initial:
            out.warning("DEAD_TRANSITION", subject,
                        f"call pattern at non-initial state '{t.source}' never fires", tkey)
        if sequential and t.last_kind is None:
            out.error("MISSING_RET", subject,
                      "sequential invocation left pending without ret or sequential call", tkey)
        if not sequential and t.last_kind is MessageKind.RET:
            out.error("CONC_RET", subject, "concurrently callable service ends in ret", tkey)

    if sequential:
        completing = _completing_states(service)
        for index, state in enumerate(service.states):
            if state.id in waits and state.id not in completing:
                out.error("MISSING_RET", f"{name}/{state.id}",
                          "no run of returns from this wait state reaches a final ret",
                          (name, 1, index, ""))
    else:
        resumable = {t.source for t in service.transitions if t.pattern.is_return}
        for index, state in enumerate(service.states):
            if state.id in waits and state.id not in resumable:
                out.error("MISSING_RET", f"{name}/{state.id}",
                          "wait state has no ret transition", (name, 1, index, ""))


# ---------------------------------------------------------------------------
# satisfiability
# ---------------------------------------------------------------------------

def _check_init(beh: BehaviorDescription, ids: Sequence[ObjectId], out: _Collector) -> None:
    key = ("", 0, 0, "")
    try:
        for env in attribute_space(beh, ids[0], ids):
            if eval_pred(beh.init, env):
                return
    except IOStarError as exc:
        out.error("EVAL_ERROR", beh.name, f"init: {exc}", key)
        return
    out.error("INIT_UNSAT", beh.name, "init admits no attribute assignment", key)


def _check_labels(beh: BehaviorDescription, service: ServiceSTD,
                  ids: Sequence[ObjectId], out: _Collector) -> None:
    name = service.name
    satisfying: Dict[str, List[VarAssignment]] = {}
    space = list(attribute_space(beh, ids[0], ids))
    for index, state in enumerate(service.states):
        skey = (name, 1, index, "")
        subject = f"{name}/{state.id}"
        try:
            satisfying[state.id] = [env for env in space if eval_pred(state.label, env)]
        except IOStarError as exc:
            out.error("EVAL_ERROR", subject, f"label: {exc}", skey)
            continue
        if not satisfying[state.id]:
            out.error("LAMBDA_UNSAT", subject, "state predicate must be satisfiable", skey)

    states = [s for s in service.states if satisfying.get(s.id)]
    for i, first in enumerate(states):
        for second in states[i + 1:]:
            second_set = set(satisfying[second.id])
            witness = next((env for env in satisfying[first.id] if env in second_set), None)
            if witness is not None:
                index = [s.id for s in service.states].index(first.id)
                out.error("LAMBDA_OVERLAP", f"{name}/{first.id},{second.id}",
                          "state predicates of one service must exclude each other",
                          (name, 1, index, second.id), witness)


def _check_posts(beh: BehaviorDescription, service: ServiceSTD,
                 ids: Sequence[ObjectId], out: _Collector) -> None:
    waits = service.wait_states()
    space = list(attribute_space(beh, ids[0], ids))
    for index, t in enumerate(service.transitions):
        tkey = (service.name, 2, index, "")
        subject = transition_location(service, index)
        source = service.state(t.source)
        domains, fixed = invocation_domains(service, t, waits)
        try:
            gap = _post_gap(beh, service, t, source.label, space, domains, fixed, ids)
            overflow = None
            if gap is None:
                overflow = _output_overflow(beh, service, t, source.label, space, domains, fixed, ids)
        except IOStarError as exc:
            out.error("EVAL_ERROR", subject, str(exc), tkey)
            continue
        if gap is not None:
            out.error("POST_UNSAT", subject,
                      "postcondition unsatisfiable although label and precondition hold",
                      tkey, gap)
        elif overflow is not None:
            env, message = overflow
            out.error("OUTPUT_DOMAIN", subject, message, tkey, env)


def _guarded_envs(label: Expr, pre: Expr, space: Sequence[VarAssignment],
                  domains: Dict[str, Domain], fixed: VarAssignment, ids: Sequence[ObjectId]):
    for attrs in space:
        if not eval_pred(label, attrs):
            continue
        for env in assignments(domains, ids, attrs.update(fixed)):
            if eval_pred(pre, env):
                yield env


def _post_gap(beh, service, t, label, space, domains, fixed, ids) -> Optional[VarAssignment]:
    """
    First enabled assignment without a successor, or None.

    Output expressions are evaluated on the first successor found so
    that type errors in them surface as EVAL_ERROR.
    """
    for env in _guarded_envs(label, t.pre, space, domains, fixed, ids):
        candidate = next(post_states(beh, service, t, env, ids), None)
        if candidate is None:
            return env
        after = successor_env(beh, service, env, candidate)
        for template in t.outputs:
            for _, expr in template.args:
                eval_expr(expr, after)
            if template.target is not None:
                eval_expr(template.target, after)
    return None


def _output_overflow(beh, service, t, label, space, domains, fixed,
                     ids) -> Optional[Tuple[VarAssignment, str]]:
    """First enabled assignment sending a call argument outside its parameter domain."""
    targets = []
    for template in t.outputs:
        called = beh.service(template.name) if template.kind is not MessageKind.RET else None
        if called is not None:
            declared = {decl.name: decl.domain for decl in called.params}
            targets.append((template, declared))
    if not targets:
        return None
    for env in _guarded_envs(label, t.pre, space, domains, fixed, ids):
        for candidate in post_states(beh, service, t, env, ids):
            after = successor_env(beh, service, env, candidate)
            for template, declared in targets:
                for name, expr in template.args:
                    if name not in declared:
                        continue
                    value = eval_expr(expr, after)
                    if not declared[name].contains(value):
                        return env, (f"{template.name} argument {name} = {format_value(value)} "
                                     f"outside {declared[name]}")
    return None
