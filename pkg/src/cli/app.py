"""
Command-line application for IO*Star.

Subcommands::

    validate FILE...        static checks of behavior files
    run MANIFEST            one scheduled run, writes a trace
    explore MANIFEST        every interleaving, writes a report
    check FILE              enabledness (behavior), audit (trace) or
                            serializability (manifest)
    export MANIFEST         explicit machine of one object

Exit codes: 0 ok, 1 findings or violations, 2 usage or I/O, 3 budget.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from src.check.audit import audit_trace
from src.check.enabledness import enabledness_report
from src.check.interference import interference_report
from src.check.serializability import serializability_check
from src.config import (APP_NAME, EXIT_BUDGET, EXIT_FINDINGS, EXIT_OK, EXIT_USAGE, LOG_FORMAT,
                        VERSION, get_log_level)
from src.core.errors import BudgetExceeded, IOStarError
from src.core.state import make_pool
from src.core.values import ObjectId
from src.dsl.lexer import tokenize
from src.dsl.parser import POLICIES, SCHEDULERS
from src.semantics.machine import enumerate_machine
from src.semantics.step import ChaosPolicy
from src.sim.explore import explore
from src.sim.runner import run
from src.sim.trace import STOP_ABORT, TRACE_HEADER, parse_trace
from src.spec.report import Finding, ValidationReport
from src.spec.validate import validate

from .manifest import RunManifest, load_behavior

logger = logging.getLogger(__name__)

FORMATS = ("lines", "json-lines")


def _emit(text: str, out: Optional[str]) -> None:
    """Write a report or trace to ``out`` (stdout when None)."""
    if out:
        Path(out).write_text(text, encoding="utf-8")
        logger.info("wrote %s", out)
    else:
        sys.stdout.write(text)


def _render(findings: Sequence[Finding], fmt: str) -> str:
    text = ValidationReport(findings).render(fmt)
    return text + "\n" if text else ""


def _load(args: argparse.Namespace) -> RunManifest:
    manifest = RunManifest.load(Path(args.manifest))
    return manifest.override(scheduler=getattr(args, "scheduler", None),
                             seed=getattr(args, "seed", None),
                             policy=getattr(args, "policy", None),
                             bound=getattr(args, "bound", None),
                             steps=getattr(args, "steps", None))


def _invalid(manifest: RunManifest, fmt: str = "lines") -> bool:
    """Validate every loaded behavior; print errors to stderr."""
    failed = False
    for beh in manifest.behaviors.values():
        report = validate(beh)
        if not report.ok:
            sys.stderr.write(_render(report.errors(), fmt))
            failed = True
    return failed


def cmd_validate(args: argparse.Namespace) -> int:
    """Validate behavior files; exit 1 if any has an error finding."""
    status = EXIT_OK
    for path in args.paths:
        beh, _ = load_behavior(Path(path))
        report = validate(beh)
        sys.stdout.write(_render(list(report), args.format))
        errors = len(report.errors())
        print(f"{path}: {'ok' if report.ok else f'{errors} error(s)'}", file=sys.stderr)
        if not report.ok:
            status = EXIT_FINDINGS
    return status


def cmd_run(args: argparse.Namespace) -> int:
    """One scheduled run; exit 1 when it aborts."""
    manifest = _load(args)
    if _invalid(manifest):
        return EXIT_FINDINGS
    if manifest.scheduler == "exhaustive":
        print("run needs --scheduler=random or roundrobin; use explore", file=sys.stderr)
        return EXIT_USAGE
    trace = run(manifest.configuration(), manifest.script(), manifest.make_scheduler(),
                manifest.policy, manifest.meta())
    _emit(trace.render(), args.out)
    if trace.stop == STOP_ABORT:
        abort = trace.abort
        print(f"aborted at step {abort.step}: {abort.error}: {abort.detail}", file=sys.stderr)
        return EXIT_FINDINGS
    return EXIT_OK


def cmd_explore(args: argparse.Namespace) -> int:
    """Exhaustive exploration; exit 1 iff a property is violated."""
    manifest = _load(args)
    if _invalid(manifest):
        return EXIT_FINDINGS
    try:
        report = explore(manifest.configuration(), manifest.script(), manifest.bound,
                         manifest.policy, manifest.invariants())
    except BudgetExceeded as e:
        if e.partial is not None:
            _emit(e.partial.render(), args.out)
        print(f"BudgetExceeded: {e}", file=sys.stderr)
        return EXIT_BUDGET
    _emit(report.render(), args.out)
    return EXIT_FINDINGS if report.violations else EXIT_OK


def _kind_of(text: str) -> str:
    if text.startswith(TRACE_HEADER):
        return "trace"
    tokens, _ = tokenize(text)
    return "manifest" if tokens and tokens[0].text == "manifest" else "behavior"


def cmd_check(args: argparse.Namespace) -> int:
    """Analyse a behavior, trace or manifest; exit 1 iff there are findings."""
    path = Path(args.path)
    text = path.read_text(encoding="utf-8")
    kind = _kind_of(text)
    findings: List[Finding]
    if kind == "trace":
        try:
            trace = parse_trace(text)
        except ValueError as e:
            print(f"{path}: {e}", file=sys.stderr)
            return EXIT_USAGE
        findings = audit_trace(trace)
    elif kind == "manifest":
        args.manifest = args.path
        manifest = _load(args)
        if _invalid(manifest, args.format):
            return EXIT_FINDINGS
        try:
            findings = serializability_check(manifest.configuration(), manifest.messages(),
                                             manifest.bound, manifest.policy)
        except BudgetExceeded as e:
            print(f"BudgetExceeded: {e}", file=sys.stderr)
            return EXIT_BUDGET
    else:
        beh, _ = load_behavior(path)
        report = validate(beh)
        if not report.ok:
            sys.stderr.write(_render(report.errors(), args.format))
            return EXIT_FINDINGS
        findings = enabledness_report(beh) + interference_report(beh)
    _emit(_render(findings, args.format), args.out)
    print(f"{path}: {kind}, {len(findings)} finding(s)", file=sys.stderr)
    return EXIT_FINDINGS if findings else EXIT_OK


def cmd_export(args: argparse.Namespace) -> int:
    """Explicit machine of one manifest object; exit 3 when truncated."""
    manifest = _load(args)
    if _invalid(manifest):
        return EXIT_FINDINGS
    objects = manifest.source.objects
    decl = next((d for d in objects if d.name == args.object), None) if args.object else (
        objects[0] if objects else None)
    if decl is None:
        print(f"no object {args.object or ''} in {args.manifest}", file=sys.stderr)
        return EXIT_USAGE
    obj = ObjectId(decl.name)
    policy = ChaosPolicy(args.policy) if args.policy else (
        manifest.policy if manifest.source.policy else ChaosPolicy.HAVOC)
    try:
        machine = enumerate_machine(manifest.behavior_of(decl), obj, make_pool(obj, decl.pool),
                                    manifest.bound, policy=policy, peer_tags=decl.pool)
    except BudgetExceeded as e:
        _emit(e.partial.render(), args.out)
        print(f"BudgetExceeded: {e}", file=sys.stderr)
        return EXIT_BUDGET
    _emit(machine.render(), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subparser per command."""
    parser = argparse.ArgumentParser(prog=APP_NAME, description="I/O*-state machine interpreter")
    parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="more log output on stderr (repeatable)")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(cmd: argparse.ArgumentParser, findings: bool = False) -> None:
        if findings:
            cmd.add_argument("--format", choices=FORMATS, default="lines")
        cmd.add_argument("--out", help="write the result to this file instead of stdout")

    validate_cmd = sub.add_parser("validate", help="static checks of behavior files")
    validate_cmd.add_argument("paths", nargs="+")
    common(validate_cmd, findings=True)
    validate_cmd.set_defaults(func=cmd_validate)

    run_cmd = sub.add_parser("run", help="one scheduled run")
    run_cmd.add_argument("manifest")
    run_cmd.add_argument("--seed", type=int)
    run_cmd.add_argument("--scheduler", choices=SCHEDULERS)
    run_cmd.add_argument("--policy", choices=POLICIES)
    run_cmd.add_argument("--steps", type=int, help="delivery budget")
    common(run_cmd)
    run_cmd.set_defaults(func=cmd_run)

    explore_cmd = sub.add_parser("explore", help="explore every interleaving")
    explore_cmd.add_argument("manifest")
    explore_cmd.add_argument("--policy", choices=POLICIES)
    explore_cmd.add_argument("--bound", type=int, help="configuration budget")
    common(explore_cmd)
    explore_cmd.set_defaults(func=cmd_explore)

    check_cmd = sub.add_parser("check", help="analyse a behavior, trace or manifest")
    check_cmd.add_argument("path")
    check_cmd.add_argument("--policy", choices=POLICIES)
    check_cmd.add_argument("--bound", type=int, help="configuration budget")
    common(check_cmd, findings=True)
    check_cmd.set_defaults(func=cmd_check)

    export_cmd = sub.add_parser("export", help="explicit machine of one object")
    export_cmd.add_argument("manifest")
    export_cmd.add_argument("--object", help="object to unfold (default: the first)")
    export_cmd.add_argument("--policy", choices=POLICIES)
    export_cmd.add_argument("--bound", type=int, help="state budget")
    common(export_cmd)
    export_cmd.set_defaults(func=cmd_export)
    return parser


def run_app(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse arguments, configure logging and dispatch.

    Args:
        argv: Arguments without the program name (default: ``sys.argv[1:]``)

    Returns:
        int: Process exit code
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    logging.basicConfig(level=get_log_level(args.verbose), format=LOG_FORMAT, stream=sys.stderr)

    try:
        return args.func(args)
    except BudgetExceeded as e:
        print(f"BudgetExceeded: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except (OSError, ValueError, IOStarError) as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_USAGE
