"""
Canonical printer for behavior descriptions.

``parse(print_behavior(b)) == b`` for every well-formed ``b``. Layout:
two-space indentation, declared order everywhere, named output
arguments, and the callable mode, precondition and postcondition always
spelled out.
"""

from typing import List

from src.core.messages import MessageKind
from src.core.printing import format_value
from src.core.values import ObjectId
from src.spec.ast import (BehaviorDescription, Binary, DiagramTransition, Expr, Lit,
                          OutputTemplate, Pending, ServiceSTD, Unary, Var, VarDecl)

_PRECEDENCE = {
    "=>": 1, "or": 2, "and": 3,
    "=": 5, "!=": 5, "<": 5, "<=": 5, ">": 5, ">=": 5,
    "+": 6, "-": 6, "*": 7,
}
_NOT = 4
_ATOM = 9
_COMPARISON = 5


def _precedence(expr: Expr) -> int:
    if isinstance(expr, Binary):
        return _PRECEDENCE[expr.op]
    if isinstance(expr, Unary):
        return _NOT if expr.op == "not" else _ATOM
    return _ATOM


def format_expr(expr: Expr) -> str:
    """Print an expression with the fewest parentheses that reparse to it."""
    if isinstance(expr, Lit):
        if isinstance(expr.value, int) and not isinstance(expr.value, bool) and expr.value < 0:
            return f"({expr.value})"
        return format_value(expr.value)
    if isinstance(expr, Var):
        return expr.name + ("'" if expr.primed else "")
    if isinstance(expr, Pending):
        return f"pending({expr.obj}, {expr.state})"
    if isinstance(expr, Unary):
        if expr.op == "-":
            return f"-({format_expr(expr.operand)})"
        operand = format_expr(expr.operand)
        if _precedence(expr.operand) < _NOT:
            operand = f"({operand})"
        return f"not {operand}"

    level = _PRECEDENCE[expr.op]
    left_level, right_level = _precedence(expr.left), _precedence(expr.right)
    left, right = format_expr(expr.left), format_expr(expr.right)
    right_assoc = expr.op == "=>"
    if left_level < level or (left_level == level and (right_assoc or level == _COMPARISON)):
        left = f"({left})"
    if right_level < level or (right_level == level and not right_assoc):
        right = f"({right})"
    return f"{left} {expr.op} {right}"


def _decl(decl: VarDecl) -> str:
    return f"{decl.name}: {decl.domain}"


def _receiver(target: Expr) -> str:
    if isinstance(target, Var) or (isinstance(target, Lit) and isinstance(target.value, ObjectId)):
        return format_expr(target)
    return f"({format_expr(target)})"


def _output(template: OutputTemplate) -> str:
    args = ", ".join(f"{name} = {format_expr(expr)}" for name, expr in template.args)
    if template.kind is MessageKind.RET:
        return f"ret({args})"
    return f"{_receiver(template.target)}.{template.name}({args}) {template.kind}"


def _transition(t: DiagramTransition, lines: List[str]) -> None:
    pattern = t.pattern
    when = f"{pattern.service}({', '.join(pattern.binders)})"
    if pattern.sender:
        when += f" from {pattern.sender}"
    lines.append(f"    trans {t.source} -> {t.target} {{")
    lines.append(f"      when {when};")
    lines.append(f"      pre {format_expr(t.pre)};")
    for template in t.outputs:
        lines.append(f"      out {_output(template)};")
    lines.append(f"      post {format_expr(t.post)};")
    if t.havoc:
        lines.append(f"      havoc {', '.join(t.havoc)};")
    lines.append("    }")


def _service(service: ServiceSTD, lines: List[str]) -> None:
    params = ", ".join(_decl(decl) for decl in service.params)
    lines.append(f"  service {service.name}({params}) callable {service.callable.value} {{")
    if service.locals:
        lines.append("    locals {")
        lines.extend(f"      {_decl(decl)};" for decl in service.locals)
        lines.append("    }")
    lines.append("    states {")
    lines.extend(f"      {state.id}: {format_expr(state.label)};" for state in service.states)
    lines.append("    }")
    lines.append(f"    initial {', '.join(service.initial)};")
    excluding = [state for state in service.states if state.exclusions]
    if excluding:
        lines.append("    exclusions {")
        lines.extend(f"      {state.id}: [{', '.join(state.exclusions)}];" for state in excluding)
        lines.append("    }")
    for transition in service.transitions:
        _transition(transition, lines)
    lines.append("  }")


def print_behavior(beh: BehaviorDescription) -> str:
    """
    Print a behavior description in canonical form.

    Args:
        beh: Structurally valid behavior

    Returns:
        str: Source text, newline terminated
    """
    lines = [f"behavior {beh.name} {{", "  attributes {"]
    lines.extend(f"    {_decl(decl)};" for decl in beh.attributes)
    lines.append("  }")
    lines.append(f"  init {{ {format_expr(beh.init)} }}")
    for service in beh.services:
        lines.append("")
        _service(service, lines)
    lines.append("}")
    return "\n".join(lines) + "\n"
