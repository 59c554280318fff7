"""
LALR parser for behavior files, run manifests and expressions.

The grammar is written as ``ply.yacc`` productions over the token
stream of :mod:`.lexer`. One table serves all three inputs: the token
stream is prefixed with a marker token that selects the start rule.

Error productions at ``;`` and ``}`` let the parser resume after a
broken statement, so one run reports every independent error of a
file. Besides syntax the actions resolve what can be resolved without
evaluation: enumeration constants, transition endpoints, initial and
exclusion state names, and the arity of call patterns.

Expression precedence, loosest first::

    =>  (right associative)
    or
    and
    not
    =  !=  <  <=  >  >=   (non associative)
    +  -
    *
    unary -
"""

import logging
from dataclasses import replace
from typing import Dict, List, Optional, Set, Tuple

import ply.lex as lex
import ply.yacc as yacc

from src.core.errors import DslSyntaxError
from src.core.messages import MessageKind, RET
from src.core.state import SELF
from src.core.values import EnumConst, ObjectId, Value
from src.spec.ast import (Binary, BehaviorDescription, Callable, DiagramState, DiagramTransition,
                          Expr, Lit, OutputTemplate, Pattern, Pending, ServiceSTD, TRUE, Unary, Var,
                          VarDecl)
from src.spec.domains import BoolDomain, EnumDomain, IdDomain, IntRange

from .lexer import END_OF_INPUT, RESERVED, ParseError, SourceSpan, Token, tokenize
from .lexer import tokens as LEXED_KINDS
from .manifest import InjectDecl, InvariantDecl, ManifestSource, ObjectDecl

logger = logging.getLogger(__name__)

SCHEDULERS = ("random", "roundrobin", "exhaustive")
POLICIES = ("reject", "havoc")

_MARKERS = {"behavior": "BEHAVIOR_FILE", "manifest": "MANIFEST_FILE", "expression": "EXPRESSION_TEXT"}

tokens = (tuple(kind for kind in LEXED_KINDS if kind != "KEYWORD")
          + tuple(sorted(word.upper() for word in RESERVED))
          + tuple(_MARKERS.values()))

precedence = (
    ("nonassoc", "NAMEREF"),
    ("right", "IMPLIES"),
    ("left", "OR"),
    ("left", "AND"),
    ("right", "NOT"),
    ("nonassoc", "EQ", "NE", "LT", "LE", "GT", "GE"),
    ("left", "PLUS", "MINUS"),
    ("left", "STAR"),
    ("right", "UMINUS"),
)

start = "top"

_SYMBOLS = {
    "ARROW": "->", "IMPLIES": "=>", "LE": "<=", "GE": ">=", "NE": "!=", "DOTDOT": "..",
    "EQ": "=", "LT": "<", "GT": ">", "PLUS": "+", "MINUS": "-", "STAR": "*",
    "LBRACE": "{", "RBRACE": "}", "LPAREN": "(", "RPAREN": ")", "LBRACKET": "[", "RBRACKET": "]",
    "COMMA": ",", "COLON": ":", "SEMI": ";", "DOT": ".", "PRIME": "'", "ATSIGN": "@",
}


# ---------------------------------------------------------------------------
# parse session
# ---------------------------------------------------------------------------

class _Session:
    """Token list, collected errors and mode of the parse in progress."""

    def __init__(self, text: str, file: str, manifest: bool = False):
        self.tokens, self.errors = tokenize(text, file)
        self.manifest = manifest
        self.exclusion_refs: List[int] = []

    def text(self, index: int) -> str:
        return self.tokens[index].text

    def span(self, index: int) -> SourceSpan:
        return self.tokens[index].span

    def found(self, index: int) -> str:
        tok = self.tokens[index]
        return END_OF_INPUT if tok.kind == "EOF" else f"'{tok.text}'"

    def report(self, span: SourceSpan, expected: str, found: str) -> None:
        if any(error.span == span for error in self.errors):
            return
        self.errors.append(ParseError(span, expected, found))

    def report_at(self, index: int, expected: str) -> None:
        self.report(self.span(index), expected, self.found(index))

    def feed(self, marker: str) -> "_Feed":
        return _Feed(self.tokens, marker)


class _Feed:
    """Lexer stand-in handing pre-lexed tokens to ply.yacc; ``lexpos`` is the token index."""

    def __init__(self, toks: List[Token], marker: str):
        self.toks = toks
        self.marker = marker
        self.next = -1
        self.lineno = 1
        self.lexpos = 0

    def token(self) -> Optional[lex.LexToken]:
        if self.next < 0:
            kind, value, index = self.marker, None, 0
        else:
            index = self.next
            tok = self.toks[index]
            if tok.kind == "EOF":
                return None
            kind = tok.text.upper() if tok.kind == "KEYWORD" else tok.kind
            value = tok.value
            self.lineno = tok.span.line
        self.next += 1
        self.lexpos = index
        lexed = lex.LexToken()
        lexed.type, lexed.value, lexed.lineno, lexed.lexpos = kind, value, self.lineno, index
        return lexed


_SESSION: List[_Session] = []


def _session() -> _Session:
    return _SESSION[-1]


def _describe(kind: str) -> str:
    if kind == "$end":
        return END_OF_INPUT
    if kind == "NAME":
        return "a name"
    if kind == "NUMBER":
        return "a number"
    if kind == "STRING":
        return "a quoted file name"
    if kind in _SYMBOLS:
        return f"'{_SYMBOLS[kind]}'"
    return f"'{kind.lower()}'"


def _expected(state: int) -> str:
    skipped = ("error",) + tuple(_MARKERS.values())
    described = sorted({_describe(kind) for kind, action in _PARSER.action[state].items()
                        if action is not None and kind not in skipped})
    if len(described) > 4:
        return "one of " + ", ".join(described)
    return " or ".join(described)


def p_error(tok):
    s = _session()
    expected = _expected(_PARSER.statestack[-1])
    if tok is None:
        s.report_at(len(s.tokens) - 1, expected)
    else:
        s.report_at(tok.lexpos, expected)


# ---------------------------------------------------------------------------
# grammar: entry
# ---------------------------------------------------------------------------

def p_top(p):
    """top : BEHAVIOR_FILE behavior
           | MANIFEST_FILE manifest
           | EXPRESSION_TEXT expr"""
    p[0] = p[2]


def p_empty(p):
    "empty :"


# ---------------------------------------------------------------------------
# grammar: behavior files
# ---------------------------------------------------------------------------

def p_behavior(p):
    "behavior : BEHAVIOR NAME LBRACE behavior_members RBRACE"
    s = _session()
    attributes: List[VarDecl] = []
    inits: List[Expr] = []
    services: List[ServiceSTD] = []
    for member in p[4]:
        if member is None:
            continue
        kind, item = member
        if kind == "attributes":
            attributes.extend(item)
        elif kind == "init":
            inits.append(item)
        else:
            services.append(item)

    known = {service.name for service in services}
    for index in s.exclusion_refs:
        if s.text(index) not in known:
            s.report_at(index, "a declared service")

    beh = BehaviorDescription(p[2], tuple(attributes), inits[0] if inits else TRUE, tuple(services))
    p[0] = _resolve_behavior(beh)


def p_behavior_members(p):
    """behavior_members : behavior_members behavior_member
                        | empty"""
    if len(p) == 2:
        p[0] = []
    else:
        p[1].append(p[2])
        p[0] = p[1]


def p_behavior_member_attributes(p):
    "behavior_member : ATTRIBUTES LBRACE decl_stmts RBRACE"
    p[0] = ("attributes", p[3])


def p_behavior_member_init(p):
    "behavior_member : INIT LBRACE expr RBRACE"
    p[0] = ("init", p[3])


def p_behavior_member_service(p):
    "behavior_member : service"
    p[0] = ("service", p[1]) if p[1] is not None else None


def p_behavior_member_error(p):
    """behavior_member : error SEMI
                       | INIT LBRACE error RBRACE"""
    p[0] = None


def p_decl_stmts(p):
    """decl_stmts : decl_stmts decl_stmt
                  | empty"""
    if len(p) == 2:
        p[0] = []
    else:
        if p[2] is not None:
            p[1].append(p[2])
        p[0] = p[1]


def p_decl_stmt(p):
    """decl_stmt : decl SEMI
                 | error SEMI"""
    p[0] = p[1] if isinstance(p[1], VarDecl) else None


def p_decl(p):
    "decl : NAME COLON domain"
    p[0] = VarDecl(p[1], p[3])


def p_domain_int(p):
    "domain : INT LBRACKET signed DOTDOT signed RBRACKET"
    lo, hi = p[3], p[5]
    if lo > hi:
        _session().report(_session().span(p.lexpos(3)), "a non-empty range", f"'{lo}..{hi}'")
    p[0] = IntRange(lo, hi)


def p_domain_bool(p):
    "domain : BOOL"
    p[0] = BoolDomain()


def p_domain_id(p):
    "domain : ID"
    p[0] = IdDomain()


def p_domain_enum(p):
    "domain : ENUM LBRACE names RBRACE"
    s = _session()
    p[0] = EnumDomain(tuple(s.text(index) for index in p[3]))


def p_signed(p):
    """signed : NUMBER
              | MINUS NUMBER"""
    p[0] = p[1] if len(p) == 2 else -p[2]


def p_names(p):
    """names : names COMMA NAME
             | NAME"""
    if len(p) == 2:
        p[0] = [p.lexpos(1)]
    else:
        p[1].append(p.lexpos(3))
        p[0] = p[1]


def p_names_opt(p):
    """names_opt : names
                 | empty"""
    p[0] = p[1] or []


# -- services ------------------------------------------------------------------

def p_service(p):
    "service : SERVICE NAME LPAREN params_opt RPAREN callable_opt LBRACE service_members RBRACE"
    p[0] = _finish_service(_session(), p.lexpos(2), tuple(p[4]), p[6], [m for m in p[8] if m])


def p_params_opt(p):
    """params_opt : params
                  | empty"""
    p[0] = p[1] or []


def p_params(p):
    """params : params COMMA decl
              | decl"""
    if len(p) == 2:
        p[0] = [p[1]]
    else:
        p[1].append(p[3])
        p[0] = p[1]


def p_callable_opt(p):
    """callable_opt : CALLABLE SEQ
                    | CALLABLE CONC
                    | CALLABLE BOTH
                    | empty"""
    p[0] = Callable(p[2]) if len(p) == 3 else Callable.BOTH


def p_service_members(p):
    """service_members : service_members service_member
                       | empty"""
    if len(p) == 2:
        p[0] = []
    else:
        p[1].append(p[2])
        p[0] = p[1]


def p_service_member_locals(p):
    "service_member : LOCALS LBRACE decl_stmts RBRACE"
    p[0] = ("locals", p[3])


def p_service_member_states(p):
    "service_member : STATES LBRACE state_stmts RBRACE"
    p[0] = ("states", p[3])


def p_service_member_initial(p):
    "service_member : INITIAL names SEMI"
    p[0] = ("initial", p[2])


def p_service_member_exclusions(p):
    "service_member : EXCLUSIONS LBRACE exclusion_stmts RBRACE"
    p[0] = ("exclusions", p[3])


def p_service_member_transition(p):
    "service_member : transition"
    p[0] = ("trans", p[1]) if p[1] is not None else None


def p_service_member_error(p):
    "service_member : error SEMI"
    p[0] = None


def p_state_stmts(p):
    """state_stmts : state_stmts state_stmt
                   | empty"""
    if len(p) == 2:
        p[0] = []
    else:
        if p[2] is not None:
            p[1].append(p[2])
        p[0] = p[1]


def p_state_stmt(p):
    "state_stmt : NAME COLON expr SEMI"
    p[0] = (p.lexpos(1), p[3])


def p_state_stmt_error(p):
    "state_stmt : error SEMI"
    p[0] = None


def p_exclusion_stmts(p):
    """exclusion_stmts : exclusion_stmts exclusion_stmt
                       | empty"""
    if len(p) == 2:
        p[0] = []
    else:
        if p[2] is not None:
            p[1].append(p[2])
        p[0] = p[1]


def p_exclusion_stmt(p):
    "exclusion_stmt : NAME COLON LBRACKET names_opt RBRACKET SEMI"
    _session().exclusion_refs.extend(p[4])
    p[0] = (p.lexpos(1), p[4])


def p_exclusion_stmt_error(p):
    "exclusion_stmt : error SEMI"
    p[0] = None


# -- transitions ---------------------------------------------------------------

def p_transition(p):
    "transition : TRANS NAME ARROW NAME LBRACE clauses RBRACE"
    s = _session()
    parts: Dict[str, object] = {"outputs": [], "havoc": []}
    pattern_at = -1
    for clause in p[6]:
        if clause is None:
            continue
        key, value, at = clause
        if key == "when":
            if "pattern" in parts:
                s.report(s.span(at - 1), "one 'when' clause", "'when'")
            parts["pattern"], pattern_at = value, at
        elif key in ("outputs", "havoc"):
            parts[key].append(value)
        else:
            parts[key] = value
    if "pattern" not in parts:
        s.report(s.span(p.lexpos(1)), "a 'when' clause", "'trans'")
        p[0] = None
        return
    transition = DiagramTransition(
        source=p[2],
        pattern=parts["pattern"],
        pre=parts.get("pre", TRUE),
        target=p[4],
        outputs=tuple(parts["outputs"]),
        post=parts.get("post", TRUE),
        havoc=tuple(name for names in parts["havoc"] for name in names),
    )
    p[0] = (transition, p.lexpos(2), p.lexpos(4), pattern_at)


def p_transition_error(p):
    "transition : TRANS error RBRACE"
    p[0] = None


def p_clauses(p):
    """clauses : clauses clause
               | empty"""
    if len(p) == 2:
        p[0] = []
    else:
        p[1].append(p[2])
        p[0] = p[1]


def p_clause_when(p):
    "clause : WHEN pattern SEMI"
    p[0] = ("when", p[2], p.lexpos(2))


def p_clause_pre_post(p):
    """clause : PRE expr SEMI
              | POST expr SEMI"""
    p[0] = (p[1], p[2], p.lexpos(1))


def p_clause_out(p):
    "clause : OUT output SEMI"
    p[0] = ("outputs", p[2], p.lexpos(1))


def p_clause_havoc(p):
    "clause : HAVOC names SEMI"
    s = _session()
    p[0] = ("havoc", [s.text(index) for index in p[2]], p.lexpos(1))


def p_clause_error(p):
    "clause : error SEMI"
    p[0] = None


def p_pattern(p):
    """pattern : NAME LPAREN names_opt RPAREN sender_opt
               | RET LPAREN names_opt RPAREN sender_opt"""
    s = _session()
    service = RET if p.slice[1].type == "RET" else p[1]
    p[0] = Pattern(service, tuple(s.text(index) for index in p[3]), p[5])


def p_sender_opt(p):
    """sender_opt : FROM NAME
                  | empty"""
    p[0] = p[2] if len(p) == 3 else None


def p_output_ret(p):
    "output : RET call_args"
    p[0] = OutputTemplate(None, RET, p[2], MessageKind.RET)


def p_output_call(p):
    "output : receiver DOT NAME call_args kind_opt"
    p[0] = OutputTemplate(p[1], p[3], p[4], p[5])


def p_kind_opt(p):
    """kind_opt : SEQ
                | CONC
                | empty"""
    p[0] = MessageKind.SEQU if p[1] == "seq" else MessageKind.CONC


def p_receiver_name(p):
    """receiver : NAME
                | NAME PRIME"""
    p[0] = Var(p[1], len(p) == 3)


def p_receiver_self(p):
    "receiver : SELF"
    p[0] = Var(SELF)


def p_receiver_object(p):
    "receiver : ATSIGN NAME"
    p[0] = Lit(ObjectId(p[2]))


def p_receiver_group(p):
    "receiver : LPAREN expr RPAREN"
    p[0] = p[2]


def p_call_args(p):
    "call_args : LPAREN args_opt RPAREN"
    s = _session()
    named: List[Tuple[str, Expr]] = []
    for position, (name, expr, at) in enumerate(p[2]):
        if name is None:
            if isinstance(expr, Var) and not expr.primed and "." not in expr.name:
                name = expr.name
            else:
                name = f"arg{position}"
        if any(existing == name for existing, _ in named):
            s.report(s.span(at), "distinct argument names", f"'{name}'")
        named.append((name, expr))
    p[0] = tuple(named)


def p_args_opt(p):
    """args_opt : args
                | empty"""
    p[0] = p[1] or []


def p_args(p):
    """args : args COMMA arg
            | arg"""
    if len(p) == 2:
        p[0] = [p[1]]
    else:
        p[1].append(p[3])
        p[0] = p[1]


def p_arg_named(p):
    "arg : NAME EQ expr"
    p[0] = (p[1], p[3], p.lexpos(1))


def p_arg_positional(p):
    "arg : expr"
    p[0] = (None, p[1], p.lexpos(1))


# ---------------------------------------------------------------------------
# grammar: manifests
# ---------------------------------------------------------------------------

def p_manifest(p):
    "manifest : MANIFEST LBRACE manifest_stmts RBRACE"
    fields: Dict[str, object] = {"loads": [], "objects": [], "injections": [], "invariants": []}
    for stmt in p[3]:
        if stmt is None:
            continue
        key, value = stmt
        if key in fields and isinstance(fields[key], list):
            fields[key].append(value)
        else:
            fields[key] = value
    for key in ("loads", "objects", "injections", "invariants"):
        fields[key] = tuple(fields[key])
    p[0] = ManifestSource(**fields)


def p_manifest_stmts(p):
    """manifest_stmts : manifest_stmts manifest_stmt
                      | empty"""
    if len(p) == 2:
        p[0] = []
    else:
        p[1].append(p[2])
        p[0] = p[1]


def p_manifest_load(p):
    "manifest_stmt : LOAD STRING SEMI"
    p[0] = ("loads", p[2])


def p_manifest_object(p):
    "manifest_stmt : OBJECT NAME COLON NAME pool_opt select_opt SEMI"
    decl = ObjectDecl(p[2], p[4])
    if p[5] is not None:
        decl = replace(decl, pool=p[5])
    if p[6] is not None:
        decl = replace(decl, select=p[6])
    p[0] = ("objects", decl)


def p_pool_opt(p):
    """pool_opt : POOL NUMBER
                | empty"""
    p[0] = p[2] if len(p) == 3 else None


def p_select_opt(p):
    """select_opt : SELECT LBRACE expr RBRACE
                  | empty"""
    p[0] = p[3] if len(p) == 5 else None


def p_manifest_inject(p):
    "manifest_stmt : INJECT injection SEMI"
    p[0] = ("injections", p[2])


def p_manifest_choice(p):
    """manifest_stmt : SCHEDULER choice SEMI
                     | POLICY choice SEMI"""
    s = _session()
    allowed = SCHEDULERS if p[1] == "scheduler" else POLICIES
    if p[2] not in allowed:
        s.report_at(p.lexpos(2), " or ".join(f"'{choice}'" for choice in allowed))
    p[0] = (p[1], p[2])


def p_choice(p):
    """choice : NAME
              | HAVOC"""
    p[0] = p[1]


def p_manifest_number(p):
    """manifest_stmt : SEED NUMBER SEMI
                     | BOUND NUMBER SEMI
                     | STEPS NUMBER SEMI"""
    p[0] = (p[1], p[2])


def p_manifest_invariant(p):
    """manifest_stmt : INVARIANT NAME COLON expr SEMI
                     | TERMINAL NAME COLON expr SEMI"""
    p[0] = ("invariants", InvariantDecl(p[2], resolve_constants(p[4], None), p[1] == "terminal"))


def p_manifest_error(p):
    "manifest_stmt : error SEMI"
    p[0] = None


def p_injection_ret(p):
    "injection : RET NAME call_args at_opt"
    p[0] = _injection(p.lexpos(3), MessageKind.RET, p[2], RET, p[3], p[4])


def p_injection_call(p):
    """injection : SEQ NAME DOT NAME call_args at_opt
                 | CONC NAME DOT NAME call_args at_opt"""
    kind = MessageKind.SEQU if p[1] == "seq" else MessageKind.CONC
    p[0] = _injection(p.lexpos(5), kind, p[2], p[4], p[5], p[6])


def p_at_opt(p):
    """at_opt : AT NUMBER
              | empty"""
    p[0] = p[2] if len(p) == 3 else 0


def _injection(at: int, kind: MessageKind, target: str, service: str,
               call_args: Tuple[Tuple[str, Expr], ...], at_step: int) -> InjectDecl:
    s = _session()
    args: List[Tuple[str, Value]] = []
    for name, expr in call_args:
        expr = resolve_constants(expr, None)
        if not isinstance(expr, Lit):
            s.report(s.span(at), "literal arguments", f"'{name}'")
            continue
        args.append((name, expr.value))
    return InjectDecl(kind, target, service, tuple(args), at_step)


# ---------------------------------------------------------------------------
# grammar: expressions
# ---------------------------------------------------------------------------

def p_expr_binary(p):
    """expr : expr IMPLIES expr
            | expr OR expr
            | expr AND expr
            | expr EQ expr
            | expr NE expr
            | expr LT expr
            | expr LE expr
            | expr GT expr
            | expr GE expr
            | expr PLUS expr
            | expr MINUS expr
            | expr STAR expr"""
    p[0] = Binary(p[2], p[1], p[3])


def p_expr_not(p):
    "expr : NOT expr"
    p[0] = Unary("not", p[2])


def p_expr_negate(p):
    "expr : MINUS expr %prec UMINUS"
    s = _session()
    operand = p[2]
    if s.tokens[p.lexpos(1) + 1].kind == "NUMBER" and isinstance(operand, Lit):
        p[0] = Lit(-operand.value)
    else:
        p[0] = Unary("-", operand)


def p_expr_atom(p):
    "expr : atom"
    p[0] = p[1]


def p_atom_number(p):
    "atom : NUMBER"
    p[0] = Lit(p[1])


def p_atom_bool(p):
    """atom : TRUE
            | FALSE"""
    p[0] = Lit(p[1] == "true")


def p_atom_group(p):
    "atom : LPAREN expr RPAREN"
    p[0] = p[2]


def p_atom_object(p):
    "atom : ATSIGN NAME"
    p[0] = Lit(ObjectId(p[2]))


def p_atom_self(p):
    "atom : SELF"
    p[0] = Var(SELF)


def p_atom_name(p):
    "atom : NAME %prec NAMEREF"
    p[0] = Var(p[1])


def p_atom_primed(p):
    "atom : NAME PRIME"
    p[0] = Var(p[1], True)


def p_atom_member(p):
    "atom : NAME DOT NAME"
    s = _session()
    if not s.manifest:
        s.report_at(p.lexpos(2), "an operator")
    p[0] = Var(f"{p[1]}.{p[3]}")


def p_atom_pending(p):
    "atom : PENDING LPAREN NAME COMMA NAME RPAREN"
    s = _session()
    if not s.manifest:
        s.report_at(p.lexpos(1), "an expression")
    p[0] = Pending(p[3], p[5])


_PARSER = yacc.yacc(debug=False, write_tables=False, errorlog=yacc.NullLogger())


# ---------------------------------------------------------------------------
# resolution
# ---------------------------------------------------------------------------

def _finish_service(s: _Session, name_at: int, params: Tuple[VarDecl, ...], mode: Callable,
                    members: List[Tuple[str, object]]) -> ServiceSTD:
    name = s.text(name_at)
    body: Dict[str, list] = {"locals": [], "states": [], "initial": [], "exclusions": [], "trans": []}
    for kind, item in members:
        if kind == "trans":
            body[kind].append(item)
        else:
            body[kind].extend(item)

    declared = [s.text(at) for at, _ in body["states"]]
    excluded: Dict[str, List[str]] = {}
    for state_at, services in body["exclusions"]:
        if s.text(state_at) not in declared:
            s.report_at(state_at, "a declared state")
        excluded.setdefault(s.text(state_at), []).extend(s.text(at) for at in services)
    for at in body["initial"]:
        if s.text(at) not in declared:
            s.report_at(at, "a declared state")
    if not body["initial"]:
        s.report_at(name_at, "an 'initial' clause")

    transitions = []
    for transition, source_at, target_at, pattern_at in body["trans"]:
        for endpoint in (source_at, target_at):
            if s.text(endpoint) not in declared:
                s.report_at(endpoint, "a declared state")
        pattern = transition.pattern
        if not pattern.is_return:
            if pattern.service != name:
                s.report_at(pattern_at, f"'{name}' or 'ret'")
            elif len(pattern.binders) != len(params):
                s.report(s.span(pattern_at), f"{len(params)} binder(s)",
                         f"{len(pattern.binders)} binder(s)")
        transitions.append(transition)

    states = tuple(DiagramState(s.text(at), label, tuple(excluded.get(s.text(at), ())))
                   for at, label in body["states"])
    return ServiceSTD(name, mode, params, tuple(body["locals"]), states,
                      tuple(s.text(at) for at in body["initial"]), tuple(transitions))


def resolve_constants(expr: Expr, constants: Optional[Set[str]]) -> Expr:
    """
    Turn bare names that denote enumeration constants into literals.

    With ``constants`` None every unprimed, undotted name is a constant
    (manifest expressions have no variables of their own).
    """
    if isinstance(expr, Var):
        if expr.primed or "." in expr.name or expr.name == SELF:
            return expr
        if constants is None or expr.name in constants:
            return Lit(EnumConst(expr.name))
        return expr
    if isinstance(expr, Unary):
        return Unary(expr.op, resolve_constants(expr.operand, constants))
    if isinstance(expr, Binary):
        return Binary(expr.op, resolve_constants(expr.left, constants),
                      resolve_constants(expr.right, constants))
    return expr


def _resolve_behavior(beh: BehaviorDescription) -> BehaviorDescription:
    constants: Set[str] = set()
    variables: Set[str] = set(beh.attribute_names())
    for decl in beh.attributes:
        if isinstance(decl.domain, EnumDomain):
            constants.update(decl.domain.constants)
    for service in beh.services:
        for decl in service.params + service.locals:
            variables.add(decl.name)
            if isinstance(decl.domain, EnumDomain):
                constants.update(decl.domain.constants)
        for t in service.transitions:
            variables.update(t.pattern.bound_names())
    constants -= variables
    if not constants:
        return beh

    def fix(expr: Expr) -> Expr:
        return resolve_constants(expr, constants)

    services = []
    for service in beh.services:
        states = tuple(replace(state, label=fix(state.label)) for state in service.states)
        transitions = tuple(
            replace(t, pre=fix(t.pre), post=fix(t.post), outputs=tuple(
                replace(o, target=fix(o.target) if o.target is not None else None,
                        args=tuple((name, fix(arg)) for name, arg in o.args))
                for o in t.outputs))
            for t in service.transitions)
        services.append(replace(service, states=states, transitions=transitions))
    return replace(beh, init=fix(beh.init), services=tuple(services))


# ---------------------------------------------------------------------------
# entry points
# ---------------------------------------------------------------------------

def _run(mode: str, text: str, file: str, manifest: bool = False) -> Tuple[object, List[ParseError]]:
    session = _Session(text, file, manifest)
    _SESSION.append(session)
    try:
        result = _PARSER.parse(lexer=session.feed(_MARKERS[mode]), tracking=True)
    finally:
        _SESSION.pop()
    return result, sorted(session.errors, key=_error_order)


def parse(text: str, file: str = "<input>") -> BehaviorDescription:
    """
    Parse a behavior file.

    Args:
        text: Source text
        file: Name used in error spans

    Returns:
        BehaviorDescription: The parsed behavior

    Raises:
        DslSyntaxError: carrying every ParseError found
    """
    beh, errors = _run("behavior", text, file)
    if errors or beh is None:
        logger.debug("%s: %d parse error(s)", file, len(errors))
        raise DslSyntaxError(errors, source=file)
    logger.debug("parsed behavior %s with %d service(s)", beh.name, len(beh.services))
    return beh


def parse_manifest(text: str, file: str = "<input>") -> ManifestSource:
    """
    Parse a run manifest.

    Raises:
        DslSyntaxError: carrying every ParseError found
    """
    source, errors = _run("manifest", text, file, manifest=True)
    if errors or source is None:
        raise DslSyntaxError(errors, source=file)
    return source


def parse_expression(text: str, manifest: bool = False) -> Expr:
    """Parse a single expression (enumeration constants are not resolved)."""
    expr, errors = _run("expression", text, "<expr>", manifest)
    if errors or expr is None:
        raise DslSyntaxError(errors, source="<expr>")
    return expr


def _error_order(error: ParseError) -> Tuple[int, int]:
    return error.span.line, error.span.col
