"""
Readers for problems in the native clausal S-expression format and in
the ``cnf`` subset of TPTP.

Both readers build a fresh ``TermBank`` and return a ``Problem``; any
problem with the input is reported by raising ``ParseError`` (or its
subclass ``UnsupportedConstruct``) carrying the line and column of the
offending text.

The native format
-----------------

::

    (declare-sort S)
    (declare-fun c () S)
    (declare-fun f (S) S)
    (declare-fun p (S) Bool)
    (assert (p c))
    (assert-forall ((x S)) (or (not (p x)) (p (f x))))

A clause is either ``(or LITERAL*)`` or a single literal; a literal is
an atom or ``(not ATOM)``; an atom is ``(= TERM TERM)`` or a predicate
application. ``;`` starts a comment.

"""

import logging
import os
import re
from dataclasses import dataclass, field

from lark import Lark, Token, Transformer, v_args
from lark.exceptions import UnexpectedCharacters, UnexpectedInput, UnexpectedToken, VisitError

from gnn_prover.exceptions import ParseError, TermError, UnsupportedConstruct
from gnn_prover.terms import BOOL, Clause, QuantifiedExpression, TermBank

logger = logging.getLogger(__name__)

TPTP_INDIVIDUAL = '$i'


@dataclass
class Problem:
    """
    A parsed problem: its term bank, ground clauses and quantified
    expressions.

    """
    name: str
    bank: TermBank = field(default_factory=TermBank)
    ground_clauses: list = field(default_factory=list)
    quantified: list = field(default_factory=list)

    @property
    def sorts(self):
        return list(self.bank.sorts.values())

    @property
    def symbols(self):
        return list(self.bank.signature.values())

    def add_ground_clause(self, clause):
        self.ground_clauses.append(clause)
        return clause

    def add_quantified(self, variables, body, name=None):
        qe = QuantifiedExpression(len(self.quantified), tuple(variables), body, name=name)
        qe.term = self.bank.quantifier_term(qe)
        self.quantified.append(qe)
        return qe


NATIVE_GRAMMAR = r"""
    start: _item*
    _item: list | SYMBOL
    list: LPAR _item* RPAR

    LPAR: "("
    RPAR: ")"
    SYMBOL: /[^\s();]+/
    COMMENT: /;[^\n]*/

    %import common.WS
    %ignore WS
    %ignore COMMENT
"""

_native_parser = Lark(NATIVE_GRAMMAR, parser='lalr', keep_all_tokens=True)


class _List(list):
    line = None
    column = None


class _SExpressions(Transformer):
    def start(self, items):
        return items

    def list(self, items):
        result = _List(items[1:-1])
        result.line, result.column = items[0].line, items[0].column
        return result


def _position(item):
    return getattr(item, 'line', None), getattr(item, 'column', None)


def _error(message, item, cls=ParseError):
    line, column = _position(item)
    return cls(message, line, column)


def _lark_error(exc, text):
    line, column = getattr(exc, 'line', None), getattr(exc, 'column', None)
    if line in (None, -1):
        line, column = text.count('\n') + 1, len(text.rsplit('\n', 1)[-1]) + 1
    if isinstance(exc, UnexpectedCharacters):
        message = "Unexpected character %r" % exc.char
    elif isinstance(exc, UnexpectedToken) and exc.token.type == '$END':
        message = "Unexpected end of input"
    elif isinstance(exc, UnexpectedToken):
        message = "Unexpected %r" % str(exc.token)
    else:
        message = "Malformed input"
    return ParseError(message, line, column)


class _NativeBuilder:
    """
    Turns the S-expressions of a native problem into a ``Problem``.

    """
    def __init__(self, name):
        self.problem = Problem(name)
        self.bank = self.problem.bank

    def build(self, commands):
        for command in commands:
            if not isinstance(command, _List) or not command or not isinstance(command[0], Token):
                raise _error("Expected a command", command)
            handler = {
                'declare-sort': self.declare_sort,
                'declare-fun': self.declare_fun,
                'assert': self.assert_clause,
                'assert-forall': self.assert_forall,
            }.get(str(command[0]))
            if handler is None:
                raise _error("Unknown command '%s'" % command[0], command)
            handler(command)
        return self.problem

    def _sort(self, item):
        if not isinstance(item, Token):
            raise _error("Expected a sort name", item)
        if item == BOOL.name:
            return BOOL
        sort = self.bank.sorts.get(str(item))
        if sort is None:
            raise _error("Unknown sort '%s'" % item, item)
        return sort

    def declare_sort(self, command):
        if len(command) not in (2, 3) or not isinstance(command[1], Token) or (len(command) == 3 and command[2] != '0'):
            raise _error("Malformed declare-sort", command)
        self.bank.declare_sort(str(command[1]))

    def declare_fun(self, command):
        if len(command) != 4 or not isinstance(command[1], Token) or not isinstance(command[2], _List):
            raise _error("Malformed declare-fun", command)
        arg_sorts = [self._sort(item) for item in command[2]]
        if BOOL in arg_sorts:
            raise _error("Arguments of '%s' cannot be Boolean" % command[1], command)
        try:
            self.bank.declare_symbol(str(command[1]), arg_sorts, self._sort(command[3]))
        except TermError as exc:
            raise _error(str(exc), command)

    def assert_clause(self, command):
        if len(command) != 2:
            raise _error("Malformed assert", command)
        self.problem.add_ground_clause(self.clause(command[1], {}))

    def assert_forall(self, command):
        if len(command) != 3 or not isinstance(command[1], _List) or not command[1]:
            raise _error("Malformed assert-forall", command)
        scope = len(self.problem.quantified)
        variables, names = [], {}
        for binding in command[1]:
            if not isinstance(binding, _List) or len(binding) != 2 or not isinstance(binding[0], Token):
                raise _error("Malformed variable binding", binding)
            sort = self._sort(binding[1])
            if sort == BOOL:
                raise _error("Variables cannot be Boolean", binding)
            if str(binding[0]) in names:
                raise _error("Duplicate variable '%s'" % binding[0], binding)
            variable = self.bank.mk_bound_variable(str(binding[0]), sort, scope)
            names[str(binding[0])] = variable
            variables.append(variable)
        body = self.clause(command[2], names)
        self.problem.add_quantified(variables, body)

    def clause(self, item, names):
        if isinstance(item, _List) and item and item[0] == 'or':
            return Clause(tuple(self.literal(literal, names) for literal in item[1:]))
        return Clause((self.literal(item, names),))

    def literal(self, item, names):
        if isinstance(item, _List) and item and item[0] == 'not':
            if len(item) != 2:
                raise _error("Malformed negation", item)
            return (False, self.atom(item[1], names))
        return (True, self.atom(item, names))

    def atom(self, item, names):
        if isinstance(item, _List) and item and item[0] in ('and', 'or', 'not', 'forall', 'exists', '=>', 'ite', 'xor'):
            raise _error("Non-clausal body: '%s' cannot appear here" % item[0], item)
        try:
            if isinstance(item, _List) and item and item[0] == '=':
                if len(item) != 3:
                    raise _error("Equality takes two sides", item)
                return self.bank.mk_equality(self.term(item[1], names), self.term(item[2], names))
            head, args = (item, []) if isinstance(item, Token) else (item[0] if item else None, item[1:])
            if not isinstance(head, Token):
                raise _error("Expected an atom", item)
            decl = self.bank.signature.get(str(head))
            if decl is None:
                raise _error("Unknown symbol '%s'" % head, head)
            if not decl.is_predicate:
                raise _error("'%s' is not a predicate" % head, head)
            return self.bank.mk_apply(str(head), [self.term(arg, names) for arg in args])
        except TermError as exc:
            raise _error(str(exc), item)

    def term(self, item, names):
        if isinstance(item, Token):
            if str(item) in names:
                return names[str(item)]
            head, args = item, []
        elif item and isinstance(item[0], Token):
            head, args = item[0], item[1:]
            if not args:
                raise _error("Empty application of '%s'" % head, item)
        else:
            raise _error("Expected a term", item)
        decl = self.bank.signature.get(str(head))
        if decl is None:
            raise _error("Unknown symbol '%s'" % head, head)
        if decl.is_predicate:
            raise _error("Predicate '%s' used as a term" % head, head)
        children = [self.term(arg, names) for arg in args]
        try:
            return self.bank.mk_apply(str(head), children)
        except TermError as exc:
            raise _error(str(exc), item)


def parse_native(text, name='problem'):
    """
    Parse a problem in the native S-expression format.

    """
    try:
        tree = _native_parser.parse(text)
    except UnexpectedInput as exc:
        raise _lark_error(exc, text)
    commands = _SExpressions().transform(tree)
    problem = _NativeBuilder(name).build(commands)
    logger.debug("Parsed %s: %d ground clauses, %d quantified expressions",
                 name, len(problem.ground_clauses), len(problem.quantified))
    return problem


def format_native(problem):
    """
    Print ``problem`` in the native format; ``parse_native`` reads the
    result back into a structurally identical problem.

    """
    bank = problem.bank
    lines = ['(declare-sort %s)' % sort.name for sort in problem.sorts]
    for symbol in problem.symbols:
        lines.append('(declare-fun %s (%s) %s)' % (
            symbol.name, ' '.join(sort.name for sort in symbol.arg_sorts), symbol.result_sort.name))
    for clause in problem.ground_clauses:
        lines.append('(assert %s)' % bank.render_clause(clause))
    for qe in problem.quantified:
        bindings = ' '.join('(%s %s)' % (bank[v].symbol, bank[v].sort.name) for v in qe.variables)
        lines.append('(assert-forall (%s) %s)' % (bindings, bank.render_clause(qe.body)))
    return '\n'.join(lines) + '\n'


TPTP_GRAMMAR = r"""
    start: annotated*
    annotated: "cnf" "(" name "," name "," formula annotations ")" "."
    annotations: ("," general_term)*
    ?formula: disjunction | "(" disjunction ")"
    disjunction: literal ("|" literal)*
    literal: term                   -> positive
           | "~" term               -> negative
           | term "=" term          -> equation
           | term "!=" term         -> disequation
           | "~" term "=" term      -> negated_equation
    term: VARIABLE                              -> variable
        | functor                               -> constant
        | functor "(" term ("," term)* ")"      -> application
    ?functor: LOWER_WORD | SINGLE_QUOTED | INTEGER | DOLLAR_WORD
    ?name: LOWER_WORD | SINGLE_QUOTED | INTEGER
    general_term: general_data (":" general_term)? | general_list
    general_data: (LOWER_WORD | SINGLE_QUOTED | INTEGER | VARIABLE | DOLLAR_WORD) ("(" general_term ("," general_term)* ")")?
    general_list: "[" (general_term ("," general_term)*)? "]"

    VARIABLE: /[A-Z][A-Za-z0-9_]*/
    LOWER_WORD: /[a-z][A-Za-z0-9_]*/
    DOLLAR_WORD: /\$\$?[a-z][A-Za-z0-9_]*/
    SINGLE_QUOTED: /'(\\.|[^'\\])*'/
    INTEGER: /[+-]?[0-9]+/
    COMMENT: /%[^\n]*/
    BLOCK_COMMENT: /\/\*(.|\n)*?\*\//

    %import common.WS
    %ignore WS
    %ignore COMMENT
    %ignore BLOCK_COMMENT
"""

_tptp_parser = Lark(TPTP_GRAMMAR, parser='lalr', propagate_positions=True)

UNSUPPORTED_TPTP = re.compile(r"(fof|tff|thf|tcf|tpi|include)\s*\(")

_TRUE_LITERAL = object()


class _TptpClauses(Transformer):
    """
    Reduces the parse tree to ``(name, literals, line, column)`` tuples;
    literals are ``(sign, atom)`` with atoms as nested tuples
    ``('=', left, right)`` or ``(functor, args)`` and variables as
    ``('?', name)``.

    ``$false`` literals are dropped from their clause and clauses holding
    a true literal are dropped altogether.

    """
    def start(self, clauses):
        return [clause for clause in clauses if clause is not None]

    @v_args(meta=True)
    def annotated(self, meta, children):
        name, _role, literals = children[0], children[1], children[2]
        if literals is None:
            return None
        return (str(name), literals, meta.line, meta.column)

    def annotations(self, children):
        return None

    def general_term(self, children):
        return None

    def general_data(self, children):
        return None

    def general_list(self, children):
        return None

    def disjunction(self, literals):
        if any(literal is _TRUE_LITERAL for literal in literals):
            return None
        return [literal for literal in literals if literal is not None]

    def positive(self, children):
        if children[0] == ('$false', ()):
            return None
        if children[0] == ('$true', ()):
            return _TRUE_LITERAL
        return (True, children[0])

    def negative(self, children):
        if children[0] == ('$true', ()):
            return None
        if children[0] == ('$false', ()):
            return _TRUE_LITERAL
        return (False, children[0])

    def equation(self, children):
        return (True, ('=', children[0], children[1]))

    def disequation(self, children):
        return (False, ('=', children[0], children[1]))

    def negated_equation(self, children):
        return (False, ('=', children[0], children[1]))

    def variable(self, children):
        return ('?', str(children[0]))

    def constant(self, children):
        return (str(children[0]), ())

    def application(self, children):
        return (str(children[0]), tuple(children[1:]))


def _collect_tptp_signature(clauses):
    predicates, functions = {}, {}

    def visit_term(term, line, column):
        if term[0] == '?':
            return
        functor, args = term
        if functor in predicates:
            raise ParseError("'%s' is used both as a predicate and a function" % functor, line, column)
        if functions.setdefault(functor, len(args)) != len(args):
            raise ParseError("'%s' is used with arities %d and %d" % (functor, functions[functor], len(args)), line, column)
        for arg in args:
            visit_term(arg, line, column)

    for _, literals, line, column in clauses:
        for _, atom in literals:
            if atom[0] == '=':
                visit_term(atom[1], line, column)
                visit_term(atom[2], line, column)
                continue
            functor, args = atom
            if functor in functions:
                raise ParseError("'%s' is used both as a predicate and a function" % functor, line, column)
            if predicates.setdefault(functor, len(args)) != len(args):
                raise ParseError("'%s' is used with arities %d and %d" % (functor, predicates[functor], len(args)), line, column)
            for arg in args:
                visit_term(arg, line, column)
    return predicates, functions


def _offset(exc):
    position = getattr(exc, 'pos_in_stream', None)
    if position is None or position < 0:
        return 0
    return position


def parse_tptp_cnf(text, name='problem'):
    """
    Parse a TPTP problem made only of ``cnf`` formulas. Every clause
    with a variable becomes a quantified expression over its variables
    (in order of first occurrence); the others are ground clauses.

    """
    try:
        tree = _tptp_parser.parse(text)
    except UnexpectedInput as exc:
        unsupported = UNSUPPORTED_TPTP.match(text, _offset(exc))
        if unsupported:
            raise UnsupportedConstruct("Unsupported TPTP construct '%s'" % unsupported.group(1), exc.line, exc.column)
        raise _lark_error(exc, text)
    try:
        clauses = _TptpClauses().transform(tree)
    except VisitError as exc:
        raise ParseError(str(exc.orig_exc))
    predicates, functions = _collect_tptp_signature(clauses)

    problem = Problem(name)
    bank = problem.bank
    individual = bank.declare_sort(TPTP_INDIVIDUAL)
    for functor, arity in functions.items():
        bank.declare_symbol(functor, (individual,) * arity, individual)
    for functor, arity in predicates.items():
        bank.declare_symbol(functor, (individual,) * arity, BOOL)

    for clause_name, literals, line, column in clauses:
        scope = len(problem.quantified)
        names = {}

        def build(term):
            if term[0] == '?':
                if term[1] not in names:
                    names[term[1]] = bank.mk_bound_variable(term[1], individual, scope)
                return names[term[1]]
            functor, args = term
            return bank.mk_apply(functor, [build(arg) for arg in args])

        try:
            body = []
            for sign, atom in literals:
                if atom[0] == '=':
                    body.append((sign, bank.mk_equality(build(atom[1]), build(atom[2]))))
                else:
                    body.append((sign, bank.mk_apply(atom[0], [build(arg) for arg in atom[1]])))
        except TermError as exc:
            raise ParseError(str(exc), line, column)
        clause = Clause(tuple(body))
        if names:
            problem.add_quantified(list(names.values()), clause, name=clause_name)
        else:
            problem.add_ground_clause(clause)
    logger.debug("Parsed %s: %d ground clauses, %d quantified expressions",
                 name, len(problem.ground_clauses), len(problem.quantified))
    return problem


def read_problem(path):
    """
    Read the problem stored at ``path``, choosing the reader from the
    file extension (``.p`` and ``.tptp`` are TPTP, anything else is
    native).

    """
    with open(path, encoding='utf-8') as handle:
        text = handle.read()
    stem, extension = os.path.splitext(os.path.basename(path))
    if extension in ('.p', '.tptp'):
        return parse_tptp_cnf(text, name=stem)
    return parse_native(text, name=stem)
