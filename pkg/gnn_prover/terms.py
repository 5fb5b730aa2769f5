"""
The term bank: hash-consed terms, sorts, clauses and quantified
expressions, shared by every other part of the prover.

Terms are never built directly; every node goes through
``TermBank.mk_term``, which returns the existing handle for a
structurally identical node and otherwise allocates a fresh one with
the next age. A term's handle is a dense integer, so the bank doubles as
the node table of the proof-state graph.

Example
-------

Building the same application twice yields the same handle::

    bank = TermBank()
    s = bank.declare_sort('S')
    bank.declare_symbol('c', (), s)
    bank.declare_symbol('f', (s,), s)
    c = bank.mk_apply('c')
    assert bank.mk_apply('f', [c]) == bank.mk_apply('f', [c])

"""

import enum
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Optional

from gnn_prover.exceptions import ArityError, SortError, SubstitutionError, TermError


class Kind(enum.IntEnum):
    VARIABLE = 0
    BOUND_VARIABLE = 1
    CONSTANT = 2
    FUNCTION_APPLY = 3
    PREDICATE_APPLY = 4
    EQUALITY = 5
    NOT = 6
    OR = 7
    FORALL = 8
    TRUE = 9
    FALSE = 10


KIND_VOCABULARY = tuple(kind.name for kind in Kind)

ATOM_KINDS = frozenset([Kind.PREDICATE_APPLY, Kind.EQUALITY])
APPLY_KINDS = frozenset([Kind.CONSTANT, Kind.FUNCTION_APPLY, Kind.PREDICATE_APPLY])


@dataclass(frozen=True)
class Sort:
    name: str

    def __str__(self):
        return self.name


BOOL = Sort('Bool')


@dataclass(frozen=True)
class Symbol:
    name: str
    arg_sorts: tuple
    result_sort: Sort

    @property
    def arity(self):
        return len(self.arg_sorts)

    @property
    def is_predicate(self):
        return self.result_sort == BOOL


@dataclass(frozen=True)
class TermNode:
    id: int
    kind: Kind
    symbol: Optional[str]
    children: tuple
    sort: Sort
    age: int
    ground: bool
    # Tells apart equally named bound variables of different quantified
    # expressions.
    scope: Optional[int] = None


@dataclass(frozen=True)
class Clause:
    """
    A disjunction of literals, each a ``(sign, atom)`` pair where
    ``atom`` is the handle of a ``PREDICATE_APPLY`` or ``EQUALITY``
    node. The empty clause is false.

    """
    literals: tuple = ()

    def atoms(self):
        return [atom for _, atom in self.literals]


@dataclass
class QuantifiedExpression:
    """
    A universally quantified clause asserted at top level.

    ``done_instantiations`` holds every tuple of ground terms the
    expression has been instantiated with so far; strategies consult it
    so that no instantiation is ever repeated.

    """
    qe_id: int
    variables: tuple
    body: Clause
    done_instantiations: set = field(default_factory=set)
    term: Optional[int] = None
    name: Optional[str] = None


class TermBank:
    """
    Owns every sort, symbol and term of one problem instance.

    """
    def __init__(self):
        self.sorts = {}
        self.signature = {}
        self._nodes = []
        self._index = {}
        self._ground_by_sort = defaultdict(list)
        self._by_symbol = defaultdict(list)
        self.true = self.mk_term(Kind.TRUE)
        self.false = self.mk_term(Kind.FALSE)

    def __len__(self):
        return len(self._nodes)

    def __getitem__(self, term):
        return self._nodes[term]

    def __iter__(self):
        return iter(self._nodes)

    def declare_sort(self, name):
        if name == BOOL.name:
            return BOOL
        sort = self.sorts.get(name)
        if sort is None:
            sort = self.sorts[name] = Sort(name)
        return sort

    def declare_symbol(self, name, arg_sorts, result_sort):
        symbol = Symbol(name, tuple(arg_sorts), result_sort)
        existing = self.signature.get(name)
        if existing is not None and existing != symbol:
            raise TermError("Symbol '%s' is already declared with a different signature" % name)
        self.signature[name] = symbol
        return symbol

    def mk_term(self, kind, symbol=None, children=(), sort=None, scope=None):
        """
        Return the handle of the node ``kind(symbol, children)``,
        creating it (with the next age) if it does not exist yet.

        ``sort`` is only consulted for variables; every other kind
        derives its sort from the symbol or from the connective. Raises
        ``ArityError`` or ``SortError`` when the node would be
        ill-formed.

        """
        kind = Kind(kind)
        children = tuple(children)
        for child in children:
            if not 0 <= child < len(self._nodes):
                raise TermError("Unknown child term %r" % child)
        result_sort = self._check(kind, symbol, children, sort)
        if kind not in (Kind.BOUND_VARIABLE, Kind.VARIABLE):
            scope = None
        key = (kind, symbol, children, scope, result_sort if kind in (Kind.BOUND_VARIABLE, Kind.VARIABLE) else None)
        existing = self._index.get(key)
        if existing is not None:
            return existing
        if kind in (Kind.BOUND_VARIABLE, Kind.VARIABLE, Kind.FORALL):
            ground = False
        else:
            ground = all(self._nodes[child].ground for child in children)
        term = len(self._nodes)
        node = TermNode(term, kind, symbol, children, result_sort, term, ground, scope)
        self._nodes.append(node)
        self._index[key] = term
        if ground and kind in (Kind.CONSTANT, Kind.FUNCTION_APPLY):
            self._ground_by_sort[result_sort].append(term)
        if kind in APPLY_KINDS:
            self._by_symbol[symbol].append(term)
        return term

    def _check(self, kind, symbol, children, sort):
        nodes = self._nodes
        if kind in (Kind.BOUND_VARIABLE, Kind.VARIABLE):
            if children:
                raise ArityError("Variables take no children")
            if sort is None or sort == BOOL:
                raise SortError("Variable '%s' needs an uninterpreted sort" % symbol)
            return sort
        if kind in APPLY_KINDS:
            decl = self.signature.get(symbol)
            if decl is None:
                raise TermError("Unknown symbol '%s'" % symbol)
            if decl.is_predicate != (kind == Kind.PREDICATE_APPLY):
                raise TermError("'%s' cannot be used as %s" % (symbol, kind.name))
            if kind == Kind.CONSTANT and decl.arity:
                raise ArityError("'%s' takes %d arguments, not a constant" % (symbol, decl.arity))
            if kind == Kind.FUNCTION_APPLY and not decl.arity:
                raise ArityError("'%s' is a constant" % symbol)
            if len(children) != decl.arity:
                raise ArityError("'%s' takes %d arguments, got %d" % (symbol, decl.arity, len(children)))
            for position, (child, expected) in enumerate(zip(children, decl.arg_sorts)):
                if nodes[child].sort != expected:
                    raise SortError("Argument %d of '%s' must have sort %s, not %s" % (
                        position + 1, symbol, expected, nodes[child].sort))
            return decl.result_sort
        if kind == Kind.EQUALITY:
            if len(children) != 2:
                raise ArityError("Equality takes two sides")
            left, right = nodes[children[0]].sort, nodes[children[1]].sort
            if left != right or left == BOOL:
                raise SortError("Cannot equate terms of sorts %s and %s" % (left, right))
            return BOOL
        if kind == Kind.NOT:
            if len(children) != 1 or nodes[children[0]].kind not in ATOM_KINDS:
                raise TermError("Negation applies to exactly one atom")
            return BOOL
        if kind == Kind.OR:
            for child in children:
                if nodes[child].sort != BOOL:
                    raise SortError("Disjuncts must be Boolean")
            return BOOL
        if kind == Kind.FORALL:
            if not children or nodes[children[-1]].sort != BOOL:
                raise TermError("A quantifier needs variables and a Boolean body")
            for child in children[:-1]:
                if nodes[child].kind != Kind.BOUND_VARIABLE:
                    raise TermError("Only bound variables can be quantified")
            return BOOL
        if children:
            raise ArityError("%s takes no children" % kind.name)
        return BOOL

    def mk_apply(self, name, children=()):
        """
        Build ``name(children)`` choosing the constant, function or
        predicate kind from the declared symbol.

        """
        decl = self.signature.get(name)
        if decl is None:
            raise TermError("Unknown symbol '%s'" % name)
        if decl.is_predicate:
            kind = Kind.PREDICATE_APPLY
        elif decl.arity or children:
            kind = Kind.FUNCTION_APPLY
        else:
            kind = Kind.CONSTANT
        return self.mk_term(kind, name, children)

    def mk_equality(self, left, right):
        return self.mk_term(Kind.EQUALITY, None, (left, right))

    def mk_bound_variable(self, name, sort, scope):
        return self.mk_term(Kind.BOUND_VARIABLE, name, (), sort=sort, scope=scope)

    def mk_literal(self, sign, atom):
        return atom if sign else self.mk_term(Kind.NOT, None, (atom,))

    def clause_term(self, clause):
        """
        Return the ``OR`` node representing ``clause`` (``FALSE`` for
        the empty clause).

        """
        if not clause.literals:
            return self.false
        return self.mk_term(Kind.OR, None, [self.mk_literal(sign, atom) for sign, atom in clause.literals])

    def quantifier_term(self, qe):
        return self.mk_term(Kind.FORALL, None, tuple(qe.variables) + (self.clause_term(qe.body),))

    def ground_terms_of_sort(self, sort):
        """
        Return every ground term of ``sort`` in ascending age. Unknown
        sorts have no terms.

        """
        return list(self._ground_by_sort.get(sort, ()))

    def terms_with_symbol(self, name):
        return list(self._by_symbol.get(name, ()))

    def variables_of(self, term):
        """
        Return the bound variables occurring in ``term``, in order of
        first occurrence.

        """
        seen = []
        stack = [term]
        while stack:
            node = self._nodes[stack.pop()]
            if node.ground:
                continue
            if node.kind == Kind.BOUND_VARIABLE:
                if node.id not in seen:
                    seen.append(node.id)
                continue
            stack.extend(reversed(node.children))
        return seen

    def subterms(self, term):
        """
        Return ``term`` and all of its subterms, children before
        parents, without duplicates.

        """
        order, seen = [], set()
        stack = [(term, False)]
        while stack:
            current, expanded = stack.pop()
            if expanded:
                order.append(current)
                continue
            if current in seen:
                continue
            seen.add(current)
            stack.append((current, True))
            for child in reversed(self._nodes[current].children):
                if child not in seen:
                    stack.append((child, False))
        return order

    def render(self, term):
        """
        Render ``term`` in the native S-expression syntax.

        """
        node = self._nodes[term]
        if node.kind in (Kind.BOUND_VARIABLE, Kind.VARIABLE, Kind.CONSTANT):
            return node.symbol
        if node.kind == Kind.PREDICATE_APPLY and not node.children:
            return node.symbol
        if node.kind in (Kind.TRUE, Kind.FALSE):
            return node.kind.name.lower()
        head = {
            Kind.EQUALITY: '=',
            Kind.NOT: 'not',
            Kind.OR: 'or',
            Kind.FORALL: 'forall',
        }.get(node.kind, node.symbol)
        return '(%s)' % ' '.join([head] + [self.render(child) for child in node.children])

    def render_clause(self, clause):
        literals = [self.render(self.mk_literal(sign, atom)) for sign, atom in clause.literals]
        if len(literals) == 1:
            return literals[0]
        return '(%s)' % ' '.join(['or'] + literals)


def check_substitution(bank, qe, substitution):
    """
    Raise ``SubstitutionError`` unless ``substitution`` maps every
    variable of ``qe`` to a ground term of the variable's sort.

    """
    for variable in qe.variables:
        if variable not in substitution:
            raise SubstitutionError("Variable '%s' is not mapped" % bank[variable].symbol)
        image = bank[substitution[variable]]
        if not image.ground:
            raise SubstitutionError("Variable '%s' is mapped to a non-ground term" % bank[variable].symbol)
        if image.sort != bank[variable].sort:
            raise SubstitutionError("Variable '%s' of sort %s is mapped to a term of sort %s" % (
                bank[variable].symbol, bank[variable].sort, image.sort))


def substitute(bank, term, substitution, _memo=None):
    """
    Replace the bound variables of ``term`` simultaneously, interning
    every new ground subterm.

    """
    memo = {} if _memo is None else _memo
    if term in memo:
        return memo[term]
    node = bank[term]
    if node.ground:
        result = term
    elif node.kind == Kind.BOUND_VARIABLE:
        result = substitution.get(term, term)
    else:
        children = [substitute(bank, child, substitution, memo) for child in node.children]
        result = bank.mk_term(node.kind, node.symbol, children, sort=node.sort, scope=node.scope)
    memo[term] = result
    return result


def apply_substitution(bank, qe, substitution):
    """
    Return the ground clause obtained by instantiating ``qe`` with
    ``substitution`` (a mapping from variable handles to ground term
    handles).

    """
    check_substitution(bank, qe, substitution)
    memo = {}
    literals = tuple((sign, substitute(bank, atom, substitution, memo)) for sign, atom in qe.body.literals)
    return Clause(literals)


def instantiate(bank, qe, terms):
    """
    Shorthand for ``apply_substitution`` with a tuple of terms given in
    the order of ``qe.variables``.

    """
    if len(terms) != len(qe.variables):
        raise SubstitutionError("Expected %d terms, got %d" % (len(qe.variables), len(terms)))
    return apply_substitution(bank, qe, dict(zip(qe.variables, terms)))
