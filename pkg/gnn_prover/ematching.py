"""
E-matching: trigger selection and matching modulo the e-graph.

A trigger is one or more application subterms of a quantified
expression's body that together mention every variable. Matching
descends a pattern against the e-graph, branching over the members of
each class, and binds variables to classes. Each class-level binding
then stands for every ground term of the right sort in that class.

"""

import itertools
import logging
from dataclasses import dataclass

from gnn_prover import conf
from gnn_prover.engine import check_deadline
from gnn_prover.terms import Kind

logger = logging.getLogger(__name__)

PATTERN_KINDS = frozenset([Kind.FUNCTION_APPLY, Kind.PREDICATE_APPLY])
INSTANCE_KINDS = frozenset([Kind.CONSTANT, Kind.FUNCTION_APPLY])


@dataclass(frozen=True)
class Trigger:
    qe_id: int
    patterns: tuple
    variables: tuple

    @property
    def is_multi_pattern(self):
        return len(self.patterns) > 1


def _pattern_candidates(bank, qe):
    """
    Return ``(term, depth, variables)`` for every non-ground application
    in the body of ``qe``, in order of first occurrence. Atoms have
    depth 0; the sides of an equation start at depth 1.

    """
    seen = set()
    candidates = []

    def visit(term, depth):
        node = bank[term]
        if node.ground or term in seen:
            return
        if node.kind in PATTERN_KINDS:
            seen.add(term)
            candidates.append((term, depth, frozenset(bank.variables_of(term))))
        for child in node.children:
            visit(child, depth + 1)

    for _, atom in qe.body.literals:
        visit(atom, 0)
    return candidates


def select_triggers(bank, qe):
    """
    Return the triggers for ``qe``.

    When some applications cover every variable on their own, each of
    those at the smallest depth becomes a single-pattern trigger.
    Otherwise one multi-pattern is built greedily, taking at each step
    the shallowest application covering most of the uncovered variables.
    The list is empty when the variables cannot be covered.

    """
    variables = frozenset(qe.variables)
    candidates = _pattern_candidates(bank, qe)
    covering = [(term, depth) for term, depth, found in candidates if found >= variables]
    if covering:
        best = min(depth for _, depth in covering)
        return [Trigger(qe.qe_id, (term,), tuple(qe.variables)) for term, depth in covering if depth == best]
    uncovered = set(variables)
    patterns = []
    while uncovered:
        ranked = [(len(found & uncovered), -depth, -index, term, found)
                  for index, (term, depth, found) in enumerate(candidates) if found & uncovered]
        if not ranked:
            logger.debug("No trigger covers every variable of %s", bank.render(qe.term))
            return []
        _, _, _, term, found = max(ranked)
        patterns.append(term)
        uncovered -= found
    return [Trigger(qe.qe_id, tuple(patterns), tuple(qe.variables))]


def ground_class(eg, bank, term):
    """
    Return the class of the ground ``term`` modulo ``eg`` without adding
    it, or ``None`` when nothing in the e-graph is congruent to it.

    """
    if term in eg:
        return eg.find(term)
    node = bank[term]
    child_classes = []
    for child in node.children:
        found = ground_class(eg, bank, child)
        if found is None:
            return None
        child_classes.append(found)
    return eg.lookup(node.kind, node.symbol, child_classes)


def _match(eg, bank, pattern, cls, binding):
    node = bank[pattern]
    if node.ground:
        if ground_class(eg, bank, pattern) == cls:
            yield binding
        return
    if node.kind == Kind.BOUND_VARIABLE:
        bound = binding.get(pattern)
        if bound is None:
            extended = dict(binding)
            extended[pattern] = cls
            yield extended
        elif bound == cls:
            yield binding
        return
    for member in eg.members(cls):
        candidate = bank[member]
        if candidate.kind == node.kind and candidate.symbol == node.symbol:
            yield from _match_children(eg, bank, node.children, candidate.children, binding)


def _match_children(eg, bank, patterns, children, binding):
    if not patterns:
        yield binding
        return
    for extended in _match(eg, bank, patterns[0], eg.find(children[0]), binding):
        yield from _match_children(eg, bank, patterns[1:], children[1:], extended)


def _match_top(eg, bank, pattern, binding):
    node = bank[pattern]
    for term in sorted(eg.terms_with_symbol(node.symbol)):
        candidate = bank[term]
        if candidate.kind == node.kind:
            yield from _match_children(eg, bank, node.children, candidate.children, binding)


def _match_patterns(eg, bank, patterns, binding):
    if not patterns:
        yield binding
        return
    for extended in _match_top(eg, bank, patterns[0], binding):
        yield from _match_patterns(eg, bank, patterns[1:], extended)


def _instances(eg, bank, variable, cls):
    sort = bank[variable].sort
    return sorted(member for member in eg.members(cls)
                  if bank[member].kind in INSTANCE_KINDS and bank[member].sort == sort)


def iter_ematch(trigger, eg, bank, deadline=None):
    """
    Yield the tuples of ground terms (ordered as ``trigger.variables``)
    for which each pattern of the trigger, instantiated with them, is
    congruent to an existing ground term.

    Matches are produced one at a time, without duplicates, in the order
    the patterns' top-level terms were created. ``SearchTimeout`` is
    raised once ``deadline`` has passed.

    """
    if eg is None or not len(eg):
        return
    seen = set()
    for binding in _match_patterns(eg, bank, trigger.patterns, {}):
        check_deadline(deadline)
        key = tuple(binding.get(variable) for variable in trigger.variables)
        if key in seen or None in key:
            continue
        seen.add(key)
        choices = [_instances(eg, bank, variable, cls) for variable, cls in zip(trigger.variables, key)]
        yield from itertools.product(*choices)


def ematch(trigger, eg, bank):
    """
    Return every match of ``trigger``, sorted.

    """
    return sorted(iter_ematch(trigger, eg, bank))


def ematch_round(qes, eg, bank, done=None, cap=None, deadline=None):
    """
    Return the new matches of every trigger of every quantified
    expression, at most ``cap`` per expression. Matching stops as soon
    as an expression reaches its cap.

    """
    if cap is None:
        cap = conf.get('MATCH_CAP')
    proposals = []
    for qe in qes:
        qe_done = qe.done_instantiations if done is None else done.get(qe.qe_id, set())
        chosen = []
        seen = set()
        for trigger in select_triggers(bank, qe):
            if len(chosen) >= cap:
                break
            for terms in iter_ematch(trigger, eg, bank, deadline):
                if terms in qe_done or terms in seen:
                    continue
                seen.add(terms)
                chosen.append(terms)
                if len(chosen) >= cap:
                    logger.debug("Quantified expression %d reached the cap of %d matches", qe.qe_id, cap)
                    break
        proposals.extend((qe.qe_id, terms) for terms in chosen)
    return proposals
