"""
Enumerative instantiation with the age heuristic.

Every variable ranges over the ground terms of its sort in ascending
age, and tuples are visited lexicographically over those lists with the
last variable varying fastest. Each round proposes the first tuple not
yet done for every quantified expression, so a single round never adds
more than one instantiation per expression.

"""

import itertools


def candidate_lists(qe, bank):
    return [bank.ground_terms_of_sort(bank[variable].sort) for variable in qe.variables]


def enum_next_tuple(qe, bank, done=None, candidates=None):
    """
    Return the least tuple of ground terms for ``qe`` that is not in
    ``done``, or ``None`` when every tuple over the current bank has
    been done.

    ``candidates`` replaces the per-variable candidate lists; the
    randomized dry run passes shuffled copies here.

    """
    if done is None:
        done = qe.done_instantiations
    if candidates is None:
        candidates = candidate_lists(qe, bank)
    for terms in itertools.product(*candidates):
        if terms not in done:
            return terms
    return None


def enum_round(qes, bank, done=None, candidates=None):
    """
    Propose one new tuple for every quantified expression that is not
    exhausted.

    ``done`` maps ``qe_id`` to a set of tuples and defaults to each
    expression's own history; ``candidates`` maps ``qe_id`` to
    per-variable candidate lists.

    """
    proposals = []
    for qe in qes:
        qe_done = qe.done_instantiations if done is None else done.get(qe.qe_id, set())
        qe_candidates = None if candidates is None else candidates.get(qe.qe_id)
        terms = enum_next_tuple(qe, bank, qe_done, qe_candidates)
        if terms is not None:
            proposals.append((qe.qe_id, terms))
    return proposals
