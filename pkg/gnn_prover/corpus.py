"""
Synthetic problem corpora and corpus splits.

Needle problems
    A sort ``S`` with constants ``c1 .. cm`` (each asserted to satisfy
    ``p``), a marker constant ``mark`` and the fact ``key(mark, n)`` for
    one needle ``n`` among the ``c``'s. The quantified expression
    ``forall x. not key(mark, x)`` is refuted only by ``x := n``; a
    second one, ``forall x. not p(x) or q(x)``, never helps. E-matching
    on ``key(mark, x)`` finds the needle at once, while age-order
    enumeration needs as many rounds as the needle's position.

Trigger-rich problems
    Facts ``p(c1) .. p(cm)``, one fact ``not r(cj)`` and the quantified
    expression ``forall x. not p(x) or r(x)``: the trigger ``p(x)`` has
    ``m`` matches, of which only one is needed.

Problems are written in the native format, one ``.sexp`` file each.

"""

import logging
import os

import numpy as np

from gnn_prover.parser import Problem, format_native
from gnn_prover.terms import BOOL, Clause

logger = logging.getLogger(__name__)

EXTENSION = '.sexp'


def _write(problem, out_dir):
    path = os.path.join(out_dir, problem.name + EXTENSION)
    with open(path, 'w', encoding='utf-8') as handle:
        handle.write(format_native(problem))
    return path


def needle_problem(name, n_distractors, needle_position, use_decoy=True):
    """
    Build one needle problem whose needle is the ``needle_position``-th
    oldest of the ``n_distractors + 1`` constants.

    """
    if not 0 <= needle_position <= n_distractors:
        raise ValueError("The needle position must lie in 0..%d" % n_distractors)
    problem = Problem(name)
    bank = problem.bank
    sort = bank.declare_sort('S')
    constants = ['c%d' % (index + 1) for index in range(n_distractors + 1)]
    for constant in constants + ['mark']:
        bank.declare_symbol(constant, (), sort)
    bank.declare_symbol('p', (sort,), BOOL)
    bank.declare_symbol('q', (sort,), BOOL)
    bank.declare_symbol('key', (sort, sort), BOOL)
    for constant in constants:
        problem.add_ground_clause(Clause(((True, bank.mk_apply('p', [bank.mk_apply(constant)])),)))
    needle = bank.mk_apply(constants[needle_position])
    mark = bank.mk_apply('mark')
    problem.add_ground_clause(Clause(((True, bank.mk_apply('key', [mark, needle])),)))
    x = bank.mk_bound_variable('x', sort, 0)
    problem.add_quantified([x], Clause(((False, bank.mk_apply('key', [mark, x])),)), name='needle')
    if use_decoy:
        y = bank.mk_bound_variable('x', sort, 1)
        problem.add_quantified([y], Clause(((False, bank.mk_apply('p', [y])), (True, bank.mk_apply('q', [y])))),
                               name='decoy')
    return problem


def gen_needle_corpus(n_problems, n_distractors, seed, out_dir):
    """
    Write ``n_problems`` needle problems with the needle at a uniformly
    random age among ``n_distractors + 1`` constants. Returns the paths
    written, in order.

    """
    os.makedirs(out_dir, exist_ok=True)
    rng = np.random.default_rng(seed)
    paths = []
    for index in range(n_problems):
        position = int(rng.integers(n_distractors + 1))
        paths.append(_write(needle_problem('needle_%04d' % index, n_distractors, position), out_dir))
    logger.info("Wrote %d needle problems with %d distractors to %s", n_problems, n_distractors, out_dir)
    return paths


def trigger_problem(name, n_matches, refuting_position):
    problem = Problem(name)
    bank = problem.bank
    sort = bank.declare_sort('S')
    constants = ['c%d' % (index + 1) for index in range(n_matches)]
    for constant in constants:
        bank.declare_symbol(constant, (), sort)
    bank.declare_symbol('p', (sort,), BOOL)
    bank.declare_symbol('r', (sort,), BOOL)
    for constant in constants:
        problem.add_ground_clause(Clause(((True, bank.mk_apply('p', [bank.mk_apply(constant)])),)))
    target = bank.mk_apply(constants[refuting_position])
    problem.add_ground_clause(Clause(((False, bank.mk_apply('r', [target])),)))
    x = bank.mk_bound_variable('x', sort, 0)
    problem.add_quantified([x], Clause(((False, bank.mk_apply('p', [x])), (True, bank.mk_apply('r', [x])))))
    return problem


def gen_trigger_corpus(n_problems, n_matches, seed, out_dir):
    """
    Write ``n_problems`` trigger-rich problems, each with a trigger
    matching ``n_matches`` ground terms.

    """
    os.makedirs(out_dir, exist_ok=True)
    rng = np.random.default_rng(seed)
    paths = []
    for index in range(n_problems):
        position = int(rng.integers(n_matches))
        paths.append(_write(trigger_problem('trigger_%04d' % index, n_matches, position), out_dir))
    logger.info("Wrote %d trigger-rich problems to %s", n_problems, out_dir)
    return paths


def split_corpus(paths, seed, fractions=(0.8, 0.1, 0.1)):
    """
    Shuffle ``paths`` under ``seed`` and cut them into training,
    development and holdout lists of the given fractions. The holdout
    list takes whatever rounding leaves over.

    """
    if len(fractions) != 3 or any(fraction < 0 for fraction in fractions) or sum(fractions) > 1.0 + 1e-9:
        raise ValueError("Expected three non-negative fractions summing to at most 1")
    ordered = sorted(paths)
    order = np.random.default_rng(seed).permutation(len(ordered))
    shuffled = [ordered[index] for index in order]
    train_count = int(round(fractions[0] * len(shuffled)))
    devel_count = min(int(round(fractions[1] * len(shuffled))), len(shuffled) - train_count)
    train = sorted(shuffled[:train_count])
    devel = sorted(shuffled[train_count:train_count + devel_count])
    holdout = sorted(shuffled[train_count + devel_count:])
    return train, devel, holdout
