"""
Guided instantiation: turning network scores into instantiations.

Four modes are supported. The two dry runs evaluate the network and
then ignore it, following the age order (``DRY_RUN``) or a randomly
shuffled order (``RANDOMIZED_DRY_RUN``). ``QSAMPLING`` keeps each
quantified expression with probability equal to its score, and
``THRESHOLD`` keeps those scoring at least the threshold. Kept
expressions are instantiated with their best ``max_inst_per_qe`` term
tuples, a tuple scoring the product of its terms' probabilities.

"""

import enum
import heapq
import logging
import time
from dataclasses import dataclass
from typing import Optional

from gnn_prover import conf
from gnn_prover.enumeration import candidate_lists, enum_round
from gnn_prover.gnn import forward

logger = logging.getLogger(__name__)


class GuidanceMode(enum.Enum):
    DRY_RUN = 'dry-run'
    RANDOMIZED_DRY_RUN = 'random-dry-run'
    QSAMPLING = 'qsampling'
    THRESHOLD = 'threshold'


@dataclass
class GuidanceConfig:
    mode: GuidanceMode = GuidanceMode.THRESHOLD
    threshold: Optional[float] = None
    max_inst_per_qe: Optional[int] = None
    rng_seed: int = 0

    def __post_init__(self):
        self.mode = GuidanceMode(self.mode)
        if self.threshold is None:
            self.threshold = conf.get('THRESHOLD')
        if self.max_inst_per_qe is None:
            self.max_inst_per_qe = conf.get('MAX_INST_PER_QE')
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError("The threshold must lie in [0, 1], got %r" % self.threshold)
        if self.max_inst_per_qe < 1:
            raise ValueError("max_inst_per_qe must be at least 1, got %r" % self.max_inst_per_qe)


def select_qes(qe_scores, config, rng):
    """
    Return the positions in ``qe_scores`` of the quantified expressions
    to instantiate.

    """
    if config.mode == GuidanceMode.QSAMPLING:
        draws = rng.random(len(qe_scores))
        return set(position for position, score in enumerate(qe_scores) if draws[position] < score)
    if config.mode == GuidanceMode.THRESHOLD:
        return set(position for position, score in enumerate(qe_scores) if score >= config.threshold)
    return set(range(len(qe_scores)))


def _tuple_score(distributions, order, ranks):
    score = 1.0
    for distribution, ranking, rank in zip(distributions, order, ranks):
        score *= float(distribution[ranking[rank]])
    return score


def rank_tuples(distributions, k, done=()):
    """
    Return up to ``k`` ``(indices, score)`` pairs with the highest
    product of per-variable probabilities, best first, skipping index
    tuples in ``done``. Equal scores are ordered by index tuple.

    """
    if k < 1 or not distributions or any(len(distribution) == 0 for distribution in distributions):
        return []
    order = [sorted(range(len(distribution)), key=lambda index, d=distribution: (-float(d[index]), index))
             for distribution in distributions]

    def entry(ranks):
        indices = tuple(ranking[rank] for ranking, rank in zip(order, ranks))
        return (-_tuple_score(distributions, order, ranks), indices, ranks)

    start = (0,) * len(distributions)
    frontier = [entry(start)]
    seen = set([start])
    found = []
    while frontier:
        negative, indices, ranks = frontier[0]
        if len(found) >= k and -negative < found[k - 1][1]:
            break
        heapq.heappop(frontier)
        if indices not in done:
            found.append((indices, -negative))
            found.sort(key=lambda item: (-item[1], item[0]))
        for position in range(len(ranks)):
            if ranks[position] + 1 < len(order[position]):
                successor = ranks[:position] + (ranks[position] + 1,) + ranks[position + 1:]
                if successor not in seen:
                    seen.add(successor)
                    heapq.heappush(frontier, entry(successor))
    return found[:k]


def _done_indices(graph, slot, done_terms):
    positions = [dict((graph.term_ids[node], index) for index, node in enumerate(candidates))
                 for candidates in graph.candidate_terms[slot]]
    indices = set()
    for terms in done_terms:
        try:
            indices.add(tuple(lookup[term] for lookup, term in zip(positions, terms)))
        except KeyError:
            continue
    return indices


def guided_round(qes, graph, params, config, done, rng, bank, timings=None):
    """
    Propose this round's instantiations under ``config``.

    ``done`` maps ``qe_id`` to the set of term tuples already used.
    When ``timings`` is a list, the network's wall time in milliseconds
    is appended to it.

    """
    started = time.perf_counter()
    result = forward(params, graph, strict=False)
    if timings is not None:
        timings.append((time.perf_counter() - started) * 1000.0)
    if config.mode == GuidanceMode.DRY_RUN:
        return enum_round(qes, bank, done)
    if config.mode == GuidanceMode.RANDOMIZED_DRY_RUN:
        candidates = {}
        for qe in qes:
            candidates[qe.qe_id] = [[terms[index] for index in rng.permutation(len(terms))]
                                    for terms in candidate_lists(qe, bank)]
        return enum_round(qes, bank, done, candidates)
    by_id = dict((qe.qe_id, qe) for qe in qes)
    proposals = []
    for slot in sorted(select_qes(result.qe_scores, config, rng)):
        qe_id = graph.qe_ids[slot]
        if qe_id not in by_id:
            continue
        distributions = result.term_distributions[slot]
        if any(distribution is None for distribution in distributions):
            logger.debug("Skipping quantified expression %d: a variable has no candidate terms", qe_id)
            continue
        qe_done = done.get(qe_id, set())
        ranked = rank_tuples(distributions, config.max_inst_per_qe, _done_indices(graph, slot, qe_done))
        for indices, _ in ranked:
            terms = tuple(graph.term_ids[graph.candidate_terms[slot][variable][index]]
                          for variable, index in enumerate(indices))
            proposals.append((qe_id, terms))
    return proposals
