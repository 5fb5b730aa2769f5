"""
Proof-state graphs and training datasets.

``export_graph`` turns a round state into a typed, bidirectional graph
over the term DAG of everything asserted. Successful e-matching runs are
minimized to the instantiations the proof actually needs, and each
recorded round becomes a labelled ``Transition``. Datasets are stored as
line-delimited JSON behind a one-line header.

"""

import json
import logging
import zlib
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from gnn_prover.engine import GroundStatus, ground_sat_check
from gnn_prover.exceptions import DatasetError, FormatVersionError
from gnn_prover.signals import round_started
from gnn_prover.terms import KIND_VOCABULARY, Kind, instantiate

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
ARGUMENT_POSITIONS = 5
EDGE_TYPE_COUNT = 2 * ARGUMENT_POSITIONS

CANDIDATE_KINDS = frozenset([Kind.CONSTANT, Kind.FUNCTION_APPLY])


def edge_type(position):
    return min(position, ARGUMENT_POSITIONS - 1)


def reverse_edge_type(forward_type):
    return forward_type + ARGUMENT_POSITIONS


@dataclass
class ProofStateGraph:
    """
    A snapshot of one round. Node indices are local to the graph;
    ``var_nodes[i]`` and ``candidate_terms[i]`` describe the variables
    of the quantified expression at ``qe_nodes[i]``.

    ``term_ids`` and ``qe_ids`` map back into the term bank and problem
    and are neither compared nor serialized.

    """
    node_kinds: list
    edges: list
    qe_nodes: list
    var_nodes: list
    candidate_terms: list
    round_index: int
    term_ids: Optional[list] = field(default=None, compare=False, repr=False)
    qe_ids: Optional[list] = field(default=None, compare=False, repr=False)

    @property
    def node_count(self):
        return len(self.node_kinds)

    def to_dict(self):
        return {
            'node_kinds': list(self.node_kinds),
            'edges': [list(edge) for edge in self.edges],
            'qe_nodes': list(self.qe_nodes),
            'var_nodes': [list(nodes) for nodes in self.var_nodes],
            'candidate_terms': [[list(terms) for terms in per_qe] for per_qe in self.candidate_terms],
            'round_index': self.round_index,
        }

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(
                node_kinds=list(data['node_kinds']),
                edges=[tuple(edge) for edge in data['edges']],
                qe_nodes=list(data['qe_nodes']),
                var_nodes=[list(nodes) for nodes in data['var_nodes']],
                candidate_terms=[[list(terms) for terms in per_qe] for per_qe in data['candidate_terms']],
                round_index=data['round_index'],
            )
        except (KeyError, TypeError) as exc:
            raise DatasetError("Malformed graph record: %s" % exc)


def export_graph(state, bank):
    """
    Build the ``ProofStateGraph`` of ``state``: every subterm of the
    asserted ground clauses and quantified expressions becomes a node,
    indexed by age.

    """
    roots = [bank.clause_term(clause) for clause in state.asserted_ground]
    roots.extend(qe.term for qe in state.asserted_qes)
    terms = set()
    for root in roots:
        terms.update(bank.subterms(root))
    term_ids = sorted(terms)
    index = {term: position for position, term in enumerate(term_ids)}
    node_kinds = [int(bank[term].kind) for term in term_ids]
    edges = []
    for term in term_ids:
        for position, child in enumerate(bank[term].children):
            forward = edge_type(position)
            edges.append((index[term], index[child], forward))
            edges.append((index[child], index[term], reverse_edge_type(forward)))
    by_sort = {}
    for term in term_ids:
        node = bank[term]
        if node.ground and node.kind in CANDIDATE_KINDS:
            by_sort.setdefault(node.sort, []).append(index[term])
    qe_nodes, var_nodes, candidate_terms = [], [], []
    for qe in state.asserted_qes:
        qe_nodes.append(index[qe.term])
        var_nodes.append([index[variable] for variable in qe.variables])
        candidate_terms.append([list(by_sort.get(bank[variable].sort, ())) for variable in qe.variables])
    return ProofStateGraph(node_kinds, edges, qe_nodes, var_nodes, candidate_terms,
                           state.round_index, term_ids=term_ids,
                           qe_ids=[qe.qe_id for qe in state.asserted_qes])


class TraceRecorder:
    """
    Records the graph of every round of searches over ``problem``.

    Use ``connect()`` before solving and ``disconnect()`` afterwards;
    ``graphs[r - 1]`` is the state at the start of round ``r``.

    """
    def __init__(self, problem):
        self.problem = problem
        self.graphs = []

    def _record(self, sender, state, **kwargs):
        if state.problem is self.problem:
            self.graphs.append(export_graph(state, state.bank))

    def connect(self):
        round_started.connect(self._record, weak=False, dispatch_uid=('trace-recorder', id(self)))

    def disconnect(self):
        round_started.disconnect(dispatch_uid=('trace-recorder', id(self)))

    def __enter__(self):
        self.connect()
        return self

    def __exit__(self, *exc_info):
        self.disconnect()


def _is_unsat(bank, clauses, decision_budget):
    return ground_sat_check(bank, clauses, decision_budget).status == GroundStatus.UNSAT


def minimize_instantiations(problem, result, decision_budget=None):
    """
    Return the set of ``(qe_id, terms)`` instantiations of a proved
    ``result`` that the proof needs.

    Instantiations outside the ground solver's core are dropped first;
    the rest are then removed one at a time, last to first, whenever
    the remaining clauses stay unsatisfiable.

    """
    if not result.proved:
        raise DatasetError("Cannot minimize the trace of an unproved search of '%s'" % problem.name)
    bank = problem.bank
    base = list(problem.ground_clauses)
    lemmas = [(instantiation, instantiate(bank, problem.quantified[instantiation[0]], instantiation[1]))
              for instantiation in result.instantiations]
    kept = [lemma for position, lemma in enumerate(lemmas) if len(base) + position in result.core]

    def unsat(selection):
        return _is_unsat(bank, base + [clause for _, clause in selection], decision_budget)

    if not unsat(kept):
        logger.warning("%s: ground core does not refute on its own, minimizing the whole trace", problem.name)
        kept = list(lemmas)
    for lemma in reversed(list(kept)):
        remaining = [other for other in kept if other is not lemma]
        if unsat(remaining):
            kept = remaining
    return set(instantiation for instantiation, _ in kept)


@dataclass
class Transition:
    graph: ProofStateGraph
    qe_labels: list
    term_labels: list
    problem_name: str
    round_index: int

    def to_dict(self):
        return {
            'graph': self.graph.to_dict(),
            'qe_labels': list(self.qe_labels),
            'term_labels': [None if labels is None else list(labels) for labels in self.term_labels],
            'problem_name': self.problem_name,
            'round_index': self.round_index,
        }

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(
                graph=ProofStateGraph.from_dict(data['graph']),
                qe_labels=list(data['qe_labels']),
                term_labels=[None if labels is None else list(labels) for labels in data['term_labels']],
                problem_name=data['problem_name'],
                round_index=data['round_index'],
            )
        except (KeyError, TypeError) as exc:
            raise DatasetError("Malformed transition record: %s" % exc)


def problem_rng(seed, problem_name):
    return np.random.default_rng([seed, zlib.crc32(problem_name.encode('utf-8'))])


def label_transitions(result, graphs, useful, seed=0):
    """
    Label every recorded round of a proved search.

    A quantified expression is useful in a round when one of its
    ``useful`` instantiations is not done yet and all of its terms are
    candidates in that round's graph; one such instantiation is then
    picked at random as the term labels.

    """
    if not result.proved:
        raise DatasetError("Cannot label the trace of an unproved search of '%s'" % result.problem)
    rng = problem_rng(seed, result.problem)
    useful_by_qe = {}
    for qe_id, terms in sorted(useful):
        useful_by_qe.setdefault(qe_id, []).append(terms)
    done = set()
    transitions = []
    for round_index, graph in enumerate(graphs[:len(result.trace)], start=1):
        positions = {term: node for node, term in enumerate(graph.term_ids)}
        qe_labels, term_labels = [], []
        for slot, qe_id in enumerate(graph.qe_ids):
            options = []
            for terms in useful_by_qe.get(qe_id, ()):
                if (qe_id, terms) in done:
                    continue
                labels = []
                for variable, term in enumerate(terms):
                    candidates = graph.candidate_terms[slot][variable]
                    node = positions.get(term)
                    if node is None or node not in candidates:
                        break
                    labels.append(candidates.index(node))
                else:
                    options.append(labels)
            if options:
                qe_labels.append(1)
                term_labels.append(options[int(rng.integers(len(options)))])
            else:
                qe_labels.append(0)
                term_labels.append(None)
        transitions.append(Transition(graph, qe_labels, term_labels, result.problem, round_index))
        done.update(result.trace[round_index - 1])
    return transitions


def dataset_header(seed):
    return {
        'format_version': FORMAT_VERSION,
        'kind_vocabulary': list(KIND_VOCABULARY),
        'edge_type_count': EDGE_TYPE_COUNT,
        'seed': seed,
    }


def _dumps(record):
    return json.dumps(record, sort_keys=True, separators=(',', ':'))


def write_dataset(transitions, path, seed=0):
    with open(path, 'w', encoding='utf-8') as handle:
        handle.write(_dumps(dataset_header(seed)) + '\n')
        for transition in transitions:
            handle.write(_dumps(transition.to_dict()) + '\n')
    logger.info("Wrote %d transitions to %s", len(transitions), path)


def _check_header(line, path):
    try:
        header = json.loads(line)
    except ValueError:
        raise FormatVersionError("%s does not start with a dataset header" % path)
    if not isinstance(header, dict) or header.get('format_version') != FORMAT_VERSION:
        raise FormatVersionError("%s is not a version %d dataset" % (path, FORMAT_VERSION))
    if header.get('kind_vocabulary') != list(KIND_VOCABULARY) or header.get('edge_type_count') != EDGE_TYPE_COUNT:
        raise FormatVersionError("%s was written for a different graph vocabulary" % path)
    return header


def read_dataset_header(path):
    with open(path, encoding='utf-8') as handle:
        return _check_header(handle.readline(), path)


def read_dataset(path):
    """
    Read the transitions stored at ``path``.

    """
    with open(path, encoding='utf-8') as handle:
        _check_header(handle.readline(), path)
        transitions = []
        for number, line in enumerate(handle, start=2):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except ValueError:
                raise DatasetError("%s, line %d: not a JSON record" % (path, number))
            transitions.append(Transition.from_dict(record))
    return transitions
