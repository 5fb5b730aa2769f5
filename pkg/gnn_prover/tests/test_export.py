import os
import shutil
import tempfile

import numpy as np
from django.test import SimpleTestCase

from gnn_prover.corpus import needle_problem
from gnn_prover.engine import Limits, Outcome, RoundState, SearchResult, solve_loop
from gnn_prover.exceptions import DatasetError, FormatVersionError
from gnn_prover.export import (
    EDGE_TYPE_COUNT, ProofStateGraph, TraceRecorder, Transition, edge_type, export_graph, label_transitions,
    minimize_instantiations, read_dataset, read_dataset_header, reverse_edge_type, write_dataset,
)
from gnn_prover.strategies import registry
from gnn_prover.terms import Kind
from gnn_prover.tests.utils import problem, random_graph, term

UNLIMITED = Limits(timeout=None, max_rounds=None, decision_budget=10 ** 6)

AVAILABILITY = """
(declare-sort S)
(declare-fun c () S)
(declare-fun f (S) S)
(declare-fun p (S) Bool)
(declare-fun q (S) Bool)
(assert (p c))
(assert-forall ((x S)) (q (f x)))
(assert-forall ((y S)) (not (q y)))
"""


def initial_state(prob):
    return RoundState(prob, list(prob.ground_clauses), list(prob.quantified))


class ExportGraphTests(SimpleTestCase):
    def test_argument_edges(self):
        prob = problem("""
            (declare-sort S)
            (declare-fun c () S)
            (declare-fun d () S)
            (declare-fun h (S S) S)
            (declare-fun p (S) Bool)
            (assert (p (h c d)))
        """)
        graph = export_graph(initial_state(prob), prob.bank)
        self.assertEqual(graph.node_kinds, [Kind.CONSTANT, Kind.CONSTANT, Kind.FUNCTION_APPLY,
                                            Kind.PREDICATE_APPLY, Kind.OR])
        self.assertEqual(set(graph.edges), set([
            (2, 0, 0), (0, 2, 5), (2, 1, 1), (1, 2, 6),
            (3, 2, 0), (2, 3, 5), (4, 3, 0), (3, 4, 5),
        ]))
        self.assertEqual(graph.qe_nodes, [])

    def test_wide_applications_share_the_last_edge_type(self):
        prob = problem("""
            (declare-sort S)
            (declare-fun c () S)
            (declare-fun w (S S S S S S) Bool)
            (assert (w c c c c c c))
        """)
        graph = export_graph(initial_state(prob), prob.bank)
        forward = sorted(kind for src, dst, kind in graph.edges if graph.node_kinds[src] == Kind.PREDICATE_APPLY
                         and graph.node_kinds[dst] == Kind.CONSTANT)
        self.assertEqual(forward, [0, 1, 2, 3, 4, 4])
        self.assertEqual([edge_type(position) for position in range(7)], [0, 1, 2, 3, 4, 4, 4])

    def test_reverse_edges(self):
        self.assertEqual(sorted(reverse_edge_type(kind) for kind in range(5)), list(range(5, EDGE_TYPE_COUNT)))
        prob = problem(AVAILABILITY)
        graph = export_graph(initial_state(prob), prob.bank)
        edges = set(graph.edges)
        self.assertEqual(len(edges), len(graph.edges))
        for src, dst, kind in graph.edges:
            if kind < 5:
                self.assertIn((dst, src, reverse_edge_type(kind)), edges)

    def test_quantified_expressions(self):
        prob = problem(AVAILABILITY)
        graph = export_graph(initial_state(prob), prob.bank)
        self.assertEqual([graph.node_kinds[node] for node in graph.qe_nodes], [Kind.FORALL, Kind.FORALL])
        for nodes in graph.var_nodes:
            self.assertEqual([graph.node_kinds[node] for node in nodes], [Kind.BOUND_VARIABLE])
        c = graph.term_ids.index(term(prob, 'c'))
        self.assertEqual(graph.candidate_terms, [[[c]], [[c]]])
        self.assertEqual(graph.qe_ids, [0, 1])

    def test_deterministic(self):
        prob = problem(AVAILABILITY)
        first = export_graph(initial_state(prob), prob.bank)
        second = export_graph(initial_state(prob), prob.bank)
        self.assertEqual(first, second)
        self.assertEqual(first.to_dict(), second.to_dict())
        self.assertEqual(ProofStateGraph.from_dict(first.to_dict()), first)

    def test_recorder(self):
        prob = problem(AVAILABILITY)
        with TraceRecorder(prob) as recorder:
            result = solve_loop(prob, registry.create('enum'), UNLIMITED)
        solve_loop(prob, registry.create('enum'), UNLIMITED)
        self.assertEqual(result.rounds, 2)
        self.assertEqual(len(recorder.graphs), 2)
        self.assertEqual([graph.round_index for graph in recorder.graphs], [1, 2])
        self.assertLess(recorder.graphs[0].node_count, recorder.graphs[1].node_count)


class LabelingTests(SimpleTestCase):
    def test_availability(self):
        prob = problem(AVAILABILITY)
        with TraceRecorder(prob) as recorder:
            result = solve_loop(prob, registry.create('enum'), UNLIMITED)
        self.assertTrue(result.proved)
        c, fc = term(prob, 'c'), term(prob, '(f c)')
        useful = minimize_instantiations(prob, result)
        self.assertEqual(useful, set([(0, (c,)), (1, (fc,))]))
        first, second = label_transitions(result, recorder.graphs, useful)
        self.assertEqual((first.qe_labels, first.term_labels), ([1, 0], [[0], None]))
        self.assertEqual((second.qe_labels, second.term_labels), ([0, 1], [None, [1]]))
        self.assertEqual([first.round_index, second.round_index], [1, 2])

    def test_random_pick(self):
        prob = problem("""
            (declare-sort S)
            (declare-fun a () S)
            (declare-fun b () S)
            (declare-fun p (S) Bool)
            (assert (p a))
            (assert (p b))
            (assert-forall ((x S)) (not (p x)))
        """)
        with TraceRecorder(prob) as recorder:
            result = solve_loop(prob, registry.create('ematch'), UNLIMITED)
        useful = set([(0, (term(prob, 'a'),)), (0, (term(prob, 'b'),))])
        picks = set()
        for seed in range(20):
            labels = label_transitions(result, recorder.graphs, useful, seed)[0].term_labels[0]
            self.assertEqual(label_transitions(result, recorder.graphs, useful, seed)[0].term_labels[0], labels)
            picks.add(tuple(labels))
        self.assertEqual(picks, set([(0,), (1,)]))

    def test_unproved_searches_are_rejected(self):
        result = SearchResult('open', Outcome.GAVE_UP, 1, [[]])
        self.assertRaises(DatasetError, label_transitions, result, [], set())
        self.assertRaises(DatasetError, minimize_instantiations, problem(AVAILABILITY), result)

    def test_needle_minimization(self):
        prob = needle_problem('needle', 5, 3)
        with TraceRecorder(prob) as recorder:
            result = solve_loop(prob, registry.create('ematch'), UNLIMITED)
        self.assertEqual(result.rounds, 1)
        needle = term(prob, 'c4')
        self.assertEqual(minimize_instantiations(prob, result), set([(0, (needle,))]))
        transition = label_transitions(result, recorder.graphs, set([(0, (needle,))]))[0]
        self.assertEqual(transition.qe_labels, [1, 0])
        self.assertEqual(transition.term_labels, [[3], None])


class DatasetTests(SimpleTestCase):
    def setUp(self):
        self.directory = tempfile.mkdtemp()
        self.addCleanup(shutil.rmtree, self.directory)
        self.path = os.path.join(self.directory, 'dataset.jsonl')

    def test_round_trip(self):
        rng = np.random.default_rng(3)
        transitions = [random_graph(rng) for _ in range(5)]
        write_dataset(transitions, self.path, seed=9)
        self.assertEqual(read_dataset(self.path), transitions)
        self.assertEqual(read_dataset_header(self.path)['seed'], 9)

    def test_empty(self):
        write_dataset([], self.path)
        self.assertEqual(read_dataset(self.path), [])

    def test_corrupt_header(self):
        with open(self.path, 'w') as handle:
            handle.write('not a header\n')
        self.assertRaises(FormatVersionError, read_dataset, self.path)
        with open(self.path, 'w') as handle:
            handle.write('{"format_version": 99}\n')
        self.assertRaises(FormatVersionError, read_dataset, self.path)

    def test_corrupt_record(self):
        write_dataset([], self.path)
        with open(self.path, 'a') as handle:
            handle.write('{"graph": \n')
        self.assertRaises(DatasetError, read_dataset, self.path)
        write_dataset([], self.path)
        with open(self.path, 'a') as handle:
            handle.write('{"qe_labels": []}\n')
        self.assertRaises(DatasetError, read_dataset, self.path)

    def test_transition_records(self):
        transition = random_graph(np.random.default_rng(4))
        self.assertEqual(Transition.from_dict(transition.to_dict()), transition)
