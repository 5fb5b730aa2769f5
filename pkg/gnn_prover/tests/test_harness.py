import os
import shutil
import tempfile

import numpy as np
from django.test import SimpleTestCase

from gnn_prover.corpus import gen_needle_corpus
from gnn_prover.engine import Limits
from gnn_prover.export import write_dataset
from gnn_prover.gnn import GnnParameters, save_params
from gnn_prover.harness import (
    ERROR, StrategySpec, build_strategy, collect, corpus_paths, difference_matrix, evaluate, format_line,
    solve_problem,
)

LIMITS = Limits(timeout=10.0, max_rounds=None, decision_budget=10 ** 6)


class HarnessTests(SimpleTestCase):
    def setUp(self):
        self.directory = tempfile.mkdtemp()
        self.addCleanup(shutil.rmtree, self.directory)
        self.paths = gen_needle_corpus(3, 2, seed=0, out_dir=os.path.join(self.directory, 'corpus'))

    def test_corpus_paths(self):
        with open(os.path.join(self.directory, 'corpus', 'notes.txt'), 'w') as handle:
            handle.write('not a problem\n')
        self.assertEqual(corpus_paths(os.path.join(self.directory, 'corpus')), self.paths)
        listing = os.path.join(self.directory, 'list.txt')
        with open(listing, 'w') as handle:
            handle.write('\n'.join(self.paths[:2]) + '\n\n')
        self.assertEqual(corpus_paths(listing), self.paths[:2])

    def test_strategy_labels(self):
        self.assertEqual(StrategySpec('enum').label(), 'enum')
        self.assertEqual(StrategySpec('qsampling', 'w', max_inst_per_qe=1).label(), 'qsampling')
        self.assertEqual(StrategySpec('qsampling', 'w', max_inst_per_qe=4).label(), 'qsampling-k4')

    def test_solve_problem(self):
        line = solve_problem(self.paths[0], StrategySpec('ematch'), LIMITS)
        self.assertEqual((line['status'], line['rounds'], line['gnn_ms']), ('PROVED', 1, 0.0))
        self.assertEqual(format_line(line), format_line(dict(line)))
        self.assertNotIn(' ', format_line(line))
        line = solve_problem(os.path.join(self.directory, 'missing.sexp'), StrategySpec('enum'), LIMITS)
        self.assertEqual((line['problem'], line['status']), ('missing', ERROR))
        self.assertIn('error', line)

    def test_collect_reports_errors(self):
        paths = self.paths + [os.path.join(self.directory, 'missing.sexp')]
        transitions, summary = collect(paths, seed=0, limits=LIMITS, jobs=1)
        self.assertEqual((summary.problems, summary.solved, summary.errors), (4, 3, 1))
        self.assertEqual(summary.statuses['missing'], ERROR)
        self.assertEqual(len(transitions), 3)

    def test_difference_matrix(self):
        solved = {'enum': set(['a', 'b']), 'ematch': set(['b', 'c', 'd'])}
        differences = difference_matrix(solved)
        self.assertEqual(differences[('enum', 'ematch')], 1)
        self.assertEqual(differences[('ematch', 'enum')], 2)
        self.assertEqual(differences[('enum', 'enum')], 0)

    def test_evaluate(self):
        evaluation = evaluate(self.paths, [StrategySpec('enum'), StrategySpec('ematch')], LIMITS, jobs=1)
        self.assertEqual(list(evaluation.results), ['enum', 'ematch'])
        self.assertEqual(len(evaluation.solved['ematch']), 3)
        self.assertIsNotNone(evaluation.medians['enum'])
        self.assertIn('ematch', evaluation.table())
        self.assertTrue(evaluation.counts_csv().startswith('strategy,problem,status,instantiation_count'))


class ParallelTests(SimpleTestCase):
    def setUp(self):
        self.directory = tempfile.mkdtemp()
        self.addCleanup(shutil.rmtree, self.directory)
        self.paths = gen_needle_corpus(8, 4, seed=3, out_dir=os.path.join(self.directory, 'corpus'))

    def test_parallel_evaluation_matches_serial(self):
        specs = [StrategySpec('enum'), StrategySpec('ematch')]
        serial = evaluate(self.paths, specs, LIMITS, jobs=1)
        parallel = evaluate(self.paths, specs, LIMITS, jobs=4)
        self.assertEqual(parallel.solved, serial.solved)
        self.assertEqual(parallel.differences, serial.differences)
        for label in serial.results:
            self.assertEqual([line['instantiation_count'] for line in parallel.results[label]],
                             [line['instantiation_count'] for line in serial.results[label]])

    def dataset_bytes(self, name, jobs):
        path = os.path.join(self.directory, name)
        transitions, _ = collect(self.paths, seed=7, limits=LIMITS, jobs=jobs)
        write_dataset(transitions, path, seed=7)
        with open(path, 'rb') as handle:
            return handle.read()

    def test_collection_is_reproducible(self):
        first = self.dataset_bytes('first.jsonl', 1)
        self.assertEqual(self.dataset_bytes('second.jsonl', 1), first)
        self.assertEqual(self.dataset_bytes('parallel.jsonl', 4), first)
        self.assertEqual(len(first.splitlines()), 9)


class WeightsCacheTests(SimpleTestCase):
    def test_rewritten_weights_are_reloaded(self):
        directory = tempfile.mkdtemp()
        self.addCleanup(shutil.rmtree, directory)
        path = os.path.join(directory, 'model.weights')
        spec = StrategySpec('threshold', path)
        save_params(GnnParameters.initialize(4, 1, seed=0), path)
        first = build_strategy(spec).params
        self.assertIs(build_strategy(spec).params, first)
        save_params(GnnParameters.initialize(4, 1, seed=1), path)
        modified = os.stat(path).st_mtime_ns + 10 ** 9
        os.utime(path, ns=(modified, modified))
        second = build_strategy(spec).params
        self.assertIsNot(second, first)
        self.assertFalse(np.array_equal(second.kind_embeddings, first.kind_embeddings))
