from django.test import SimpleTestCase

from gnn_prover.enumeration import candidate_lists, enum_next_tuple, enum_round
from gnn_prover.tests.utils import problem, term

PAIRS = """
(declare-sort S)
(declare-sort T)
(declare-fun a () S)
(declare-fun b () S)
(declare-fun t () T)
(declare-fun r (S S) Bool)
(declare-fun q (T) Bool)
(assert (r a b))
(assert (q t))
(assert-forall ((x S) (y S)) (not (r x y)))
(assert-forall ((z T)) (not (q z)))
"""


class EnumerationTests(SimpleTestCase):
    def test_age_order(self):
        successor = problem("""
            (declare-sort S)
            (declare-fun c () S)
            (declare-fun f (S) S)
            (declare-fun p (S) Bool)
            (assert (p (f c)))
            (assert-forall ((x S)) (not (p x)))
        """)
        qe = successor.quantified[0]
        c, fc = term(successor, 'c'), term(successor, '(f c)')
        self.assertEqual(enum_next_tuple(qe, successor.bank), (c,))
        self.assertEqual(enum_next_tuple(qe, successor.bank, done={(c,)}), (fc,))
        self.assertIsNone(enum_next_tuple(qe, successor.bank, done={(c,), (fc,)}))

    def test_last_variable_varies_fastest(self):
        pairs = problem(PAIRS)
        qe = pairs.quantified[0]
        a, b = term(pairs, 'a'), term(pairs, 'b')
        order = []
        done = set()
        while True:
            terms = enum_next_tuple(qe, pairs.bank, done)
            if terms is None:
                break
            order.append(terms)
            done.add(terms)
        self.assertEqual(order, [(a, a), (a, b), (b, a), (b, b)])

    def test_candidates_respect_sorts(self):
        pairs = problem(PAIRS)
        a, b, t = term(pairs, 'a'), term(pairs, 'b'), term(pairs, 't')
        self.assertEqual(candidate_lists(pairs.quantified[0], pairs.bank), [[a, b], [a, b]])
        self.assertEqual(candidate_lists(pairs.quantified[1], pairs.bank), [[t]])

    def test_round_proposes_one_tuple_per_expression(self):
        pairs = problem(PAIRS)
        a, t = term(pairs, 'a'), term(pairs, 't')
        self.assertEqual(enum_round(pairs.quantified, pairs.bank), [(0, (a, a)), (1, (t,))])
        done = {0: set(), 1: {(t,)}}
        self.assertEqual(enum_round(pairs.quantified, pairs.bank, done), [(0, (a, a))])

    def test_round_uses_history_and_candidates(self):
        pairs = problem(PAIRS)
        a, b = term(pairs, 'a'), term(pairs, 'b')
        pairs.quantified[0].done_instantiations.add((a, a))
        self.assertEqual(enum_round(pairs.quantified[:1], pairs.bank), [(0, (a, b))])
        shuffled = {0: [[b, a], [b, a]]}
        self.assertEqual(enum_round(pairs.quantified[:1], pairs.bank, candidates=shuffled), [(0, (b, b))])
