from django.test import SimpleTestCase

from gnn_prover.exceptions import ArityError, SortError, SubstitutionError, TermError
from gnn_prover.parser import Problem
from gnn_prover.terms import BOOL, Clause, Kind, TermBank, apply_substitution, instantiate, substitute


class TermBankTests(SimpleTestCase):
    def setUp(self):
        self.bank = TermBank()
        self.sort = self.bank.declare_sort('S')
        self.bank.declare_symbol('c', (), self.sort)
        self.bank.declare_symbol('d', (), self.sort)
        self.bank.declare_symbol('f', (self.sort,), self.sort)
        self.bank.declare_symbol('p', (self.sort,), BOOL)

    def test_hash_consing(self):
        c = self.bank.mk_apply('c')
        self.assertEqual(self.bank.mk_apply('f', [c]), self.bank.mk_apply('f', [c]))
        self.assertEqual(self.bank.mk_apply('c'), c)

    def test_ages_follow_creation(self):
        c = self.bank.mk_apply('c')
        fc = self.bank.mk_apply('f', [c])
        d = self.bank.mk_apply('d')
        self.assertLess(self.bank[c].age, self.bank[fc].age)
        self.assertLess(self.bank[fc].age, self.bank[d].age)
        self.assertEqual(self.bank.ground_terms_of_sort(self.sort), [c, fc, d])

    def test_kinds(self):
        c = self.bank.mk_apply('c')
        self.assertEqual(self.bank[c].kind, Kind.CONSTANT)
        self.assertEqual(self.bank[self.bank.mk_apply('f', [c])].kind, Kind.FUNCTION_APPLY)
        self.assertEqual(self.bank[self.bank.mk_apply('p', [c])].kind, Kind.PREDICATE_APPLY)
        self.assertEqual(self.bank[self.bank.mk_equality(c, c)].sort, BOOL)

    def test_ill_formed_terms(self):
        c = self.bank.mk_apply('c')
        self.assertRaises(ArityError, self.bank.mk_apply, 'f', [c, c])
        self.assertRaises(ArityError, self.bank.mk_apply, 'f')
        self.assertRaises(TermError, self.bank.mk_apply, 'unknown')
        self.assertRaises(SortError, self.bank.mk_apply, 'f', [self.bank.mk_apply('p', [c])])
        self.assertRaises(TermError, self.bank.declare_symbol, 'f', (), self.sort)

    def test_bound_variables_are_scoped(self):
        x0 = self.bank.mk_bound_variable('x', self.sort, 0)
        x1 = self.bank.mk_bound_variable('x', self.sort, 1)
        self.assertNotEqual(x0, x1)
        self.assertFalse(self.bank[self.bank.mk_apply('f', [x0])].ground)

    def test_render(self):
        c = self.bank.mk_apply('c')
        atom = self.bank.mk_apply('p', [self.bank.mk_apply('f', [c])])
        self.assertEqual(self.bank.render(atom), '(p (f c))')
        self.assertEqual(self.bank.render_clause(Clause(((False, atom),))), '(not (p (f c)))')


class SubstitutionTests(SimpleTestCase):
    def setUp(self):
        self.bank = TermBank()
        self.sort = self.bank.declare_sort('S')
        self.other = self.bank.declare_sort('T')
        self.bank.declare_symbol('c', (), self.sort)
        self.bank.declare_symbol('t', (), self.other)
        self.bank.declare_symbol('f', (self.sort,), self.sort)
        self.bank.declare_symbol('q', (self.sort,), BOOL)
        self.x = self.bank.mk_bound_variable('x', self.sort, 0)
        self.problem = Problem('subst', self.bank)
        self.qe = self.problem.add_quantified(
            [self.x], Clause(((True, self.bank.mk_apply('q', [self.bank.mk_apply('f', [self.x])])),)))

    def test_instantiation_creates_terms(self):
        c = self.bank.mk_apply('c')
        before = len(self.bank)
        clause = instantiate(self.bank, self.qe, (c,))
        self.assertEqual(self.bank.render_clause(clause), '(q (f c))')
        self.assertGreater(len(self.bank), before)
        fc = self.bank.mk_apply('f', [c])
        self.assertIn(fc, self.bank.ground_terms_of_sort(self.sort))

    def test_term_proliferation(self):
        c = self.bank.mk_apply('c')
        instantiate(self.bank, self.qe, (c,))
        fc = self.bank.mk_apply('f', [c])
        clause = instantiate(self.bank, self.qe, (fc,))
        self.assertEqual(self.bank.render_clause(clause), '(q (f (f c)))')
        self.assertEqual([self.bank.render(t) for t in self.bank.ground_terms_of_sort(self.sort)],
                         ['c', '(f c)', '(f (f c))'])

    def test_substitute_leaves_ground_terms(self):
        c = self.bank.mk_apply('c')
        self.assertEqual(substitute(self.bank, c, {self.x: c}), c)

    def test_bad_substitutions(self):
        t = self.bank.mk_apply('t')
        self.assertRaises(SubstitutionError, apply_substitution, self.bank, self.qe, {})
        self.assertRaises(SubstitutionError, apply_substitution, self.bank, self.qe, {self.x: t})
        self.assertRaises(SubstitutionError, apply_substitution, self.bank, self.qe, {self.x: self.x})
        self.assertRaises(SubstitutionError, instantiate, self.bank, self.qe, ())
