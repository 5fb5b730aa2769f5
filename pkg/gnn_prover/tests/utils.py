"""
Helpers shared by the test modules: tiny problem builders, random
generators and brute-force oracles.

"""

import itertools

import numpy as np

from gnn_prover.export import ProofStateGraph, Transition
from gnn_prover.parser import parse_native
from gnn_prover.terms import BOOL, Clause, Kind, TermBank


def problem(text, name='problem'):
    return parse_native(text, name)


def term(problem, text):
    """
    Return the handle of the ground term rendered as ``text``.

    """
    bank = problem.bank
    for node in bank:
        if node.ground and bank.render(node.id) == text:
            return node.id
    raise KeyError(text)


def render_trace(problem, result):
    bank = problem.bank
    return [[(qe_id, tuple(bank.render(t) for t in terms)) for qe_id, terms in performed]
            for performed in result.trace]


def crowded_text(constant_count):
    """
    A problem whose only quantified expression needs a three-pattern
    trigger with ``constant_count ** 3`` matches.

    """
    lines = ["(declare-sort S)", "(declare-fun t (S) Bool)", "(declare-fun u (S) Bool)"]
    for index in range(1, constant_count + 1):
        lines.append("(declare-fun c%d () S)" % index)
        lines.append("(assert (t c%d))" % index)
    lines.append("(assert-forall ((x S) (y S) (z S)) (or (not (t x)) (not (t y)) (not (t z)) (u x)))")
    return "\n".join(lines) + "\n"


class NaiveClosure:
    """
    Congruence closure by repeated pairwise comparison until nothing
    changes.

    """
    def __init__(self, bank, terms):
        self.bank = bank
        self.parent = dict((t, t) for t in terms)

    def find(self, t):
        while self.parent[t] != t:
            t = self.parent[t]
        return t

    def union(self, a, b):
        a, b = self.find(a), self.find(b)
        if a != b:
            self.parent[a] = b
            return True
        return False

    def close(self):
        applications = [t for t in self.parent if self.bank[t].children]
        changed = True
        while changed:
            changed = False
            seen = {}
            for t in applications:
                node = self.bank[t]
                key = (node.kind, node.symbol, tuple(self.find(child) for child in node.children))
                if key in seen:
                    changed = self.union(seen[key], t) or changed
                else:
                    seen[key] = t

    def partition(self):
        classes = {}
        for t in self.parent:
            classes.setdefault(self.find(t), set()).add(t)
        return set(frozenset(members) for members in classes.values())


def closure_terms(bank, roots):
    terms = set()
    for root in roots:
        terms.update(bank.subterms(root))
    return terms


def brute_force_satisfiable(bank, clauses):
    """
    Decide ground satisfiability modulo equality by trying every
    assignment of the atoms.

    """
    atoms = sorted(set(atom for clause in clauses for _, atom in clause.literals))
    if any(not clause.literals for clause in clauses):
        return False
    terms = closure_terms(bank, atoms) | set([bank.true, bank.false])
    for values in itertools.product([True, False], repeat=len(atoms)):
        assignment = dict(zip(atoms, values))
        if not all(any(assignment[atom] == sign for sign, atom in clause.literals) for clause in clauses):
            continue
        closure = NaiveClosure(bank, terms)
        forbidden = [(bank.true, bank.false)]
        for atom, value in assignment.items():
            node = bank[atom]
            if node.kind == Kind.EQUALITY:
                if value:
                    closure.union(*node.children)
                else:
                    forbidden.append(node.children)
            closure.union(atom, bank.true if value else bank.false)
        closure.close()
        if all(closure.find(a) != closure.find(b) for a, b in forbidden):
            return True
    return False


def small_signature():
    bank = TermBank()
    sort = bank.declare_sort('S')
    for name in 'abcd':
        bank.declare_symbol(name, (), sort)
    bank.declare_symbol('f', (sort,), sort)
    bank.declare_symbol('g', (sort, sort), sort)
    bank.declare_symbol('p', (sort,), BOOL)
    bank.declare_symbol('r', (sort, sort), BOOL)
    return bank, sort


def random_term(bank, rng, depth):
    if depth == 0 or rng.random() < 0.4:
        return bank.mk_apply('abcd'[int(rng.integers(4))])
    if rng.random() < 0.5:
        return bank.mk_apply('f', [random_term(bank, rng, depth - 1)])
    return bank.mk_apply('g', [random_term(bank, rng, depth - 1), random_term(bank, rng, depth - 1)])


def random_ground_terms(bank, rng, count, depth=2):
    return [random_term(bank, rng, depth) for _ in range(count)]


def random_atom(bank, rng, pool):
    choice = rng.random()
    if choice < 0.5:
        return bank.mk_equality(pool[int(rng.integers(len(pool)))], pool[int(rng.integers(len(pool)))])
    if choice < 0.8:
        return bank.mk_apply('p', [pool[int(rng.integers(len(pool)))]])
    return bank.mk_apply('r', [pool[int(rng.integers(len(pool)))], pool[int(rng.integers(len(pool)))]])


def random_clauses(bank, rng, atom_count=8, clause_count=6):
    pool = random_ground_terms(bank, rng, 6)
    atoms = [random_atom(bank, rng, pool) for _ in range(atom_count)]
    clauses = []
    for _ in range(int(rng.integers(1, clause_count + 1))):
        width = int(rng.integers(1, 4))
        literals = tuple((bool(rng.random() < 0.5), atoms[int(rng.integers(len(atoms)))]) for _ in range(width))
        clauses.append(Clause(literals))
    return clauses


def random_graph(rng, node_count=10, edge_count=12, qe_count=2, distinct_kinds=True, kind_count=11):
    """
    Return a random ``Transition`` over a graph of ``node_count`` nodes.
    Every forward edge gets its reverse; with ``distinct_kinds`` no two
    nodes share a kind.

    """
    if distinct_kinds:
        kinds = [int(kind) for kind in rng.permutation(kind_count)[:node_count]]
    else:
        kinds = [int(kind) for kind in rng.integers(kind_count, size=node_count)]
    pairs = set()
    edges = []
    while len(pairs) < edge_count:
        src, dst = (int(value) for value in rng.integers(node_count, size=2))
        if src == dst or (src, dst) in pairs or (dst, src) in pairs:
            continue
        pairs.add((src, dst))
        kind = int(rng.integers(5))
        edges.append((src, dst, kind))
        edges.append((dst, src, kind + 5))
    nodes = [int(node) for node in rng.permutation(node_count)]
    qe_nodes = nodes[:qe_count]
    var_nodes, candidate_terms, qe_labels, term_labels = [], [], [], []
    rest = nodes[qe_count:]
    for _ in range(qe_count):
        variables = int(rng.integers(1, 3))
        var_nodes.append([int(node) for node in rng.choice(rest, size=variables, replace=False)])
        candidates = [[int(node) for node in rng.choice(rest, size=int(rng.integers(1, 5)), replace=False)]
                      for _ in range(variables)]
        candidate_terms.append(candidates)
        if rng.random() < 0.6:
            qe_labels.append(1)
            term_labels.append([int(rng.integers(len(terms))) for terms in candidates])
        else:
            qe_labels.append(0)
            term_labels.append(None)
    graph = ProofStateGraph(kinds, edges, qe_nodes, var_nodes, candidate_terms, 1)
    return Transition(graph, qe_labels, term_labels, 'random', 1)


def permute_transition(transition, permutation):
    """
    Relabel every node ``i`` of ``transition`` as ``permutation[i]``.

    """
    graph = transition.graph
    kinds = [0] * graph.node_count
    for old, new in enumerate(permutation):
        kinds[new] = graph.node_kinds[old]
    permuted = ProofStateGraph(
        kinds,
        [(permutation[src], permutation[dst], kind) for src, dst, kind in graph.edges],
        [permutation[node] for node in graph.qe_nodes],
        [[permutation[node] for node in nodes] for nodes in graph.var_nodes],
        [[[permutation[node] for node in terms] for terms in per_qe] for per_qe in graph.candidate_terms],
        graph.round_index,
    )
    return Transition(permuted, list(transition.qe_labels), transition.term_labels, transition.problem_name,
                      transition.round_index)


def exhaustive_top_k(distributions, k, done=()):
    scored = []
    for indices in itertools.product(*[range(len(d)) for d in distributions]):
        if indices in done:
            continue
        score = 1.0
        for distribution, index in zip(distributions, indices):
            score *= float(distribution[index])
        scored.append((indices, score))
    scored.sort(key=lambda item: (-item[1], item[0]))
    return scored[:k]


def random_distributions(rng, sizes):
    return [rng.dirichlet(np.ones(size)) for size in sizes]
