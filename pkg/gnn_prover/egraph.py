"""
Congruence closure over the ground terms of a term bank.

The e-graph keeps a union-find over term handles, the members of every
class, and for every class the applications using one of its members as
an argument. Merging two classes re-canonizes those applications and
merges any that become congruent, so the closure holds after every
public call.

Disequalities are recorded as forbidden pairs; ``conflict`` reports one
that has been merged, if any.

"""

from collections import defaultdict

from gnn_prover.terms import Kind

CLOSED_KINDS = frozenset([Kind.CONSTANT, Kind.FUNCTION_APPLY, Kind.PREDICATE_APPLY,
                          Kind.EQUALITY, Kind.TRUE, Kind.FALSE])


class EGraph:
    def __init__(self, bank):
        self.bank = bank
        self.parent = {}
        self.class_members = {}
        self.use_lists = {}
        self._signatures = {}
        self._by_symbol = defaultdict(list)
        self._forbidden = []
        self._pending = []

    def __contains__(self, term):
        return term in self.parent

    def __len__(self):
        return len(self.parent)

    def find(self, term):
        root = term
        parent = self.parent
        while parent[root] != root:
            root = parent[root]
        while parent[term] != root:
            parent[term], term = root, parent[term]
        return root

    def _signature(self, term):
        node = self.bank[term]
        return (node.kind, node.symbol, tuple(self.find(child) for child in node.children))

    def add(self, term):
        """
        Add a ground term and its subterms, merging it with any existing
        congruent term.

        """
        if term in self.parent:
            return self.find(term)
        for sub in self.bank.subterms(term):
            if sub in self.parent:
                continue
            node = self.bank[sub]
            if not node.ground or node.kind not in CLOSED_KINDS:
                raise ValueError("Cannot add %s to an e-graph" % self.bank.render(sub))
            self.parent[sub] = sub
            self.class_members[sub] = [sub]
            self.use_lists[sub] = []
            if node.symbol is not None:
                self._by_symbol[node.symbol].append(sub)
            for root in set(self.find(child) for child in node.children):
                self.use_lists[root].append(sub)
            signature = self._signature(sub)
            existing = self._signatures.get(signature)
            if existing is None:
                self._signatures[signature] = sub
            else:
                self._pending.append((sub, existing))
        self._propagate()
        return self.find(term)

    def merge(self, left, right):
        self.add(left)
        self.add(right)
        self._pending.append((left, right))
        self._propagate()

    def _propagate(self):
        while self._pending:
            left, right = self._pending.pop()
            left, right = self.find(left), self.find(right)
            if left == right:
                continue
            if len(self.class_members[left]) > len(self.class_members[right]):
                left, right = right, left
            self.parent[left] = right
            self.class_members[right].extend(self.class_members.pop(left))
            moved = self.use_lists.pop(left)
            for application in moved:
                signature = self._signature(application)
                existing = self._signatures.get(signature)
                if existing is None:
                    self._signatures[signature] = application
                elif self.find(existing) != self.find(application):
                    self._pending.append((application, existing))
            self.use_lists[right].extend(moved)

    def assert_disequality(self, left, right):
        self.add(left)
        self.add(right)
        self._forbidden.append((left, right))

    def conflict(self):
        """
        Return a forbidden pair whose sides are in the same class, or
        ``None`` when the e-graph is consistent.

        """
        for left, right in self._forbidden:
            if self.find(left) == self.find(right):
                return (left, right)
        return None

    def is_consistent(self):
        return self.conflict() is None

    def congruent(self, left, right):
        return self.find(left) == self.find(right)

    def members(self, term):
        return self.class_members[self.find(term)]

    def classes(self):
        return dict(self.class_members)

    def terms_with_symbol(self, symbol):
        return self._by_symbol.get(symbol, [])

    def lookup(self, kind, symbol, child_classes):
        """
        Return the class of the application ``symbol(child_classes)``
        modulo congruence, or ``None`` when no such term exists.

        """
        term = self._signatures.get((Kind(kind), symbol, tuple(self.find(child) for child in child_classes)))
        return None if term is None else self.find(term)


def cc_assert_equality(eg, left, right):
    """
    Merge the classes of ``left`` and ``right`` and restore congruence
    closure.

    """
    eg.merge(left, right)
