"""
The ground solver and the round loop.

``ground_sat_check`` decides a set of ground clauses modulo equality:
a small DPLL search over the atoms, where every propagation fixpoint is
checked for consistency by congruence closure. ``solve_loop`` drives
the alternation between an instantiation strategy and the ground
solver, one round at a time, until the ground part becomes
unsatisfiable or the search gives up.

Observers hook into the loop through the signals in
``gnn_prover.signals``.

"""

import enum
import logging
import time
from dataclasses import dataclass, field
from typing import Optional

from gnn_prover import conf
from gnn_prover.egraph import EGraph
from gnn_prover.exceptions import ResourceOut, SearchTimeout
from gnn_prover.signals import lemma_added, round_started, search_finished
from gnn_prover.terms import Kind, instantiate

logger = logging.getLogger(__name__)


class GroundStatus(enum.Enum):
    UNSAT = 'UNSAT'
    SAT_CANDIDATE = 'SAT_CANDIDATE'
    RESOURCE_OUT = 'RESOURCE_OUT'


class Outcome(str, enum.Enum):
    PROVED = 'PROVED'
    GAVE_UP = 'GAVE_UP'
    TIMEOUT = 'TIMEOUT'


@dataclass
class GroundResult:
    """
    The answer of ``ground_sat_check``. For ``UNSAT`` the ``core`` is a
    set of clause indices which is unsatisfiable on its own; for
    ``SAT_CANDIDATE`` the ``assignment`` gives every atom a value and
    ``egraph`` is the congruence closure of that assignment.

    """
    status: GroundStatus
    core: frozenset = frozenset()
    assignment: dict = field(default_factory=dict)
    egraph: Optional[EGraph] = None
    decisions: int = 0


_THEORY = -1


def check_deadline(deadline):
    if deadline is not None and time.monotonic() > deadline:
        raise SearchTimeout("Deadline passed")


def _theory_egraph(bank, atoms, assignment):
    eg = EGraph(bank)
    eg.assert_disequality(bank.true, bank.false)
    for atom in atoms:
        eg.add(atom)
    for atom, value in assignment.items():
        node = bank[atom]
        if node.kind == Kind.EQUALITY:
            left, right = node.children
            if value:
                eg.merge(left, right)
            else:
                eg.assert_disequality(left, right)
        eg.merge(atom, bank.true if value else bank.false)
    return eg


class _Dpll:
    def __init__(self, bank, clauses, budget, deadline):
        self.bank = bank
        self.clauses = [tuple(clause.literals) for clause in clauses]
        self.budget = budget
        self.deadline = deadline
        self.atoms = []
        self.occurrences = {}
        for index, literals in enumerate(self.clauses):
            for _, atom in literals:
                if atom not in self.occurrences:
                    self.atoms.append(atom)
                    self.occurrences[atom] = []
                if not self.occurrences[atom] or self.occurrences[atom][-1] != index:
                    self.occurrences[atom].append(index)
        self.assignment = {}
        self.reasons = {}
        self.trail = []
        self.levels = []
        self.core = set()
        self.decisions = 0

    def _evaluate(self, index):
        """
        Return ``(satisfied, unassigned)`` for clause ``index``.

        """
        unassigned = []
        for sign, atom in self.clauses[index]:
            value = self.assignment.get(atom)
            if value is None:
                unassigned.append((sign, atom))
            elif value == sign:
                return True, ()
        return False, unassigned

    def _assign(self, atom, value, reason):
        self.assignment[atom] = value
        self.reasons[atom] = reason
        self.trail.append(atom)

    def _propagate(self, queue):
        while queue:
            atom = queue.pop()
            for index in self.occurrences.get(atom, ()):
                satisfied, unassigned = self._evaluate(index)
                if satisfied:
                    continue
                if not unassigned:
                    return index
                if len(unassigned) == 1:
                    sign, unit = unassigned[0]
                    self._assign(unit, sign, index)
                    queue.append(unit)
        return None

    def _initial_propagation(self):
        for index, literals in enumerate(self.clauses):
            if not literals:
                return index
        queue = []
        for index in range(len(self.clauses)):
            satisfied, unassigned = self._evaluate(index)
            if satisfied:
                continue
            if not unassigned:
                return index
            if len(unassigned) == 1:
                sign, unit = unassigned[0]
                self._assign(unit, sign, index)
                queue.append(unit)
        return self._propagate(queue)

    def _undo(self, length):
        while len(self.trail) > length:
            atom = self.trail.pop()
            del self.assignment[atom]
            del self.reasons[atom]

    def _record_conflict(self, conflict):
        if conflict != _THEORY:
            self.core.add(conflict)
        for atom in self.trail:
            reason = self.reasons[atom]
            if reason is not None:
                self.core.add(reason)

    def _unsatisfied_atom(self):
        for index in range(len(self.clauses)):
            satisfied, unassigned = self._evaluate(index)
            if not satisfied and unassigned:
                return unassigned[0][1]
        return None

    def solve(self):
        conflict = self._initial_propagation()
        while True:
            check_deadline(self.deadline)
            eg = None
            if conflict is None:
                eg = _theory_egraph(self.bank, self.atoms, self.assignment)
                if not eg.is_consistent():
                    conflict = _THEORY
            if conflict is not None:
                self._record_conflict(conflict)
                while self.levels and self.levels[-1][2]:
                    self.levels.pop()
                if not self.levels:
                    return GroundResult(GroundStatus.UNSAT, core=frozenset(self.core), decisions=self.decisions)
                start, atom, _ = self.levels.pop()
                value = not self.assignment[atom]
                self._undo(start)
                self.levels.append((start, atom, True))
                self._assign(atom, value, None)
                conflict = self._propagate([atom])
                continue
            atom = self._unsatisfied_atom()
            if atom is None:
                return self._model(eg)
            self.decisions += 1
            if self.decisions > self.budget:
                raise ResourceOut("Decision budget of %d exhausted" % self.budget)
            self.levels.append((len(self.trail), atom, False))
            self._assign(atom, True, None)
            conflict = self._propagate([atom])

    def _model(self, eg):
        assignment = dict(self.assignment)
        for atom in self.atoms:
            if atom in assignment:
                continue
            node = self.bank[atom]
            if node.kind == Kind.EQUALITY:
                value = eg.congruent(*node.children)
                if not value:
                    eg.assert_disequality(*node.children)
            else:
                value = eg.congruent(atom, self.bank.true)
            eg.merge(atom, self.bank.true if value else self.bank.false)
            assignment[atom] = value
        return GroundResult(GroundStatus.SAT_CANDIDATE, assignment=assignment, egraph=eg, decisions=self.decisions)


def ground_sat_check(bank, clauses, decision_budget=None, deadline=None):
    """
    Decide whether the ground ``clauses`` are satisfiable modulo
    equality.

    Raises ``ResourceOut`` when more than ``decision_budget`` decisions
    are needed and ``SearchTimeout`` once ``deadline`` (a
    ``time.monotonic`` value) has passed.

    """
    if decision_budget is None:
        decision_budget = conf.get('DECISION_BUDGET')
    return _Dpll(bank, clauses, decision_budget, deadline).solve()


@dataclass
class Limits:
    timeout: Optional[float] = None
    max_rounds: Optional[int] = None
    decision_budget: Optional[int] = None

    @classmethod
    def from_settings(cls, **overrides):
        limits = cls(conf.get('TIMEOUT'), conf.get('MAX_ROUNDS'), conf.get('DECISION_BUDGET'))
        for name, value in overrides.items():
            if value is not None:
                setattr(limits, name, value)
        return limits


@dataclass
class RoundState:
    """
    Everything the instantiation strategies see about the search: the
    problem, the clauses asserted so far, the congruence closure of the
    current candidate model and the instantiations done per round.

    ``deadline`` is the ``time.monotonic()`` value past which work
    should stop by raising ``SearchTimeout``, or ``None``.

    """
    problem: object
    asserted_ground: list
    asserted_qes: list
    round_index: int = 0
    status: GroundStatus = GroundStatus.SAT_CANDIDATE
    egraph: Optional[EGraph] = None
    trace: list = field(default_factory=list)
    gnn_times: list = field(default_factory=list)
    deadline: Optional[float] = None

    @property
    def bank(self):
        return self.problem.bank


@dataclass
class SearchResult:
    problem: str
    outcome: Outcome
    rounds: int
    trace: list
    core: frozenset = frozenset()
    wall_ms: float = 0.0
    gnn_times: list = field(default_factory=list)
    reason: str = ''

    @property
    def proved(self):
        return self.outcome == Outcome.PROVED

    @property
    def instantiations(self):
        return [instantiation for performed in self.trace for instantiation in performed]

    @property
    def instantiation_count(self):
        return sum(len(performed) for performed in self.trace)

    @property
    def gnn_ms(self):
        return sum(self.gnn_times)


def _context_egraph(bank, eg):
    """
    Extend the model's e-graph with every ground term of the bank, so
    matching sees terms that only occur in quantified bodies as well.

    """
    for node in bank:
        if node.ground and node.kind in (Kind.CONSTANT, Kind.FUNCTION_APPLY, Kind.PREDICATE_APPLY, Kind.EQUALITY):
            eg.add(node.id)
    return eg


def solve_loop(problem, strategy, limits=None):
    """
    Run the round loop on ``problem`` with ``strategy`` (an
    ``InstantiationStrategy`` instance) and return a ``SearchResult``.

    The search consumes the problem: terms created by instantiation stay
    in its bank and every quantified expression's instantiation history
    is reset at the start.

    """
    limits = limits or Limits.from_settings()
    started = time.monotonic()
    deadline = None if limits.timeout is None else started + limits.timeout
    bank = problem.bank
    for qe in problem.quantified:
        qe.done_instantiations.clear()
    state = RoundState(problem, list(problem.ground_clauses), list(problem.quantified), deadline=deadline)
    sender = type(strategy)

    def finish(outcome, core=frozenset(), reason=''):
        result = SearchResult(problem.name, outcome, state.round_index, state.trace, core,
                              (time.monotonic() - started) * 1000.0, list(state.gnn_times), reason)
        logger.info("%s: %s after %d rounds, %d instantiations%s", problem.name, outcome.value,
                    result.rounds, result.instantiation_count, " (%s)" % reason if reason else '')
        search_finished.send(sender=sender, state=state, result=result)
        return result

    def check():
        return ground_sat_check(bank, state.asserted_ground, limits.decision_budget, deadline)

    try:
        answer = check()
        if answer.status == GroundStatus.UNSAT:
            state.status = GroundStatus.UNSAT
            return finish(Outcome.PROVED, answer.core)
        state.egraph = _context_egraph(bank, answer.egraph)
        while True:
            if limits.max_rounds is not None and state.round_index >= limits.max_rounds:
                return finish(Outcome.GAVE_UP, reason='round limit')
            check_deadline(deadline)
            state.round_index += 1
            logger.debug("%s: round %d, %d ground clauses", problem.name, state.round_index, len(state.asserted_ground))
            round_started.send(sender=sender, state=state)
            performed = []
            for qe_id, terms in strategy.instantiate(state):
                qe = problem.quantified[qe_id]
                if terms in qe.done_instantiations:
                    continue
                clause = instantiate(bank, qe, terms)
                qe.done_instantiations.add(terms)
                state.asserted_ground.append(clause)
                performed.append((qe_id, terms))
                lemma_added.send(sender=sender, state=state, qe_id=qe_id, terms=terms, clause=clause)
            state.trace.append(performed)
            if not performed:
                return finish(Outcome.GAVE_UP, reason='no new instantiations')
            answer = check()
            if answer.status == GroundStatus.UNSAT:
                state.status = GroundStatus.UNSAT
                return finish(Outcome.PROVED, answer.core)
            state.egraph = _context_egraph(bank, answer.egraph)
    except ResourceOut as exc:
        state.status = GroundStatus.RESOURCE_OUT
        return finish(Outcome.GAVE_UP, reason=str(exc))
    except SearchTimeout:
        return finish(Outcome.TIMEOUT, reason='timeout')
