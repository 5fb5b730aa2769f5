"""
Batch driver behind the management commands: solving single problems,
collecting training data, training, and evaluating strategies over a
corpus.

Problems are independent; batches fan out over a process pool with one
problem per worker at a time. Every worker re-reads its problem from
disk, so no state is shared between searches.

"""

import csv
import io
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from gnn_prover import conf
from gnn_prover.engine import Limits, solve_loop
from gnn_prover.exceptions import ProverError
from gnn_prover.export import TraceRecorder, label_transitions, minimize_instantiations
from gnn_prover.gnn import GnnParameters, evaluate_metrics, load_params, train
from gnn_prover.guidance import GuidanceConfig
from gnn_prover.parser import read_problem
from gnn_prover.strategies import registry

logger = logging.getLogger(__name__)

PROBLEM_EXTENSIONS = ('.sexp', '.smt', '.p', '.tptp')
ERROR = 'ERROR'


def corpus_paths(location):
    """
    Return the problem files of ``location``: every problem file of a
    directory, or the paths listed one per line in a list file (as
    written by the ``split_corpus`` command).

    """
    if os.path.isdir(location):
        return sorted(os.path.join(location, entry) for entry in os.listdir(location)
                      if entry.endswith(PROBLEM_EXTENSIONS))
    with open(location, encoding='utf-8') as handle:
        return [line.strip() for line in handle if line.strip()]


def problem_name(path):
    return os.path.splitext(os.path.basename(path))[0]


@dataclass
class StrategySpec:
    """
    Everything needed to build a fresh strategy inside a worker process.

    """
    name: str
    weights: str = None
    threshold: float = None
    max_inst_per_qe: int = None
    seed: int = 0

    def label(self):
        if self.max_inst_per_qe not in (None, 1):
            return '%s-k%d' % (self.name, self.max_inst_per_qe)
        return self.name


_loaded_weights = {}


def _weights(path):
    """
    Load the weights at ``path`` once per process, reloading them when
    the file has been rewritten since.

    """
    stat = os.stat(path)
    key = (os.path.abspath(path), stat.st_mtime_ns, stat.st_size)
    if key not in _loaded_weights:
        for stale in [cached for cached in _loaded_weights if cached[0] == key[0]]:
            del _loaded_weights[stale]
        _loaded_weights[key] = load_params(path)
    return _loaded_weights[key]


def build_strategy(spec):
    strategy_class = registry.get(spec.name)
    if not strategy_class.needs_weights:
        return strategy_class()
    if not spec.weights:
        raise ProverError("The '%s' strategy needs --weights" % spec.name)
    config = GuidanceConfig(strategy_class.mode, spec.threshold, spec.max_inst_per_qe, spec.seed)
    return strategy_class(_weights(spec.weights), config)


def result_line(result):
    gnn_times = result.gnn_times or [0.0]
    return {
        'problem': result.problem,
        'status': result.outcome.value,
        'rounds': result.rounds,
        'instantiation_count': result.instantiation_count,
        'wall_ms': round(result.wall_ms, 3),
        'gnn_ms': round(result.gnn_ms, 3),
        'gnn_min_ms': round(min(gnn_times), 3),
        'gnn_max_ms': round(max(gnn_times), 3),
    }


def error_line(path, exc):
    return {
        'problem': problem_name(path),
        'status': ERROR,
        'rounds': 0,
        'instantiation_count': 0,
        'wall_ms': 0.0,
        'gnn_ms': 0.0,
        'gnn_min_ms': 0.0,
        'gnn_max_ms': 0.0,
        'error': str(exc),
    }


def format_line(line):
    return json.dumps(line, sort_keys=True, separators=(',', ':'))


def solve_problem(path, spec, limits=None):
    """
    Solve the problem at ``path`` and return its result line. Problems
    that cannot be read or solved yield an ``ERROR`` line.

    """
    try:
        problem = read_problem(path)
        result = solve_loop(problem, build_strategy(spec), limits or Limits.from_settings())
    except (ProverError, OSError, UnicodeDecodeError) as exc:
        logger.error("%s: %s", path, exc)
        return error_line(path, exc)
    return result_line(result)


def _collect_one(path, seed, limits):
    try:
        problem = read_problem(path)
        with TraceRecorder(problem) as recorder:
            result = solve_loop(problem, registry.create('ematch'), limits)
        if not result.proved:
            return problem.name, result.outcome.value, []
        useful = minimize_instantiations(problem, result, limits.decision_budget)
        return problem.name, result.outcome.value, label_transitions(result, recorder.graphs, useful, seed)
    except (ProverError, OSError, UnicodeDecodeError) as exc:
        logger.error("%s: %s", path, exc)
        return problem_name(path), ERROR, []


def _map(function, arguments, jobs):
    if jobs <= 1 or len(arguments) <= 1:
        return [function(*item) for item in arguments]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(function, *zip(*arguments)))


@dataclass
class CollectSummary:
    problems: int = 0
    solved: int = 0
    errors: int = 0
    transitions: int = 0
    statuses: dict = field(default_factory=dict)


def collect(paths, seed=0, limits=None, jobs=None):
    """
    Run e-matching over ``paths`` and return the labelled transitions of
    every proved problem, in path order, with a summary.

    """
    limits = limits or Limits.from_settings()
    jobs = conf.get('JOBS') if jobs is None else jobs
    outcomes = _map(_collect_one, [(path, seed, limits) for path in paths], jobs)
    summary = CollectSummary(problems=len(paths))
    transitions = []
    for name, status, found in outcomes:
        summary.statuses[name] = status
        summary.solved += status == 'PROVED'
        summary.errors += status == ERROR
        transitions.extend(found)
    summary.transitions = len(transitions)
    logger.info("Collected %d transitions from %d of %d problems", summary.transitions, summary.solved, summary.problems)
    return transitions, summary


def train_model(transitions, iterations, seed=0, embedding_size=None, layers=None, aggregation=None,
                learning_rate=None):
    """
    Initialize parameters from ``seed``, train them on ``transitions``
    and return ``(params, losses, metrics)``.

    """
    params = GnnParameters.initialize(embedding_size, layers, seed, aggregation)
    params, losses = train(params, transitions, iterations, seed, learning_rate)
    return params, losses, evaluate_metrics(params, transitions)


def difference_matrix(solved):
    """
    Return ``{(row, column): |solved[row] - solved[column]|}`` over all
    ordered pairs of strategies.

    """
    return dict(((row, column), len(solved[row] - solved[column])) for row in solved for column in solved)


@dataclass
class Evaluation:
    results: dict
    solved: dict
    differences: dict
    medians: dict

    def table(self):
        labels = list(self.results)
        width = max([len(label) for label in labels] + [8])
        lines = ['%s  %6s  %10s  %10s' % ('strategy'.ljust(width), 'solved', 'median', 'gnn ms')]
        for label in labels:
            gnn = sum(line['gnn_ms'] for line in self.results[label])
            median = self.medians[label]
            lines.append('%s  %6d  %10s  %10.1f' % (label.ljust(width), len(self.solved[label]),
                                                   '-' if median is None else '%.1f' % median, gnn))
        lines.append('')
        lines.append(' ' * width + '  ' + '  '.join(label.rjust(width) for label in labels))
        for row in labels:
            lines.append(row.ljust(width) + '  ' + '  '.join(
                str(self.differences[(row, column)]).rjust(width) for column in labels))
        return '\n'.join(lines) + '\n'

    def counts_csv(self):
        """
        Per-run instantiation counts followed by one median row per
        strategy over its successful runs.

        """
        output = io.StringIO()
        writer = csv.writer(output, lineterminator='\n')
        writer.writerow(['strategy', 'problem', 'status', 'instantiation_count', 'wall_ms', 'gnn_ms',
                         'gnn_min_ms', 'gnn_max_ms'])
        for label, lines in self.results.items():
            for line in lines:
                writer.writerow([label, line['problem'], line['status'], line['instantiation_count'],
                                 line['wall_ms'], line['gnn_ms'], line['gnn_min_ms'], line['gnn_max_ms']])
        for label, median in self.medians.items():
            writer.writerow([label, 'MEDIAN', 'PROVED', '' if median is None else median, '', '', '', ''])
        return output.getvalue()


def evaluate(paths, specs, limits=None, jobs=None):
    """
    Run every strategy of ``specs`` on every problem of ``paths``.

    """
    limits = limits or Limits.from_settings()
    jobs = conf.get('JOBS') if jobs is None else jobs
    work = [(path, spec, limits) for spec in specs for path in paths]
    lines = _map(solve_problem, work, jobs)
    results = {}
    for (_, spec, _), line in zip(work, lines):
        results.setdefault(spec.label(), []).append(line)
    solved = dict((label, set(line['problem'] for line in found if line['status'] == 'PROVED'))
                  for label, found in results.items())
    medians = {}
    for label, found in results.items():
        counts = [line['instantiation_count'] for line in found if line['status'] == 'PROVED']
        medians[label] = float(np.median(counts)) if counts else None
    return Evaluation(results, solved, difference_matrix(solved), medians)
