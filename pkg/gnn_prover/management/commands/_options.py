"""
Options shared by the prover's management commands.

"""

from django.core.management.base import CommandError

from gnn_prover.engine import Limits
from gnn_prover.guidance import GuidanceConfig
from gnn_prover.harness import StrategySpec
from gnn_prover.strategies import registry


def add_limit_arguments(parser):
    parser.add_argument('--timeout', type=float, default=None,
                        help='Wall-clock limit per problem, in seconds. Defaults to the GNN_PROVER_TIMEOUT setting.')
    parser.add_argument('--max-rounds', type=int, default=None, dest='max_rounds',
                        help='Give up after this many rounds. Unbounded unless GNN_PROVER_MAX_ROUNDS is set.')


def add_strategy_arguments(parser, multiple=False):
    if multiple:
        parser.add_argument('--strategy', action='append', dest='strategies', choices=registry.names(),
                            help='Strategy to evaluate; repeat for several. Defaults to enum and ematch.')
        parser.add_argument('--max-inst-per-qe', type=int, action='append', dest='max_inst_per_qe',
                            help='Instantiations per quantified expression per round for guided strategies; '
                                 'repeat to evaluate several values.')
    else:
        parser.add_argument('--strategy', default='enum', choices=registry.names(),
                            help='Instantiation strategy. Defaults to enum.')
        parser.add_argument('--max-inst-per-qe', type=int, default=None, dest='max_inst_per_qe',
                            help='Instantiations per quantified expression per round for guided strategies.')
    parser.add_argument('--threshold', type=float, default=None,
                        help='Score cutoff of the threshold strategy. Defaults to GNN_PROVER_THRESHOLD.')
    parser.add_argument('--weights', default=None,
                        help='Trained network weights, required by the guided strategies.')
    parser.add_argument('--seed', type=int, default=0,
                        help='Seed of the guided strategies\' random choices. Defaults to 0.')


def limits_from_options(options):
    return Limits.from_settings(timeout=options.get('timeout'), max_rounds=options.get('max_rounds'))


def strategy_specs(options):
    """
    Expand the strategy options into one ``StrategySpec`` per evaluated
    configuration. Out-of-range guidance options raise ``CommandError``.

    """
    names = options.get('strategies') or [options.get('strategy') or 'enum']
    if options.get('strategies') is None and 'strategies' in options:
        names = ['enum', 'ematch']
    values = options.get('max_inst_per_qe')
    if not isinstance(values, list):
        values = [values]
    specs = []
    for name in names:
        strategy_class = registry.get(name)
        if strategy_class.needs_weights:
            for value in values:
                try:
                    GuidanceConfig(strategy_class.mode, options.get('threshold'), value)
                except ValueError as exc:
                    raise CommandError(str(exc))
                specs.append(StrategySpec(name, options.get('weights'), options.get('threshold'), value,
                                          options.get('seed', 0)))
        else:
            specs.append(StrategySpec(name, seed=options.get('seed', 0)))
    return specs
