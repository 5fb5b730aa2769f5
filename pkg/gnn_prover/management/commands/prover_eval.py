import json

from django.core.management.base import BaseCommand, CommandError

from gnn_prover.harness import corpus_paths, evaluate
from gnn_prover.management.commands._options import (add_limit_arguments, add_strategy_arguments,
                                                      limits_from_options, strategy_specs)
from gnn_prover.strategies import registry


class Command(BaseCommand):
    help = ("Evaluates strategies over a corpus, printing solved counts and the matrix of set differences "
            "(row minus column).")

    def add_arguments(self, parser):
        parser.add_argument('corpus', help='A directory of problems, or a file listing problem paths.')
        add_strategy_arguments(parser, multiple=True)
        add_limit_arguments(parser)
        parser.add_argument('--jobs', type=int, default=None,
                            help='Worker processes. Defaults to the GNN_PROVER_JOBS setting.')
        parser.add_argument('--csv', default=None, help='Write per-run instantiation counts to this CSV file.')
        parser.add_argument('--results', default=None, help='Write every result line to this file.')

    def handle(self, *args, **options):
        specs = strategy_specs(options)
        if any(spec.weights is None for spec in specs if registry.get(spec.name).needs_weights):
            raise CommandError("Guided strategies need --weights")
        evaluation = evaluate(corpus_paths(options['corpus']), specs, limits_from_options(options), options['jobs'])
        if options['csv']:
            with open(options['csv'], 'w', encoding='utf-8') as handle:
                handle.write(evaluation.counts_csv())
        if options['results']:
            with open(options['results'], 'w', encoding='utf-8') as handle:
                for label, lines in evaluation.results.items():
                    for line in lines:
                        handle.write(json.dumps(dict(line, strategy=label), sort_keys=True) + '\n')
        self.stdout.write(evaluation.table())
