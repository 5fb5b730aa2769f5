from django.core.management.base import BaseCommand, CommandError

from gnn_prover.harness import ERROR, format_line, solve_problem
from gnn_prover.management.commands._options import (add_limit_arguments, add_strategy_arguments,
                                                      limits_from_options, strategy_specs)


class Command(BaseCommand):
    help = "Solves one problem and prints a machine-readable result line."

    def add_arguments(self, parser):
        parser.add_argument('problem', help='Path of a native (.sexp) or TPTP CNF (.p) problem.')
        add_strategy_arguments(parser)
        add_limit_arguments(parser)

    def handle(self, *args, **options):
        spec = strategy_specs(options)[0]
        line = solve_problem(options['problem'], spec, limits_from_options(options))
        self.stdout.write(format_line(line))
        if line['status'] == ERROR:
            raise CommandError(line['error'], returncode=2)
