from django.core.management.base import BaseCommand

from gnn_prover.export import write_dataset
from gnn_prover.harness import collect, corpus_paths
from gnn_prover.management.commands._options import add_limit_arguments, limits_from_options


class Command(BaseCommand):
    help = "Runs e-matching over a corpus and writes the labelled transitions of every proof."

    def add_arguments(self, parser):
        parser.add_argument('corpus', help='A directory of problems, or a file listing problem paths.')
        parser.add_argument('--dataset', required=True, help='Where to write the dataset.')
        parser.add_argument('--seed', type=int, default=0,
                            help='Seed for choosing among equally useful instantiations. Defaults to 0.')
        parser.add_argument('--jobs', type=int, default=None,
                            help='Worker processes. Defaults to the GNN_PROVER_JOBS setting.')
        add_limit_arguments(parser)

    def handle(self, *args, **options):
        paths = corpus_paths(options['corpus'])
        transitions, summary = collect(paths, options['seed'], limits_from_options(options), options['jobs'])
        write_dataset(transitions, options['dataset'], options['seed'])
        if options['verbosity'] > 1:
            for name, status in sorted(summary.statuses.items()):
                self.stdout.write("%s: %s" % (name, status))
        self.stdout.write("Solved %d of %d problems (%d errors); wrote %d transitions to %s" % (
            summary.solved, summary.problems, summary.errors, summary.transitions, options['dataset']))
