import os

from django.core.management.base import BaseCommand, CommandError

from gnn_prover.corpus import split_corpus
from gnn_prover.harness import corpus_paths


class Command(BaseCommand):
    help = "Splits a corpus into training, development and holdout lists."

    def add_arguments(self, parser):
        parser.add_argument('corpus', help='A directory of problems, or a file listing problem paths.')
        parser.add_argument('out_dir', help='Directory receiving train.txt, devel.txt and holdout.txt.')
        parser.add_argument('--seed', type=int, default=0, help='Shuffle seed. Defaults to 0.')
        parser.add_argument('--fractions', type=float, nargs=3, default=[0.8, 0.1, 0.1],
                            metavar=('TRAIN', 'DEVEL', 'HOLDOUT'),
                            help='Fractions of the three parts. Defaults to 0.8 0.1 0.1.')

    def handle(self, *args, **options):
        try:
            parts = split_corpus(corpus_paths(options['corpus']), options['seed'], tuple(options['fractions']))
        except ValueError as exc:
            raise CommandError(str(exc))
        os.makedirs(options['out_dir'], exist_ok=True)
        for name, paths in zip(('train', 'devel', 'holdout'), parts):
            with open(os.path.join(options['out_dir'], name + '.txt'), 'w', encoding='utf-8') as handle:
                handle.writelines(path + '\n' for path in paths)
        self.stdout.write("Split %d problems into %d/%d/%d" % (sum(len(part) for part in parts),
                                                                len(parts[0]), len(parts[1]), len(parts[2])))
