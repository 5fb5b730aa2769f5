from django.core.management.base import BaseCommand, CommandError

from gnn_prover.corpus import gen_needle_corpus


class Command(BaseCommand):
    help = "Writes a corpus of synthetic needle problems."

    def add_arguments(self, parser):
        parser.add_argument('out_dir', help='Directory to write the problems to; created if missing.')
        parser.add_argument('--problems', type=int, default=50, help='Number of problems. Defaults to 50.')
        parser.add_argument('--distractors', type=int, default=20,
                            help='Constants besides the needle. Defaults to 20.')
        parser.add_argument('--seed', type=int, default=0, help='Seed for needle placement. Defaults to 0.')

    def handle(self, *args, **options):
        if options['problems'] < 0 or options['distractors'] < 0:
            raise CommandError("--problems and --distractors cannot be negative")
        paths = gen_needle_corpus(options['problems'], options['distractors'], options['seed'], options['out_dir'])
        self.stdout.write("Wrote %d problems to %s" % (len(paths), options['out_dir']))
