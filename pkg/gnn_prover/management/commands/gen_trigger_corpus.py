from django.core.management.base import BaseCommand, CommandError

from gnn_prover.corpus import gen_trigger_corpus


class Command(BaseCommand):
    help = "Writes a corpus of problems whose triggers have many matches."

    def add_arguments(self, parser):
        parser.add_argument('out_dir', help='Directory to write the problems to; created if missing.')
        parser.add_argument('--problems', type=int, default=50, help='Number of problems. Defaults to 50.')
        parser.add_argument('--matches', type=int, default=10, help='Matches of each trigger. Defaults to 10.')
        parser.add_argument('--seed', type=int, default=0, help='Seed. Defaults to 0.')

    def handle(self, *args, **options):
        if options['problems'] < 0 or options['matches'] < 1:
            raise CommandError("--problems cannot be negative and --matches must be positive")
        paths = gen_trigger_corpus(options['problems'], options['matches'], options['seed'], options['out_dir'])
        self.stdout.write("Wrote %d problems to %s" % (len(paths), options['out_dir']))
