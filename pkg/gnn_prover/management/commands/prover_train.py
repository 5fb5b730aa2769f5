import json

from django.core.management.base import BaseCommand, CommandError

from gnn_prover.exceptions import DatasetError
from gnn_prover.export import read_dataset
from gnn_prover.gnn import AGGREGATIONS, save_params
from gnn_prover.harness import train_model


class Command(BaseCommand):
    help = "Trains the guidance network on a dataset and writes its weights."

    def add_arguments(self, parser):
        parser.add_argument('--dataset', required=True, help='Dataset written by prover_collect.')
        parser.add_argument('--weights', required=True, help='Where to write the trained weights.')
        parser.add_argument('--iterations', type=int, default=150,
                            help='Training iterations; each samples one transition per problem. Defaults to 150.')
        parser.add_argument('--seed', type=int, default=0, help='Initialization and sampling seed. Defaults to 0.')
        parser.add_argument('--embedding-size', type=int, default=None, dest='embedding_size',
                            help='Embedding width. Defaults to GNN_PROVER_EMBEDDING_SIZE.')
        parser.add_argument('--layers', type=int, default=None,
                            help='Message-passing layers. Defaults to GNN_PROVER_LAYERS.')
        parser.add_argument('--aggregation', default=None, choices=AGGREGATIONS,
                            help='Neighbour aggregation. Defaults to GNN_PROVER_AGGREGATION.')
        parser.add_argument('--learning-rate', type=float, default=None, dest='learning_rate',
                            help='Adam learning rate. Defaults to GNN_PROVER_LEARNING_RATE.')
        parser.add_argument('--loss-log', default=None, dest='loss_log',
                            help='Also write the mean loss of every iteration, one per line, to this file.')

    def handle(self, *args, **options):
        if options['iterations'] < 0:
            raise CommandError("--iterations cannot be negative")
        try:
            transitions = read_dataset(options['dataset'])
        except (DatasetError, OSError) as exc:
            raise CommandError(str(exc))
        if not transitions:
            raise CommandError("The dataset %s holds no transitions" % options['dataset'])
        params, losses, metrics = train_model(
            transitions, options['iterations'], options['seed'], options['embedding_size'], options['layers'],
            options['aggregation'], options['learning_rate'])
        save_params(params, options['weights'])
        if options['loss_log']:
            with open(options['loss_log'], 'w', encoding='utf-8') as handle:
                handle.writelines('%r\n' % value for value in losses)
        if options['verbosity'] > 1:
            self.stdout.write(json.dumps(metrics, sort_keys=True))
        self.stdout.write("Trained on %d transitions for %d iterations" % (len(transitions), options['iterations']))
        if losses:
            self.stdout.write("Loss: %.4f -> %.4f" % (losses[0], losses[-1]))
        self.stdout.write("Term top-1 accuracy: %.1f%%" % (100 * metrics['term_accuracy']))
        self.stdout.write("Useful QEs scored above 0.5: %.1f%%" % (100 * metrics['qe_tpr']))
        self.stdout.write("Useless QEs scored at most 0.5: %.1f%%" % (100 * metrics['qe_tnr']))
