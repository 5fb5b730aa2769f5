"""
A script which runs the prover's management commands without a Django
project.

Any management command of the application can be given, followed by
its arguments; for example, to solve one problem with e-matching::

    gnn-prover prover_solve problems/needle_0000.sexp --strategy=ematch

or to run the whole pipeline on a synthetic corpus::

    gnn-prover gen_needle_corpus corpus --problems=200
    gnn-prover split_corpus corpus splits --fractions 0.8 0 0.2
    gnn-prover prover_collect splits/train.txt --dataset=train.jsonl
    gnn-prover prover_train --dataset=train.jsonl --weights=model.weights
    gnn-prover prover_eval splits/holdout.txt --strategy=enum --strategy=threshold --weights=model.weights

**Arguments:**

``--settings=SETTINGS``
    Django settings module to use. When neither this nor the
    ``DJANGO_SETTINGS_MODULE`` environment variable is given, a minimal
    configuration with the built-in defaults is used; ``GNN_PROVER_*``
    settings then take their default values.

"""

import os
import sys

import django
from django.conf import settings
from django.core import management

DEFAULT_SETTINGS = {
    'INSTALLED_APPS': ['gnn_prover'],
    'LOGGING': {
        'version': 1,
        'disable_existing_loggers': False,
        'handlers': {'console': {'class': 'logging.StreamHandler'}},
        'loggers': {'gnn_prover': {'handlers': ['console'], 'level': 'WARNING'}},
    },
}


def main(argv=None):
    argv = list(sys.argv if argv is None else argv)
    has_settings = any(arg == '--settings' or arg.startswith('--settings=') for arg in argv)
    if not has_settings and 'DJANGO_SETTINGS_MODULE' not in os.environ and not settings.configured:
        settings.configure(**DEFAULT_SETTINGS)
        django.setup()
    management.execute_from_command_line(argv)


if __name__ == '__main__':
    main()
