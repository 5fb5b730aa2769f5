"""
Settings for ``gnn_prover``.

Every tunable is read from the Django settings module under a
``GNN_PROVER_`` prefix, falling back to the defaults below. When no
settings module has been configured at all (the library used from plain
Python), the defaults apply.

"""

from django.conf import settings
from django.core.exceptions import ImproperlyConfigured

DEFAULTS = {
    'TIMEOUT': 10.0,
    'DECISION_BUDGET': 10 ** 6,
    'MATCH_CAP': 1000,
    'MAX_ROUNDS': None,
    'EMBEDDING_SIZE': 64,
    'LAYERS': 10,
    'AGGREGATION': 'mean-max',
    'LEARNING_RATE': 0.0001,
    'THRESHOLD': 0.00001,
    'MAX_INST_PER_QE': 1,
    'JOBS': 1,
}


def get(name):
    """
    Return the value of the setting ``GNN_PROVER_<name>``, or its
    default when the setting is absent.

    """
    if name not in DEFAULTS:
        raise ImproperlyConfigured("Unknown gnn_prover setting '%s'" % name)
    if not settings.configured:
        return DEFAULTS[name]
    return getattr(settings, 'GNN_PROVER_%s' % name, DEFAULTS[name])
