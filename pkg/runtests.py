#!/usr/bin/env python
"""
Runs the test suite with a minimal settings configuration::

    python runtests.py [test labels]

Set ``GNN_PROVER_EXPERIMENTS=1`` to include the long-running
experiment checks.

"""

import sys

import django
from django.conf import settings
from django.test.utils import get_runner

TEST_SETTINGS = {
    'INSTALLED_APPS': ['gnn_prover'],
    'DATABASES': {},
    'GNN_PROVER_TIMEOUT': 10.0,
}


def runtests(labels):
    if not settings.configured:
        settings.configure(**TEST_SETTINGS)
    django.setup()
    runner = get_runner(settings)(verbosity=1)
    return runner.run_tests(labels or ['gnn_prover'])


if __name__ == '__main__':
    sys.exit(bool(runtests(sys.argv[1:])))
