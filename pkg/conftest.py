import django
from django.conf import settings

from runtests import TEST_SETTINGS


def pytest_configure(config):
    if not settings.configured:
        settings.configure(**TEST_SETTINGS)
        django.setup()
