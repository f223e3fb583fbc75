"""
Test wiring for pytest: the same Django settings that ``setup.py test`` uses.
"""
import os

import django
import pytest
from django.conf import settings

if not settings.configured:
    settings.configure(
        DATABASES={
            'default': {
                'NAME': ':memory:',
                'ENGINE': 'django.db.backends.sqlite3'
            }
        },
        INSTALLED_APPS=(
            'django.contrib.contenttypes',
            'django.contrib.auth',
            'spdtransport',
        ),
        BASE_DIR=os.path.dirname(os.path.abspath(__file__)),
        USE_TZ=True,
    )
    django.setup()


@pytest.fixture(scope='session', autouse=True)
def django_test_environment():
    from django.test.utils import (setup_databases, setup_test_environment,
                                   teardown_databases, teardown_test_environment)
    setup_test_environment()
    old_config = setup_databases(verbosity=0, interactive=False)
    yield
    teardown_databases(old_config, verbosity=0)
    teardown_test_environment()
