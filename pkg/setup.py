import os
from setuptools import setup, Command

with open(os.path.join(os.path.dirname(__file__), 'README.md')) as readme:
    README = readme.read()

# allow setup.py to be run from any path
os.chdir(os.path.normpath(os.path.join(os.path.abspath(__file__), os.pardir)))


class TestCommand(Command):
    user_options = []

    def initialize_options(self):
        pass

    def finalize_options(self):
        pass

    def run(self):
        from django.conf import settings
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
        from django.core.management import call_command
        import django
        django.setup()
        call_command('test', 'spdtransport')

setup(
    name='django-spd-transport',
    version='0.1.0',
    packages=[
        'spdtransport',
        'spdtransport.management',
        'spdtransport.management.commands',
        'spdtransport.migrations',
        'spdtransport.tests',
    ],
    include_package_data=True,
    license='MIT',
    description='A Django app for aligning covariance matrices recorded \
    in different domains by parallel transport on the SPD cone',
    long_description=README,
    long_description_content_type='text/markdown',
    classifiers=[
        'Environment :: Console',
        'Framework :: Django',
        'Framework :: Django :: 3.2',
        'Intended Audience :: Science/Research',
        'Operating System :: OS Independent',
        'Programming Language :: Python',
        'Programming Language :: Python :: 3',
        'Topic :: Scientific/Engineering :: Mathematics',
    ],
    python_requires='>=3.7',
    install_requires=[
        'Django>=3.1',
        'numpy>=1.17',
        'scipy>=1.4',
        'scikit-learn>=0.24',
    ],
    cmdclass={
        'test': TestCommand
    },
)
