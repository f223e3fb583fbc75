import os
import logging
import platform
from datetime import datetime

import django
import numpy
import scipy
import sklearn
from django.core.management.base import BaseCommand, CommandError
from django.utils import timezone

import spdtransport
from spdtransport.config import default_output_dir, resolve_config
from spdtransport.exceptions import ArtifactIOError, SpdTransportError
from spdtransport.fileformats import (
    ENCODINGS,
    load_datasets,
    sha256_file,
    sidecar_path,
    write_dataset,
    write_json,
)
from spdtransport.models import Run

logger = logging.getLogger(__name__)


class SpdTransportCommand(BaseCommand):
    """
    Base management command that provides common functionality for the other
    commands in this app: configuration, a run directory with a manifest,
    a Run record, and the mapping of library errors to exit codes.

    Subclasses implement ``process``, which runs once the configuration
    is resolved and the run directory exists.
    """

    def add_arguments(self, parser):
        parser.add_argument(
            '--config',
            dest='config',
            default=None,
            help='JSON file of configuration values',
        )
        parser.add_argument(
            '--output-dir',
            dest='output_dir',
            default=None,
            help='Directory under which run directories are created',
        )
        parser.add_argument(
            '--run-dir',
            dest='run_dir',
            default=None,
            help='Write this run into exactly this directory',
        )
        parser.add_argument(
            '--seed',
            type=int,
            dest='seed',
            default=None,
            help='Random seed',
        )
        parser.add_argument(
            '--strict',
            action='store_true',
            dest='strict',
            default=None,
            help='Fail when a Riemannian mean does not converge',
        )
        parser.add_argument(
            '--workers',
            type=int,
            dest='workers',
            default=None,
            help='Threads used for per-domain means',
        )
        parser.add_argument(
            '--encoding',
            choices=ENCODINGS,
            dest='encoding',
            default=None,
            help='Encoding of written datasets',
        )
        parser.add_argument(
            '--verbose',
            action='store_true',
            dest='verbose',
            default=False,
            help='More logging messages',
        )

    def config_overrides(self, options):
        """
        Configuration values given on the command line. Subclasses extend
        this with their own flags.
        """
        return {
            'seed': options.get('seed'),
            'strict': options.get('strict'),
            'workers': options.get('workers'),
            'encoding': options.get('encoding'),
            'output_dir': options.get('output_dir'),
        }

    @property
    def command_name(self):
        return self.__module__.rsplit('.', 1)[-1]

    def handle(self, *args, **options):
        """
        Sets up the run and calls ``process``.
        """
        # Configure the logger
        FORMAT = '%(asctime)s %(levelname)s: %(message)s'
        if options['verbose']:
            logging.basicConfig(
                format=FORMAT,
                datefmt='%I:%M:%S',
                level=logging.DEBUG)
        else:
            logging.basicConfig(
                format=FORMAT,
                datefmt='%I:%M:%S',
                level=logging.INFO)

        # Start the clock
        self.start_datetime = timezone.now()
        self.inputs = {}
        self.outputs = []

        try:
            self.cfg = resolve_config(options.get('config'),
                                      self.config_overrides(options))
            self.run_dir = self.make_run_dir(options.get('run_dir'))
        except SpdTransportError as e:
            raise CommandError(str(e), returncode=e.exit_code)

        self.run = Run.objects.create(
            command=self.command_name,
            run_dir=self.run_dir,
            config_hash=self.cfg.digest(),
            seed=self.cfg.seed,
            started=self.start_datetime)
        logger.info('Writing to {}'.format(self.run_dir))

        try:
            self.process(*args, **options)
        except SpdTransportError as e:
            logger.error(str(e))
            self.write_manifest(quiet=True)
            self.finish(Run.STATUS_FAILED, e.exit_code, str(e))
            raise CommandError(str(e), returncode=e.exit_code)

        self.write_manifest()
        self.finish(Run.STATUS_SUCCEEDED, 0, '')
        logger.info('Wrote {} files in {}'.format(
            len(self.outputs), self.run_dir))

    def process(self, *args, **options):
        raise NotImplementedError

    def make_run_dir(self, run_dir=None):
        """
        Create ``run_dir``, or a new ``<command>-<UTC timestamp>``
        directory under the output directory.
        """
        if run_dir is None:
            base = self.cfg.output_dir or default_output_dir()
            stamp = datetime.utcnow().strftime('%Y%m%dT%H%M%S%fZ')
            run_dir = os.path.join(
                base, '{}-{}'.format(self.command_name, stamp))
        try:
            os.makedirs(run_dir, exist_ok=True)
        except OSError as e:
            raise ArtifactIOError(e.strerror or str(e), path=run_dir)
        return run_dir

    def finish(self, status, exit_code, message):
        self.run.status = status
        self.run.exit_code = exit_code
        self.run.message = message
        self.run.finished = timezone.now()
        self.run.save()

    def output_path(self, name):
        path = os.path.join(self.run_dir, name)
        self.outputs.append(path)
        return path

    def write_json(self, name, obj):
        return write_json(self.output_path(name), obj)

    def write_dataset(self, name, domains):
        paths = write_dataset(os.path.join(self.run_dir, name), domains,
                              self.cfg.encoding)
        self.outputs.extend(paths)
        return paths

    def load_inputs(self, paths):
        """
        Read dataset files and remember their digests for the manifest.
        """
        domains = load_datasets(paths)
        for path in paths:
            sidecar = sidecar_path(path)
            self.inputs[os.path.basename(sidecar)] = sha256_file(sidecar)
        logger.info('Loaded {} domains from {} files'.format(
            len(domains), len(paths)))
        return domains

    def write_manifest(self, quiet=False):
        """
        Everything needed to reproduce the run. Nothing in it depends on
        the clock or on where the run directory lives.
        """
        outputs = {}
        for path in self.outputs:
            if os.path.exists(path):
                outputs[os.path.relpath(path, self.run_dir)] = sha256_file(path)
        manifest = {
            'command': self.command_name,
            'config': self.cfg.to_dict(),
            'config_hash': self.cfg.digest(),
            'seed': self.cfg.seed,
            'inputs': self.inputs,
            'outputs': outputs,
            'versions': {
                'spdtransport': spdtransport.__version__,
                'numpy': numpy.__version__,
                'scipy': scipy.__version__,
                'scikit-learn': sklearn.__version__,
                'django': django.get_version(),
                'python': platform.python_version(),
            },
        }
        try:
            write_json(os.path.join(self.run_dir, 'manifest.json'), manifest)
        except ArtifactIOError:
            if not quiet:
                raise
