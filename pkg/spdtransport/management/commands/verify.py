import logging

from spdtransport.exceptions import VerificationFailed
from spdtransport.management.commands import SpdTransportCommand
from spdtransport.verification import verify_artifacts

logger = logging.getLogger(__name__)


class Command(SpdTransportCommand):
    help = "Check the invariants of the artifacts of an adapt run"

    def add_arguments(self, parser):
        super(Command, self).add_arguments(parser)
        parser.add_argument(
            'artifacts',
            help='Run directory written by the adapt command',
        )
        parser.add_argument(
            '--compare',
            dest='compare',
            default=None,
            help='Another adapt run over the same inputs whose features '
                 'must coincide',
        )

    def process(self, *args, **options):
        checks = verify_artifacts(options['artifacts'], options['compare'])
        failed = [check.name for check in checks if not check.passed]
        self.write_json('verification.json', {
            'passed': not failed,
            'checks': [check.to_dict() for check in checks],
        })
        if failed:
            raise VerificationFailed(
                'Failed checks: {}'.format(', '.join(failed)), failed)
