import logging

from spdtransport.evaluation import CLASSIFIERS, compare_methods
from spdtransport.fileformats import write_confusion
from spdtransport.management.commands import SpdTransportCommand
from spdtransport.pipeline import METHODS

logger = logging.getLogger(__name__)


class Command(SpdTransportCommand):
    help = "Compare alignment methods by leave-one-domain-out classification"

    def add_arguments(self, parser):
        super(Command, self).add_arguments(parser)
        parser.add_argument(
            'datasets',
            nargs='+',
            help='Labelled dataset sidecar files',
        )
        parser.add_argument(
            '--methods',
            nargs='+',
            choices=METHODS,
            dest='methods',
            default=None,
            help='Methods to compare',
        )
        parser.add_argument(
            '--classifier',
            choices=CLASSIFIERS,
            dest='classifier',
            default=None,
            help='Classifier trained on the aligned features',
        )

    def config_overrides(self, options):
        overrides = super(Command, self).config_overrides(options)
        overrides['methods'] = options.get('methods')
        overrides['classifier'] = options.get('classifier')
        return overrides

    def process(self, *args, **options):
        domains = self.load_inputs(options['datasets'])
        report = compare_methods(
            domains, self.cfg.methods, self.cfg.mean_config(),
            self.cfg.classifier, self.cfg.hub_value(), self.cfg.strict,
            self.cfg.workers)

        self.write_json('report.json', report.to_dict())
        for name, method_report in report.per_method.items():
            write_confusion(
                self.output_path('confusion-{}.csv'.format(name)),
                method_report.classes, method_report.confusion)
        logger.info('Ranking: {}'.format(', '.join(report.ranking())))
