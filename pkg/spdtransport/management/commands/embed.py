import logging

from spdtransport.evaluation import pca_embed
from spdtransport.fileformats import write_rows
from spdtransport.management.commands import SpdTransportCommand
from spdtransport.pipeline import METHODS, PARALLEL_TRANSPORT, DomainAligner

logger = logging.getLogger(__name__)


class Command(SpdTransportCommand):
    help = "Export a two-dimensional PCA embedding of aligned features"

    def add_arguments(self, parser):
        super(Command, self).add_arguments(parser)
        parser.add_argument(
            'datasets',
            nargs='+',
            help='Dataset sidecar files',
        )
        parser.add_argument(
            '--method',
            choices=METHODS,
            dest='method',
            default=PARALLEL_TRANSPORT,
            help='Alignment method',
        )

    def process(self, *args, **options):
        domains = self.load_inputs(options['datasets'])
        aligner = DomainAligner(
            options['method'], self.cfg.mean_config(), self.cfg.hub_value(),
            self.cfg.strict, self.cfg.workers)
        result = aligner.fit_transform(domains)

        embedding = pca_embed(result.features(), 2, result.labels(),
                              result.item_domains())
        write_rows(
            self.output_path('embedding.csv'),
            ['x', 'y', 'label', 'domain'],
            [(repr(x), repr(y), label, domain)
             for x, y, label, domain in embedding.rows()])
        logger.info('Explained variance ratio: {}'.format(
            ', '.join('{:.3f}'.format(r)
                      for r in embedding.explained_variance_ratio)))
