import logging

import numpy as np

from spdtransport.domains import LabeledCovarianceSet
from spdtransport.exceptions import InvalidInput
from spdtransport.fileformats import read_dataset, write_features
from spdtransport.management.commands import SpdTransportCommand
from spdtransport.pipeline import (
    HUB_IDENTITY,
    HUB_MEAN_OF_MEANS,
    METHODS,
    PARALLEL_TRANSPORT,
    DomainAligner,
)

logger = logging.getLogger(__name__)


def feature_file(domain_id):
    return 'features-{}.csv'.format(domain_id)


class Command(SpdTransportCommand):
    help = "Align the domains of one or more datasets and write their features"

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
        parser.add_argument(
            '--hub',
            dest='hub',
            default=None,
            help="'{}', '{}', or a dataset holding the single hub "
                 "matrix".format(HUB_MEAN_OF_MEANS, HUB_IDENTITY),
        )

    def config_overrides(self, options):
        overrides = super(Command, self).config_overrides(options)
        hub = options.get('hub')
        if hub is not None and hub not in (HUB_MEAN_OF_MEANS, HUB_IDENTITY):
            hub = check_hub_dataset(read_dataset(hub)).tolist()
        overrides['hub'] = hub
        return overrides

    def process(self, *args, **options):
        domains = self.load_inputs(options['datasets'])
        method = options['method']

        logger.info('Aligning {} domains by {}'.format(len(domains), method))
        aligner = DomainAligner(
            method, self.cfg.mean_config(), self.cfg.hub_value(),
            self.cfg.strict, self.cfg.workers)
        result = aligner.fit_transform(domains)

        self.write_dataset('inputs', domains)
        if result.grand_mean is not None:
            self.write_dataset('hub', [LabeledCovarianceSet(
                'hub', result.grand_mean[np.newaxis])])
        self.write_dataset('centroids', [LabeledCovarianceSet(
            'centroids',
            np.array([d.centroid for d in result.per_domain.values()]),
            np.array(result.domain_ids))])
        self.write_dataset('transported', [
            LabeledCovarianceSet(d.domain_id, d.transported, d.labels)
            for d in result.per_domain.values()])
        for d in result.per_domain.values():
            write_features(self.output_path(feature_file(d.domain_id)),
                           d.feature_vectors, d.labels)

        hub = self.cfg.hub if isinstance(self.cfg.hub, str) else 'explicit'
        self.write_json('adaptation.json', {
            'method': method,
            'hub': hub if method == PARALLEL_TRANSPORT else None,
            'dim': domains[0].dim,
            'domains': [
                {
                    'domain_id': d.domain_id,
                    'count': len(d),
                    'features': feature_file(d.domain_id),
                }
                for d in result.per_domain.values()],
            'warnings': result.warnings,
        })
        for warning in result.warnings:
            logger.warning(warning)


def check_hub_dataset(domains):
    if not domains or len(domains[0]) != 1:
        raise InvalidInput('A hub dataset holds exactly one matrix')
    return domains[0].matrices[0]
