import logging

from spdtransport.datagen import generate_multidomain, generate_toy
from spdtransport.management.commands import SpdTransportCommand

logger = logging.getLogger(__name__)


class Command(SpdTransportCommand):
    help = "Generate synthetic covariance datasets, one file per domain"

    def add_arguments(self, parser):
        super(Command, self).add_arguments(parser)
        parser.add_argument(
            'generator',
            choices=('toy', 'multidomain'),
            help='Two-domain toy problem or multi-class multi-domain data',
        )
        parser.add_argument('--n-series', type=int, dest='n_series',
                            help='Toy: matrices per domain')
        parser.add_argument('--t', type=int, dest='n_samples',
                            help='Toy: samples per series')
        parser.add_argument('--f0', type=float, dest='f0',
                            help='Toy: source frequency')
        parser.add_argument('--center', action='store_true', dest='center',
                            default=None,
                            help='Toy: subtract the mean before the covariance')
        parser.add_argument('--domains', type=int, dest='n_domains',
                            help='Multidomain: number of domains')
        parser.add_argument('--classes', type=int, dest='n_classes',
                            help='Multidomain: number of classes')
        parser.add_argument('--dim', type=int, dest='dim',
                            help='Multidomain: matrix size')
        parser.add_argument('--per-class', type=int, dest='per_class',
                            help='Multidomain: items per class and domain')
        parser.add_argument('--class-spread', type=float, dest='class_spread',
                            help='Multidomain: distance of classes from the centre')
        parser.add_argument('--noise-level', type=float, dest='noise_level',
                            help='Multidomain: distance of items from their class')
        parser.add_argument('--domain-shift', type=float, dest='domain_shift',
                            help='Multidomain: size of the domain congruences')

    def config_overrides(self, options):
        overrides = super(Command, self).config_overrides(options)
        for name in ('n_series', 'n_samples', 'f0', 'center'):
            overrides['toy.' + name] = options.get(name)
        for name in ('n_domains', 'n_classes', 'dim', 'per_class',
                     'class_spread', 'noise_level', 'domain_shift'):
            overrides['multidomain.' + name] = options.get(name)
        return overrides

    def process(self, *args, **options):
        if options['generator'] == 'toy':
            logger.info('Generating the toy problem')
            domains = generate_toy(self.cfg.toy.toy_config(self.cfg.seed))
        else:
            logger.info('Generating multidomain data')
            domains = generate_multidomain(
                seed=self.cfg.seed,
                **self.cfg.multidomain.generator_kwargs())

        for domain in domains:
            self.write_dataset('domain-{}'.format(domain.domain_id), [domain])
            logger.info('Domain {}: {} matrices of size {}'.format(
                domain.domain_id, len(domain), domain.dim))
