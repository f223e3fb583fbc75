"""
Run configuration shared by the management commands.

Values are layered: the defaults below, then ``settings.SPDTRANSPORT``,
then a JSON file passed with ``--config``, then command-line flags.
"""
import hashlib
import json
import math
import os
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np
from django.conf import settings

from spdtransport.datagen import ToyConfig
from spdtransport.evaluation import CLASSIFIERS, NEAREST_CENTROID
from spdtransport.exceptions import InvalidInput, InvalidParameter
from spdtransport.fileformats import ENCODINGS, read_json
from spdtransport.mean import MeanConfig
from spdtransport.pipeline import (
    HUB_IDENTITY,
    HUB_MEAN_OF_MEANS,
    METHODS,
    check_method,
)
from spdtransport.spd import check_spd

OUTPUT_DIR_VARIABLE = 'SPDTRANSPORT_OUTPUT_DIR'


def _positive_int(name, value):
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise InvalidParameter(
            '{} must be a positive integer, got {!r}'.format(name, value))


def _real(name, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or \
            not math.isfinite(value):
        raise InvalidParameter('{} must be a finite number, got {!r}'.format(
            name, value))


@dataclass
class ToySettings:
    n_series: int = 100
    f0: float = 10.0
    n_samples: int = 500
    phase_low: float = -math.pi / 2
    phase_high: float = 0.0
    mixing_1: list = None
    center: bool = False

    def toy_config(self, seed):
        """
        Validated generator parameters; raises InvalidParameter.
        """
        return ToyConfig(
            n_series=self.n_series, f0=self.f0, n_samples=self.n_samples,
            phase_range=(self.phase_low, self.phase_high),
            mixing_1=None if self.mixing_1 is None else np.array(self.mixing_1),
            seed=seed, center=self.center)


@dataclass
class MultidomainSettings:
    n_domains: int = 5
    n_classes: int = 4
    dim: int = 22
    per_class: int = 72
    class_spread: float = 0.1
    noise_level: float = 0.3
    domain_shift: float = 3.0
    anisotropy: float = 3.0

    def validate(self):
        for name in ('n_domains', 'n_classes', 'per_class'):
            _positive_int('multidomain.' + name, getattr(self, name))
        _positive_int('multidomain.dim', self.dim)
        if self.dim < 2:
            raise InvalidParameter('multidomain.dim must be at least 2')
        for name in ('class_spread', 'noise_level', 'domain_shift',
                     'anisotropy'):
            _real('multidomain.' + name, getattr(self, name))
            if getattr(self, name) < 0:
                raise InvalidParameter(
                    'multidomain.{} must not be negative'.format(name))

    def generator_kwargs(self):
        return asdict(self)


@dataclass
class RunConfig:
    seed: int = 0
    epsilon: float = 1e-9
    max_iterations: int = 100
    hub: object = HUB_MEAN_OF_MEANS
    methods: list = field(default_factory=lambda: list(METHODS))
    classifier: str = NEAREST_CENTROID
    strict: bool = False
    workers: int = 1
    encoding: str = 'csv'
    output_dir: str = None
    toy: ToySettings = field(default_factory=ToySettings)
    multidomain: MultidomainSettings = field(
        default_factory=MultidomainSettings)

    # Where a run writes does not change what it computes
    LOCATION_FIELDS = ('output_dir',)

    def validate(self):
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or \
                self.seed < 0:
            raise InvalidParameter(
                'seed must be a non-negative integer, got {!r}'.format(self.seed))
        self.mean_config()
        self.hub_value()
        if not self.methods:
            raise InvalidParameter('methods must not be empty')
        for method in self.methods:
            check_method(method)
        if self.classifier not in CLASSIFIERS:
            raise InvalidParameter('Unknown classifier {!r}'.format(
                self.classifier))
        _positive_int('workers', self.workers)
        if self.encoding not in ENCODINGS:
            raise InvalidParameter('Unknown encoding {!r}'.format(self.encoding))
        self.toy.toy_config(self.seed)
        self.multidomain.validate()
        return self

    def mean_config(self):
        return MeanConfig(self.epsilon, self.max_iterations)

    def hub_value(self):
        """
        The hub as taken by ``DomainAligner``: a name or an SPD matrix.
        """
        if isinstance(self.hub, str):
            if self.hub not in (HUB_MEAN_OF_MEANS, HUB_IDENTITY):
                raise InvalidParameter('Unknown hub {!r}'.format(self.hub))
            return self.hub
        return check_spd(self.hub, 'hub')

    def to_dict(self):
        data = asdict(self)
        for name in self.LOCATION_FIELDS:
            data.pop(name)
        if isinstance(self.hub, np.ndarray):
            data['hub'] = self.hub.tolist()
        return data

    def digest(self):
        canonical = json.dumps(self.to_dict(), sort_keys=True,
                               separators=(',', ':'))
        return hashlib.sha256(canonical.encode('utf-8')).hexdigest()

    def updated(self, data, source='configuration'):
        """
        A copy with the keys of ``data`` applied on top.

        Raises
        ------
        InvalidInput
            On a key that is not a configuration field.
        """
        if not isinstance(data, dict):
            raise InvalidInput('{} must be a JSON object'.format(source))
        changes = {}
        for key, value in data.items():
            if key in ('toy', 'multidomain'):
                changes[key] = _update_section(
                    getattr(self, key), value, key, source)
            elif key in _field_names(self):
                changes[key] = value
            else:
                raise InvalidInput('Unknown key {!r} in {}'.format(key, source))
        return replace(self, **changes)

    @classmethod
    def from_dict(cls, data):
        return cls().updated(data).validate()


def _field_names(obj):
    return {f.name for f in fields(obj)}


def _update_section(section, data, prefix, source):
    if not isinstance(data, dict):
        raise InvalidInput('{}.{} must be a JSON object'.format(source, prefix))
    for key in data:
        if key not in _field_names(section):
            raise InvalidInput('Unknown key {!r} in {}'.format(
                '{}.{}'.format(prefix, key), source))
    return replace(section, **data)


def resolve_config(config_path=None, overrides=None):
    """
    Layer the defaults, ``settings.SPDTRANSPORT``, the JSON file at
    ``config_path`` and ``overrides`` (None values are skipped), then
    validate.
    """
    cfg = RunConfig().updated(
        getattr(settings, 'SPDTRANSPORT', {}), 'settings.SPDTRANSPORT')
    if config_path:
        cfg = cfg.updated(read_json(config_path), config_path)
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    nested = {}
    for key in list(overrides):
        if '.' in key:
            section, name = key.split('.', 1)
            nested.setdefault(section, {})[name] = overrides.pop(key)
    overrides.update(nested)
    return cfg.updated(overrides, 'command-line options').validate()


def default_output_dir():
    """
    ``$SPDTRANSPORT_OUTPUT_DIR``, else ``settings.SPDTRANSPORT_OUTPUT_DIR``,
    else a ``data`` directory under ``settings.BASE_DIR``.
    """
    path = os.environ.get(OUTPUT_DIR_VARIABLE)
    if path:
        return path
    path = getattr(settings, 'SPDTRANSPORT_OUTPUT_DIR', None)
    if path:
        return path
    return os.path.join(getattr(settings, 'BASE_DIR', os.getcwd()), 'data')
