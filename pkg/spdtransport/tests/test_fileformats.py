import json
import os
import shutil
import tempfile

import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_array_equal

from spdtransport.datagen import ToyConfig, generate_multidomain, generate_toy
from spdtransport.domains import LabeledCovarianceSet
from spdtransport.exceptions import (
    ArtifactIOError,
    DimensionMismatch,
    InvalidInput,
    NotPositiveDefinite,
)
from spdtransport.fileformats import (
    HEADER,
    MAGIC,
    load_datasets,
    read_dataset,
    read_features,
    read_json,
    sha256_file,
    write_confusion,
    write_dataset,
    write_features,
)


class DatasetFileTest(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.mkdtemp()
        self.toy = generate_toy(ToyConfig(n_series=6, seed=1))
        self.multi = generate_multidomain(2, 2, 3, 3, seed=1)

    def tearDown(self):
        shutil.rmtree(self.tmp)

    def path(self, name):
        return os.path.join(self.tmp, name)

    def assertSameDomains(self, written, read):
        self.assertEqual([d.domain_id for d in written],
                         [d.domain_id for d in read])
        for a, b in zip(written, read):
            assert_array_equal(a.matrices, b.matrices)
            assert_array_equal(a.labels, b.labels)
            self.assertEqual(a.metadata, b.metadata)
            self.assertEqual(a.label_kind, b.label_kind)

    def test_csv(self):
        payload, sidecar = write_dataset(self.path('toy'), self.toy)
        self.assertEqual(os.path.basename(payload), 'toy.csv')
        self.assertEqual(os.path.basename(sidecar), 'toy.json')
        header = read_json(sidecar)
        self.assertEqual(header['dim'], 2)
        self.assertEqual(header['domains'][0]['label_kind'], 'real')
        self.assertSameDomains(self.toy, read_dataset(sidecar))

    def test_binary(self):
        payload, sidecar = write_dataset(self.path('multi'), self.multi,
                                         'binary')
        self.assertTrue(payload.endswith('.bin'))
        with open(payload, 'rb') as f:
            self.assertEqual(HEADER.unpack(f.read(HEADER.size)),
                             (MAGIC, 1, 3, 12))
        self.assertSameDomains(self.multi, read_dataset(payload))

    def test_integer_labels(self):
        domains = [LabeledCovarianceSet(d.domain_id, d.matrices,
                                        np.array([0, 0, 0, 1, 1, 1]))
                   for d in self.multi]
        for encoding in ('csv', 'binary'):
            _, sidecar = write_dataset(self.path(encoding), domains, encoding)
            read = read_dataset(sidecar)
            self.assertEqual(read_json(sidecar)['domains'][0]['label_dtype'],
                             'int')
            self.assertSameDomains(domains, read)
            self.assertTrue(np.issubdtype(read[0].labels.dtype, np.integer))
            self.assertEqual(read[1].labels[3], 1)

    def test_string_labels_stay_strings(self):
        _, sidecar = write_dataset(self.path('multi'), self.multi)
        read = read_dataset(sidecar)
        self.assertEqual(read[0].labels[0], 'class-0')
        self.assertEqual(read_json(sidecar)['domains'][0]['label_dtype'],
                         'str')

    def test_unlabelled(self):
        domains = [d.unlabeled() for d in self.multi]
        write_dataset(self.path('bare'), domains)
        read = read_dataset(self.path('bare.json'))
        self.assertIsNone(read[0].labels)
        self.assertIsNone(read[0].label_kind)

    def test_same_bytes(self):
        first = write_dataset(self.path('a'), self.multi)
        second = write_dataset(self.path('b'), self.multi)
        self.assertEqual(sha256_file(first[0]), sha256_file(second[0]))

    def test_asymmetric_matrix_is_symmetrized(self):
        _, sidecar = write_dataset(self.path('multi'), self.multi, 'binary')
        payload = self.path('multi.bin')
        stack = np.concatenate([d.matrices for d in self.multi])
        stack[0, 0, 1] += 1e-6
        with open(payload, 'wb') as f:
            f.write(HEADER.pack(MAGIC, 1, 3, len(stack)))
            f.write(stack.astype('<f8').tobytes())
        with self.assertLogs('spdtransport.fileformats', 'WARNING') as logs:
            read = read_dataset(sidecar)
        self.assertIn('matrix 0 is not symmetric', logs.output[0])
        self.assertEqual(read[0].matrices[0, 0, 1], read[0].matrices[0, 1, 0])

    def test_missing_file(self):
        with self.assertRaises(ArtifactIOError) as context:
            read_dataset(self.path('nothing.json'))
        self.assertIn('nothing.json', str(context.exception))

    def test_corrupt_payloads(self):
        _, sidecar = write_dataset(self.path('multi'), self.multi, 'binary')
        with open(self.path('multi.bin'), 'r+b') as f:
            f.write(b'XXXX')
        with self.assertRaises(ArtifactIOError):
            read_dataset(sidecar)

        _, sidecar = write_dataset(self.path('toy'), self.toy)
        with open(self.path('toy.csv'), 'a') as f:
            f.write('1,99,0.5,1.0,0.0,0.0,1.0\n')
        with self.assertRaisesRegex(ArtifactIOError, 'declares'):
            read_dataset(sidecar)

    def test_bad_sidecar(self):
        with open(self.path('other.json'), 'w') as f:
            json.dump({'format': 'something-else'}, f)
        with self.assertRaises(ArtifactIOError):
            read_dataset(self.path('other.json'))
        with open(self.path('broken.json'), 'w') as f:
            f.write('{')
        with self.assertRaises(ArtifactIOError):
            read_dataset(self.path('broken.json'))

    def test_not_positive_definite(self):
        write_dataset(self.path('multi'), self.multi)
        with open(self.path('multi.csv')) as f:
            lines = f.read().splitlines()
        fields = lines[2].split(',')
        fields[3] = '-5.0'
        lines[2] = ','.join(fields)
        with open(self.path('multi.csv'), 'w') as f:
            f.write('\n'.join(lines) + '\n')
        with self.assertRaisesRegex(NotPositiveDefinite, "'1'.*index 1"):
            load_datasets([self.path('multi.json')])

    def test_read_without_validation(self):
        stack = np.array([np.eye(3), np.diag([1.0, -1.0, 2.0])])
        domain = LabeledCovarianceSet('1', np.array([np.eye(3)] * 2))
        domain.matrices = stack
        _, sidecar = write_dataset(self.path('edited'), [domain])
        with self.assertRaises(NotPositiveDefinite):
            read_dataset(sidecar)
        read = read_dataset(sidecar, validate=False)
        assert_array_equal(read[0].matrices, stack)

    def test_load_several(self):
        write_dataset(self.path('a'), self.multi[:1])
        write_dataset(self.path('b'), self.multi[1:])
        domains = load_datasets([self.path('a.json'), self.path('b.csv')])
        self.assertEqual([d.domain_id for d in domains], ['1', '2'])
        with self.assertRaises(InvalidInput):
            load_datasets([self.path('a.json'), self.path('a.json')])
        write_dataset(self.path('toy'), self.toy)
        with self.assertRaises(DimensionMismatch):
            load_datasets([self.path('a.json'), self.path('toy.json')])

    def test_unknown_encoding(self):
        with self.assertRaises(ArtifactIOError):
            write_dataset(self.path('x'), self.multi, 'parquet')


class ReportFileTest(SimpleTestCase):

    def setUp(self):
        self.tmp = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.tmp)

    def test_features(self):
        path = os.path.join(self.tmp, 'features.csv')
        features = np.array([[0.1, -2.0], [1.0 / 3, 4.0]])
        write_features(path, features, np.array([-0.5, 0.25]))
        labels, read = read_features(path)
        assert_array_equal(read, features)
        self.assertEqual(labels, ['-0.5', '0.25'])

    def test_confusion(self):
        path = os.path.join(self.tmp, 'confusion.csv')
        write_confusion(path, ['a', 'b'], np.array([[3, 1], [0, 4]]))
        with open(path) as f:
            self.assertEqual(f.read(), 'true,a,b\na,3,1\nb,0,4\n')

    def test_unwritable(self):
        path = os.path.join(self.tmp, 'missing', 'features.csv')
        with self.assertRaises(ArtifactIOError):
            write_features(path, np.zeros((1, 1)))

    def test_domain_validation(self):
        with self.assertRaises(InvalidInput):
            LabeledCovarianceSet('x', np.eye(2))
        with self.assertRaises(InvalidInput):
            LabeledCovarianceSet('x', np.array([np.eye(2)]), ['a', 'b'])
