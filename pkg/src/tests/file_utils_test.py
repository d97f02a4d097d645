import os
import unittest

from tests import test_utils
from utils import file_utils


class TestNormalizePath(unittest.TestCase):
    def test_absolute_path(self):
        self.assertEqual('/tmp/results', file_utils.normalize_path('/tmp/./results'))

    def test_relative_to_folder(self):
        path = file_utils.normalize_path('report.json', '/tmp/out')
        self.assertEqual(os.path.join('/tmp/out', 'report.json'), path)

    def test_missing_relative_path(self):
        self.assertEqual(os.path.join('missing', 'file.csv'), file_utils.normalize_path('missing/./file.csv'))

    def test_home_folder(self):
        self.assertEqual(os.path.expanduser('~'), file_utils.normalize_path('~'))


class TestReadWrite(unittest.TestCase):
    def setUp(self) -> None:
        test_utils.setup()

    def tearDown(self) -> None:
        test_utils.cleanup()

    def test_write_creates_folders(self):
        path = os.path.join(test_utils.temp_folder, 'a', 'b', 'checks.txt')
        file_utils.write_file(path, 'PASS')
        self.assertEqual('PASS', file_utils.read_file(path))

    def test_line_endings_kept(self):
        path = os.path.join(test_utils.temp_folder, 'leaves.csv')
        file_utils.write_file(path, 't,s_base\r\n0,0\r\n')
        self.assertEqual(b't,s_base\r\n0,0\r\n', file_utils.read_file(path, byte_content=True))

    def test_bytes(self):
        path = os.path.join(test_utils.temp_folder, 'raw.bin')
        file_utils.write_file(path, b'\x00\x01', byte_content=True)
        self.assertEqual(b'\x00\x01', file_utils.read_file(path, byte_content=True))

    def test_prepare_existing_folder(self):
        file_utils.prepare_folder(test_utils.temp_folder)
        self.assertTrue(os.path.isdir(test_utils.temp_folder))

    def test_prepare_empty_path(self):
        file_utils.prepare_folder('')
