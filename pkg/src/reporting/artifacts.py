import csv
import io
import logging
import os

import utils.custom_json as custom_json
import utils.file_utils as file_utils
from config.constants import REPORT_FILE, LEAVES_FILE, CHECKS_FILE, LEAF_COLUMNS

LOGGER = logging.getLogger('cmc_foliation.artifacts')


def format_number(value):
    """17 significant digits, enough to round-trip any double"""
    if value is None:
        return ''
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    return '%.17g' % float(value)


def leaves_csv(leaves):
    output = io.StringIO()
    writer = csv.writer(output, lineterminator='\n')
    writer.writerow(LEAF_COLUMNS)
    for leaf in leaves:
        row = leaf.to_dict()
        writer.writerow([format_number(row[column]) for column in LEAF_COLUMNS])
    return output.getvalue()


def write_artifacts(folder, report, checks, leaves=None):
    file_utils.prepare_folder(folder)

    report_path = os.path.join(folder, REPORT_FILE)
    file_utils.write_file(report_path, custom_json.dumps(report) + '\n')

    if leaves is not None:
        file_utils.write_file(os.path.join(folder, LEAVES_FILE), leaves_csv(leaves))

    file_utils.write_file(os.path.join(folder, CHECKS_FILE), checks.text())
    LOGGER.info('Artifacts written to %s', folder)
    return report_path
