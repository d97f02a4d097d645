import logging

LOGGER = logging.getLogger('cmc_foliation.checks')

STATUS_PASS = 'PASS'
STATUS_FAIL = 'FAIL'
STATUS_INFO = 'INFO'


class CheckEntry:
    def __init__(self, name, status, value, detail=None) -> None:
        self.name = name
        self.status = status
        self.value = value
        self.detail = detail

    def line(self):
        text = '%s %s: %s' % (self.status, self.name, _format_value(self.value))
        if self.detail:
            text += ' (' + self.detail + ')'
        return text

    def to_dict(self):
        return {'name': self.name, 'status': self.status, 'value': self.value, 'detail': self.detail}


def _format_value(value):
    if isinstance(value, float):
        return '%.6g' % value
    return str(value)


class CheckList:
    """PASS/FAIL/INFO lines in execution order"""

    def __init__(self) -> None:
        self.entries = []

    def check(self, name, value, passed, detail=None):
        entry = CheckEntry(name, STATUS_PASS if passed else STATUS_FAIL, value, detail)
        self.entries.append(entry)
        if passed:
            LOGGER.info(entry.line())
        else:
            LOGGER.warning(entry.line())
        return passed

    def bound(self, name, value, limit):
        """value <= limit"""
        return self.check(name, value, value is not None and value <= limit, '<= %g' % limit)

    def info(self, name, value, detail=None):
        entry = CheckEntry(name, STATUS_INFO, value, detail)
        self.entries.append(entry)
        LOGGER.info(entry.line())

    @property
    def passed(self):
        return all(entry.status != STATUS_FAIL for entry in self.entries)

    def failures(self):
        return [entry for entry in self.entries if entry.status == STATUS_FAIL]

    def text(self):
        return ''.join(entry.line() + '\n' for entry in self.entries)

    def to_list(self):
        return [entry.to_dict() for entry in self.entries]
