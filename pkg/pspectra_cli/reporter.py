""" Report sinks. Every report is validated against REPORT_SCHEMA first.
"""
import csv
import json
import json.encoder
import logging
import math

from abc import ABC, abstractmethod
from typing import Any, Dict, Iterator, Optional, TextIO

import jsonschema

from .payload import SCHEMA_VERSION, Report

_logger = logging.getLogger(__name__)

_VALUE = {'type': ['number', 'string', 'boolean', 'null', 'array',
                   'object']}

REPORT_SCHEMA: Dict[str, Any] = {
    'type': 'object',
    'required': ['schema', 'manifest', 'result', 'tables'],
    'properties': {
        'schema': {'const': SCHEMA_VERSION},
        'manifest': {
            'type': 'object',
            'required': ['command', 'inputs', 'flags', 'seed', 'version',
                         'schema', 'wall_time'],
            'properties': {
                'command': {'type': 'string'},
                'inputs': {'type': 'array', 'items': {'type': 'string'}},
                'flags': {'type': 'object'},
                'seed': {'type': 'integer'},
                'version': {'type': 'string'},
                'schema': {'const': SCHEMA_VERSION},
                'wall_time': {'type': ['number', 'null']},
                },
            },
        'result': {'type': 'object'},
        'tables': {
            'type': 'array',
            'items': {
                'type': 'object',
                'required': ['name', 'columns', 'rows'],
                'properties': {
                    'name': {'type': 'string'},
                    'columns': {'type': 'array',
                                'items': {'type': 'string'}},
                    'rows': {'type': 'array',
                             'items': {'type': 'array', 'items': _VALUE}},
                    },
                },
            },
        },
    }


def report_number(value: float) -> str:
    """ 17 significant digits, which always parse back to the same float
    """
    value = float(value)
    if not math.isfinite(value):
        raise ValueError("non-finite number {!r} in a report".format(value))
    return '{:.17g}'.format(value)


class SignificantDigitsEncoder(json.JSONEncoder):
    """ JSONEncoder writing every float with `report_number`
    """

    def iterencode(self, o: Any, _one_shot: bool = False) -> Iterator[str]:
        encode = (json.encoder.encode_basestring_ascii if self.ensure_ascii
                  else json.encoder.encode_basestring)
        markers: Optional[Dict[int, Any]] = \
            {} if self.check_circular else None
        return json.encoder._make_iterencode(  # type: ignore
            markers, self.default, encode, self.indent, report_number,
            self.key_separator, self.item_separator, self.sort_keys,
            self.skipkeys, _one_shot)(o, 0)


class AbstractReporter(ABC):
    """ Writes validated reports to a text stream
    """

    def __init__(self, stream: TextIO) -> None:
        self.stream = stream

    def emit(self, report: Report) -> Dict[str, Any]:
        payload = report.payload()
        jsonschema.validate(instance=payload, schema=REPORT_SCHEMA)
        for table in payload['tables']:
            width = len(table['columns'])
            if any(len(row) != width for row in table['rows']):
                raise ValueError("table {!r} has rows of the wrong width"
                                 .format(table['name']))
        self.write(payload)
        _logger.debug("emitted %s report", payload['manifest']['command'])
        return payload

    @abstractmethod
    def write(self, payload: Dict[str, Any]) -> None:
        """ Serialize one validated payload to the stream
        """


class JsonReporter(AbstractReporter):

    def write(self, payload: Dict[str, Any]) -> None:
        self.stream.write(json.dumps(payload, sort_keys=True, indent=2,
                                     cls=SignificantDigitsEncoder))
        self.stream.write("\n")


def csv_cell(value: Any) -> str:
    """ Floats use the same digits as the JSON output
    """
    if value is None:
        return ''
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return report_number(value)
    if isinstance(value, (list, dict)):
        return json.dumps(value, sort_keys=True)
    return str(value)


class CsvReporter(AbstractReporter):
    """ One CSV block per table, each preceded by a "# table <name>" line
    """

    def write(self, payload: Dict[str, Any]) -> None:
        manifest = payload['manifest']
        self.stream.write("# schema {}\n".format(payload['schema']))
        self.stream.write("# command {}\n".format(manifest['command']))
        writer = csv.writer(self.stream, lineterminator="\n")
        for table in payload['tables']:
            self.stream.write("# table {}\n".format(table['name']))
            writer.writerow(table['columns'])
            for row in table['rows']:
                writer.writerow([csv_cell(value) for value in row])


REPORTERS = {'json': JsonReporter, 'csv': CsvReporter}
