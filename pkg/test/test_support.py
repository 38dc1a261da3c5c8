import io
import json
import math
import threading
import unittest

import numpy as np

from hypothesis import given, strategies as st

from pspectra.concurrency_model import (
    ConcurrencyModel, PythonThreads, SingleThread
    )
from pspectra.graph import VertexSet, WeightedGraph
from pspectra.seeding import derive_seed, rng_for
from pspectra_cli.payload import (
    Report, ResultVisitor, RunManifest, Table, number, to_payload
    )
from pspectra_cli.reporter import (
    CsvReporter, JsonReporter, SignificantDigitsEncoder, csv_cell,
    report_number
    )


class TestConcurrencyModel(unittest.TestCase):

    def test_for_threads(self) -> None:
        self.assertIsInstance(ConcurrencyModel.for_threads(1), SingleThread)
        model = ConcurrencyModel.for_threads(3)
        self.assertIsInstance(model, PythonThreads)
        self.assertEqual(model.threads, 3)
        with self.assertRaises(ValueError):
            ConcurrencyModel.for_threads(0)

    def test_map_keeps_the_item_order(self) -> None:
        lock = threading.Lock()
        seen = []

        def work(item: int) -> int:
            with lock:
                seen.append(item)
            return item * item

        items = range(50)
        self.assertEqual(PythonThreads(4).map(work, items),
                         [i * i for i in items])
        self.assertEqual(sorted(seen), list(items))
        self.assertEqual(SingleThread().map(work, items),
                         [i * i for i in items])
        self.assertEqual(PythonThreads(4).map(work, []), [])


class TestSeeding(unittest.TestCase):

    def test_derive_seed(self) -> None:
        self.assertEqual(derive_seed(7, 'restart', 3),
                         derive_seed(7, 'restart', 3))
        self.assertNotEqual(derive_seed(7, 'restart', 3),
                            derive_seed(7, 'restart', 4))
        self.assertNotEqual(derive_seed(7, 'restart'),
                            derive_seed(8, 'restart'))
        self.assertLess(derive_seed(-1, 'x'), 2 ** 64)
        with self.assertRaises(TypeError):
            derive_seed(7, True)
        with self.assertRaises(TypeError):
            derive_seed(7, 1.5)  # type: ignore

    @given(seed=st.integers(0, 2 ** 64 - 1), label=st.text(max_size=8))
    def test_generators_are_reproducible(self, seed: int,
                                         label: str) -> None:
        a = rng_for(seed, label).random(4)
        b = rng_for(seed, label).random(4)
        np.testing.assert_array_equal(a, b)


class TestPayload(unittest.TestCase):

    def test_number(self) -> None:
        self.assertEqual(number(1.5), 1.5)
        self.assertEqual(number(math.inf), 'inf')
        self.assertEqual(number(-math.inf), '-inf')
        self.assertEqual(number(math.nan), 'nan')
        self.assertEqual(number(np.float64(2.0)), 2.0)

    def test_records(self) -> None:
        g = WeightedGraph(['a', 'b', 'c'], [1.0, 2.0, 1.0],
                          [('a', 'b', 1.0)])
        payload = to_payload({
            'set': VertexSet(g, [2, 0]), 'graph': g,
            'table': Table('t', ['x'], [[np.int64(3)]]),
            'values': np.array([1.0, np.inf]), 'flag': np.bool_(True),
            'pair': (1, None),
            })
        self.assertEqual(payload['set'], ['a', 'c'])
        self.assertEqual(payload['graph'],
                         {'n': 3, 'edges': 1, 'total_measure': 4.0})
        self.assertEqual(payload['table'],
                         {'name': 't', 'columns': ['x'], 'rows': [[3]]})
        self.assertEqual(payload['values'], [1.0, 'inf'])
        self.assertIs(payload['flag'], True)
        self.assertEqual(payload['pair'], [1, None])
        with self.assertRaises(TypeError):
            to_payload(object())

    def test_visitor_declarations(self) -> None:
        with self.assertRaises(TypeError):
            class TooMany(ResultVisitor):
                def visit_pair(self, a: int, b: int) -> None:
                    pass

        with self.assertRaises(TypeError):
            class NotAType(ResultVisitor):
                def visit_name(self, value: 'Unknown') -> None:  # noqa
                    pass

        class Shouting(ResultVisitor):
            def visit_str(self, value: str) -> str:
                return value.upper()

        self.assertEqual(Shouting().visit('abc'), 'ABC')
        self.assertIsNone(Shouting().visit(None))


class TestReporters(unittest.TestCase):

    def report(self, rows: list) -> Report:
        manifest = RunManifest('validate', ['k2.g'], {'threads': 1}, 0,
                               '0.1.0', wall_time=0.25)
        return Report(manifest, {'value': math.inf},
                      [Table('summary', ['a', 'b'], rows)])

    def test_json(self) -> None:
        stream = io.StringIO()
        JsonReporter(stream).emit(self.report([[0.1, True]]))
        payload = json.loads(stream.getvalue())
        self.assertEqual(payload['result'], {'value': 'inf'})
        self.assertEqual(payload['tables'][0]['rows'], [[0.1, True]])
        self.assertIn('0.10000000000000001', stream.getvalue())

    def test_csv(self) -> None:
        stream = io.StringIO()
        CsvReporter(stream).emit(self.report([[0.1, None], [2, 'x,y']]))
        self.assertEqual(stream.getvalue().splitlines(),
                         ['# schema 1', '# command validate',
                          '# table summary', 'a,b', '0.10000000000000001,',
                          '2,"x,y"'])

    def test_rows_of_the_wrong_width(self) -> None:
        with self.assertRaises(ValueError):
            JsonReporter(io.StringIO()).emit(self.report([[1]]))

    def test_csv_cell(self) -> None:
        self.assertEqual(csv_cell(False), 'false')
        self.assertEqual(csv_cell(1 / 3), '0.33333333333333331')
        self.assertEqual(csv_cell(2.0), '2')
        self.assertEqual(csv_cell(['a', 'b']), '["a", "b"]')

    @given(st.floats(allow_nan=False, allow_infinity=False))
    def test_report_numbers_keep_17_digits(self, value: float) -> None:
        text = report_number(value)
        assert float(text) == value
        digits = text.lstrip('-').split('e')[0].replace('.', '').lstrip('0')
        assert len(digits) <= 17
        assert json.loads(json.dumps([value],
                                     cls=SignificantDigitsEncoder)) == [value]

    def test_report_numbers_reject_non_finite_values(self) -> None:
        with self.assertRaises(ValueError):
            report_number(math.nan)


if __name__ == '__main__':
    unittest.main()
