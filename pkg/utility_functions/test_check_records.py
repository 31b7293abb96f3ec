import sys
import os

# Add the repository root to sys.path
module_path = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
sys.path.append(module_path)

import unittest
import math
import tempfile

import matplotlib
matplotlib.use("Agg")

from HypLab.event_bus import EventBus, CHECK_EVENT
from HypLab.check_records_manager import CheckRecordsManager
from HypLab.executor import make_executor, SerialExecutor, ParallelExecutor
from utility_functions.plotting import plot_trace


class TestEventBus(unittest.TestCase):

    def test_publish_and_unsubscribe(self):
        bus = EventBus()
        seen = []
        callback = seen.append
        bus.subscribe(CHECK_EVENT, callback)
        bus.publish_check("rd-sum/one", 1, M=1.0)
        bus.unsubscribe(CHECK_EVENT, callback)
        bus.publish_check("rd-sum/one", True)
        self.assertEqual(seen, [{"check_id": "rd-sum/one", "passed": True, "M": 1.0}])

    def test_other_events_are_not_delivered(self):
        bus = EventBus()
        seen = []
        bus.subscribe("progress", seen.append)
        bus.publish_check("density/masses", True)
        self.assertEqual(seen, [])


class TestCheckRecordsManager(unittest.TestCase):

    def setUp(self):
        self.bus = EventBus()
        self.records = CheckRecordsManager(self.bus)

    def test_collects_fields(self):
        self.bus.publish_check("density/ahlfors", True, D=1.5, k=2)
        self.assertEqual(self.records.get_check_records(),
                         {"density/ahlfors": {"passed": True, "D": 1.5, "k": 2}})
        self.assertTrue(self.records.all_passed)

    def test_repeated_check_becomes_a_list(self):
        self.bus.publish_check("schwartz/closure", True)
        self.bus.publish_check("schwartz/closure", False)
        self.assertEqual(self.records.get_check_records()["schwartz/closure"]["passed"], [True, False])
        self.assertEqual(self.records.failures(), ["schwartz/closure"])
        self.assertFalse(self.records.all_passed)

    def test_frame(self):
        self.bus.publish_check("a", True, value=1.0)
        self.bus.publish_check("b", False)
        frame = self.records.to_frame()
        self.assertEqual(list(frame["check_id"]), ["a", "b"])
        self.assertEqual(list(frame["passed"]), [True, False])


class TestExecutor(unittest.TestCase):

    def test_kinds(self):
        self.assertIsInstance(make_executor(1), SerialExecutor)
        with make_executor(2) as executor:
            self.assertIsInstance(executor, ParallelExecutor)
        with self.assertRaises(ValueError):
            make_executor(0)

    def test_order_and_sums(self):
        items = [10.0 ** k for k in range(-8, 9)] + [-1e8, 1e-8]
        with make_executor(1) as serial, make_executor(4) as parallel:
            self.assertEqual(serial.map(math.sqrt, [1, 4, 9]), parallel.map(math.sqrt, [1, 4, 9]))
            self.assertEqual(serial.fsum_map(lambda v: v, items), parallel.fsum_map(lambda v: v, items))
            self.assertEqual(parallel.fsum_map(lambda v: v, items), math.fsum(items))


class TestPlotting(unittest.TestCase):

    def test_saves_figure(self):
        rows = [{"n": n, "S": n ** 2 / 3 + 1, "Q": n ** 2 / 3 + 2} for n in range(6)]
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "trace.png")
            fig = plot_trace(rows, "n", ["S", "Q"], "rd-sum", logy=True, path=path)
            self.assertTrue(os.path.getsize(path) > 0)
        self.assertEqual(len(fig.axes[0].lines), 2)


if __name__ == '__main__':
    unittest.main()
