# check_records_manager.py

from HypLab.dependencies import *
from HypLab.event_bus import CHECK_EVENT


class CheckRecordsManager:
    def __init__(self, event_bus=None):
        """
        Collects the checks published on an EventBus.

        Parameters:
        - event_bus: EventBus to subscribe to (optional; records can be logged directly).
        """
        self.event_bus = event_bus
        self.check_records = {}
        if event_bus is not None:
            event_bus.subscribe(CHECK_EVENT, self.on_check)

    def on_check(self, data):
        data = dict(data)
        check_id = data.pop("check_id")
        for field, value in data.items():
            self.log_check_event(check_id, field, value)

    def log_check_event(self, check_id, field, value):
        """
        Stores one field of a check. A field logged twice for the same check becomes a list.

        Parameters:
        - check_id: Name of the check (e.g. 'rd-sum/n=7').
        - field: Field name (e.g. 'passed', 'constant', 'tail_bound').
        - value: The value.
        """
        record = self.check_records.setdefault(check_id, {})
        if field in record:
            if isinstance(record[field], list):
                record[field].append(value)
            else:
                record[field] = [record[field], value]
        else:
            record[field] = value

    def get_check_records(self):
        return self.check_records

    @staticmethod
    def _passed(record):
        value = record.get("passed", True)
        return all(value) if isinstance(value, list) else bool(value)

    def failures(self):
        return [cid for cid, record in self.check_records.items() if not self._passed(record)]

    @property
    def all_passed(self):
        return not self.failures()

    def to_frame(self):
        """
        One row per check, columns in first-seen order.
        """
        rows = [{"check_id": cid, **record} for cid, record in self.check_records.items()]
        return pd.DataFrame(rows)
