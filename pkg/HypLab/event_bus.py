# event_bus.py

CHECK_EVENT = "check"


class EventBus:
    """
    Synchronous publish/subscribe hub through which the suites report certified checks.
    """
    def __init__(self):
        self.subscribers = {}

    def subscribe(self, event_type, callback):
        """
        Register a callback for an event type.

        Parameters:
        - event_type (str): Event name, usually CHECK_EVENT.
        - callback (callable): Called with the event dict on every publish.
        """
        self.subscribers.setdefault(event_type, []).append(callback)

    def unsubscribe(self, event_type, callback):
        callbacks = self.subscribers.get(event_type, [])
        if callback in callbacks:
            callbacks.remove(callback)

    def publish(self, event_type, data):
        """
        Deliver `data` to the subscribers of `event_type` in subscription order.
        """
        for callback in list(self.subscribers.get(event_type, [])):
            callback(data)

    def publish_check(self, check_id, passed, **fields):
        """
        Shorthand for a "check" event: {"check_id": ..., "passed": ..., **fields}.
        """
        self.publish(CHECK_EVENT, {"check_id": check_id, "passed": bool(passed), **fields})
