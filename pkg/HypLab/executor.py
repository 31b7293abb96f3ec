# executor.py

from HypLab.dependencies import *
from abc import ABC, abstractmethod
import concurrent.futures as cf


class BaseExecutor(ABC):
    def __init__(self, printlog=False):
        """
        Base class for execution contexts handed to the suites.
        """
        self.printlog = printlog

    @abstractmethod
    def map(self, func, items):
        """
        Apply func to every item; results come back in input order.
        """
        pass

    def fsum_map(self, func, items):
        """
        Correctly rounded sum of func over items. The result does not depend on how the
        work was split.
        """
        return math.fsum(self.map(func, items))

    def close(self):
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class SerialExecutor(BaseExecutor):
    def map(self, func, items):
        return [func(item) for item in items]


class ParallelExecutor(BaseExecutor):
    def __init__(self, threads=None, printlog=False):
        """
        Thread-pool execution context.

        Parameters:
        - threads: Worker count (None lets concurrent.futures choose).
        - printlog: Print pool lifecycle lines.
        """
        super().__init__(printlog)
        self.threads = threads
        self.pool = cf.ThreadPoolExecutor(max_workers=threads)
        if self.printlog:
            print(f"executor: thread pool with {self.pool._max_workers} workers started.")

    def map(self, func, items):
        items = list(items)
        if len(items) < 2:
            return [func(item) for item in items]
        return list(self.pool.map(func, items))

    def close(self):
        self.pool.shutdown(wait=True)
        if self.printlog:
            print("executor: thread pool stopped.")


def make_executor(threads=1, printlog=False):
    """
    SerialExecutor for one thread, ParallelExecutor otherwise.
    """
    if threads is not None and threads < 1:
        raise ValueError(f"Invalid thread count: {threads}. Choose a positive integer.")
    if threads == 1:
        return SerialExecutor(printlog)
    return ParallelExecutor(threads, printlog)
