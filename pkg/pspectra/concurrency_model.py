""" Execution policies for the embarrassingly parallel parts of the toolkit.

    Subset enumeration, solver restarts and shortest-path rows are
    expressed as a `map()` over independent work items.
    A concurrency model decides how the items are executed; every model
    returns the results in submission order, so reductions that follow are
    independent of the number of threads.
"""
import logging

from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar

_logger = logging.getLogger(__name__)

T = TypeVar('T')
R = TypeVar('R')


class ConcurrencyModel(ABC):

    @property
    @abstractmethod
    def threads(self) -> int:
        """ The maximal number of work items running at the same time
        """

    @abstractmethod
    def map(self, fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
        """ Apply fn to every item, returning the results in item order
        """

    @staticmethod
    def for_threads(threads: int) -> 'ConcurrencyModel':
        if threads < 1:
            raise ValueError("threads must be positive, got {}"
                             .format(threads))
        if threads == 1:
            return SingleThread()
        return PythonThreads(threads)


class SingleThread(ConcurrencyModel):

    @property
    def threads(self) -> int:
        return 1

    def map(self, fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
        return [fn(item) for item in items]


class PythonThreads(ConcurrencyModel):
    """ Run work items on a pool of Python threads.

        numpy and scipy release the GIL inside their kernels, which is
        where the enumeration and solver time goes.
    """

    def __init__(self, threads: int) -> None:
        self._threads = threads

    @property
    def threads(self) -> int:
        return self._threads

    def map(self, fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
        work = list(items)
        if len(work) <= 1:
            return [fn(item) for item in work]
        _logger.debug("dispatching %d work items to %d threads",
                      len(work), self._threads)
        with ThreadPoolExecutor(max_workers=self._threads) as executor:
            # Executor.map yields in submission order
            return list(executor.map(fn, work))


def default_model() -> ConcurrencyModel:
    return _default


_default: ConcurrencyModel = SingleThread()
