from typing import Callable, Iterable, List, TypeVar

from joblib import Parallel, delayed

T = TypeVar('T')
R = TypeVar('R')


def ordered_map(func: Callable[[T], R], items: Iterable[T], threads: int = 1) -> List[R]:
    """Map func over items, results in input order regardless of scheduling"""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    return Parallel(n_jobs=threads, prefer="threads")(delayed(func)(item) for item in items)
