import time
from functools import wraps

from .config import logger


def timed(func):
    """This is a decorator that logs the wall time of each call at debug level"""

    @wraps(func)
    def wrapper(*args, **kwargs):
        start = time.perf_counter()
        result = func(*args, **kwargs)
        logger.debug(f"{func.__name__} took {time.perf_counter() - start:.4f}s")
        return result

    return wrapper
