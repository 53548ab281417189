import functools

from tradenet.logging_config import logger

def operation(func):
    """Decorator to mark market operations."""
    @functools.wraps(func)
    def wrapper_operation(*args, **kwargs):
        logger.debug(f"Calling operation: {func.__qualname__}")
        return func(*args, **kwargs)
    return wrapper_operation

def verifier(func):
    """Decorator to mark verification functions; logs the verdict."""
    @functools.wraps(func)
    def wrapper_verifier(*args, **kwargs):
        logger.debug(f"Calling verifier: {func.__qualname__}")
        result = func(*args, **kwargs)
        logger.debug(f"{func.__qualname__} -> {result!r}")
        return result
    return wrapper_verifier

def helper(func):
    """Decorator to mark helper functions."""
    @functools.wraps(func)
    def wrapper_helper(*args, **kwargs):
        logger.debug(f"Calling helper: {func.__qualname__}")
        return func(*args, **kwargs)
    return wrapper_helper
