import functools
import inspect
import logging
import os
import sys

import structlog


# Configure structlog to write to stderr without timestamps; stdout carries
# the reports.
structlog.configure(
    wrapper_class=structlog.make_filtering_bound_logger(
        getattr(logging, os.environ.get("LOG_LEVEL", "INFO").upper())
    ),
    processors=[structlog.dev.ConsoleRenderer()],
    logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
)
logger = structlog.get_logger()


def _loggable(value):
    return value is None or isinstance(value, str | int | float | bool)


def log_call(fn):
    """Decorate fn to log its scalar arguments and a summary of its return value
    each time it's called."""

    spec = inspect.getfullargspec(fn)

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        params = dict(zip(spec.args, args))
        params.update(kwargs)
        params = {k: v for k, v in params.items() if _loggable(v)}

        logger.info(fn.__name__ + " {")
        if params:
            logger.info(fn.__name__, **params)

        rv = fn(*args, **kwargs)

        passed = getattr(rv, "passed", None)
        if passed is not None:
            logger.info(fn.__name__, passed=passed)

        logger.info(fn.__name__ + " }")

        return rv

    return wrapper
