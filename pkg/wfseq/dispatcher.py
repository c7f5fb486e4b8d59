"""Run independent checks, in worker processes when more than one is allowed.

Results come back in check_id order whatever order the workers finish in.
"""

from multiprocessing import Pool

from . import settings
from .logger import logger
from .reports import run_check


def worker_count(nchecks, threads=None):
    threads = settings.THREADS if threads is None else threads
    return max(1, min(threads, nchecks))


def run_checks(checks, threads=None):
    workers = worker_count(len(checks), threads)
    logger.info("dispatching checks", checks=len(checks), workers=workers)
    if workers == 1:
        results = [run_check(check) for check in checks]
    else:
        with Pool(workers) as pool:
            results = pool.map(run_check, checks, chunksize=1)
    failed = [r.check_id for r in results if not r.passed]
    if failed:
        logger.warning("checks failed", failed=failed)
    return sorted(results, key=lambda r: r.check_id)
