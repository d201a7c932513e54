"""
Job Scheduler Module for gqm
Fans independent jobs out to worker threads and merges results in submission order
"""
import os
import threading
import traceback

from core import VERBOSE, ConfigError, log

DEFAULT_WORKERS = 1


def configured_workers():
    """Worker count from GQM_WORKERS, falling back to a single worker"""
    raw = os.getenv('GQM_WORKERS')
    if not raw:
        return DEFAULT_WORKERS
    try:
        workers = int(raw)
    except ValueError:
        log('WARNING', f"GQM_WORKERS={raw!r} is not an integer, using {DEFAULT_WORKERS}")
        return DEFAULT_WORKERS
    return max(1, workers)


class JobScheduler:
    """Deterministic fan-out of independent jobs"""

    def __init__(self, workers=None):
        """
        Args:
            workers: number of worker threads; None reads GQM_WORKERS
        """
        if workers is None:
            workers = configured_workers()
        if workers < 1:
            raise ConfigError(f"worker count must be positive, got {workers}")
        self.workers = workers
        self.running = False
        self.jobs_run = 0

    def partition(self, items, chunks=None):
        """Split items into contiguous chunks, one per worker unless told otherwise"""
        items = list(items)
        count = max(1, min(chunks or self.workers, len(items)))
        size, extra = divmod(len(items), count)
        out, start = [], 0
        for c in range(count):
            end = start + size + (1 if c < extra else 0)
            out.append(items[start:end])
            start = end
        return out

    def map(self, func, items):
        """
        Apply func to every item; results come back in input order

        The first failure by input index is re-raised after all workers finish.
        """
        items = list(items)
        results = [None] * len(items)
        errors = [None] * len(items)

        def run(stripe, step):
            for i in range(stripe, len(items), step):
                try:
                    results[i] = func(items[i])
                except Exception as e:
                    errors[i] = e

        self.running = True
        try:
            if self.workers == 1 or len(items) <= 1:
                run(0, 1)
            else:
                threads = [threading.Thread(target=run, args=(w, self.workers), daemon=True)
                           for w in range(self.workers)]
                for t in threads:
                    t.start()
                for t in threads:
                    t.join()
        finally:
            self.running = False
        self.jobs_run += len(items)
        for i, e in enumerate(errors):
            if e is not None:
                log('SCHEDULER', f"job {i} failed: {e}")
                if VERBOSE:
                    traceback.print_exception(type(e), e, e.__traceback__)
                raise e
        log('SCHEDULER', f"{len(items)} jobs done on {self.workers} worker(s)")
        return results

    def get_status(self):
        """Get scheduler status"""
        return {
            'running': self.running,
            'workers': self.workers,
            'jobs_run': self.jobs_run,
        }
