import logging
import threading
from concurrent.futures import ThreadPoolExecutor

logger = logging.getLogger(__name__)


class ActorWorkerPool:
    """P worker slots that run actor pipelines for the coordinator.

    Each task receives its own actor's inputs and returns a value; the coordinator alone
    touches the graph. `map` returns results in submission order."""

    def __init__(self, ports):
        if ports < 1:
            raise ValueError(f"ports must be >= 1, got {ports}")
        self.ports = ports
        self.executor = None
        self.running = False
        self._lock = threading.Lock()
        self._in_flight = 0
        self.peak_in_flight = 0

    def start(self):
        logger.info(f"Starting actor worker pool with {self.ports} slot(s)")
        self.executor = ThreadPoolExecutor(max_workers=self.ports, thread_name_prefix="actor")
        self.running = True

    def stop(self):
        logger.info("Stopping actor worker pool...")
        self.running = False
        if self.executor is not None:
            self.executor.shutdown(wait=True)
            self.executor = None
            logger.info(f"Actor worker pool stopped (peak concurrency {self.peak_in_flight}).")

    def __enter__(self):
        self.start()
        return self

    def __exit__(self, *exc):
        self.stop()
        return False

    def _tracked(self, fn):
        def run(arg):
            with self._lock:
                self._in_flight += 1
                self.peak_in_flight = max(self.peak_in_flight, self._in_flight)
            try:
                return fn(arg)
            finally:
                with self._lock:
                    self._in_flight -= 1
        return run

    def map(self, fn, items):
        if not self.running:
            raise RuntimeError("worker pool is not running")
        return list(self.executor.map(self._tracked(fn), items))
