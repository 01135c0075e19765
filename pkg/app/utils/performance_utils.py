import sys
import threading
import time
from collections.abc import Callable
from pathlib import Path
from typing import Any

import psutil
from loguru import logger

from app.utils.run_config import output_dir


class RunMonitor:
    """
    Owns the logging setup of a command run and measures the resources of long computations.
    """

    def __init__(self, out_dir: Path | None = None, verbose: bool = False):
        """
        Args:
            out_dir: Directory receiving the ``logs`` folder; defaults to the configured output directory.
            verbose: Log DEBUG messages to stderr as well.
        """
        self._out_dir = out_dir or output_dir()
        self._setup_directories()
        self._setup_logging(verbose)

    @staticmethod
    def measure_performance(runnable: Callable[[], Any], sample_interval: float = 0.01):
        """
        Runs ``runnable`` in a worker thread while sampling the resident memory of this
        process and its children (census workers included).

        Returns:
            result: Return value of ``runnable``; an exception it raised is re-raised here.
            elapsed (float): Wall time in seconds.
            effective_peak (int): Peak memory above the baseline, in bytes.
            memory_timeline (list): Sampled memory readings in bytes.
        """

        def current_memory_usage():
            try:
                parent = psutil.Process()
                mem = parent.memory_info().rss
                for child in parent.children(recursive=True):
                    try:
                        mem += child.memory_info().rss
                    except psutil.NoSuchProcess:
                        continue
                return int(mem)
            except Exception:
                logger.exception("Error obtaining memory usage:")
                return 0

        outcome: dict[str, Any] = {}

        def target():
            try:
                outcome["result"] = runnable()
            except BaseException as exc:
                outcome["error"] = exc

        baseline = current_memory_usage()
        max_mem = baseline
        memory_timeline = [baseline]

        thread = threading.Thread(target=target)
        thread.start()
        start_time = time.perf_counter()
        while thread.is_alive():
            current_mem = current_memory_usage()
            memory_timeline.append(current_mem)
            if current_mem > max_mem:
                max_mem = current_mem
            time.sleep(sample_interval)
        thread.join()
        elapsed = time.perf_counter() - start_time

        if "error" in outcome:
            raise outcome["error"]
        return outcome.get("result"), elapsed, max_mem - baseline, memory_timeline

    @property
    def log_dir(self) -> Path:
        return self._log_dir

    def _setup_directories(self) -> None:
        self._log_dir = self._out_dir / "logs"
        self._log_dir.mkdir(parents=True, exist_ok=True)

    def _setup_logging(self, verbose: bool) -> None:
        """Logs go to stderr and to a rotating file; stdout is reserved for data."""
        logger.remove()
        thread_id = threading.get_ident()

        format_string = (
            f"{{time:YYYY-MM-DD HH:mm:ss}} | {{level: <5}} | SUBCRIT | PID-{{process}} TID-{thread_id} | {{message}}"
        )

        logger.add(
            lambda message: sys.stderr.write(message),
            format=format_string,
            level="DEBUG" if verbose else "INFO",
        )

        log_file = self._log_dir / "subcritical_gk.log"
        logger.add(
            str(log_file),
            rotation="1 day",
            retention="7 days",
            format=format_string,
            level="DEBUG",
        )
        logger.debug("Logging configured, log file {}", log_file)
