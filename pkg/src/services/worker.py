"""
This module enables the execution of tasks in different processes using Queues.
The Executor class is a wrapper around the multiprocessing standard library.
Ideal for CPU bound tasks such as phase sweeps and parameter sweeps.

Results come back tagged with their submission index and are reordered,
so any reduction over them is independent of scheduling.
"""

import logging
import queue
from multiprocessing import Process, Queue
from types import TracebackType
from typing import Any, Callable, List, Optional, Sequence, Tuple, Type

from src.exceptions import WorkerError

logger = logging.getLogger(__name__)

POLL_SECONDS = 1.0


def worker(tasks_queue: Queue, results_queue: Queue) -> None:
    """
    Worker process: Retrieve tasks from the queue and execute them.
    Module level so it can be handed to any multiprocessing start method.
    """
    while True:
        task, index, args = tasks_queue.get()
        if task is None:
            # None is the signal to stop.
            break
        try:
            results_queue.put((index, True, task(*args)))
        except Exception as error:  # noqa: BLE001
            results_queue.put((index, False, error))


class Executor:
    """
    Executor class to manage worker processes.
    With num_workers <= 1 no process is started and tasks run inline.
    """

    def __init__(self, num_workers: int = 4) -> None:
        self.num_workers = max(1, int(num_workers))
        self.tasks_queue: Queue = Queue()
        self.results_queue: Queue = Queue()
        self.workers: List[Process] = []
        if self.num_workers > 1:
            self.workers = [
                Process(
                    target=worker, args=(self.tasks_queue, self.results_queue), daemon=True
                )
                for _ in range(self.num_workers)
            ]
            for process in self.workers:
                process.start()
            logger.debug("started %d worker processes", self.num_workers)

    def __enter__(self) -> "Executor":
        return self

    def __exit__(
        self,
        exc_type: Optional[Type[BaseException]],
        exc: Optional[BaseException],
        tb: Optional[TracebackType],
    ) -> None:
        self.stop_workers()

    def add_task(self, task: Optional[Callable], index: int = -1, *args: Any) -> None:
        """
        Add a task to the queue. Task should be a callable with its arguments.
        """
        self.tasks_queue.put((task, index, args))

    def stop_workers(self) -> None:
        """
        Stop all worker processes.
        """
        for _ in self.workers:
            self.add_task(None)  # Signal to stop.
        for process in self.workers:
            process.join()
        self.workers = []

    def execute(self, task: Callable, *args: Sequence[Any]) -> None:
        """
        Execute method to add tasks, one per argument tuple.
        """
        for index, arg in enumerate(args):
            self.add_task(task, index, *arg)

    def map(self, task: Callable, items: Sequence[Tuple[Any, ...]]) -> List[Any]:
        """
        Run task(*item) for every item and return the results in submission order.
        The first failing task (in submission order) re-raises in the caller;
        a worker that dies while results are missing raises WorkerError.
        """
        if not self.workers:
            return [task(*item) for item in items]
        self.execute(task, *items)
        collected: List[Tuple[int, bool, Any]] = []
        while len(collected) < len(items):
            try:
                collected.append(self.results_queue.get(timeout=POLL_SECONDS))
            except queue.Empty:
                dead = [process for process in self.workers if not process.is_alive()]
                if dead:
                    codes = ", ".join(str(process.exitcode) for process in dead)
                    raise WorkerError(
                        f"{len(dead)} worker process(es) exited with code {codes}; "
                        f"{len(items) - len(collected)} of {len(items)} results missing"
                    )
        collected.sort(key=lambda entry: entry[0])
        for _, ok, payload in collected:
            if not ok:
                raise payload
        return [payload for _, _, payload in collected]
