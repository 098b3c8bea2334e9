"""Worker threads that report their result through a queue"""
from __future__ import annotations

# Built-in
from queue import Queue
from threading import Thread
from typing import Any, Callable

__all__: tuple[str, ...] = ("QueuedThread", "run_queued")


class QueuedThread(Thread):
    """
    A thread that runs its target once and puts its metadata, with the result under "data", on a queue.

    An exception raised by the target is stored under "error" instead, so the consumer can re-raise it.

    ### Arguments
    - queue (Queue): Where the metadata goes when the target returns
    - metadata (dict): Identifies the batch, e.g. {"worker": 3}
    - target (Callable | None): Work to run

    ### Returns
    - None
    """

    def __init__(self, queue: Queue, metadata: dict[str, Any], group: None = None,
                 target: Callable[..., Any] | None = None, name: str | None = None, *args: Any, **kwargs: Any) -> None:
        Thread.__init__(self, group, target, name, *args, **kwargs)
        self._return: Any = None
        self.metadata = metadata
        self.queue = queue

    def run(self) -> None:
        if self._target is not None:  # type: ignore[attr-defined]
            try:
                self._return = self._target(*self._args, **self._kwargs)  # type: ignore[attr-defined]
                self.metadata["data"] = self._return
            except Exception as error:  # pylint: disable=broad-except
                self.metadata["error"] = error
            self.queue.put(self.metadata)

    def join(self, timeout: float | None = None) -> dict[str, Any]:  # type: ignore[override]
        Thread.join(self, timeout)
        return self.metadata


def run_queued(jobs: list[tuple[dict[str, Any], Callable[[], Any]]]) -> list[dict[str, Any]]:
    """
    Run every job on its own QueuedThread and collect the metadata in submission order.

    ### Arguments
    - jobs (list[tuple[dict, Callable]]): Metadata and a zero-argument callable per job

    ### Returns
    - list[dict]: Metadata dicts with "data", re-raising the first job error
    """
    queue: Queue = Queue()
    threads = [QueuedThread(queue, {**metadata, "order": order}, target=job) for order, (metadata, job) in enumerate(jobs)]
    for thread in threads:
        thread.start()
    results = [queue.get() for _ in threads]
    for thread in threads:
        thread.join()
    results.sort(key=lambda item: item["order"])
    for item in results:
        if "error" in item:
            raise item["error"]
    return results
