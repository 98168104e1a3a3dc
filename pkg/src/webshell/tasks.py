"""Background tasks with polled status, and a polling timeout built on them.

Cancellation is cooperative. ``destroy`` raises a flag that the running
work observes at its next cancellation point: ``checkpoint()``, ``sleep()``,
or the start of a network request.
"""

from __future__ import annotations

import enum
import itertools
import threading
import time
from typing import Callable

__all__ = [
    "TaskStatus",
    "TaskError",
    "UnknownTaskError",
    "TaskFailed",
    "Cancelled",
    "Task",
    "spawn",
    "get_task",
    "current_task",
    "checkpoint",
    "sleep",
    "live_task_count",
    "with_timeout",
    "WS_THREAD_FAIL",
]

WS_THREAD_FAIL = "WS_THREAD_FAIL"


class TaskStatus(str, enum.Enum):
    RUNNING = "RUNNING"
    DONE = "DONE"
    FAIL = "FAIL"


class TaskError(RuntimeError):
    pass


class UnknownTaskError(TaskError):
    pass


class TaskFailed(TaskError):
    """Raised by with_timeout; ``reason`` is "timeout" or "failed"."""

    def __init__(self, reason: str, cause: BaseException | None = None):
        super().__init__(WS_THREAD_FAIL)
        self.reason = reason
        self.cause = cause


class Cancelled(BaseException):
    """Unwinds a destroyed task; a BaseException so broad handlers let it through."""


_local = threading.local()
_registry: dict[str, "Task"] = {}
_registry_lock = threading.Lock()
_counter = itertools.count(1)


class Task:
    def __init__(self):
        self.id = f"task{next(_counter)}"
        self._lock = threading.Lock()
        self._settled = threading.Event()
        self._cancel = threading.Event()
        self._status = TaskStatus.RUNNING
        self._result: str | None = None
        self._failure: BaseException | None = None
        self._started = False
        self._destroyed = False
        with _registry_lock:
            _registry[self.id] = self

    def _check(self):
        if self._destroyed:
            raise UnknownTaskError(f"unknown task {self.id}")

    def start(self, work: Callable[[], object]) -> "Task":
        with self._lock:
            self._check()
            if self._started:
                raise TaskError(f"task {self.id} already started")
            self._started = True
        thread = threading.Thread(target=self._run, args=(work,), name=self.id, daemon=True)
        try:
            thread.start()
        except RuntimeError as exc:
            self._settle(TaskStatus.FAIL, None, exc)
            raise TaskError(f"cannot start task: {exc}") from exc
        return self

    def _run(self, work):
        _local.task = self
        try:
            result = work()
        except BaseException as exc:  # noqa: B902 - any failure settles the task
            self._settle(TaskStatus.FAIL, None, exc)
        else:
            self._settle(TaskStatus.DONE, "" if result is None else str(result), None)
        finally:
            _local.task = None

    def _settle(self, status, result, failure):
        with self._lock:
            if self._settled.is_set():
                return
            self._status = status
            self._result = result
            self._failure = failure
            self._settled.set()

    @property
    def started(self) -> bool:
        return self._started

    @property
    def status(self) -> TaskStatus:
        with self._lock:
            self._check()
            if not self._started:
                raise TaskError(f"task {self.id} not started")
            return self._status

    def result(self) -> str:
        with self._lock:
            self._check()
            if self._status is not TaskStatus.DONE or not self._settled.is_set():
                raise TaskError(f"task {self.id} has no result (status {self._status.value})")
            return self._result

    @property
    def failure(self) -> BaseException | None:
        with self._lock:
            self._check()
            return self._failure

    @property
    def cancelled(self) -> bool:
        return self._cancel.is_set()

    def wait(self, timeout: float | None = None) -> bool:
        """Block until settled or ``timeout`` seconds pass; True if settled."""
        self._check()
        return self._settled.wait(timeout)

    def destroy(self) -> None:
        with self._lock:
            self._check()
            self._destroyed = True
            self._cancel.set()
        with _registry_lock:
            _registry.pop(self.id, None)

    def __repr__(self):
        state = "destroyed" if self._destroyed else self._status.value
        return f"<Task {self.id} {state}>"


def spawn(work: Callable[[], object]) -> Task:
    return Task().start(work)


def get_task(task_id: str) -> Task:
    with _registry_lock:
        task = _registry.get(task_id)
    if task is None:
        raise UnknownTaskError(f"unknown task {task_id}")
    return task


def live_task_count() -> int:
    with _registry_lock:
        return len(_registry)


def current_task() -> Task | None:
    return getattr(_local, "task", None)


def checkpoint() -> None:
    task = getattr(_local, "task", None)
    if task is not None and task._cancel.is_set():
        raise Cancelled(task.id)


def sleep(ms: float) -> None:
    task = current_task()
    if task is None:
        time.sleep(max(ms, 0) / 1000)
    elif task._cancel.wait(max(ms, 0) / 1000):
        raise Cancelled(task.id)


def with_timeout(work: Callable[[], object], timeout: float, timeslot: float = 500) -> str:
    """Run ``work`` in a task, polling every ``timeslot`` ms until ``timeout`` ms elapse.

    Each poll wakes early once the task settles, so finished work returns
    without waiting out the rest of its slot.
    """
    if timeout <= 0 or timeslot <= 0:
        raise ValueError("timeout and timeslot must be positive")
    task = spawn(work)
    reason = "timeout"
    try:
        elapsed = 0
        while elapsed < timeout:
            elapsed += timeslot
            task.wait(timeslot / 1000)
            checkpoint()
            status = task.status
            if status is TaskStatus.DONE:
                return task.result()
            if status is TaskStatus.FAIL:
                reason = "failed"
                break
        cause = task.failure
    finally:
        task.destroy()
    raise TaskFailed(reason, cause)
