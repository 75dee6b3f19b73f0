"""Evaluation counters used for machine-independent complexity reports."""
from __future__ import annotations

import contextvars
import threading
from contextlib import contextmanager
from dataclasses import dataclass, field


@dataclass
class EvalCounter:
    lift_evals: int = 0
    lift_derivative_evals: int = 0
    char_evals: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def add(self, lift_evals: int = 0, lift_derivative_evals: int = 0, char_evals: int = 0) -> None:
        with self._lock:
            self.lift_evals += lift_evals
            self.lift_derivative_evals += lift_derivative_evals
            self.char_evals += char_evals

    def snapshot(self) -> dict:
        with self._lock:
            return {
                "lift_evals": self.lift_evals,
                "lift_derivative_evals": self.lift_derivative_evals,
                "char_evals": self.char_evals,
            }


_active: contextvars.ContextVar = contextvars.ContextVar("twistl_counter", default=None)


def bump(**kw) -> None:
    c = _active.get()
    if c is not None:
        c.add(**kw)


def current():
    return _active.get()


@contextmanager
def counting(counter: EvalCounter | None = None):
    """Route evaluation counts inside the block to ``counter``."""
    counter = counter if counter is not None else EvalCounter()
    token = _active.set(counter)
    try:
        yield counter
    finally:
        _active.reset(token)
