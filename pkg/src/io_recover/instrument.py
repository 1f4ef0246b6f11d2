"""Lightweight invocation counters used by the complexity-contract tests."""

import threading

_lock = threading.Lock()
_counts = {"lp_solve": 0, "gamma_bar": 0}


def bump(name):
    with _lock:
        _counts[name] += 1


def counters():
    """Snapshot of all counters."""
    with _lock:
        return dict(_counts)


def reset_counters():
    with _lock:
        for key in _counts:
            _counts[key] = 0
