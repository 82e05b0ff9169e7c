import sys
from contextlib import contextmanager

import pytest

from mvgc.runtime import MvRuntime


@contextmanager
def fine_switching(interval: float = 1e-5):
    """Aggressive thread preemption so races actually occur under the GIL."""
    old = sys.getswitchinterval()
    sys.setswitchinterval(interval)
    try:
        yield
    finally:
        sys.setswitchinterval(old)


@pytest.fixture
def make_runtime():
    def factory(participants: int = 2, scheme: str = "none", **kw) -> MvRuntime:
        return MvRuntime(participants, scheme, **kw)
    return factory
