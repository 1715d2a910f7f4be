from types import SimpleNamespace

import pytest
from hypothesis import assume, given, strategies as st

from liftc.errors import ProviderError
from liftc.utils import CircuitBreaker, trunc_div, trunc_mod


@pytest.mark.parametrize(
    "a, b, q, r",
    [(7, 2, 3, 1), (-7, 2, -3, -1), (7, -2, -3, 1), (-7, -2, 3, -1), (0, 5, 0, 0)],
)
def test_truncating_division(a, b, q, r):
    assert (trunc_div(a, b), trunc_mod(a, b)) == (q, r)


@given(st.integers(), st.integers())
def test_division_identity(a, b):
    assume(b != 0)

    assert trunc_div(a, b) * b + trunc_mod(a, b) == a
    assert abs(trunc_mod(a, b)) < abs(b)


class _Clock:
    def __init__(self):
        self.now = 1000.0

    def __call__(self):
        return self.now


def _fail():
    raise RuntimeError("down")


def test_breaker_opens_then_recovers(monkeypatch):
    clock = _Clock()
    monkeypatch.setattr("liftc.utils.time", SimpleNamespace(time=clock))
    breaker = CircuitBreaker(failure_threshold=2, reset_timeout=30)

    for _ in range(2):
        with pytest.raises(RuntimeError):
            breaker.call(_fail)
    assert breaker.state == "open"

    with pytest.raises(ProviderError) as info:
        breaker.call(lambda: "ok")
    assert info.value.status == 0

    clock.now += 31
    assert breaker.call(lambda: "ok") == "ok"
    assert (breaker.state, breaker.failure_count) == ("closed", 0)


def test_failed_probe_reopens_the_breaker(monkeypatch):
    clock = _Clock()
    monkeypatch.setattr("liftc.utils.time", SimpleNamespace(time=clock))
    breaker = CircuitBreaker(failure_threshold=1, reset_timeout=10)

    with pytest.raises(RuntimeError):
        breaker.call(_fail)
    clock.now += 11
    with pytest.raises(RuntimeError):
        breaker.call(_fail)

    assert breaker.state == "open"
    assert breaker.open_until == clock.now + 10
