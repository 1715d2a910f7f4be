"""
Utility functions and classes shared across liftc.
"""
import logging
import time
from typing import Any, Callable, TypeVar

from .errors import ProviderError

logger = logging.getLogger(__name__)

T = TypeVar("T")


def trunc_div(a: int, b: int) -> int:
    """Integer division rounding toward zero. The caller guards ``b != 0``."""
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def trunc_mod(a: int, b: int) -> int:
    """Remainder matching :func:`trunc_div`; takes the sign of ``a``."""
    return a - b * trunc_div(a, b)


class CircuitBreaker:
    """
    Circuit breaker for calls to an external candidate provider.

    Fails fast with ``ProviderError(status=0)`` while open.
    """

    def __init__(self, failure_threshold: int = 5, reset_timeout: float = 30):
        """
        Args:
            failure_threshold: Consecutive provider failures that open the breaker
            reset_timeout: Seconds the breaker stays open before one probe call
        """
        self.failure_count = 0
        self.failure_threshold = failure_threshold
        self.reset_timeout = reset_timeout
        self.open_until = 0.0
        self.state = "closed"

    def call(self, func: Callable[..., T], *args: Any, **kwargs: Any) -> T:
        """
        Run ``func(*args, **kwargs)`` unless the breaker is open.

        A failure while half-open reopens the breaker at once; a success
        closes it and resets the failure count.

        Raises:
            ProviderError: While the breaker is open
            Whatever ``func`` raises, after recording the failure
        """
        now = time.time()

        if self.state == "open":
            if now < self.open_until:
                logger.warning("Circuit breaker is open, failing fast")
                raise ProviderError(0, "circuit breaker is open")
            logger.info("Circuit breaker transitioning from open to half-open")
            self.state = "half-open"

        try:
            result = func(*args, **kwargs)
        except Exception:
            self.failure_count += 1
            logger.warning(
                f"Circuit breaker recorded failure {self.failure_count}/{self.failure_threshold}"
            )
            if self.state == "half-open" or self.failure_count >= self.failure_threshold:
                logger.warning(
                    f"Circuit breaker threshold reached, opening circuit for {self.reset_timeout}s"
                )
                self.state = "open"
                self.open_until = now + self.reset_timeout
            raise

        if self.state == "half-open":
            logger.info("Circuit breaker transitioning from half-open to closed")
            self.state = "closed"
        self.failure_count = 0
        return result
