"""
Retry Handler with Exponential Backoff
Bounded retries for transient backend failures
"""

import asyncio
import logging
import random
from dataclasses import dataclass
from typing import Awaitable, Callable, Optional, Tuple, Type, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar('T')


class RetryError(Exception):
    """Exception raised when all retry attempts fail"""

    def __init__(self, message: str, attempts: int):
        super().__init__(message)
        self.attempts = attempts


@dataclass(frozen=True)
class RetryPolicy:
    """
    Exponential backoff schedule

    Args:
        max_retries: Retries after the first attempt (0 disables retrying)
        initial_delay: Delay before the first retry, in seconds
        max_delay: Upper bound on any single delay
        exponential_base: Growth factor between consecutive delays
        jitter: Scale each delay by a random factor in [0.5, 1.5)
    """

    max_retries: int = 3
    initial_delay: float = 1.0
    max_delay: float = 60.0
    exponential_base: float = 2.0
    jitter: bool = True

    def __post_init__(self):
        if self.max_retries < 0:
            raise ValueError(f"max_retries must be >= 0, got {self.max_retries}")

    def get_delay(self, attempt: int) -> float:
        """Delay before retry number `attempt + 1`"""
        delay = min(self.initial_delay * (self.exponential_base ** attempt), self.max_delay)
        if self.jitter:
            delay = delay * (0.5 + random.random())
        return delay


async def call_with_retry(
    func: Callable[[], Awaitable[T]],
    policy: RetryPolicy,
    exceptions: Tuple[Type[BaseException], ...] = (Exception,),
    on_retry: Optional[Callable[[int, BaseException, float], None]] = None,
    label: str = "call",
) -> T:
    """
    Await `func()` until it succeeds or the retry budget is spent

    Only `exceptions` are retried; anything else propagates immediately.

    Raises:
        RetryError: If every attempt failed, chained to the last exception
    """
    for attempt in range(policy.max_retries + 1):
        try:
            return await func()

        except exceptions as e:
            if attempt == policy.max_retries:
                logger.error(f"{label} failed after {policy.max_retries} retries: {e}")
                raise RetryError(
                    f"{label} failed after {attempt + 1} attempts", attempts=attempt + 1
                ) from e

            delay = policy.get_delay(attempt)
            logger.warning(
                f"{label} attempt {attempt + 1}/{policy.max_retries + 1} failed: {e}. "
                f"Retrying in {delay:.2f}s..."
            )
            if on_retry:
                on_retry(attempt, e, delay)
            await asyncio.sleep(delay)

    raise RetryError(f"{label}: unexpected retry loop exit", attempts=policy.max_retries + 1)
