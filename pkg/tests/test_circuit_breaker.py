"""
Tests for Circuit Breaker
"""

import pytest
import sys
import os

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from core.errors import BackendError
from utils.circuit_breaker import CircuitBreaker, CircuitState, CircuitBreakerError


class FakeClock:
    """Manually advanced monotonic clock"""

    def __init__(self):
        self.now = 0.0

    def __call__(self) -> float:
        return self.now

    def advance(self, seconds: float):
        self.now += seconds


async def _ok():
    return "success"


async def _fail():
    raise BackendError("boom")


class TestCircuitBreaker:
    """Test circuit breaker functionality"""

    def setup_method(self):
        """Setup for each test"""
        self.clock = FakeClock()
        self.breaker = CircuitBreaker(
            name='test_breaker',
            failure_threshold=3,
            recovery_timeout=1,
            expected_exception=BackendError,
            success_threshold=2,
            clock=self.clock,
        )

    async def _open(self):
        for _ in range(3):
            with pytest.raises(BackendError):
                await self.breaker.call_async(_fail)

    def test_initial_state_is_closed(self):
        """Test circuit breaker starts in CLOSED state"""
        assert self.breaker.state == CircuitState.CLOSED

    async def test_successful_call(self):
        """Test successful call passes through"""
        result = await self.breaker.call_async(_ok)
        assert result == "success"
        assert self.breaker.successful_calls == 1

    async def test_failed_call(self):
        """Test failed call is tracked"""
        with pytest.raises(BackendError):
            await self.breaker.call_async(_fail)

        assert self.breaker.failed_calls == 1
        assert self.breaker.failure_count == 1

    async def test_unexpected_exception_is_not_counted(self):
        """Exceptions outside expected_exception pass through without tripping"""
        async def _bug():
            raise KeyError("not a backend failure")

        with pytest.raises(KeyError):
            await self.breaker.call_async(_bug)
        assert self.breaker.failure_count == 0

    async def test_circuit_opens_after_threshold(self):
        """Test circuit opens after failure threshold"""
        await self._open()
        assert self.breaker.state == CircuitState.OPEN

    async def test_open_circuit_rejects_calls(self):
        """Test OPEN circuit rejects calls immediately"""
        await self._open()

        with pytest.raises(CircuitBreakerError):
            await self.breaker.call_async(_ok)

        assert self.breaker.rejected_calls == 1

    async def test_half_open_closes_after_successes(self):
        """After the timeout, success_threshold successes close the circuit"""
        await self._open()
        self.clock.advance(1.1)

        await self.breaker.call_async(_ok)
        assert self.breaker.state == CircuitState.HALF_OPEN

        await self.breaker.call_async(_ok)
        assert self.breaker.state == CircuitState.CLOSED

    async def test_half_open_failure_reopens(self):
        """A failure in the half-open state reopens the circuit"""
        await self._open()
        self.clock.advance(1.1)

        with pytest.raises(BackendError):
            await self.breaker.call_async(_fail)
        assert self.breaker.state == CircuitState.OPEN

        with pytest.raises(CircuitBreakerError):
            await self.breaker.call_async(_ok)

    async def test_get_stats(self):
        """Test getting circuit breaker statistics"""
        await self.breaker.call_async(_ok)
        with pytest.raises(BackendError):
            await self.breaker.call_async(_fail)

        stats = self.breaker.get_stats()
        assert stats['name'] == 'test_breaker'
        assert stats['state'] == 'closed'
        assert stats['total_calls'] == 2
        assert stats['successful_calls'] == 1
        assert stats['failed_calls'] == 1


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
