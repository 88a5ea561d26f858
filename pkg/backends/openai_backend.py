"""
OpenAI-Compatible Chat Backend
Hardened chat-completion client with retry, circuit breaker and error tracking
"""

import asyncio
import logging
import os
from typing import Optional

import aiohttp

from backends.base import BackendCapabilities, ChatRequest, ModelConfig
from core.errors import BackendError, ConfigError
from utils.circuit_breaker import CircuitBreaker, CircuitBreakerError
from utils.error_tracker import ErrorTracker, get_error_tracker
from utils.retry_handler import RetryError, RetryPolicy, call_with_retry

logger = logging.getLogger(__name__)

ENDPOINT_ENV = "RLIE_ENDPOINT"
RETRYABLE_STATUS = frozenset({408, 409, 429, 500, 502, 503, 504})


class TransientBackendError(Exception):
    """Retryable transport failure (timeouts, 429 and 5xx responses)"""
    pass


class OpenAIChatBackend:
    """
    Chat-completion client for any OpenAI-compatible endpoint

    Features:
    - Exponential backoff retries bounded by `ModelConfig.retry_budget`
    - Circuit breaker so a dead endpoint fails fast
    - Errors recorded in the global error tracker
    """

    def __init__(
        self,
        config: ModelConfig,
        api_key: Optional[str] = None,
        session: Optional[aiohttp.ClientSession] = None,
        error_tracker: Optional[ErrorTracker] = None,
        retry_policy: Optional[RetryPolicy] = None,
    ):
        self.config = config
        self.api_key = api_key if api_key is not None else os.environ.get(config.api_key_env)
        if not self.api_key:
            raise ConfigError(
                f"API key missing: set the {config.api_key_env} environment variable"
            )
        self.endpoint = os.environ.get(ENDPOINT_ENV, config.endpoint).rstrip('/')
        self.capabilities = BackendCapabilities(
            name="openai",
            model=config.model,
            max_in_flight=config.max_in_flight,
        )

        self._session = session
        self._owns_session = session is None
        self.error_tracker = error_tracker or get_error_tracker()
        self.retry_policy = retry_policy or RetryPolicy(
            max_retries=config.retry_budget, initial_delay=2.0, max_delay=60.0
        )
        self.breaker = CircuitBreaker(
            name=f"chat:{config.model}",
            failure_threshold=10,
            recovery_timeout=120,
            expected_exception=TransientBackendError,
        )

    def _get_session(self) -> aiohttp.ClientSession:
        if self._session is None or self._session.closed:
            self._session = aiohttp.ClientSession(
                timeout=aiohttp.ClientTimeout(total=self.config.timeout)
            )
            self._owns_session = True
        return self._session

    def _payload(self, request: ChatRequest) -> dict:
        return {
            'model': self.config.model,
            'messages': request.messages(),
            'temperature': self.config.temperature,
            'max_tokens': self.config.max_tokens,
        }

    async def _post_once(self, request: ChatRequest) -> str:
        """Single HTTP attempt; maps failures to transient or permanent errors"""
        url = f"{self.endpoint}/chat/completions"
        headers = {'Authorization': f"Bearer {self.api_key}"}
        try:
            session = self._get_session()
            async with session.post(url, json=self._payload(request), headers=headers) as resp:
                if resp.status in RETRYABLE_STATUS:
                    body = await resp.text()
                    raise TransientBackendError(f"HTTP {resp.status}: {body[:200]}")
                if resp.status >= 400:
                    body = await resp.text()
                    raise BackendError(f"HTTP {resp.status} from {url}: {body[:200]}")
                data = await resp.json(content_type=None)
        except (aiohttp.ClientError, asyncio.TimeoutError) as e:
            raise TransientBackendError(f"{e.__class__.__name__}: {e}") from e

        try:
            content = data['choices'][0]['message']['content']
        except (KeyError, IndexError, TypeError) as e:
            raise BackendError(f"Malformed chat-completion body: {str(data)[:200]}") from e
        if content is None:
            raise BackendError("Chat-completion returned no message content")
        return content

    async def complete(self, request: ChatRequest) -> str:
        """
        Send one chat request

        Returns:
            Content of the first choice's message

        Raises:
            BackendError: On permanent failures, an open circuit or an exhausted retry budget
        """
        try:
            return await call_with_retry(
                lambda: self.breaker.call_async(self._post_once, request),
                self.retry_policy,
                exceptions=(TransientBackendError,),
                label=f"{request.purpose} request",
            )

        except CircuitBreakerError as e:
            raise BackendError(str(e)) from e

        except RetryError as e:
            self.error_tracker.record_error(
                error_type='backend_error',
                error=e.__cause__ or e,
                context={
                    'purpose': request.purpose,
                    'model': self.config.model,
                    'attempts': e.attempts,
                },
            )
            raise BackendError(f"{request.purpose} request failed: {e.__cause__ or e}") from e

        except BackendError as e:
            self.error_tracker.record_error(
                error_type='backend_error',
                error=e,
                context={'purpose': request.purpose, 'model': self.config.model},
            )
            raise

    async def aclose(self) -> None:
        if self._owns_session and self._session is not None and not self._session.closed:
            await self._session.close()
        logger.info(f"Chat backend closed: {self.breaker.get_stats()}")
