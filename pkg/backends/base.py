"""
Chat Backend Interface
Request/response contract shared by remote models, the synthetic oracle and test doubles
"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import (
    Any,
    Callable,
    List,
    Mapping,
    Optional,
    Protocol,
    Sequence,
    Union,
    runtime_checkable,
)

from pydantic import BaseModel, ConfigDict, Field

logger = logging.getLogger(__name__)

PURPOSE_JUDGMENT = "judgment"
PURPOSE_GENERATION = "generation"
PURPOSE_INFERENCE = "inference"


class ModelConfig(BaseModel):
    """
    Remote chat-completion model settings

    The API key is never part of this model; it is read from the environment
    variable named by `api_key_env`.
    """

    model_config = ConfigDict(frozen=True)

    endpoint: str = "https://api.openai.com/v1"
    model: str = "gpt-4o-mini"
    temperature: float = Field(default=1e-5, ge=0.0)
    max_tokens: int = Field(default=1024, ge=1)
    timeout: float = Field(default=60.0, gt=0.0)
    retry_budget: int = Field(default=3, ge=0)
    max_in_flight: int = Field(default=8, ge=1)
    api_key_env: str = "RLIE_API_KEY"


@dataclass(frozen=True)
class ChatRequest:
    """
    One chat-completion call

    `context` carries the structured inputs the prompt was rendered from
    (rule, example, weights, ...). Remote backends ignore it.
    """

    purpose: str
    system: str
    user: str
    context: Mapping[str, Any] = field(default_factory=dict)

    def messages(self) -> List[dict]:
        return [
            {'role': 'system', 'content': self.system},
            {'role': 'user', 'content': self.user},
        ]


@dataclass(frozen=True)
class BackendCapabilities:
    """What a backend is and how hard it may be driven"""

    name: str
    model: str
    max_in_flight: int = 1


@runtime_checkable
class ChatBackend(Protocol):
    """Anything that turns a ChatRequest into response text"""

    capabilities: BackendCapabilities

    async def complete(self, request: ChatRequest) -> str:
        ...

    async def aclose(self) -> None:
        ...


class CountingBackend:
    """
    Wraps a backend and counts calls per purpose

    Used for call accounting in runs and as a spy in tests.
    """

    def __init__(self, inner: ChatBackend):
        self.inner = inner
        self.capabilities = inner.capabilities
        self.counts: Counter = Counter()
        self.requests: List[ChatRequest] = []

    @property
    def calls(self) -> int:
        return sum(self.counts.values())

    async def complete(self, request: ChatRequest) -> str:
        self.counts[request.purpose] += 1
        self.requests.append(request)
        return await self.inner.complete(request)

    async def aclose(self) -> None:
        await self.inner.aclose()


class ScriptedBackend:
    """
    Canned-response backend

    `responses` is either a list consumed in order (the last entry repeats once the
    list is exhausted) or a callable mapping a request to its response text.
    """

    def __init__(
        self,
        responses: Union[Sequence[str], Callable[[ChatRequest], str]],
        name: str = "scripted",
        model: str = "scripted",
        max_in_flight: int = 4,
    ):
        self._responses = responses if callable(responses) else list(responses)
        if not callable(self._responses) and not self._responses:
            raise ValueError("ScriptedBackend needs at least one response")
        self._cursor = 0
        self.capabilities = BackendCapabilities(
            name=name, model=model, max_in_flight=max_in_flight
        )
        self.requests: List[ChatRequest] = []

    async def complete(self, request: ChatRequest) -> str:
        self.requests.append(request)
        if callable(self._responses):
            return self._responses(request)
        index = min(self._cursor, len(self._responses) - 1)
        self._cursor += 1
        return self._responses[index]

    async def aclose(self) -> None:
        return None


async def close_quietly(backend: Optional[ChatBackend]):
    """Close a backend, logging instead of raising"""
    if backend is None:
        return
    try:
        await backend.aclose()
    except Exception as e:
        logger.warning(f"Failed to close backend {backend.capabilities.name}: {e}")
