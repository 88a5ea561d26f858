"""
Backend Factory
Factory pattern for creating chat backends based on configuration
"""

import logging
import os
from enum import Enum
from pathlib import Path
from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from backends.base import ChatBackend, ModelConfig
from core.errors import ConfigError
from dataset.loader import DatasetManifest

logger = logging.getLogger(__name__)


class BackendType(Enum):
    """Supported backend types"""
    OPENAI = "openai"
    SYNTHETIC = "synthetic"


class BackendConfig(BaseModel):
    """`backend` section of the run configuration"""

    model_config = ConfigDict(frozen=True)

    provider: str = BackendType.OPENAI.value
    model: ModelConfig = Field(default_factory=ModelConfig)
    synthetic_spec: Optional[str] = None


class BackendFactory:
    """
    Factory for creating chat backend instances

    Supports:
    - openai: any OpenAI-compatible chat-completion endpoint
    - synthetic: offline keyword oracle driven by a SyntheticJudgeSpec file
    """

    @staticmethod
    def create_backend(config: BackendConfig, manifest: DatasetManifest) -> ChatBackend:
        """
        Create a chat backend based on configuration

        Raises:
            ConfigError: If the provider is unknown or its configuration is incomplete
        """
        ok, message = BackendFactory.validate_config(config)
        if not ok:
            raise ConfigError(message)

        provider = config.provider.lower()
        logger.info(f"🔧 Creating chat backend: {provider}")

        if provider == BackendType.OPENAI.value:
            return BackendFactory._create_openai(config)
        return BackendFactory._create_synthetic(config, manifest)

    @staticmethod
    def _create_openai(config: BackendConfig) -> ChatBackend:
        from backends.openai_backend import OpenAIChatBackend

        backend = OpenAIChatBackend(config.model)
        logger.info(f"✅ Chat backend created: {backend.endpoint} ({config.model.model})")
        return backend

    @staticmethod
    def _create_synthetic(config: BackendConfig, manifest: DatasetManifest) -> ChatBackend:
        from backends.synthetic import SyntheticBackend, SyntheticJudgeSpec

        spec = SyntheticJudgeSpec.from_yaml(config.synthetic_spec)
        backend = SyntheticBackend(spec, manifest, max_in_flight=config.model.max_in_flight)
        logger.info(
            f"✅ Synthetic backend created: {len(spec.rules)} registered rules, noise={spec.noise}"
        )
        return backend

    @staticmethod
    def get_supported_types() -> List[str]:
        """Get list of supported backend types"""
        return [backend_type.value for backend_type in BackendType]

    @staticmethod
    def validate_config(config: BackendConfig) -> Tuple[bool, str]:
        """
        Validate backend configuration

        Returns:
            Tuple of (is_valid, error_message)
        """
        provider = config.provider.lower()

        if provider not in BackendFactory.get_supported_types():
            return False, (
                f"Invalid backend provider: {provider}. "
                f"Supported: {BackendFactory.get_supported_types()}"
            )

        if provider == BackendType.OPENAI.value:
            if not os.environ.get(config.model.api_key_env):
                return False, f"Environment variable {config.model.api_key_env} is not set"

        if provider == BackendType.SYNTHETIC.value:
            if not config.synthetic_spec:
                return False, "backend.synthetic_spec is required for the synthetic provider"
            if not Path(config.synthetic_spec).is_file():
                return False, f"Synthetic judge spec not found: {config.synthetic_spec}"

        return True, ""
