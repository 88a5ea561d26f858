"""
CLI Module
Run configuration, logging setup and the rlie commands
"""

from cli.config import RunConfig
from cli.main import main

__all__ = ['RunConfig', 'main']
