"""Relay selection and concurrent transmission scheduling for UAV-aided mmWave vehicular networks."""

from .config import ChannelParams, ConfigError, RunConfig, load_config
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "ChannelParams", "ConfigError", "RunConfig", "load_config", "__version__"]
