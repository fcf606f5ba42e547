"""
Configuration management for the secure ISAC beamforming toolkit.
Provides environment-specific runtime settings with validation and defaults.
Scenario parameters live in src.mathematics.scenario.SystemConfig.
"""

import os
from typing import Optional
from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict
from enum import Enum


class Environment(str, Enum):
    """Environment types for the toolkit."""
    DEVELOPMENT = "development"
    TESTING = "testing"
    PRODUCTION = "production"


class LogLevel(str, Enum):
    """Logging levels."""
    DEBUG = "DEBUG"
    INFO = "INFO"
    WARNING = "WARNING"
    ERROR = "ERROR"
    CRITICAL = "CRITICAL"


class Settings(BaseSettings):
    """Runtime settings with validation and environment support."""

    model_config = SettingsConfigDict(
        env_prefix="ISAC_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )

    # Application Settings
    environment: Environment = Field(default=Environment.DEVELOPMENT, description="Runtime environment")

    # Execution Settings
    threads: int = Field(default=1, description="Worker processes for Monte Carlo trials")

    # Numerical Settings
    numerical_tolerance: float = Field(default=1e-8, description="Relative slack of the AL descent monitor")

    # Logging Settings
    log_level: LogLevel = Field(default=LogLevel.INFO, description="Logging level")
    log_format: str = Field(
        default="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        description="Log format string"
    )
    enable_file_logging: bool = Field(default=False, description="Enable file logging")
    log_file_path: Optional[str] = Field(default=None, description="Log file path")

    @field_validator("threads")
    @classmethod
    def validate_threads(cls, v):
        """Validate worker count."""
        if v < 1:
            raise ValueError("Threads must be at least 1")
        return v

    @field_validator("numerical_tolerance")
    @classmethod
    def validate_tolerance(cls, v):
        """Validate descent slack."""
        if not 0.0 < v <= 1e-2:
            raise ValueError("Numerical tolerance must lie in (0, 1e-2]")
        return v


class DevelopmentSettings(Settings):
    """Development environment settings."""
    environment: Environment = Environment.DEVELOPMENT
    log_level: LogLevel = LogLevel.DEBUG


class TestingSettings(Settings):
    """Testing environment settings."""
    environment: Environment = Environment.TESTING
    log_level: LogLevel = LogLevel.WARNING


class ProductionSettings(Settings):
    """Production environment settings, used for long Monte Carlo campaigns."""
    environment: Environment = Environment.PRODUCTION
    log_level: LogLevel = LogLevel.INFO
    enable_file_logging: bool = True
    log_file_path: Optional[str] = "isac.log"


def get_settings() -> Settings:
    """
    Get runtime settings based on environment.

    Returns:
        Settings: Configured settings instance
    """
    env = (os.getenv("ISAC_ENVIRONMENT") or "development").lower()

    if env == "production":
        return ProductionSettings()
    elif env == "testing":
        return TestingSettings()
    else:
        return DevelopmentSettings()


# Global settings instance
settings = get_settings()


def get_logging_config(active: Optional[Settings] = None) -> dict:
    """
    Get logging configuration.

    Args:
        active: Settings to configure from, defaults to the global instance

    Returns:
        dict: Configuration for logging.config.dictConfig
    """
    active = active or settings
    config = {
        "version": 1,
        "disable_existing_loggers": False,
        "formatters": {
            "default": {
                "format": active.log_format,
                "datefmt": "%Y-%m-%d %H:%M:%S"
            },
            "detailed": {
                "format": "%(asctime)s - %(name)s - %(levelname)s - %(filename)s:%(lineno)d - %(message)s",
                "datefmt": "%Y-%m-%d %H:%M:%S"
            }
        },
        "handlers": {
            # stdout is reserved for the one-line JSON command summary
            "console": {
                "class": "logging.StreamHandler",
                "level": active.log_level.value,
                "formatter": "default",
                "stream": "ext://sys.stderr"
            }
        },
        "loggers": {
            "src": {
                "level": active.log_level.value,
                "handlers": ["console"],
                "propagate": False
            }
        },
        "root": {
            "level": LogLevel.WARNING.value,
            "handlers": ["console"]
        }
    }

    # Add file handler if enabled
    if active.enable_file_logging and active.log_file_path:
        config["handlers"]["file"] = {
            "class": "logging.handlers.RotatingFileHandler",
            "level": active.log_level.value,
            "formatter": "detailed",
            "filename": active.log_file_path,
            "maxBytes": 10485760,  # 10MB
            "backupCount": 5
        }
        config["loggers"]["src"]["handlers"].append("file")

    return config


# Export commonly used settings
__all__ = [
    "Settings",
    "DevelopmentSettings",
    "TestingSettings",
    "ProductionSettings",
    "Environment",
    "LogLevel",
    "settings",
    "get_settings",
    "get_logging_config"
]
