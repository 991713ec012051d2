"""
Configuration loader for YAML (or JSON) config files.
"""

from pathlib import Path
from typing import Any, Dict, Optional
import copy
import yaml

from ..core.logger import get_logger


class Config:
    """Configuration manager for loading YAML configs."""

    def __init__(self, config_path: Optional[str] = "config/config.yaml", data: Optional[Dict[str, Any]] = None):
        """
        Initialize configuration.

        Args:
            config_path: Path to main config file (YAML; JSON is a YAML subset)
            data: Pre-parsed configuration, used instead of reading a file
        """
        self.logger = get_logger(__name__)
        self.config_path = Path(config_path) if config_path else None
        self._config: Dict[str, Any] = {}

        if data is not None:
            self._config = copy.deepcopy(data)
        elif self.config_path is not None and self.config_path.exists():
            self.load()
        else:
            self.logger.warning(f"Config file not found: {config_path}, using defaults")

    def load(self):
        """Load configuration from YAML file."""
        try:
            with open(self.config_path, 'r', encoding='utf-8') as f:
                self._config = yaml.safe_load(f) or {}
            self.logger.info(f"Loaded config from {self.config_path}")
        except (OSError, yaml.YAMLError) as e:
            self.logger.error(f"Failed to load config: {e}")
            self._config = {}

    def get(self, key: str, default: Any = None) -> Any:
        """
        Get config value by dot-notation key.

        Args:
            key: Config key (e.g., 'training.lr')
            default: Default value if key not found

        Returns:
            Config value or default
        """
        keys = key.split('.')
        value = self._config

        for k in keys:
            if isinstance(value, dict):
                value = value.get(k)
                if value is None:
                    return default
            else:
                return default

        return value if value is not None else default

    def set(self, key: str, value: Any):
        """Set a dot-notation key, creating intermediate sections."""
        keys = key.split('.')
        node = self._config
        for k in keys[:-1]:
            node = node.setdefault(k, {})
        node[keys[-1]] = value

    def get_section(self, section: str) -> Dict[str, Any]:
        """
        Get entire config section.

        Args:
            section: Section name

        Returns:
            Section dict or empty dict
        """
        return self._config.get(section) or {}

    def to_dict(self) -> Dict[str, Any]:
        """Deep copy of the resolved configuration."""
        return copy.deepcopy(self._config)

    @property
    def data(self) -> Dict[str, Any]:
        """Get data preprocessing section."""
        return self.get_section('data')

    @property
    def synthgen(self) -> Dict[str, Any]:
        """Get synthetic generation section."""
        return self.get_section('synthgen')

    @property
    def model(self) -> Dict[str, Any]:
        """Get model architecture section."""
        return self.get_section('model')

    @property
    def training(self) -> Dict[str, Any]:
        """Get training section."""
        return self.get_section('training')

    @property
    def evaluation(self) -> Dict[str, Any]:
        """Get evaluation section."""
        return self.get_section('evaluation')

    @property
    def output(self) -> Dict[str, Any]:
        """Get output config section."""
        return self.get_section('output')

    @property
    def logging_config(self) -> Dict[str, Any]:
        """Get logging config section."""
        return self.get_section('logging')


# Global config instance
_config: Optional[Config] = None


def get_config(config_path: str = "config/config.yaml") -> Config:
    """
    Get global config instance.

    Args:
        config_path: Path to config file

    Returns:
        Config instance
    """
    global _config
    if _config is None:
        _config = Config(config_path)
    return _config


def set_config(config: Config) -> Config:
    """Install ``config`` as the global instance (CLI ``--config``)."""
    global _config
    _config = config
    return config


def reset_config():
    """Drop the global instance (useful for testing)."""
    global _config
    _config = None
