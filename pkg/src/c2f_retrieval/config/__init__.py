from c2f_retrieval.config.engine import (
    CONFIG_VERSION,
    ConfigError,
    EngineConfig,
    config_from_dict,
    load_config,
    save_config,
)

__all__ = [
    "CONFIG_VERSION",
    "ConfigError",
    "EngineConfig",
    "config_from_dict",
    "load_config",
    "save_config",
]
