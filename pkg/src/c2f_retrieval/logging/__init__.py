from c2f_retrieval.logging.default_logger import LEVEL_ENV, configure_logging, get_logger

__all__ = ["LEVEL_ENV", "configure_logging", "get_logger"]
