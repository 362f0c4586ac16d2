import logging
import os
from typing import Any, Dict, Mapping

LOG_ENV_VAR = "MIGBATCHSIM_LOG"
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

_configured = False


def _level_from_env() -> int:
    name = os.environ.get(LOG_ENV_VAR, "WARNING").strip().upper()
    level = logging.getLevelName(name)
    return level if isinstance(level, int) else logging.WARNING


def configure_logging(force: bool = False) -> None:
    """Attach one stream handler to the package logger, level from MIGBATCHSIM_LOG."""
    global _configured
    if _configured and not force:
        return
    root = logging.getLogger("migbatchsim")
    if not root.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        root.addHandler(handler)
    root.setLevel(_level_from_env())
    _configured = True


def get_logger(name: str) -> logging.Logger:
    configure_logging()
    return logging.getLogger(name)


def _format_value(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.4f}"
    return str(value)


def print_tree(title: str, sections: Mapping[str, Any]) -> None:
    """
    Print nested dicts as a box-drawing tree.

    Args:
        title: Heading printed above the tree
        sections: Mapping of name -> value or name -> nested mapping
    """
    print(f"\n{title}")
    _print_branch(sections, prefix="")


def _print_branch(node: Mapping[str, Any], prefix: str) -> None:
    items = list(node.items())
    for i, (key, value) in enumerate(items):
        is_last = i == len(items) - 1
        connector = "└──" if is_last else "├──"
        if isinstance(value, Mapping):
            print(f"{prefix}{connector} {key}:")
            _print_branch(value, prefix + ("    " if is_last else "│   "))
        else:
            print(f"{prefix}{connector} {key}: {_format_value(value)}")


def flatten_metrics(metrics: Mapping[str, Any], parent: str = "") -> Dict[str, Any]:
    """Flatten nested metrics into 'a/b' keys (the form wandb.log expects)."""
    flat = {}
    for key, value in metrics.items():
        name = f"{parent}/{key}" if parent else str(key)
        if isinstance(value, Mapping):
            flat.update(flatten_metrics(value, name))
        else:
            flat[name] = value
    return flat
