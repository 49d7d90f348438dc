# modules/config_loader.py
import json
import os
import logging
from typing import Dict, Optional

logger = logging.getLogger(__name__)

DEFAULTS: Dict[str, object] = {
    # candidate extensions any single exhaustive search may try
    "MAX_SEARCH": 1_000_000,
    "LOG_LEVEL": "INFO",
    # seed for the random diagram generators
    "SEED": 0,
    "RANDOM_SET_SIZE": 3,
    # bounds for the small-category enumerator
    "ENUM_MAX_OBJECTS": 3,
    "ENUM_MAX_MORPHISMS": 7,
}

ENV_OVERRIDES = {
    "REEDY_MAX_SEARCH": "MAX_SEARCH",
    "REEDY_LOG_LEVEL": "LOG_LEVEL",
    "REEDY_SEED": "SEED",
}


def load_config(path: str = "reedy.json", defaults: Optional[Dict[str, object]] = None) -> Dict[str, object]:
    """Load JSON config and merge with defaults; REEDY_* environment variables win."""
    base = dict(defaults or DEFAULTS)
    loaded = False
    search_paths = [path]
    # project root relative to this file: ../../reedy.json
    module_dir = os.path.dirname(__file__)
    project_root = os.path.abspath(os.path.join(module_dir, os.pardir, os.pardir))
    search_paths.append(os.path.join(project_root, os.path.basename(path)))

    for candidate in search_paths:
        try:
            with open(candidate, "r", encoding="utf-8") as f:
                file_cfg = json.load(f)
                file_cfg = {k.upper(): v for k, v in file_cfg.items()}
                base.update(file_cfg or {})
                logger.info(f"Loaded config from {os.path.abspath(candidate)}")
                loaded = True
                break
        except FileNotFoundError:
            continue
        except Exception as e:
            logger.warning(f"Failed reading config {candidate}: {e}")

    if not loaded:
        logger.debug(f"Config file {path} not found; using defaults only")

    for env_name, key in ENV_OVERRIDES.items():
        value = os.getenv(env_name)
        if value is None:
            continue
        if isinstance(base.get(key), int):
            try:
                value = int(value)
            except ValueError:
                logger.warning(f"{env_name}={value!r} is not an integer; keeping {base.get(key)}")
                continue
        base[key] = value
        logger.info(f"{key}={value} (source=ENV)")

    return base
