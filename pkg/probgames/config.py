import os
from dotenv import load_dotenv

DEFAULTS = {
    "PROBGAMES_LOG_LEVEL": "INFO",
    "PROBGAMES_LOG_FILE": "",
    "GRID_RESOLUTION": "12",
    "GRID_EPSILON": "1e-9",
    "MAX_GRID_POINTS": "1000000",
    "MAX_CONDITIONED_TABLE": "16",
    "MAX_SUPPORT_ENUM_MOVES": "4",
    "LAW_SEED": "7",
    "LAW_CASES": "100",
    "LAW_MAX_SET_SIZE": "3",
    "LAW_MAX_PAYOFF_ABS": "3",
}

INT_KEYS = (
    "GRID_RESOLUTION", "MAX_GRID_POINTS", "MAX_CONDITIONED_TABLE",
    "MAX_SUPPORT_ENUM_MOVES", "LAW_SEED", "LAW_CASES",
    "LAW_MAX_SET_SIZE", "LAW_MAX_PAYOFF_ABS",
)
POSITIVE_KEYS = ("GRID_RESOLUTION", "MAX_GRID_POINTS", "MAX_CONDITIONED_TABLE", "MAX_SUPPORT_ENUM_MOVES", "LAW_MAX_SET_SIZE")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def load_config(env_path=".probgames.env"):
    """Loads configuration from the .env file, falling back to the environment and then defaults."""
    if os.path.exists(env_path):
        # Override so the named file wins over a stale environment
        load_dotenv(dotenv_path=env_path, override=True)
    return {key: os.getenv(key, default) for key, default in DEFAULTS.items()}


def validate_config(config):
    """Validates the loaded configuration and converts numeric values in place."""
    level = (config.get("PROBGAMES_LOG_LEVEL") or "").strip().upper()
    if level not in LOG_LEVELS:
        raise ValueError(f"PROBGAMES_LOG_LEVEL must be one of {', '.join(LOG_LEVELS)}")
    config["PROBGAMES_LOG_LEVEL"] = level

    for key in INT_KEYS:
        try:
            config[key] = int(str(config.get(key)).strip())
        except ValueError:
            raise ValueError(f"{key} must be an integer")
        if config[key] < 0:
            raise ValueError(f"{key} must not be negative")
    for key in POSITIVE_KEYS:
        if config[key] == 0:
            raise ValueError(f"{key} must be positive")

    try:
        config["GRID_EPSILON"] = float(str(config.get("GRID_EPSILON")).strip())
    except ValueError:
        raise ValueError("GRID_EPSILON must be a number")
    if config["GRID_EPSILON"] < 0:
        raise ValueError("GRID_EPSILON must not be negative")

    log_file = config.get("PROBGAMES_LOG_FILE") or ""
    if log_file and not os.path.isdir(os.path.dirname(os.path.abspath(log_file))):
        raise ValueError("PROBGAMES_LOG_FILE directory does not exist")

    return True
