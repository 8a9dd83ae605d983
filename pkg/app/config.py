import os
from pathlib import Path

import yaml
from dotenv import load_dotenv

# Load environment variables from .env file if it exists
load_dotenv()

DEFAULTS = {
    "logging": {
        "level": "WARNING",
        "file": None,
        "color": True,
    },
    "simulation": {
        "grid_points": 2001,
        "span_ghz": 1.0,
        "flux_grid_points": 101,
        "threshold_db": 17.0,
        "target_gain_db": 20.0,
    },
    "output": {
        "csv_digits": 12,
    },
}


def load_config():
    """Load tool settings from YAML, falling back to built-in defaults."""

    # Get the project root directory
    project_root = Path(__file__).parent.parent
    config_path = Path(os.getenv("IMPA_CONFIG") or project_root / "config.yaml")

    config = {section: dict(values) for section, values in DEFAULTS.items()}
    if not config_path.exists():
        return config

    with open(config_path, "r", encoding="utf-8") as file:
        loaded = yaml.safe_load(file) or {}

    for section, values in loaded.items():
        if section not in config or not isinstance(values, dict):
            raise ValueError(
                f"Unknown configuration section '{section}' in {config_path}. "
                f"See config.example.yaml for the supported keys."
            )
        config[section].update(values)

    return config


# Load configuration
_config = load_config()

# Logging
LOG_LEVEL = (os.getenv("IMPA_LOG_LEVEL") or _config["logging"]["level"]).upper()
LOG_FILE = os.getenv("IMPA_LOG_FILE") or _config["logging"]["file"]
ENABLE_COLOR = bool(_config["logging"].get("color", True))

# Simulation defaults
GRID_POINTS = int(os.getenv("IMPA_GRID_POINTS") or _config["simulation"]["grid_points"])
SPAN_HZ = float(os.getenv("IMPA_SPAN_GHZ") or _config["simulation"]["span_ghz"]) * 1e9
FLUX_GRID_POINTS = int(_config["simulation"]["flux_grid_points"])
DEFAULT_THRESHOLD_DB = float(_config["simulation"]["threshold_db"])
DEFAULT_TARGET_GAIN_DB = float(_config["simulation"]["target_gain_db"])

# Output formatting
CSV_DIGITS = int(_config["output"]["csv_digits"])


# Validation
def validate_config():
    """Validate that numeric settings are usable."""
    positive_values = {
        "simulation.grid_points": GRID_POINTS,
        "simulation.span_ghz": SPAN_HZ,
        "simulation.flux_grid_points": FLUX_GRID_POINTS,
        "output.csv_digits": CSV_DIGITS,
    }

    invalid = [name for name, value in positive_values.items() if value <= 0]

    if invalid:
        raise ValueError(
            f"Invalid configuration values: {', '.join(invalid)}. "
            f"Please check your config.yaml file or environment variables."
        )

    if GRID_POINTS < 2:
        raise ValueError("simulation.grid_points must be at least 2.")


# Validate configuration on import
validate_config()
