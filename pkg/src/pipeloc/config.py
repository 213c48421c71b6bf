# Copyright (c) 2025 mrbooo895.
#
# This software is released under the MIT License.
# https://opensource.org/licenses/MIT

"""
Loads and validates run configuration files.

A configuration file is a flat TOML document whose keys carry their unit as
a suffix (``pipe_length_in``, ``speed_in_per_s``, ...). User files are
merged over the packaged `_templates/default_config.toml`; the result is
turned into the typed configs of the simulator and of each pipeline stage.
"""

from importlib.resources import files as resources_files
from pathlib import Path

from .calib import CalibConfig
from .errors import InvalidConfig
from .filter import FilterConfig
from .sim import FalseRateCurve, SimConfig, SpeedProfile
from .smoother import FusionConfig
from .utils import read_toml, tomllib

REQUIRED_KEYS = ("pipe_length_in", "pipe_diameter_in", "counts_per_inch")
INTEGER_KEYS = (
    "block_count",
    "max_consecutive_rejections",
    "false_shift_count_min",
    "false_shift_count_max",
)
ARRAY_KEYS = (
    "speed_profile_durations_s",
    "speed_profile_speeds_in_per_s",
    "false_rate_distances_in",
    "false_rate_probs",
    "false_shifts_in",
)

# Config dataclass field -> file key, so validation errors name what the user wrote.
FIELD_KEYS = {
    "pipe_length": "pipe_length_in",
    "pipe_diameter": "pipe_diameter_in",
    "counts_per_inch": "counts_per_inch",
    "encoder_bias": "encoder_bias_frac",
    "encoder_slip_std": "encoder_slip_std_frac",
    "steering_counts_std": "steering_counts_std",
    "range_noise_std": "range_noise_std_in",
    "validity_horizon": "validity_horizon_in",
    "false_shift_set": "false_shifts_in",
    "false_rate_curve": "false_rate_distances_in",
    "false_shift_count": "false_shift_count_min",
    "false_shift_bounds": "false_shift_min_in",
    "false_rate_max": "false_rate_max",
    "encoder_rate_hz": "encoder_rate_hz",
    "range_rate_hz": "range_rate_hz",
    "speed_profile": "speed_in_per_s",
    "block_spacing": "block_spacing_in",
    "block_count": "block_count",
    "thres": "thres_in",
    "max_consecutive_rejections": "max_consecutive_rejections",
    "dist_step": "dist_step_in",
    "min_segment": "min_segment_in",
    "sigma_odom": "sigma_odom_in",
    "sigma_range": "sigma_range_in",
    "sigma_prior": "sigma_prior_in",
}


def load_default_config() -> dict:
    template_ref = resources_files("pipeloc._templates").joinpath("default_config.toml")
    return tomllib.loads(template_ref.read_text(encoding="utf-8"))


def _check_types(data: dict, known: set[str]):
    for key, value in data.items():
        if key not in known:
            raise InvalidConfig(key, "unknown key")
        if key in ARRAY_KEYS:
            if not isinstance(value, list) or any(
                isinstance(v, bool) or not isinstance(v, (int, float)) for v in value
            ):
                raise InvalidConfig(key, "must be an array of numbers")
        elif key in INTEGER_KEYS:
            if isinstance(value, bool) or not isinstance(value, int):
                raise InvalidConfig(key, "must be an integer")
        elif isinstance(value, bool) or not isinstance(value, (int, float)):
            raise InvalidConfig(key, "must be a number")


def load_config(path: Path | None = None) -> dict:
    """
    Resolves the run configuration.

    Without a path the packaged defaults are returned. A user file must set
    the pipe geometry and the encoder coefficient explicitly; every other key
    falls back to its default.

    :param Path path: Optional user configuration file.
    :return: The merged configuration as a flat dictionary.
    :rtype: dict
    :raises InvalidConfig: If the file cannot be parsed, a required key is
                           missing, or a key is unknown or mistyped.
    """
    config = load_default_config()
    if path is None:
        return config

    path = Path(path)
    try:
        data = read_toml(path)
    except OSError as e:
        raise InvalidConfig(str(path), f"cannot read file ({e.strerror or e})") from e
    except tomllib.TOMLDecodeError as e:
        raise InvalidConfig(str(path), f"not a valid TOML file ({e})") from e

    for key in REQUIRED_KEYS:
        if key not in data:
            raise InvalidConfig(key, "missing required key")
    _check_types(data, set(config) | set(ARRAY_KEYS))
    config.update(data)
    return config


def _paired(config: dict, first: str, second: str) -> tuple[tuple, tuple] | None:
    if (first in config) != (second in config):
        missing = second if first in config else first
        raise InvalidConfig(missing, f"must be given together with '{first if missing == second else second}'")
    if first not in config:
        return None
    a, b = tuple(float(v) for v in config[first]), tuple(float(v) for v in config[second])
    if len(a) != len(b):
        raise InvalidConfig(second, f"must have as many entries as '{first}'")
    return a, b


def _renamed(error: InvalidConfig) -> InvalidConfig:
    return InvalidConfig(FIELD_KEYS.get(error.field, error.field), error.reason)


def sim_config_from(config: dict, seed: int) -> SimConfig:
    """Builds the simulator config from a resolved configuration."""
    try:
        profile = _paired(config, "speed_profile_durations_s", "speed_profile_speeds_in_per_s")
        if profile is not None:
            speed_profile = SpeedProfile(*profile)
        else:
            if not config["speed_in_per_s"] > 0:
                raise InvalidConfig("speed_in_per_s", "must be positive")
            if config["apex_dwell_s"] < 0:
                raise InvalidConfig("apex_dwell_s", "must be non-negative")
            speed_profile = SpeedProfile.out_and_back(
                float(config["pipe_length_in"]), float(config["speed_in_per_s"]), float(config["apex_dwell_s"])
            )
        curve = _paired(config, "false_rate_distances_in", "false_rate_probs")
        shifts = config.get("false_shifts_in")
        return SimConfig(
            pipe_length=float(config["pipe_length_in"]),
            pipe_diameter=float(config["pipe_diameter_in"]),
            speed_profile=speed_profile,
            counts_per_inch=float(config["counts_per_inch"]),
            encoder_bias=float(config["encoder_bias_frac"]),
            encoder_slip_std=float(config["encoder_slip_std_frac"]),
            steering_counts_std=float(config["steering_counts_std"]),
            range_noise_std=float(config["range_noise_std_in"]),
            validity_horizon=float(config["validity_horizon_in"]),
            false_shift_set=tuple(float(s) for s in shifts) if shifts is not None else None,
            false_rate_curve=FalseRateCurve(*curve) if curve is not None else None,
            seed=int(seed),
            encoder_rate_hz=float(config["encoder_rate_hz"]),
            range_rate_hz=float(config["range_rate_hz"]),
            false_shift_count=(int(config["false_shift_count_min"]), int(config["false_shift_count_max"])),
            false_shift_bounds=(float(config["false_shift_min_in"]), float(config["false_shift_max_in"])),
            false_rate_max=float(config["false_rate_max"]),
            block_spacing=float(config["block_spacing_in"]),
            block_count=int(config["block_count"]),
        )
    except InvalidConfig as e:
        raise _renamed(e) from e


def pipeline_configs_from(config: dict) -> tuple[FilterConfig, CalibConfig, FusionConfig]:
    """Builds the filter, calibration and fusion configs."""
    c = float(config["counts_per_inch"])
    try:
        return (
            FilterConfig(
                thres=float(config["thres_in"]),
                counts_per_inch=c,
                max_consecutive_rejections=int(config["max_consecutive_rejections"]),
            ),
            CalibConfig(
                dist_step=float(config["dist_step_in"]),
                counts_per_inch=c,
                min_segment=float(config["min_segment_in"]),
            ),
            FusionConfig(
                sigma_odom=float(config["sigma_odom_in"]),
                sigma_range=float(config["sigma_range_in"]),
                sigma_prior=float(config["sigma_prior_in"]),
            ),
        )
    except InvalidConfig as e:
        raise _renamed(e) from e
