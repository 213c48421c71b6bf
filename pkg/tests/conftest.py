import pytest
import tomli_w

# A short pipe that simulates and localizes in well under a second.
SMALL_PIPE = {
    "pipe_length_in": 120.0,
    "pipe_diameter_in": 30.0,
    "counts_per_inch": 50.0,
    "speed_in_per_s": 10.0,
    "block_spacing_in": 24.0,
    "block_count": 4,
}

NOISELESS = {
    "encoder_bias_frac": 0.0,
    "encoder_slip_std_frac": 0.0,
    "steering_counts_std": 0.0,
    "range_noise_std_in": 0.0,
    "false_rate_max": 0.0,
}


@pytest.fixture
def config_file(tmp_path):
    """Factory writing the small-pipe config, with overrides, to a TOML file."""

    def _write(noiseless: bool = False, **overrides):
        data = dict(SMALL_PIPE)
        if noiseless:
            data.update(NOISELESS)
        data.update(overrides)
        path = tmp_path / "pipeloc.toml"
        path.write_text(tomli_w.dumps(data), encoding="utf-8")
        return path

    return _write
