# Copyright (c) 2025 mrbooo895.
#
# This software is released under the MIT License.
# https://opensource.org/licenses/MIT

"""
Implements the 'simulate' command for the pipeloc command-line tool.

Generates one labeled out-and-back run from a configuration file and a seed
and writes it as a run directory: the synced sensor log, the per-sample
labels, the ground truth, the block detection events and a manifest that
pins the resolved configuration, its hash and the seed.
"""

import logging
from pathlib import Path

import numpy as np

from . import __version__
from .config import load_config, sim_config_from
from .records import (
    RunArtifactBundle,
    write_blocks,
    write_labels,
    write_log,
    write_truth,
)
from .sim import generate_run
from .utils import FLOAT_DECIMALS, config_hash, console, write_toml
from .wrappers import error_handling

logger = logging.getLogger(__name__)


def simulate_run(config: dict, seed: int, out_dir: Path) -> RunArtifactBundle:
    """
    Simulates one run and writes its artifacts to ``out_dir``.

    The same ``(config, seed)`` pair always produces byte-identical files.

    :param dict config: Resolved configuration (see `config.load_config`).
    :param int seed: Random seed of the run.
    :param Path out_dir: Run directory; created if missing.
    :return: The written bundle.
    :rtype: RunArtifactBundle
    :raises InvalidConfig: If the configuration does not describe a valid run.
    """
    out_dir = Path(out_dir)
    labeled = generate_run(sim_config_from(config, seed))
    digest = config_hash(config)
    bundle = RunArtifactBundle(out_dir, int(seed), digest)

    write_log(bundle.log, labeled.log)
    write_labels(bundle.labels, labeled.log, labeled.range_valid)
    write_truth(bundle.truth, labeled.truth)
    write_blocks(bundle.blocks, labeled.block_events)
    write_toml(
        bundle.manifest,
        {
            "pipeloc_version": __version__,
            "seed": int(seed),
            "config_hash": digest,
            "float_decimals": FLOAT_DECIMALS,
            "config": config,
        },
    )
    logger.info(
        "seed %d: %d samples, %d labeled false, %d blocks",
        seed,
        len(labeled.log),
        int(np.count_nonzero(~labeled.range_valid)),
        len(labeled.block_events),
    )
    return bundle


@error_handling
def cmd_simulate(config_path: Path | None, seed: int, out_dir: Path) -> RunArtifactBundle:
    """
    Entry point of 'pipeloc simulate'.

    :param Path config_path: Configuration file, or None for the defaults.
    :param int seed: Random seed of the run.
    :param Path out_dir: Run directory to write.
    """
    config = load_config(config_path)
    console.print(f"[bold green]    Simulating[/bold green] run with seed {seed}")
    bundle = simulate_run(config, seed, out_dir)
    console.print(f"[bold green]       Writing[/bold green] artifacts to '{bundle.root}'")
    console.print(f"\n[bold green]Successfully[/bold green] simulated run (config {bundle.config_hash[:12]}).")
    return bundle
