"""
Run manifests: what is needed to rerun a command and get the same files.
"""

import logging
import os
import platform
import subprocess
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

logger = logging.getLogger(__name__)


def git_describe(cwd=None):
    """``git describe --always --dirty`` of the working tree, or "unknown"."""
    try:
        result = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            cwd=cwd,
            capture_output=True,
            text=True,
            check=True,
            timeout=10,
        )
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return result.stdout.strip() or "unknown"


def utc_now():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class RunManifest:
    """
    Description of one command run.

    Args:
        command (str): Subcommand name
        config (dict): Effective settings after flags, config file and defaults
        seed (int, optional): Seed of the run
        datasets (dict): Name → dataset hash
        probe (dict): Reference probe parameters (beta, c) when relevant
    """

    command: str
    config: dict
    seed: int = None
    datasets: dict = field(default_factory=dict)
    probe: dict = field(default_factory=dict)
    git: str = field(default_factory=git_describe)
    started: str = field(default_factory=utc_now)
    finished: str = None

    def finish(self):
        self.finished = utc_now()
        return self

    def as_lines(self):
        lines = [
            f"command = {self.command}",
            f"seed = {self.seed}",
            f"git = {self.git}",
            f"started = {self.started}",
            f"finished = {self.finished}",
            f"python = {sys.version.split()[0]}",
            f"numpy = {np.__version__}",
            f"platform = {platform.platform()}",
        ]
        lines += [f"dataset.{name} = {value}" for name, value in sorted(self.datasets.items())]
        lines += [f"probe.{name} = {value}" for name, value in sorted(self.probe.items())]
        lines += [f"config.{name} = {value}" for name, value in sorted(self.config.items())]
        return lines

    def write(self, path):
        """Write the manifest as flat ``key = value`` lines."""
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, "w", encoding="utf-8") as handle:
            handle.write("\n".join(self.as_lines()) + "\n")
        logger.info("wrote manifest %s", path)
        return path


def read_manifest(path):
    """Read a manifest back as a flat dict of strings."""
    values = {}
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            if "=" in line:
                key, value = line.split("=", 1)
                values[key.strip()] = value.strip()
    return values
