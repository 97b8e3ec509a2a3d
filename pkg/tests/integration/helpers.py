#!/usr/bin/env python3
# Copyright 2022 Canonical Ltd.
# See LICENSE file for licensing details.
import logging
import math
import os
import subprocess
import sys
from collections import namedtuple
from pathlib import Path
from typing import Dict

from ccdepth.v0.circuit import size
from ccdepth.v0.prefixsynth import synth_prefix

logger = logging.getLogger(__name__)

ROOT = Path(__file__).resolve().parents[2]
CLI_PATH = ROOT / "src" / "cli.py"

Completed = namedtuple("Completed", "code stdout stderr")


def prefix_size_ratio(n: int) -> float:
    """Two-qubit size of synth_prefix(n) divided by n log2 n."""
    two_qubit, _ = size(synth_prefix(n))
    return two_qubit / (n * math.log2(n))


def parse_report(text: str) -> Dict[str, str]:
    """Key/value pairs of a report printed by the command line."""
    return dict(line.split("=", 1) for line in text.splitlines() if "=" in line)


class CommandLine:
    """Runs src/cli.py in a child interpreter with the repository on its path."""

    def __init__(self, directory: Path):
        self.directory = directory

    def path(self, name: str) -> Path:
        """A file name inside the scratch directory."""
        return self.directory / name

    def write(self, name: str, text: str) -> Path:
        """Write a scratch input file and return its path."""
        path = self.path(name)
        path.write_text(text)
        return path

    def __call__(self, *argv) -> Completed:
        """Run one command and capture its exit code and output."""
        env = dict(os.environ)
        env["PYTHONPATH"] = os.pathsep.join(
            [str(ROOT), str(ROOT / "lib"), str(ROOT / "src"), env.get("PYTHONPATH", "")]
        )
        command = [sys.executable, str(CLI_PATH), *(str(arg) for arg in argv)]
        logger.info("running %s", " ".join(command[1:]))
        result = subprocess.run(
            command, cwd=self.directory, env=env, capture_output=True, text=True, timeout=600
        )
        return Completed(result.returncode, result.stdout, result.stderr)
