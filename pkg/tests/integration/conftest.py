#!/usr/bin/env python3
# Copyright 2022 Canonical Ltd.
# See LICENSE file for licensing details.

import pytest

from tests.integration.helpers import CommandLine, prefix_size_ratio


@pytest.fixture(scope="module")
def prefix_baseline() -> float:
    """Two-qubit size ratio of the constant-depth Prefix Sum at the smallest measured width."""
    return prefix_size_ratio(14)


@pytest.fixture
def cli(tmp_path) -> CommandLine:
    """Runner for the command line in a scratch directory."""
    return CommandLine(tmp_path)
