#
# This file is part of openbath
#
# Copyright (c) 2024 openbath developers
#    All Rights Reserved
#
# License:  BSD-3-Clause
"""Shared fixtures of the openbath test-suite."""

from __future__ import annotations

import numpy as np
import pytest

from openbath.quantum.damped_oscillator import Constants, OscillatorParams, gibbs_params


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator, identical in every test."""
    return np.random.default_rng(20240101)


@pytest.fixture
def constants() -> Constants:
    """Natural units."""
    return Constants()


@pytest.fixture
def thermal_mode(constants: Constants) -> OscillatorParams:
    """Weakly damped Gibbs mode with asymmetric damping."""
    return gibbs_params(1.0, 1.0, 0.1, 0.05, 1.0, constants)


@pytest.fixture
def cold_mode(constants: Constants) -> OscillatorParams:
    """Bath mode of the composite comparison, hbar omega / k_B T = 2."""
    return gibbs_params(1.0, 1.0, 0.3, 0.0, 0.5, constants)
