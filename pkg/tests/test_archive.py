#
# This file is part of openbath
#
# Copyright (c) 2024 openbath developers
#    All Rights Reserved
#
# License:  BSD-3-Clause
"""Unit tests for openbath.classical.archive."""

from __future__ import annotations

import h5py
import numpy as np
import pytest

from openbath.classical.archive import read_ensemble, write_ensemble
from openbath.classical.bath import (
    ClassicalBathMode,
    harmonic_system,
    markov_langevin,
    simulate_composite_langevin,
)


def test_composite_ensemble_is_archived(tmp_path):
    bath = [ClassicalBathMode(1.0, 10.0, 5.0, 0.2), ClassicalBathMode(2.0, 4.0, 1.0, 0.1)]
    ens = simulate_composite_langevin(harmonic_system(1.0, 1.0, x0=0.3), bath, 1.0,
                                      0.005, 0.5, 6, seed=42, sample_every=10)
    path = tmp_path / "ensemble.h5"
    write_ensemble(path, ens)

    with h5py.File(path, "r") as fid:
        assert fid.attrs["kind"] == "composite"
        assert fid["x"].chunks == (1, ens.times.size)
        assert fid["q"].fletcher32

    copy = read_ensemble(path)
    assert copy.seed == 42
    assert copy.kind == "composite"
    assert copy.dt == pytest.approx(0.005)
    assert copy.relaxation_time == pytest.approx(1.0)
    np.testing.assert_array_equal(copy.times, ens.times)
    np.testing.assert_array_equal(copy.x, ens.x)
    np.testing.assert_array_equal(copy.q, ens.q)
    np.testing.assert_array_equal(copy.noise_force, ens.noise_force)
    np.testing.assert_array_equal(copy.bath_masses, [1.0, 2.0])


def test_markov_ensemble_has_no_bath_series(tmp_path):
    ens = markov_langevin(harmonic_system(1.0, 1.0), 0.5, 1.0, 0.01, 0.2, 3, seed=1)
    path = tmp_path / "markov.h5"
    write_ensemble(path, ens)
    copy = read_ensemble(path)
    assert copy.kind == "markov"
    assert copy.q is None
    assert copy.noise_force is None
    np.testing.assert_array_equal(copy.v, ens.v)


def test_foreign_file_is_rejected(tmp_path):
    path = tmp_path / "other.h5"
    with h5py.File(path, "w") as fid:
        fid.create_dataset("data", data=np.arange(3))
    with pytest.raises(OSError):
        read_ensemble(path)
