#
# This file is part of openbath
#
# Copyright (c) 2024 openbath developers
#    All Rights Reserved
#
# License:  BSD-3-Clause
"""Store trajectory ensembles in HDF5."""

from __future__ import annotations

import logging
from pathlib import Path

import h5py
import numpy as np

from openbath import __version__

from .bath import TrajectoryEnsemble

logger = logging.getLogger(__name__)

# - global parameters ------------------------------
SERIES = ("x", "v", "q", "u", "noise_force")
SCALARS = ("seed", "dt", "temperature", "kind", "mass", "relaxation_time")


# - exported functions -----------------------------
def write_ensemble(path: Path | str, ens: TrajectoryEnsemble) -> None:
    """Write a trajectory ensemble to a new HDF5 file.

    Series are stored chunked per trajectory with compression and checksums;
    the run parameters are stored as global attributes.
    """
    with h5py.File(path, "w", libver="latest") as fid:
        fid.attrs["title"] = f"openbath {ens.kind} trajectory ensemble"
        fid.attrs["program_version"] = __version__
        for key in SCALARS:
            fid.attrs[key] = getattr(ens, key)

        _ = fid.create_dataset("times", data=ens.times)
        _ = fid.create_dataset("bath_masses", data=ens.bath_masses)
        for key in SERIES:
            values = getattr(ens, key)
            if values is None:
                continue
            chunks = (1,) + values.shape[1:]
            _ = fid.create_dataset(
                key, data=values, chunks=chunks, fletcher32=True,
                compression=1, shuffle=True,
            )
    logger.debug("wrote %d trajectories to %s", ens.n_traj, path)


def read_ensemble(path: Path | str) -> TrajectoryEnsemble:
    """Read a trajectory ensemble written by write_ensemble."""
    with h5py.File(path, "r") as fid:
        if "x" not in fid or "times" not in fid:
            raise OSError(f"{path} does not hold a trajectory ensemble")
        series = {key: fid[key][()] if key in fid else None for key in SERIES}
        attrs = {key: fid.attrs[key] for key in SCALARS}
        times = fid["times"][()]
        bath_masses = fid["bath_masses"][()]

    return TrajectoryEnsemble(
        seed=int(attrs["seed"]),
        dt=float(attrs["dt"]),
        temperature=float(attrs["temperature"]),
        kind=str(attrs["kind"]),
        mass=float(attrs["mass"]),
        times=np.asarray(times),
        bath_masses=np.asarray(bath_masses),
        relaxation_time=float(attrs["relaxation_time"]),
        **series,
    )
