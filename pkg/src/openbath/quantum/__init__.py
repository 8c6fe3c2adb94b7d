#
# This file is part of openbath
#
# Copyright (c) 2024 openbath developers
#    All Rights Reserved
#
# License:  BSD-3-Clause
"""Quantum open systems with damped-oscillator environments."""

__all__ = [
    "damped_oscillator",
    "linear_example",
    "lindblad_core",
    "spectral_functions",
    "weak_coupling",
]
