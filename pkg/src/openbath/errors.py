#
# This file is part of openbath
#
# Copyright (c) 2024 openbath developers
#    All Rights Reserved
#
# License:  BSD-3-Clause
"""Exceptions raised by openbath, grouped by the exit code of the CLI."""

from __future__ import annotations


class OpenBathError(Exception):
    """Base class of all openbath specific errors."""

    exit_code = 1


class ConfigError(OpenBathError, ValueError):
    """Scenario configuration does not match its schema.

    Parameters
    ----------
    key_path :  dotted path of the offending key, e.g. 'bath.lam'
    message :  what is wrong with it
    """

    exit_code = 2

    def __init__(self: ConfigError, key_path: str, message: str) -> None:
        self.key_path = key_path
        super().__init__(f"{key_path}: {message}" if key_path else message)


class NumericalInvariantError(OpenBathError, ArithmeticError):
    """A numerical result violates an invariant it must satisfy."""

    exit_code = 3


class PositivityError(NumericalInvariantError):
    """Density matrix with an eigenvalue below the positivity tolerance."""


class NonUniqueStationaryStateError(NumericalInvariantError):
    """Generator with more than one stationary state."""
