#
# This file is part of openbath
#
# Copyright (c) 2024 openbath developers
#    All Rights Reserved
#
# License:  BSD-3-Clause
"""Classical particle coupled to damped, noise-driven bath oscillators."""

__all__ = ["archive", "bath"]
