#
# This file is part of openbath
#
# Copyright (c) 2024 openbath developers
#    All Rights Reserved
#
# License:  BSD-3-Clause
"""Configuration, scenario orchestration and the openbath command-line tool."""

__all__ = ["checks", "cli", "compare", "config", "output", "scenarios"]
