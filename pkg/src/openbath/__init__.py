#
# This file is part of openbath
#
# This is the main Python package for all openbath software
#
# The package is subdivided into subpackages and modules as follows:
#
#   openbath
#      quantum     # damped-oscillator environments and derived master equations
#      classical   # classical Langevin analogue and trajectory archives
#      harness     # configuration, scenarios and the openbath command-line tool
#
# For details on the modules, see the documentation of the corresponding module.
#
# Copyright (c) 2024 openbath developers
#    All Rights Reserved
#
# License:  BSD-3-Clause
"""Master equations for quantum systems coupled to open environments."""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version(__name__)
except PackageNotFoundError:
    __version__ = "0.0.0"
