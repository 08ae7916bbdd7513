"""sdmnoc: synthesis and evaluation toolchain for SDM circuit-switched NoCs."""

__version__ = "0.1.0"
