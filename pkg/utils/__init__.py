"""Utility modules for the arhgls command line and library."""

from .errors import ArhGlsError, ConfigError
from .formatter import Formatter
from .logger import RunLogger

__all__ = ['ArhGlsError', 'ConfigError', 'Formatter', 'RunLogger']
