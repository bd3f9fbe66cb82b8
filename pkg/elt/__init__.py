# -*- coding: utf-8 -*-

"""Top-level package for the event logic tree detector."""

__version__ = '0.1.0'

from . import utils  # noqa: F401
from elt import signal_core  # noqa: F401
