#!/usr/bin/env python3
"""
Initialize module information and housekeeping.
"""
from . import vcheck

__author__ = 'CHIMA developers'
__copyright__ = 'Copyright (c) 2026 CHIMA developers'
__version__ = '0.1.0'


# Quit if Python interpreter version is earlier than required.
vcheck.minversion('3.8')
