#!/usr/bin/env python3
"""
Entry point for running drivenkerr as `python -m drivenkerr`.
"""

import sys
from drivenkerr.cli.main import main

if __name__ == "__main__":
    sys.exit(main())
