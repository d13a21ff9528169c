#!/usr/bin/env python3
"""
Entry point for running the command line as `python -m drivenkerr.cli`.
"""

import sys
from drivenkerr.cli.main import main

if __name__ == "__main__":
    sys.exit(main())
