#!/usr/bin/env python3
"""Run the distid command line."""

import sys

from distid.cli import main

if __name__ == '__main__':
    sys.exit(main())
