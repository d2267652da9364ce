"""Enables running bpctl as a module: python -m bpctl"""

import sys

from .cli import main

if __name__ == "__main__":
    sys.exit(main())
