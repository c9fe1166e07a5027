"""
Entry point for running the application as a module.

Usage:
    python -m app <command> ...
"""

import sys

from app.cli import main

if __name__ == "__main__":
    sys.exit(main())
