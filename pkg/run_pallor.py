#!/usr/bin/env python3
"""
Launcher for the pallor command line, e.g.

    python run_pallor.py process --manifest manifest.csv --out results --overlays
"""
import sys

from src.cli.main import main

if __name__ == "__main__":
    sys.exit(main())
