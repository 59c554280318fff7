#!/usr/bin/env python3
"""
IO*Star - interpreter and checker for I/O*-state machine specifications

Entry point for the iostar command-line tool.
"""

import sys
import os

# Add src to Python path to allow imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), 'src'))

from src.cli.app import run_app

if __name__ == "__main__":
    try:
        sys.exit(run_app())
    except KeyboardInterrupt:
        print("\nInterrupted.", file=sys.stderr)
        sys.exit(130)
    except Exception as e:
        print(f"An error occurred: {e}", file=sys.stderr)
        import traceback
        traceback.print_exc()
        sys.exit(2)
