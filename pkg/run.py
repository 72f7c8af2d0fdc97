"""
Toolkit Runner Script
Simple script to run the jlie command-line interface
"""

import os
import sys

from dotenv import load_dotenv

# Load environment variables
load_dotenv()

from jlie import __version__
from jlie.cli import main

if __name__ == "__main__":
    # Banner goes to stderr; stdout carries the JSON report
    if os.getenv("JLIE_BANNER", "False").lower() == "true":
        print("=" * 60, file=sys.stderr)
        print(f"🚀 Starting Jacobi-Lie Systems Toolkit {__version__}", file=sys.stderr)
        print("=" * 60, file=sys.stderr)
        print(f"🎲 Seed: {os.getenv('JLIE_SEED', '0')}", file=sys.stderr)
        print(f"📝 Log level: {os.getenv('JLIE_LOG_LEVEL', 'WARNING')}", file=sys.stderr)
        print("=" * 60, file=sys.stderr)

    sys.exit(main())
