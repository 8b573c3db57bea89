"""
Quantum reservoir computing entrypoint.

Loads environment variables from .env (QRC_OUTPUT_DIR, QRC_CACHE_DIR,
QRC_LOG_LEVEL) and dispatches to the harness command line.
"""

import sys

from dotenv import load_dotenv

# Load environment variables
load_dotenv()

from harness.cli import main  # noqa: E402


if __name__ == "__main__":
    sys.exit(main())
