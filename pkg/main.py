#!/usr/bin/env python3
"""
ZX-QoS - Main Entry Point

QoS-constrained temporal precoding with zero-crossing modulation for
1-bit quantized, oversampled MIMO downlinks.

Usage:
    python main.py ser-bound --mrx 3 --gamma 2.65
    python main.py simulate --mrx 3 --n 1 --gamma-grid 1.5:0.5:4.5
    python main.py design --channel "1+0i" --mrx 3 --n 4 --gamma 2.65

Environment Variables (optional, prefix ZXQOS_, nested with __):
    ZXQOS_LOG_LEVEL - Logging level (default INFO)
    ZXQOS_SIMULATION__WORKERS - Worker threads for Monte Carlo batches
    ZXQOS_OUTPUT__ARCHIVE_URL - SQLAlchemy URL of the run archive
"""

import sys
from pathlib import Path

# Add src to Python path for imports
sys.path.insert(0, str(Path(__file__).parent / "src"))

from src.commands.cli import run
from src.config.logging import get_logger

logger = get_logger(__name__)


def cli_main():
    """Command line interface entry point"""
    try:
        sys.exit(run(sys.argv[1:]))

    except KeyboardInterrupt:
        logger.info("Run interrupted by user")
        sys.exit(130)


if __name__ == "__main__":
    cli_main()
