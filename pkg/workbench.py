"""
Event-sequence pre-training workbench.

Usage:
    python workbench.py gen-data --n 10000 --seed 0
    python workbench.py pipeline --dataset data/pendulum.jsonl --methods all
    python workbench.py report runs/<run-id> --correlate
"""

import sys
from pathlib import Path

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent))

from src.cli import app


if __name__ == "__main__":
    app()
