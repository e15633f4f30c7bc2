"""Entry point for running the laboratory from a checkout.

Usage:
    python scripts/restricted_mc_lab.py verify --suite all
    python scripts/restricted_mc_lab.py derandomize --strategy bit_then_query --out tree.json
    python scripts/restricted_mc_lab.py rates --n 8:257:2x --bits log --seeds 0:100
    python scripts/restricted_mc_lab.py bounds --bound kappa --n 16

For an installed package, use the ``restricted-mc-lab`` command instead.
"""

import sys
from pathlib import Path

# Add src to path so we can import the package
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from restricted_mc.cli import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
