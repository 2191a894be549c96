"""Run the acceptance suite alone; one PASS/FAIL line per criterion is
printed at the end."""
import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent

if __name__ == "__main__":
    sys.exit(pytest.main(["-q", "--rootdir", str(ROOT), str(ROOT / "tests" / "test_acceptance.py"), *sys.argv[1:]]))
