"""
Top-level configuration for pytest.
"""
import sys
from pathlib import Path

# The package lives under python/ and is importable without installing it
sys.path.insert(0, str(Path(__file__).parent / "python"))

# Enable asyncio tests
pytest_plugins = ["pytest_asyncio"]
