import sys
from pathlib import Path

import hypothesis

# helpers.py lives next to the test modules
sys.path.insert(0, str(Path(__file__).parent))

hypothesis.settings.register_profile(
    "suite", deadline=None, max_examples=50, derandomize=True
)
hypothesis.settings.load_profile("suite")
