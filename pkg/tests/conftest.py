import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from helpers import universal_theory


@pytest.fixture(scope="session")
def utheory():
    return universal_theory()
