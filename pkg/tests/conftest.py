import os

import pytest
from hypothesis import settings

from cmucalc.kripke import KripkeModel

settings.register_profile("default", max_examples=60, deadline=None)
settings.register_profile("stress", max_examples=3000, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def m1():
    """Two worlds w0 <= w1, no modal edges, P true at w1 only."""
    return KripkeModel.build(
        ["w0", "w1"],
        [],
        [("w0", "w0"), ("w1", "w1"), ("w0", "w1")],
        [],
        {"P": ["w1"]},
    )
