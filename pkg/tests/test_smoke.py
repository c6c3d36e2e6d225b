from fractions import Fraction

import sumbound_core
from sumbound_core.precision import SINGLE


def test_smoke():
    # Minimal sanity check so CI never fails with exit code 5.
    assert sumbound_core.__version__
    assert SINGLE.unit_roundoff == Fraction(1, 2 ** 24)
