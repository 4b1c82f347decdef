from fractions import Fraction

import pytest

from digitfrac.systems import DigitSystem, builtin_system, product_system

CANTOR = builtin_system("cantor")


def five_systems():
    """Mixed bag: 1-D uniform, 1-D weighted, b=5, split product, non-split 2-D."""
    weighted = DigitSystem(3, 1, [(0,), (2,)], [Fraction(1, 3), Fraction(2, 3)])
    b5 = DigitSystem.uniform(5, [0, 1, 2, 3])
    cc = product_system([CANTOR, CANTOR])
    skew = DigitSystem(3, 2, [(0, 0), (1, 1), (2, 0), (0, 2)],
                       [Fraction(1, 4), Fraction(1, 4), Fraction(1, 3), Fraction(1, 6)])
    return [CANTOR, weighted, b5, cc, skew]


SYSTEM_IDS = ["cantor", "weighted", "b5", "cantor2", "skew2"]


@pytest.fixture(params=list(zip(SYSTEM_IDS, five_systems())), ids=SYSTEM_IDS)
def any_system(request):
    return request.param[1]
