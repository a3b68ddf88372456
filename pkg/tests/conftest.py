import mpmath
import pytest

mpmath.mp.dps = 60

S17 = mpmath.sqrt(17)
D = (7 + S17) / 2


def mp_beta(n=0):
    return mpmath.sqrt(D - n)


def close(x, ref, tol=1e-40):
    return abs(mpmath.mpf(x.decimal(55)) - ref) < tol


@pytest.fixture(scope="session")
def ahp1():
    from ahplus import ahp1 as mod

    return mod
