import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "desk",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("desk")

from ergolab.fixedpoint import FixedReal
from ergolab.poly import RealPolynomial
from ergolab.systems import (
    AutomorphismAction,
    CommutingSystem,
    CyclicFactor,
    Observable,
    RotationAction,
    Sampler,
    ShiftAction,
    TorusFactor,
    Transformation,
)


def poly(*coeffs) -> RealPolynomial:
    return RealPolynomial(tuple(FixedReal.coerce(c) for c in coeffs))


def cyclic_system(q: int, *shifts: int) -> CommutingSystem:
    if not shifts:
        shifts = (1,)
    return CommutingSystem(
        space=(CyclicFactor(q),),
        transformations=tuple(
            Transformation((ShiftAction(q=q, r=r),)) for r in shifts
        ),
    )


def rotation_system(alpha, seed: int = 3, count: int = 512) -> CommutingSystem:
    return CommutingSystem(
        space=(TorusFactor(1),),
        transformations=(
            Transformation((RotationAction((FixedReal.coerce(alpha),)),)),
        ),
        sampler=Sampler(seed=seed, count=count),
    )


def automorphism_system(
    matrices, seed: int = 11, count: int = 512
) -> CommutingSystem:
    dim = len(matrices[0])
    return CommutingSystem(
        space=(TorusFactor(dim),),
        transformations=tuple(
            Transformation(
                (AutomorphismAction(tuple(tuple(r) for r in m)),)
            )
            for m in matrices
        ),
        sampler=Sampler(seed=seed, count=count),
    )


@pytest.fixture
def z12():
    return cyclic_system(12)


@pytest.fixture
def chi1_z12():
    return Observable.character((1,))


@pytest.fixture
def cat_system():
    return automorphism_system([((2, 1), (1, 1))])


SQRT2 = FixedReal.from_decimal("sqrt2")
SQRT3 = FixedReal.from_decimal("sqrt3")
SQRT6 = FixedReal.from_decimal("sqrt6")

_MASK64 = (1 << 64) - 1


def floor_product_sample(window, inner=SQRT2, outer=SQRT3):
    """a(n) = e([inner * n] * outer) as a SequenceSample."""
    from ergolab.correlate import SequenceSample

    raw_i = inner.raw64
    raw_o = outer.raw64 & _MASK64
    start, stop = window
    phases = np.array(
        [
            ((((n * raw_i) >> 64) * raw_o) & _MASK64) / float(1 << 64)
            for n in range(start, stop)
        ]
    )
    return SequenceSample(window=window, values=np.exp(2j * np.pi * phases))
