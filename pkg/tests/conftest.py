import math

import pytest

from knotstat.data import fixture_path
from knotstat.dataset import Dataset, HyperbolicInvariants, KnotRecord, parse_dataset
from knotstat.polynomials import LaurentPoly1, LaurentPoly2


@pytest.fixture
def fig8():
    """Figure-eight Jones polynomial t^-2 - t^-1 + 1 - t + t^2."""
    return LaurentPoly1(-2, (1, -1, 1, -1, 1))


@pytest.fixture(scope="session")
def micro_ds():
    return parse_dataset(fixture_path())


def make_record(
    name,
    jones,
    vol=None,
    alternating=True,
    crossings=5,
    khovanov=None,
    **hyperbolic,
):
    """Shorthand for synthetic KnotRecords in tests."""
    if isinstance(jones, tuple):
        jones = LaurentPoly1(jones[0], tuple(jones[1]))
    if isinstance(khovanov, (list, set)):
        khovanov = LaurentPoly2.make(khovanov)
    return KnotRecord(
        name=name,
        crossing_number=crossings,
        alternating=alternating,
        jones=jones,
        khovanov=khovanov,
        hyperbolic=HyperbolicInvariants(vol=vol, **hyperbolic),
    )


def single_term_dataset(coefficients, target_fn, **kwargs):
    """Records whose Jones polynomial is a single term c*t^0.

    |J| equals |c| at every point of the unit circle, which makes these
    handy for planting exact relationships between |J(zeta)| and a target.
    """
    records = []
    for c in coefficients:
        records.append(
            make_record(f"s{c}", (0, [c]), vol=target_fn(c), **kwargs)
        )
    return Dataset(tuple(records))


@pytest.fixture
def planted_formula_ds():
    """Targets generated exactly from 6.2*ln(|J| + 6.77) - 0.94."""
    return single_term_dataset(
        range(1, 51), lambda c: 6.2 * math.log(c + 6.77) - 0.94
    )
