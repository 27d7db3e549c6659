"""Scalar invariants derived from the Jones polynomial.

Three one-dimensional compressions of a Jones polynomial are computed
here: the knot determinant |J(-1)|, the Mahler measure, and the modulus
of the evaluation at a root of unity e^(2 pi i k/n). Each of them is fed
to :func:`rescale`, which divides the natural log of the value by the log
of the polynomial's degree.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DataError
from .polynomials import LaurentPoly1

__all__ = [
    "eval_poly",
    "determinant",
    "mahler_measure",
    "mahler_jensen_oracle",
    "root_of_unity_modulus",
    "rescale",
    "degree",
    "Determinant",
    "MahlerMeasure",
    "RootOfUnityEval",
    "DerivedInvariantKind",
    "derived_value",
    "rescaled_value",
    "DEFAULT_ZETA",
    "MAHLER_DEFAULT_POINTS",
]

# Root of unity used throughout the experiments unless overridden: k/n close
# to, but not equal to, one half performs best for volume prediction.
DEFAULT_ZETA = (3, 5)

# Midpoint nodes generically avoid unit-circle roots of the polynomial, where
# the log integrand blows up; 4096 nodes put the quadrature error far below
# the 1e-9 doubling tolerance for root-free-circle inputs.
MAHLER_DEFAULT_POINTS = 4096

_LOG_CLAMP = 1e-300


def eval_poly(p: LaurentPoly1, z: complex) -> complex:
    """Evaluate sum of coeffs[i] * z^(min_exp+i) by Horner on the dense run."""
    z = complex(z)
    if z == 0 and p.min_exp < 0:
        raise ValueError("cannot evaluate negative exponents at z = 0")
    acc = 0j
    for c in reversed(p.coeffs):
        acc = acc * z + c
    return acc * z**p.min_exp


def degree(p: LaurentPoly1) -> int:
    """Exponent span max_exp - min_exp of the trimmed polynomial."""
    return len(p.coeffs) - 1


def determinant(p: LaurentPoly1) -> int:
    """|J(-1)|, computed in exact integer arithmetic.

    Knot determinants are odd positive integers; a value of zero means the
    polynomial cannot be a knot Jones polynomial.
    """
    total = 0
    for e, c in p.terms():
        total += c if e % 2 == 0 else -c
    det = abs(total)
    if det == 0:
        raise DataError("|J(-1)| is zero; not a valid knot Jones polynomial")
    return det


def mahler_measure(p: LaurentPoly1, n_points: int = MAHLER_DEFAULT_POINTS) -> float:
    """Geometric mean of |p| over the unit circle.

    exp of the average of ln|p(e^(i theta))| over midpoint nodes
    theta_j = 2 pi (j + 1/2) / n_points. Moduli below 1e-300 (a node
    essentially on a root) are clamped before the log.
    """
    if n_points < 64:
        raise ValueError("n_points must be at least 64")
    theta = 2.0 * np.pi * (np.arange(n_points) + 0.5) / n_points
    z = np.exp(1j * theta)
    # Horner over the dense coefficient run, then shift by z^min_exp, whose
    # modulus is 1 and therefore cannot change |p|.
    values = np.zeros_like(z)
    for c in reversed(p.coeffs):
        values = values * z + c
    moduli = np.maximum(np.abs(values), _LOG_CLAMP)
    return float(np.exp(np.mean(np.log(moduli))))


def mahler_jensen_oracle(roots: list[complex], leading: complex) -> float:
    """Mahler measure from a known factorization: |lead| * prod max(1, |root|).

    Independent of the quadrature path; used to validate it.
    """
    measure = abs(leading)
    for r in roots:
        measure *= max(1.0, abs(r))
    return measure


def root_of_unity_modulus(p: LaurentPoly1, k: int, n: int) -> float:
    """|p(e^(2 pi i k/n))| for 0 < k < n."""
    if not 0 < k < n:
        raise ValueError(f"need 0 < k < n, got k={k}, n={n}")
    return abs(eval_poly(p, cmath.exp(2j * cmath.pi * k / n)))


def rescale(value: float, jones_degree: int) -> float:
    """ln(value) / ln(degree), the logarithmic rescaling of a derived invariant."""
    if not value > 0:
        raise DataError(f"rescale needs a positive value, got {value}")
    if jones_degree < 2:
        raise DataError(
            f"rescale undefined for degree {jones_degree} (log of degree is <= 0)"
        )
    return math.log(value) / math.log(jones_degree)


# ---------------------------------------------------------------------------
# tagged invariant kinds, for config-driven feature computation


@dataclass(frozen=True)
class Determinant:
    pass


@dataclass(frozen=True)
class MahlerMeasure:
    n_points: int = MAHLER_DEFAULT_POINTS


@dataclass(frozen=True)
class RootOfUnityEval:
    k: int
    n: int

    def __post_init__(self) -> None:
        if not 0 < self.k < self.n:
            raise ValueError(f"need 0 < k < n, got k={self.k}, n={self.n}")


DerivedInvariantKind = Union[Determinant, MahlerMeasure, RootOfUnityEval]


def derived_value(p: LaurentPoly1, kind: DerivedInvariantKind) -> float:
    """Raw (unrescaled) value of the requested derived invariant."""
    if isinstance(kind, Determinant):
        return float(determinant(p))
    if isinstance(kind, MahlerMeasure):
        return mahler_measure(p, kind.n_points)
    if isinstance(kind, RootOfUnityEval):
        return root_of_unity_modulus(p, kind.k, kind.n)
    raise TypeError(f"unknown invariant kind: {kind!r}")


def rescaled_value(p: LaurentPoly1, kind: DerivedInvariantKind) -> float:
    """Rescaled derived invariant; raises DataError when undefined."""
    return rescale(derived_value(p, kind), degree(p))
