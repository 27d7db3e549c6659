"""Laurent polynomial carriers for Jones and Khovanov data.

Both types are immutable value objects. ``LaurentPoly1`` keeps a dense
coefficient run starting at ``min_exp``; ``LaurentPoly2`` keeps a sparse
set of (i, j, coefficient) terms. Coefficients are exact integers; nothing
here touches floating point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

__all__ = ["LaurentPoly1", "LaurentPoly2"]


@dataclass(frozen=True)
class LaurentPoly1:
    """One-variable integer Laurent polynomial in canonical trimmed form.

    ``coeffs[i]`` is the coefficient of ``t**(min_exp + i)``. Canonical
    trimmed form means the first and last stored coefficients are non-zero
    (interior zeros are fine). Use :meth:`make` to build from untrimmed
    input.
    """

    min_exp: int
    coeffs: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.coeffs:
            raise ValueError("LaurentPoly1 needs at least one coefficient")
        if self.coeffs[0] == 0 or self.coeffs[-1] == 0:
            raise ValueError(
                "LaurentPoly1 must be trimmed: leading/trailing coefficient is zero"
            )
        if not all(isinstance(c, int) for c in self.coeffs):
            raise ValueError("LaurentPoly1 coefficients must be integers")

    @classmethod
    def make(cls, min_exp: int, coeffs: list[int] | tuple[int, ...]) -> "LaurentPoly1":
        """Build a polynomial, trimming zero ends and shifting min_exp to match."""
        coeffs = list(coeffs)
        lo = 0
        while lo < len(coeffs) and coeffs[lo] == 0:
            lo += 1
        if lo == len(coeffs):
            raise ValueError("zero polynomial has no canonical form")
        hi = len(coeffs)
        while coeffs[hi - 1] == 0:
            hi -= 1
        return cls(min_exp + lo, tuple(int(c) for c in coeffs[lo:hi]))

    @property
    def max_exp(self) -> int:
        return self.min_exp + len(self.coeffs) - 1

    def terms(self) -> list[tuple[int, int]]:
        """All (exponent, coefficient) pairs, zeros included, in exponent order."""
        return [(self.min_exp + i, c) for i, c in enumerate(self.coeffs)]

    def coefficient(self, exponent: int) -> int:
        i = exponent - self.min_exp
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return 0


@dataclass(frozen=True)
class LaurentPoly2:
    """Sparse two-variable integer Laurent polynomial.

    ``terms`` holds (i, j, c) triples with c != 0 and pairwise distinct
    (i, j), stored sorted so equal polynomials compare equal. Zero
    coefficients passed to :meth:`make` are dropped; duplicate (i, j)
    pairs are an error.
    """

    terms: tuple[tuple[int, int, int], ...] = field(default=())

    def __post_init__(self) -> None:
        seen = set()
        for i, j, c in self.terms:
            if c == 0:
                raise ValueError(f"zero coefficient stored at ({i}, {j})")
            if (i, j) in seen:
                raise ValueError(f"duplicate exponent pair ({i}, {j})")
            seen.add((i, j))
        if list(self.terms) != sorted(self.terms):
            raise ValueError("terms must be sorted; use LaurentPoly2.make")

    @classmethod
    def make(cls, triples) -> "LaurentPoly2":
        kept = []
        seen = set()
        for i, j, c in triples:
            i, j, c = int(i), int(j), int(c)
            if c == 0:
                continue
            if (i, j) in seen:
                raise ValueError(f"duplicate exponent pair ({i}, {j})")
            seen.add((i, j))
            kept.append((i, j, c))
        return cls(tuple(sorted(kept)))

    def as_dict(self) -> dict[tuple[int, int], int]:
        return {(i, j): c for i, j, c in self.terms}

    def __len__(self) -> int:
        return len(self.terms)
