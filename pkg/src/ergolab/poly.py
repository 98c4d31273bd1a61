"""Real and generalized polynomials with exact floor/fractional-part
evaluation, plus the fractional-part density diagnostic used by the
transference experiments.

Coefficients are :class:`~ergolab.fixedpoint.FixedReal`, so ``p(n)`` is an
exact dyadic rational for every integer ``n`` and both ``[p(n)]`` and
``{p(n)}`` are computed without rounding.  Density counting over long windows
runs on the 2**-64 wraparound grid with numpy uint64 arithmetic, which is the
same arithmetic the scalar path performs, just vectorized.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Sequence

import numpy as np

from .fixedpoint import FRAC_BITS, FixedReal, HeadroomError, ZERO

DEFAULT_MAX_DEGREE = 8

#: Largest |n| accepted by the exact evaluators.  Keeps the accumulator far
#: below the fixed-point headroom for degree <= 8.
DEFAULT_MAX_ARG = 1 << 30

_U64 = np.uint64
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RealPolynomial:
    """Polynomial sum(c[i] * t**i) with dyadic fixed-point coefficients."""

    coefficients: tuple[FixedReal, ...]

    def __post_init__(self):
        if not self.coefficients:
            object.__setattr__(self, "coefficients", (ZERO,))
        if len(self.coefficients) - 1 > DEFAULT_MAX_DEGREE:
            raise ValueError(
                f"degree {len(self.coefficients) - 1} exceeds the configured "
                f"maximum {DEFAULT_MAX_DEGREE}"
            )

    @classmethod
    def from_coeffs(cls, coeffs: Sequence) -> "RealPolynomial":
        return cls(tuple(FixedReal.coerce(c) for c in coeffs))

    @property
    def degree(self) -> int:
        """Degree, with the zero polynomial reported as degree 0."""
        for i in range(len(self.coefficients) - 1, -1, -1):
            if self.coefficients[i].numer != 0:
                return i
        return 0

    def is_zero(self) -> bool:
        return all(c.numer == 0 for c in self.coefficients)

    def eval_exact(self, n: int) -> FixedReal:
        if abs(n) > DEFAULT_MAX_ARG:
            raise HeadroomError(
                f"|n|={abs(n)} exceeds the configured evaluation bound "
                f"{DEFAULT_MAX_ARG}"
            )
        acc = ZERO
        for c in reversed(self.coefficients):
            acc = acc * n + c
        return acc

    def shifted(self, h: int) -> "RealPolynomial":
        """The polynomial t -> p(t + h), exact for integer h."""
        out = [ZERO] * len(self.coefficients)
        for i, c in enumerate(self.coefficients):
            if c.numer == 0:
                continue
            powers = [FixedReal.from_int(1)]
            for _ in range(i):
                powers.append(powers[-1] * h)
            binom = 1
            for k in range(i + 1):
                out[k] = out[k] + c * binom * powers[i - k]
                binom = binom * (i - k) // (k + 1)
        return RealPolynomial(tuple(out))

    def nonconstant_coeffs_exact(self) -> bool:
        return all(c.exact for c in self.coefficients[1:])

    def frac_raw(self, n_values: np.ndarray) -> np.ndarray:
        """Fractional parts ``{p(n)}`` as raw uint64 numerators over 2**64.

        Exact: Horner evaluation mod 2**64 with wraparound uint64 arithmetic
        coincides with the fractional part of the exact dyadic value.
        """
        n_mod = np.asarray(n_values, dtype=np.int64).astype(_U64)
        acc = np.zeros_like(n_mod)
        for c in reversed(self.coefficients):
            raw = c.raw64 & _MASK64
            acc = acc * n_mod + _U64(raw)
        return acc


def eval_floor(p: RealPolynomial, n: int) -> int:
    """Integer part ``[p(n)]``, exact for the quantized coefficients."""
    return p.eval_exact(n).floor()


def eval_frac(p: RealPolynomial, n: int) -> FixedReal:
    """Fractional part ``{p(n)}`` in [0, 1)."""
    return p.eval_exact(n).frac()


# ---------------------------------------------------------------------------
# Generalized polynomials
# ---------------------------------------------------------------------------


class GeneralizedPolynomial:
    """Integer-valued expression built from integer polynomials with sums,
    products and floors of real-weighted combinations."""

    def eval(self, n: int) -> int:
        raise NotImplementedError


@dataclass(frozen=True)
class GPLeaf(GeneralizedPolynomial):
    coefficients: tuple[int, ...]

    def eval(self, n: int) -> int:
        acc = 0
        for c in reversed(self.coefficients):
            acc = acc * n + c
        return acc


@dataclass(frozen=True)
class GPSum(GeneralizedPolynomial):
    children: tuple[GeneralizedPolynomial, ...]

    def eval(self, n: int) -> int:
        return sum(c.eval(n) for c in self.children)


@dataclass(frozen=True)
class GPProduct(GeneralizedPolynomial):
    children: tuple[GeneralizedPolynomial, ...]

    def eval(self, n: int) -> int:
        out = 1
        for c in self.children:
            out *= c.eval(n)
        return out


@dataclass(frozen=True)
class GPFloor(GeneralizedPolynomial):
    """Floor of a real-weighted combination of integer-valued children."""

    weights: tuple[FixedReal, ...]
    children: tuple[GeneralizedPolynomial, ...]

    def __post_init__(self):
        if len(self.weights) != len(self.children):
            raise ValueError("one weight per child required")

    def eval(self, n: int) -> int:
        acc = ZERO
        for w, c in zip(self.weights, self.children):
            acc = acc + w * c.eval(n)
        return acc.floor()


def gp_eval(g: GeneralizedPolynomial, n: int) -> int:
    if n < 1:
        raise ValueError("generalized polynomials are evaluated on n >= 1")
    return g.eval(n)


# ---------------------------------------------------------------------------
# Fractional-part density
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FracDensityReport:
    """Density of ``{p(n)}`` falling in [1-delta, 1) over an integer window."""

    delta: FixedReal
    window: tuple[int, int]
    density: Fraction
    periodic_flag: bool
    count: int

    def __post_init__(self):
        assert 0 <= self.density <= 1


def _rational_period(p: RealPolynomial) -> int | None:
    """Common period of ``{p(n)}`` when every nonconstant coefficient was an
    exactly-representable rational; None for quantized irrationals."""
    if not p.nonconstant_coeffs_exact():
        return None
    period = 1
    for c in p.coefficients[1:]:
        if c.numer != 0:
            period = lcm(period, c.as_fraction().denominator)
    return period


def frac_density(
    p: RealPolynomial, delta, window: tuple[int, int]
) -> FracDensityReport:
    """Count the proportion of n in [M, N) with ``{p(n)}`` in [1-delta, 1).

    Direct counting, no sampling.  When all nonconstant coefficients are
    declared rationals the sequence ``{p(n)}`` is periodic; if the window
    covers at least one full period the density is computed exactly over one
    period and ``periodic_flag`` is set.
    """
    delta = FixedReal.coerce(delta)
    if not (ZERO < delta < FixedReal.from_int(1)):
        raise ValueError("delta must lie in (0, 1)")
    start, stop = window
    if stop - start < 1:
        raise ValueError("window must contain at least one integer")

    period = _rational_period(p)
    periodic = period is not None and stop - start >= period
    if periodic:
        n_values = np.arange(start, start + period, dtype=np.int64)
        total = period
    else:
        n_values = np.arange(start, stop, dtype=np.int64)
        total = stop - start

    threshold = (FixedReal.from_int(1) - delta).raw64
    raws = p.frac_raw(n_values)
    count = int(np.count_nonzero(raws >= _U64(threshold)))
    return FracDensityReport(
        delta=delta,
        window=(start, stop),
        density=Fraction(count, total),
        periodic_flag=bool(periodic),
        count=count,
    )


def sup_frac_density(
    p: RealPolynomial, delta, length: int, shifts: Sequence[int] = (0,)
) -> Fraction:
    """Max of window densities over shifted windows of a fixed length.

    The limiting notion is upper Banach density; no finite procedure
    realizes it, so this sup-over-shifted-windows convention is the recorded
    estimator.
    """
    best = Fraction(0)
    for s in shifts:
        rep = frac_density(p, delta, (1 + s, 1 + s + length))
        best = max(best, rep.density)
    return best
