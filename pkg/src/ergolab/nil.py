"""Torus and Heisenberg nilsequences, and the basis families the
decomposition experiments project onto.

The Heisenberg group is the 3x3 upper unipotent group in coordinates
(x, y, z) with product (x,y,z).(x',y',z') = (x+x', y+y', z+z'+x.y').  Its
integer points form the lattice; reduction to the fundamental domain [0,1)^3
proceeds coordinate by coordinate (x, then y, then z).  All coordinates are
exact dyadic scalars, so the closed-form power and the reduction are
bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial

import numpy as np

from .fixedpoint import FixedReal, ZERO

_MASK64 = (1 << 64) - 1
_U64 = np.uint64


# ---------------------------------------------------------------------------
# Heisenberg group
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HeisenbergElement:
    x: FixedReal
    y: FixedReal
    z: FixedReal

    @classmethod
    def make(cls, x, y, z) -> "HeisenbergElement":
        return cls(FixedReal.coerce(x), FixedReal.coerce(y), FixedReal.coerce(z))

    @classmethod
    def identity(cls) -> "HeisenbergElement":
        return cls(ZERO, ZERO, ZERO)

    def __mul__(self, other: "HeisenbergElement") -> "HeisenbergElement":
        return HeisenbergElement(
            self.x + other.x,
            self.y + other.y,
            self.z + other.z + self.x * other.y,
        )

    def inverse(self) -> "HeisenbergElement":
        return HeisenbergElement(-self.x, -self.y, -self.z + self.x * self.y)

    def is_lattice(self) -> bool:
        return all(v.shift == 0 for v in (self.x, self.y, self.z))


def heisenberg_pow(g: HeisenbergElement, n: int) -> HeisenbergElement:
    """g**n in closed form: (n x, n y, n z + C(n,2) x y), exact."""
    half_sq = g.x * g.y * (n * (n - 1) // 2)
    return HeisenbergElement(g.x * n, g.y * n, g.z * n + half_sq)


def malcev_reduce(
    g: HeisenbergElement,
) -> tuple[HeisenbergElement, HeisenbergElement]:
    """Split g = gamma . h with gamma in the integer lattice and h with all
    coordinates in [0,1).  Reduction order: x, then y, then z."""
    a = g.x.floor()
    b = g.y.floor()
    hx = g.x.frac()
    hy = g.y.frac()
    # gamma.h has z-coordinate c + hz + a*hy, so peel a*hy off first.
    rest = g.z - hy * a
    c = rest.floor()
    hz = rest.frac()
    gamma = HeisenbergElement(
        FixedReal.from_int(a), FixedReal.from_int(b), FixedReal.from_int(c)
    )
    return gamma, HeisenbergElement(hx, hy, hz)


# ---------------------------------------------------------------------------
# Nilsequences
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Nilsequence:
    """A step-1 (torus) or step-2 (Heisenberg) nilsequence with a
    trigonometric-polynomial observable.

    Torus kind: psi(n) = sum_t c_t e(j_t . (n gamma + beta)) over integer
    frequency vectors j_t.  Heisenberg kind: psi(n) = F(h(n)) where h(n) is
    the reduced part of g**n and F is a trigonometric polynomial in the three
    reduced coordinates.

    ``sup_bound`` certifies |psi(n)| <= sup_bound <= 1.  By default it is
    sum|c_t|; a caller with a sharper analytic bound (e.g. a Fejer mean of a
    function bounded by 1) may declare it, and terms are rescaled only when
    even the declared bound exceeds 1.
    """

    kind: str  # "torus" or "heisenberg"
    terms: tuple[tuple[complex, tuple[int, ...]], ...]
    freqs: tuple[FixedReal, ...] = ()
    offset: tuple[FixedReal, ...] = ()
    element: HeisenbergElement | None = None
    sup_bound: float = 0.0

    def __post_init__(self):
        if self.kind not in ("torus", "heisenberg"):
            raise ValueError(f"unknown nilsequence kind {self.kind!r}")
        if self.kind == "heisenberg" and self.element is None:
            raise ValueError("heisenberg nilsequence needs a group element")
        coeff_sum = sum(abs(c) for c, _ in self.terms)
        bound = self.sup_bound if self.sup_bound > 0 else coeff_sum
        if bound > 1 + 1e-12:
            scale = bound
            object.__setattr__(
                self,
                "terms",
                tuple((c / scale, j) for c, j in self.terms),
            )
            bound = 1.0
        object.__setattr__(self, "sup_bound", float(bound))

    @property
    def step(self) -> int:
        return 1 if self.kind == "torus" else 2

    @classmethod
    def torus_character(
        cls, freqs, jvec, coeff: complex = 1.0, offset=None
    ) -> "Nilsequence":
        freqs = tuple(FixedReal.coerce(f) for f in freqs)
        if offset is None:
            offset = (ZERO,) * len(freqs)
        return cls(
            kind="torus",
            terms=((complex(coeff), tuple(jvec)),),
            freqs=freqs,
            offset=tuple(FixedReal.coerce(o) for o in offset),
        )

    @classmethod
    def constant(cls, value: complex) -> "Nilsequence":
        return cls(kind="torus", terms=((complex(value), ()),), freqs=())


def nilseq_eval(psi: Nilsequence, n: int) -> complex:
    """psi(n), exact phases."""
    if psi.kind == "torus":
        total = 0j
        for c, jvec in psi.terms:
            phase = Fraction(0)
            for j, gamma, beta in zip(jvec, psi.freqs, psi.offset):
                phase += j * (n * gamma.as_fraction() + beta.as_fraction())
            total += c * np.exp(2j * np.pi * float(phase % 1))
        return total
    _, h = malcev_reduce(heisenberg_pow(psi.element, n))
    coords = (h.x, h.y, h.z)
    total = 0j
    for c, jvec in psi.terms:
        phase = Fraction(0)
        for j, v in zip(jvec, coords):
            phase += j * v.as_fraction()
        total += c * np.exp(2j * np.pi * float(phase % 1))
    return total


def nilseq_values(psi: Nilsequence, window: tuple[int, int]) -> np.ndarray:
    """psi on an integer window.  Torus sequences evaluate vectorized on the
    2**-64 wraparound grid; Heisenberg sequences loop over the closed form."""
    start, stop = window
    if psi.kind == "torus":
        n = np.arange(start, stop, dtype=np.int64).astype(_U64)
        out = np.zeros(stop - start, dtype=np.complex128)
        for c, jvec in psi.terms:
            raw_freq = 0
            raw_off = 0
            for j, gamma, beta in zip(jvec, psi.freqs, psi.offset):
                raw_freq = (raw_freq + j * gamma.raw64) & _MASK64
                raw_off = (raw_off + j * beta.raw64) & _MASK64
            phase_raw = n * _U64(raw_freq) + _U64(raw_off)
            out += c * np.exp(
                2j * np.pi * (phase_raw.astype(np.float64) / float(1 << 64))
            )
        return out
    return np.array(
        [nilseq_eval(psi, n) for n in range(start, stop)], dtype=np.complex128
    )


# ---------------------------------------------------------------------------
# Fejer approximants
# ---------------------------------------------------------------------------


def fejer_approximant(
    freq,
    order: int,
    fourier_coeff,
    declared_sup: float = 1.0,
    offset=None,
) -> Nilsequence:
    """Fejer mean of order ``order`` of a 1-periodic function with Fourier
    coefficients ``fourier_coeff(j)``, sampled along n*freq.

    The Fejer mean of a function bounded by 1 is bounded by 1, which is the
    declared sup bound; the plain coefficient sum would overstate it.
    """
    terms = []
    for j in range(-order, order + 1):
        c = complex(fourier_coeff(j)) * (1 - abs(j) / (order + 1))
        if c != 0:
            terms.append((c, (j,)))
    freqs = (FixedReal.coerce(freq),)
    if offset is None:
        offset = (ZERO,)
    return Nilsequence(
        kind="torus",
        terms=tuple(terms),
        freqs=freqs,
        offset=tuple(FixedReal.coerce(o) for o in offset),
        sup_bound=declared_sup,
    )


def indicator_fourier_coeff(delta: Fraction):
    """Fourier coefficients of the indicator of [1-delta, 1) on the torus."""
    d = float(delta)

    def coeff(j: int) -> complex:
        if j == 0:
            return complex(d)
        # int_{1-d}^{1} e(-jx) dx
        w = -2j * np.pi * j
        return (np.exp(w * 1.0) - np.exp(w * (1.0 - d))) / w

    return coeff


# ---------------------------------------------------------------------------
# Basis families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NilBasis:
    """Ordered family of bounded sequence generators for projections.

    ``members`` are evaluable nilsequences; the ``exponents`` field records
    the iterate-exponent tuples for the kinds that describe higher-step
    correlation bases rather than directly evaluable sequences.

    ``damping`` (one weight in [0,1] per member, empty for none) asks the
    decomposition to taper the projection coefficients.  A basis built with
    Fejer weights along its principal frequency axis keeps the structured
    part of a sequence that factors through that axis bounded by 1, where the
    raw orthogonal projection would overshoot at discontinuities."""

    kind: str
    members: tuple[Nilsequence, ...]
    exponents: tuple[int, ...] = ()
    iterate_exponents: tuple[int, ...] = ()
    damping: tuple[float, ...] = ()

    def __post_init__(self):
        for m in self.members:
            if m.sup_bound > 1 + 1e-12:
                raise ValueError("basis members must be bounded by 1")

    def __len__(self) -> int:
        return len(self.members)

    def values_matrix(self, window: tuple[int, int]) -> np.ndarray:
        """Member values stacked as rows, shape (len, window length)."""
        return np.stack([nilseq_values(m, window) for m in self.members])


MAX_BASIS_SIZE = 2048


def make_basis(
    kind: str,
    k: int = 1,
    frequencies=(),
    size: int = 1,
    cross_depth: int = 1,
    smoothed_delta=None,
    taper: bool = False,
) -> NilBasis:
    """Construct a basis family.

    kind "torus": characters e(n (j1 g1 + ... + jr gr)) with |j1| <= size and
    |jt| <= cross_depth for t >= 2, optionally followed by Fejer-smoothed
    indicator approximants of {n g1} at the same order (pass
    ``smoothed_delta`` to include them; they lie in the character span, so
    the projection Gram matrix becomes rank-deficient but the solver
    tolerates that).  With ``taper=True`` the basis carries Fejer damping
    weights 1 - |j1|/(size+1) along the principal frequency: the tapered
    structured part is then a Fejer mean in that coordinate, which stays
    bounded by 1 for inputs that factor through it, where the raw orthogonal
    projection overshoots at discontinuities and would have to be rescaled
    at the cost of its residual.

    kind "factorial": iterate exponent tuple (k!/i) for i = 1..k.
    kind "factorial-shifted": tuple ((k+1)!/i) for i = 1..k+1 together with
    the differences to the last entry, which are the iterate exponents of the
    associated correlation sequences.
    """
    if kind == "torus":
        freqs = tuple(FixedReal.coerce(f) for f in frequencies)
        if not freqs:
            raise ValueError("torus basis needs at least one frequency")
        ranges = [range(-size, size + 1)]
        for _ in freqs[1:]:
            ranges.append(range(-cross_depth, cross_depth + 1))
        members = []
        weights = []
        import itertools

        for jvec in itertools.product(*ranges):
            members.append(Nilsequence.torus_character(freqs, jvec))
            weights.append(1.0 - abs(jvec[0]) / (size + 1))
        if smoothed_delta is not None:
            members.append(
                fejer_approximant(
                    freqs[0],
                    size,
                    indicator_fourier_coeff(Fraction(smoothed_delta)),
                )
            )
            weights.append(1.0)
        if len(members) > MAX_BASIS_SIZE:
            raise ValueError(
                f"basis size {len(members)} exceeds the cap {MAX_BASIS_SIZE}"
            )
        return NilBasis(
            kind=kind,
            members=tuple(members),
            damping=tuple(weights) if taper else (),
        )
    if kind == "factorial":
        if k < 1:
            raise ValueError("factorial basis needs k >= 1")
        exps = tuple(factorial(k) // i for i in range(1, k + 1))
        return NilBasis(kind=kind, members=(), exponents=exps)
    if kind == "factorial-shifted":
        if k < 1:
            raise ValueError("factorial-shifted basis needs k >= 1")
        exps = tuple(factorial(k + 1) // i for i in range(1, k + 2))
        iters = tuple(e - exps[-1] for e in exps[:-1])
        return NilBasis(
            kind=kind, members=(), exponents=exps, iterate_exponents=iters
        )
    raise ValueError(f"unknown basis kind {kind!r}")
