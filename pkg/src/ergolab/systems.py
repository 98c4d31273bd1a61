"""Explicit commuting measure-preserving systems on finite cyclic groups,
tori and their products.

Torus coordinates live on the 2**-64 grid and are stored as raw uint64
numerators, so "rotate by alpha" is integer addition mod 2**64 and a toral
automorphism acts through its matrix reduced mod 2**64 -- both bit-exact.
Finite cyclic factors are plain residues.  These two families cover every
hypothesis class the desk experiments need: rotations are ergodic but not
mixing, hyperbolic unimodular automorphisms are weakly mixing, and finite
cyclic shifts double as brute-force oracles on which every limit formula is
evaluated exactly.
"""

from __future__ import annotations

import cmath
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
import sympy

from .fixedpoint import FixedReal, HeadroomError

_MASK64 = (1 << 64) - 1
_U64 = np.uint64

#: Advised bound on |m| for exact (full-integer) matrix powers; the mod-2**64
#: application path has no such limit.
EXACT_POWER_BOUND = 1 << 20


class BudgetError(RuntimeError):
    """A computation would exceed its configured complexity budget."""


# ---------------------------------------------------------------------------
# State spaces and points
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CyclicFactor:
    q: int

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("cyclic factor needs q >= 1")


@dataclass(frozen=True)
class TorusFactor:
    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("torus factor needs dim >= 1")


Factor = CyclicFactor | TorusFactor


@dataclass(frozen=True)
class StatePoint:
    """Per-factor values: an int residue for a cyclic factor, a tuple of raw
    uint64 torus coordinates (numerators over 2**64) for a torus factor."""

    values: tuple


def space_is_finite(space: Sequence[Factor]) -> bool:
    return all(isinstance(f, CyclicFactor) for f in space)


def space_size(space: Sequence[Factor]) -> int:
    size = 1
    for f in space:
        if not isinstance(f, CyclicFactor):
            raise ValueError("only finite spaces have a size")
        size *= f.q
    return size


def enumerate_points(space: Sequence[Factor]) -> list[StatePoint]:
    ranges = []
    for f in space:
        if not isinstance(f, CyclicFactor):
            raise ValueError("cannot enumerate a torus factor")
        ranges.append(range(f.q))
    return [StatePoint(tuple(v)) for v in itertools.product(*ranges)]


# ---------------------------------------------------------------------------
# Per-factor actions
# ---------------------------------------------------------------------------


class Action:
    """Invertible measure-preserving action on a single factor."""

    def power(self, m: int, value):
        raise NotImplementedError

    def power_array(self, m: int, arr: np.ndarray) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class IdentityAction(Action):
    def power(self, m: int, value):
        return value

    def power_array(self, m: int, arr):
        return arr


@dataclass(frozen=True)
class ShiftAction(Action):
    """x -> x + r on Z_q."""

    q: int
    r: int

    def power(self, m: int, value: int) -> int:
        return (value + m * self.r) % self.q

    def power_array(self, m: int, arr: np.ndarray) -> np.ndarray:
        return (arr + m * self.r) % self.q


@dataclass(frozen=True)
class RotationAction(Action):
    """x -> x + alpha on T^d, coordinates on the 2**-64 grid."""

    alpha: tuple[FixedReal, ...]

    @property
    def raw(self) -> tuple[int, ...]:
        return tuple(a.raw64 & _MASK64 for a in self.alpha)

    def power(self, m: int, value: tuple[int, ...]) -> tuple[int, ...]:
        return tuple((v + m * r) & _MASK64 for v, r in zip(value, self.raw))

    def power_array(self, m: int, arr: np.ndarray) -> np.ndarray:
        step = np.array(
            [(m * r) & _MASK64 for r in self.raw], dtype=_U64
        )
        return arr + step  # uint64 wraparound == mod 1


def _mat_mul(a, b, mod=None):
    d = len(a)
    out = [[sum(a[i][k] * b[k][j] for k in range(d)) for j in range(d)] for i in range(d)]
    if mod is not None:
        out = [[x % mod for x in row] for row in out]
    return out


def _mat_pow(a, m: int, mod=None):
    d = len(a)
    result = [[1 if i == j else 0 for j in range(d)] for i in range(d)]
    base = [row[:] for row in a]
    while m:
        if m & 1:
            result = _mat_mul(result, base, mod)
        base = _mat_mul(base, base, mod)
        m >>= 1
    return result


@dataclass(frozen=True)
class AutomorphismAction(Action):
    """x -> A x on T^d for a unimodular integer matrix A."""

    matrix: tuple[tuple[int, ...], ...]
    _inverse: tuple[tuple[int, ...], ...] = field(init=False, compare=False)

    def __post_init__(self):
        m = sympy.Matrix([list(r) for r in self.matrix])
        det = int(m.det())
        if det not in (1, -1):
            raise ValueError(f"automorphism matrix must have det +-1, got {det}")
        inv = m.inv()
        object.__setattr__(
            self,
            "_inverse",
            tuple(tuple(int(x) for x in inv.row(i)) for i in range(m.rows)),
        )

    @property
    def dim(self) -> int:
        return len(self.matrix)

    def matrix_power_mod64(self, m: int) -> list[list[int]]:
        base = self.matrix if m >= 0 else self._inverse
        return _mat_pow([list(r) for r in base], abs(m), mod=1 << 64)

    def matrix_power_exact(self, m: int) -> list[list[int]]:
        if abs(m) > EXACT_POWER_BOUND:
            raise HeadroomError(
                f"exact matrix power |m|={abs(m)} exceeds the advised bound "
                f"{EXACT_POWER_BOUND}; use the mod-2**64 application path"
            )
        base = self.matrix if m >= 0 else self._inverse
        return _mat_pow([list(r) for r in base], abs(m))

    def power(self, m: int, value: tuple[int, ...]) -> tuple[int, ...]:
        a = self.matrix_power_mod64(m)
        d = self.dim
        return tuple(
            sum(a[i][j] * value[j] for j in range(d)) & _MASK64 for i in range(d)
        )

    def power_array(self, m: int, arr: np.ndarray) -> np.ndarray:
        # arr has shape (n_samples, d); all arithmetic wraps mod 2**64.
        a = self.matrix_power_mod64(m)
        d = self.dim
        cols = []
        for i in range(d):
            acc = np.zeros(arr.shape[0], dtype=_U64)
            for j in range(d):
                acc = acc + _U64(a[i][j] & _MASK64) * arr[:, j]
            cols.append(acc)
        return np.stack(cols, axis=1)


@dataclass(frozen=True)
class Transformation:
    """One action per factor of the shared state space."""

    actions: tuple[Action, ...]

    def power_point(self, m: int, point: StatePoint) -> StatePoint:
        return StatePoint(
            tuple(a.power(m, v) for a, v in zip(self.actions, point.values))
        )

    def power_arrays(self, m: int, arrays: list[np.ndarray]) -> list[np.ndarray]:
        return [a.power_array(m, arr) for a, arr in zip(self.actions, arrays)]


def power_apply(T: Transformation, m: int, x: StatePoint) -> StatePoint:
    """T**m applied to x: O(1) for shifts/rotations, O(log|m|) for
    automorphisms (matrix power by squaring, reduced mod 2**64)."""
    return T.power_point(m, x)


# ---------------------------------------------------------------------------
# Samplers and systems
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Sampler:
    """Seeded pseudorandom grid on the state space; seed goes into reports."""

    seed: int
    count: int = 512


@dataclass(frozen=True)
class CommutingSystem:
    space: tuple[Factor, ...]
    transformations: tuple[Transformation, ...]
    sampler: Sampler = Sampler(seed=0, count=512)
    check_points: int = 32

    def __post_init__(self):
        for T in self.transformations:
            if len(T.actions) != len(self.space):
                raise ValueError("transformation does not match the space shape")
        self._verify_commutation()

    @property
    def is_finite(self) -> bool:
        return space_is_finite(self.space)

    def _verify_commutation(self):
        pts = self.sample_points()[: self.check_points]
        for i, Ti in enumerate(self.transformations):
            for Tj in self.transformations[i + 1 :]:
                for x in pts:
                    ab = Ti.power_point(1, Tj.power_point(1, x))
                    ba = Tj.power_point(1, Ti.power_point(1, x))
                    if ab != ba:
                        raise ValueError(
                            "transformations do not commute on sampled points"
                        )

    def sample_points(self) -> list[StatePoint]:
        if self.is_finite:
            return enumerate_points(self.space)
        arrays = self.sample_arrays()
        n = arrays[0].shape[0] if arrays[0].ndim else len(arrays[0])
        points = []
        count = self.sampler.count
        for idx in range(count):
            vals = []
            for f, arr in zip(self.space, arrays):
                if isinstance(f, CyclicFactor):
                    vals.append(int(arr[idx]))
                else:
                    vals.append(tuple(int(v) for v in arr[idx]))
            points.append(StatePoint(tuple(vals)))
        return points

    def sample_arrays(self) -> list[np.ndarray]:
        """Per-factor sample arrays: int64 residues for cyclic factors,
        (count, dim) uint64 raw coordinates for torus factors.

        Finite spaces are fully enumerated instead of sampled."""
        if self.is_finite:
            pts = enumerate_points(self.space)
            out = []
            for k, f in enumerate(self.space):
                out.append(np.array([p.values[k] for p in pts], dtype=np.int64))
            return out
        rng = np.random.default_rng(self.sampler.seed)
        out = []
        for f in self.space:
            if isinstance(f, CyclicFactor):
                out.append(
                    rng.integers(0, f.q, size=self.sampler.count, dtype=np.int64)
                )
            else:
                out.append(
                    rng.integers(
                        0,
                        1 << 64,
                        size=(self.sampler.count, f.dim),
                        dtype=np.uint64,
                    )
                )
        return out


# ---------------------------------------------------------------------------
# Observables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Character:
    """Per-factor frequency data: an integer residue-character index for a
    cyclic factor, an integer frequency vector for a torus factor."""

    freqs: tuple

    def is_trivial(self, space: Sequence[Factor]) -> bool:
        for f, k in zip(space, self.freqs):
            if isinstance(f, CyclicFactor):
                if k % f.q != 0:
                    return False
            else:
                if any(ki != 0 for ki in k):
                    return False
        return True

    def eval_point(self, space, point: StatePoint) -> complex:
        phase = Fraction(0)
        for f, k, v in zip(space, self.freqs, point.values):
            if isinstance(f, CyclicFactor):
                phase += Fraction(k * v, f.q)
            else:
                raw = sum(ki * vi for ki, vi in zip(k, v)) & _MASK64
                phase += Fraction(raw, 1 << 64)
        return cmath.exp(2j * cmath.pi * float(phase % 1))

    def eval_arrays(self, space, arrays: list[np.ndarray]) -> np.ndarray:
        n = arrays[0].shape[0]
        phase = np.zeros(n, dtype=np.float64)
        for f, k, arr in zip(space, self.freqs, arrays):
            if isinstance(f, CyclicFactor):
                phase += (np.asarray(arr, dtype=np.float64) * k) / f.q
            else:
                acc = np.zeros(n, dtype=_U64)
                for j, kj in enumerate(k):
                    acc = acc + _U64(kj & _MASK64) * arr[:, j]
                phase += acc.astype(np.float64) / float(1 << 64)
        return np.exp(2j * np.pi * phase)


@dataclass(frozen=True)
class Observable:
    """Finite linear combination of characters, normalized so the declared
    sup-norm bound sum|c| never exceeds 1."""

    terms: tuple[tuple[complex, Character], ...]
    sup_bound: float = field(init=False, compare=False, default=0.0)

    def __post_init__(self):
        bound = sum(abs(c) for c, _ in self.terms)
        if bound > 1 + 1e-12:
            terms = tuple((c / bound, ch) for c, ch in self.terms)
            object.__setattr__(self, "terms", terms)
            bound = 1.0
        object.__setattr__(self, "sup_bound", float(bound))

    @classmethod
    def character(cls, freqs, coeff: complex = 1.0) -> "Observable":
        return cls(((complex(coeff), Character(tuple(freqs))),))

    @classmethod
    def constant(cls, value: complex, space) -> "Observable":
        trivial = tuple(
            0 if isinstance(f, CyclicFactor) else (0,) * f.dim for f in space
        )
        return cls(((complex(value), Character(trivial)),))

    def eval_point(self, space, point: StatePoint) -> complex:
        return sum(c * ch.eval_point(space, point) for c, ch in self.terms)

    def eval_arrays(self, space, arrays: list[np.ndarray]) -> np.ndarray:
        n = arrays[0].shape[0]
        out = np.zeros(n, dtype=np.complex128)
        for c, ch in self.terms:
            out += c * ch.eval_arrays(space, arrays)
        return out

    def values_on(self, system: CommutingSystem) -> np.ndarray:
        return self.eval_arrays(system.space, system.sample_arrays())


# ---------------------------------------------------------------------------
# Character pullback under T**m (exact path, moderate m)
# ---------------------------------------------------------------------------


def char_pullback(
    space, T: Transformation, m: int, char: Character
) -> tuple[Character, complex]:
    """Character and phase with ``chi(T^m x) = phase * chi'(x)``.

    Rotations and shifts keep the frequency and contribute a phase;
    automorphisms transport the frequency by the transposed matrix power
    (exact integers, so |m| is bounded by the headroom guard)."""
    new_freqs = []
    phase = Fraction(0)
    for f, a, k in zip(space, T.actions, char.freqs):
        if isinstance(a, IdentityAction):
            new_freqs.append(k)
        elif isinstance(a, ShiftAction):
            new_freqs.append(k)
            phase += Fraction(k * m * a.r, a.q)
        elif isinstance(a, RotationAction):
            new_freqs.append(k)
            for ki, alpha in zip(k, a.alpha):
                phase += ki * m * alpha.as_fraction()
        elif isinstance(a, AutomorphismAction):
            mat = a.matrix_power_exact(m)
            d = a.dim
            new_freqs.append(
                tuple(sum(mat[j][i] * k[j] for j in range(d)) for i in range(d))
            )
        else:
            raise TypeError(f"unsupported action {type(a).__name__}")
    angle = float(phase % 1)
    return Character(tuple(new_freqs)), cmath.exp(2j * cmath.pi * angle)


# ---------------------------------------------------------------------------
# Integration
# ---------------------------------------------------------------------------


def integrate(
    f: Observable, system: CommutingSystem, method: str = "auto"
) -> complex:
    """Integral of f against the uniform/Haar measure.

    Character combinations integrate analytically (each character contributes
    its coefficient iff all its frequencies are trivial).  The sampled path
    reports the seeded-grid mean and exists to exercise quadrature against
    closed forms."""
    if method not in ("auto", "analytic", "sampled", "exact"):
        raise ValueError(f"unknown integration method {method!r}")
    if method in ("auto", "analytic"):
        return sum(
            c for c, ch in f.terms if ch.is_trivial(system.space)
        ) + 0j
    if method == "exact":
        if not system.is_finite:
            raise ValueError("exact integration needs a finite space")
        vals = f.values_on(system)
        return complex(vals.mean())
    vals = f.values_on(system)
    return complex(vals.mean())


def observable_product_integral(
    system: CommutingSystem, factors: list[tuple[Observable, Transformation, int]]
) -> complex:
    """Exact integral of a product ``prod_j (T_j^{m_j} f_j)`` of pulled-back
    character combinations, via frequency bookkeeping."""
    space = system.space
    pulled = []
    for f, T, m in factors:
        pulled.append(
            [
                (c * ph, ch2)
                for c, ch in f.terms
                for ch2, ph in [char_pullback(space, T, m, ch)]
            ]
        )
    total = 0j
    for combo in itertools.product(*pulled):
        coeff = 1 + 0j
        freq_sums = None
        for c, ch in combo:
            coeff *= c
            if freq_sums is None:
                freq_sums = list(ch.freqs)
            else:
                freq_sums = [
                    fs + k
                    if isinstance(fs, int)
                    else tuple(a + b for a, b in zip(fs, k))
                    for fs, k in zip(freq_sums, ch.freqs)
                ]
        if Character(tuple(freq_sums)).is_trivial(space):
            total += coeff
    return total


# ---------------------------------------------------------------------------
# Diagnostics
# ---------------------------------------------------------------------------


def weak_mixing_defect(
    system: CommutingSystem,
    T: Transformation,
    f: Observable,
    g: Observable,
    N: int,
) -> float:
    """(1/N) sum_{n=1..N} |int f . T^n g dmu - int f int g|.

    Small values certify weak mixing at scale N; rotations sit near the
    modulus of their character terms instead."""
    mean_f = integrate(f, system)
    mean_g = integrate(g, system)
    total = 0.0
    for n in range(1, N + 1):
        corr = observable_product_integral(
            system, [(f, T, 0), (g, T, n)]
        )
        total += abs(corr - mean_f * mean_g)
    return total / N


@dataclass(frozen=True)
class SampledFunction:
    """Values of a function on the system's sample points (full enumeration
    for finite spaces)."""

    system: CommutingSystem
    values: np.ndarray

    def l2_norm(self) -> float:
        return float(np.sqrt(np.mean(np.abs(self.values) ** 2)))


def ergodic_projection(
    f: Observable, system: CommutingSystem, T: Transformation, N: int
) -> SampledFunction:
    """Pointwise Birkhoff average (1/N) sum_{n=0..N-1} f(T^n x) on the
    sample points; exact conditional expectation on finite cyclic systems
    when N is the orbit period."""
    arrays = system.sample_arrays()
    n_pts = arrays[0].shape[0]
    acc = np.zeros(n_pts, dtype=np.complex128)
    for n in range(N):
        moved = T.power_arrays(n, arrays)
        acc += f.eval_arrays(system.space, moved)
    return SampledFunction(system, acc / N)


# ---------------------------------------------------------------------------
# Finite-system helpers (permutation view)
# ---------------------------------------------------------------------------


def transformation_permutation(
    system: CommutingSystem, T: Transformation
) -> np.ndarray:
    """Index permutation of the enumerated finite space realizing T."""
    if not system.is_finite:
        raise ValueError("permutations only exist for finite spaces")
    pts = enumerate_points(system.space)
    index = {p: i for i, p in enumerate(pts)}
    return np.array([index[T.power_point(1, p)] for p in pts], dtype=np.int64)


def permutation_power(perm: np.ndarray, m: int) -> np.ndarray:
    n = len(perm)
    result = np.arange(n, dtype=np.int64)
    if m < 0:
        inv = np.empty(n, dtype=np.int64)
        inv[perm] = np.arange(n)
        base = inv
        m = -m
    else:
        base = perm.copy()
    while m:
        if m & 1:
            result = base[result]
        base = base[base]
        m >>= 1
    return result


def permutation_order(perm: np.ndarray) -> int:
    from math import lcm

    n = len(perm)
    seen = np.zeros(n, dtype=bool)
    order = 1
    for start in range(n):
        if seen[start]:
            continue
        length = 0
        i = start
        while not seen[i]:
            seen[i] = True
            i = perm[i]
            length += 1
        order = lcm(order, length)
    return order
