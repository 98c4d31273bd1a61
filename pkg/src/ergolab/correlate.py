"""Integer-part polynomial correlation sequences and their uniform Cesaro
averages.

``corr_seq`` evaluates

    a(n) = int f0 . (prod_i T_i^[p_{i,1}(n)]) f1 ... (prod_i T_i^[p_{i,m}(n)]) f_m dmu

exactly on finite cyclic systems (full enumeration) and on seeded sample
grids for tori.  ``multi_average`` drops f0 and averages the product function
itself, which is what the mean-convergence and zero-limit experiments need.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .poly import RealPolynomial, eval_floor
from .systems import (
    CommutingSystem,
    Observable,
    SampledFunction,
    Transformation,
    permutation_power,
    transformation_permutation,
)


@dataclass(frozen=True)
class WindowFamily:
    """Integer intervals [M_k, N_k) with strictly increasing lengths."""

    windows: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if len(self.windows) < 3:
            raise ValueError("a window family needs at least 3 windows")
        lengths = [b - a for a, b in self.windows]
        if any(l2 <= l1 for l1, l2 in zip(lengths, lengths[1:])):
            raise ValueError("window lengths must be strictly increasing")

    @classmethod
    def doubling(cls, start_len: int, count: int, base: int = 0) -> "WindowFamily":
        wins = []
        length = start_len
        for _ in range(count):
            wins.append((base, base + length))
            length *= 2
        return cls(tuple(wins))

    def lengths(self) -> list[int]:
        return [b - a for a, b in self.windows]


@dataclass(frozen=True)
class CorrelationSpec:
    """Full specification of an integer-part polynomial correlation sequence:
    system, an ell x m grid of iterate polynomials, and observables
    f0..f_m (f0 may be None for the averaged-function variants)."""

    system: CommutingSystem
    iterates: tuple[tuple[RealPolynomial, ...], ...]  # shape (ell, m)
    observables: tuple[Observable | None, ...]  # (f0, f1, ..., f_m)

    def __post_init__(self):
        ell = len(self.system.transformations)
        if len(self.iterates) != ell:
            raise ValueError("iterate grid must have one row per transformation")
        m = len(self.iterates[0])
        if any(len(row) != m for row in self.iterates):
            raise ValueError("ragged iterate grid")
        if len(self.observables) != m + 1:
            raise ValueError("need observables f0..f_m (f0 may be None)")
        for f in self.observables:
            if f is not None and f.sup_bound > 1 + 1e-12:
                raise ValueError("observables must satisfy ||f||_inf <= 1")

    @property
    def ell(self) -> int:
        return len(self.iterates)

    @property
    def m(self) -> int:
        return len(self.iterates[0])

    def exponents(self, n: int) -> list[list[int]]:
        """[p_{i,j}(n)] for the full grid."""
        return [[eval_floor(p, n) for p in row] for row in self.iterates]

    def shifted(self, h: int) -> "CorrelationSpec":
        return CorrelationSpec(
            self.system,
            tuple(tuple(p.shifted(h) for p in row) for row in self.iterates),
            self.observables,
        )


@dataclass(frozen=True)
class SequenceSample:
    """A finite window of a bounded complex sequence plus provenance."""

    window: tuple[int, int]
    values: np.ndarray
    provenance: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if len(self.values) != self.window[1] - self.window[0]:
            raise ValueError("value array does not match the window")

    def __len__(self) -> int:
        return len(self.values)


# ---------------------------------------------------------------------------
# Evaluation backends
# ---------------------------------------------------------------------------


class _FiniteBackend:
    """Exact evaluation on an enumerated finite space via permutations."""

    def __init__(self, spec: CorrelationSpec):
        self.spec = spec
        sys_ = spec.system
        self.perms = [
            transformation_permutation(sys_, T) for T in sys_.transformations
        ]
        self.f_values = [
            None if f is None else f.values_on(sys_) for f in spec.observables
        ]
        self.size = len(self.perms[0])

    def factor_values(self, n: int) -> np.ndarray:
        """Pointwise product prod_j f_j(prod_i T_i^{e_ij} x), f0 excluded."""
        return self.factor_values_at(self.spec.exponents(n))

    def factor_values_at(self, exps) -> np.ndarray:
        out = np.ones(self.size, dtype=np.complex128)
        for j in range(self.spec.m):
            idx = np.arange(self.size, dtype=np.int64)
            for i in range(self.spec.ell):
                e = exps[i][j]
                if e:
                    idx = permutation_power(self.perms[i], e)[idx]
            out *= self.f_values[j + 1][idx]
        return out


class _SampledBackend:
    """Seeded sample-grid evaluation for systems with torus factors."""

    def __init__(self, spec: CorrelationSpec):
        self.spec = spec
        self.arrays = spec.system.sample_arrays()
        self.size = self.arrays[0].shape[0]

    def factor_values(self, n: int) -> np.ndarray:
        return self.factor_values_at(self.spec.exponents(n))

    def factor_values_at(self, exps) -> np.ndarray:
        spec = self.spec
        out = np.ones(self.size, dtype=np.complex128)
        for j in range(spec.m):
            moved = self.arrays
            for i in range(spec.ell):
                e = exps[i][j]
                if e:
                    moved = spec.system.transformations[i].power_arrays(e, moved)
            out *= spec.observables[j + 1].eval_arrays(spec.system.space, moved)
        return out


def _backend(spec: CorrelationSpec):
    if spec.system.is_finite:
        return _FiniteBackend(spec)
    return _SampledBackend(spec)


class CorrelationEvaluator:
    """Reusable evaluator bound to one spec: the sequence value at n, and the
    integral of the factor product at an arbitrary exponent grid (needed by
    the corner expansions of the delta-box transference bound)."""

    def __init__(self, spec: CorrelationSpec):
        self.spec = spec
        self.backend = _backend(spec)
        f0 = spec.observables[0]
        if f0 is None:
            self.f0_values = np.ones(self.backend.size, dtype=np.complex128)
        elif isinstance(self.backend, _FiniteBackend):
            self.f0_values = self.backend.f_values[0]
        else:
            self.f0_values = f0.eval_arrays(
                spec.system.space, self.backend.arrays
            )

    def value(self, n: int) -> complex:
        return complex(
            np.mean(self.f0_values * self.backend.factor_values(n))
        )

    def value_at_exponents(self, exps) -> complex:
        return complex(
            np.mean(self.f0_values * self.backend.factor_values_at(exps))
        )


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------


def corr_seq(spec: CorrelationSpec, window: tuple[int, int]) -> SequenceSample:
    """The correlation sequence a(n) on the window.

    Exact on finite spaces; on tori the integral is the seeded sample mean
    (the sampler seed is recorded in the provenance)."""
    if spec.observables[0] is None:
        raise ValueError("corr_seq needs the weight observable f0")
    backend = _backend(spec)
    f0 = (
        backend.f_values[0]
        if isinstance(backend, _FiniteBackend)
        else spec.observables[0].eval_arrays(spec.system.space, backend.arrays)
    )
    start, stop = window
    values = np.empty(stop - start, dtype=np.complex128)
    for k, n in enumerate(range(start, stop)):
        values[k] = np.mean(f0 * backend.factor_values(n))
    return SequenceSample(
        window=window,
        values=values,
        provenance={
            "kind": "corr_seq",
            "exact": spec.system.is_finite,
            "seed": spec.system.sampler.seed,
            "samples": backend.size,
        },
    )


def corr_seq_bruteforce(
    spec: CorrelationSpec, window: tuple[int, int]
) -> SequenceSample:
    """Independent oracle: triple loop over points, factors and
    transformations using single applications only.  Finite spaces only."""
    from .systems import enumerate_points, power_apply

    sys_ = spec.system
    if not sys_.is_finite:
        raise ValueError("the brute-force oracle needs a finite space")
    pts = enumerate_points(sys_.space)
    start, stop = window
    values = []
    for n in range(start, stop):
        exps = spec.exponents(n)
        acc = 0j
        for x in pts:
            term = spec.observables[0].eval_point(sys_.space, x)
            for j in range(spec.m):
                y = x
                for i in range(spec.ell):
                    y = power_apply(sys_.transformations[i], exps[i][j], y)
                term *= spec.observables[j + 1].eval_point(sys_.space, y)
            acc += term
        values.append(acc / len(pts))
    return SequenceSample(
        window=window,
        values=np.array(values, dtype=np.complex128),
        provenance={"kind": "corr_seq_bruteforce"},
    )


def multi_average(
    spec: CorrelationSpec, window: tuple[int, int]
) -> tuple[SampledFunction, float]:
    """Averaged product function (1/(N-M)) sum_n prod_j (prod_i
    T_i^[p_ij(n)]) f_j on the sample points, plus its L2(mu) norm estimate
    (exact on finite spaces)."""
    backend = _backend(spec)
    start, stop = window
    acc = np.zeros(backend.size, dtype=np.complex128)
    for n in range(start, stop):
        acc += backend.factor_values(n)
    acc /= stop - start
    fn = SampledFunction(spec.system, acc)
    return fn, fn.l2_norm()


def uniform_seminorm(
    sample: SequenceSample,
    window_lengths: Sequence[int],
    shift_fractions: Sequence[float] = (0.0, 0.5, 1.0, 2.0),
) -> float:
    """Estimate of ||a||_2 = sqrt(limsup mean |a|^2) as the max over the two
    largest configured window lengths of the shifted-window mean of |a|^2.

    The uniform (Banach) limsup has no canonical finite estimator; the
    shift-max over fixed lengths is the recorded convention and is a lower
    bound for the limiting quantity."""
    mags = np.abs(sample.values) ** 2
    total = len(mags)
    best = 0.0
    for length in sorted(window_lengths)[-2:]:
        length = min(length, total)
        for frac in shift_fractions:
            off = int(round(frac * length))
            if off + length > total:
                continue
            best = max(best, float(mags[off : off + length].mean()))
    return float(np.sqrt(best))


@dataclass(frozen=True)
class CauchyReport:
    """Consecutive L2 differences of the averages along a window ladder."""

    windows: tuple[tuple[int, int], ...]
    l2_norms: tuple[float, ...]
    differences: tuple[float, ...]

    def tail_difference(self) -> float:
        return self.differences[-1]


def cauchy_report(spec: CorrelationSpec, family: WindowFamily) -> CauchyReport:
    """Table of ||A_{W_{k+1}} - A_{W_k}||_{L2} along a ladder of at least
    four windows; exact on finite spaces."""
    if len(family.windows) < 4:
        raise ValueError("the convergence ladder needs at least 4 windows")
    fns = []
    norms = []
    for w in family.windows:
        fn, l2 = multi_average(spec, w)
        fns.append(fn.values)
        norms.append(l2)
    diffs = [
        float(np.sqrt(np.mean(np.abs(b - a) ** 2)))
        for a, b in zip(fns, fns[1:])
    ]
    return CauchyReport(
        windows=family.windows,
        l2_norms=tuple(norms),
        differences=tuple(diffs),
    )
