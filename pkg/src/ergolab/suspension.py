"""Suspension of a commuting system under the constant ceiling 1, one flow
direction per (transformation, factor-position) pair, plus the transference
inequalities that move statements between the base and the suspension.

The time-s map sends (x, b) to (prod_i T_i^[s_ij + b_ij] x, {s_ij + b_ij}).
Heights are exact dyadic scalars, so the flow law T_{s+t} = T_s . T_t reduces
to the bit-exact floor identity [u + {v}] + [v] = [u + v].
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .correlate import CorrelationEvaluator, CorrelationSpec
from .fixedpoint import FixedReal, ONE, ZERO
from .poly import eval_frac
from .seminorms import exact_seminorm_pow
from .systems import (
    BudgetError,
    CommutingSystem,
    Observable,
    StatePoint,
    Transformation,
    permutation_order,
    permutation_power,
    transformation_permutation,
)


# ---------------------------------------------------------------------------
# Points, flows, extended observables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SuspensionPoint:
    """Base point plus an ell x m grid of heights in [0, 1)."""

    base: StatePoint
    heights: tuple[tuple[FixedReal, ...], ...]

    def __post_init__(self):
        for row in self.heights:
            for h in row:
                if not (ZERO <= h < ONE):
                    raise ValueError("heights must lie in [0, 1)")


@dataclass(frozen=True)
class SuspensionFlow:
    """Flow directions indexed by (i, j): direction (i, j) advances the base
    through T_i and rotates height b_{i,j}."""

    system: CommutingSystem
    m: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("need at least one column of directions")

    @property
    def ell(self) -> int:
        return len(self.system.transformations)

    def zero_grid(self) -> tuple[tuple[FixedReal, ...], ...]:
        return tuple((ZERO,) * self.m for _ in range(self.ell))


def flow_apply(
    flow: SuspensionFlow,
    s: tuple[tuple[FixedReal, ...], ...],
    pt: SuspensionPoint,
) -> SuspensionPoint:
    """Time-s map of the flow, exact."""
    base = pt.base
    new_heights = []
    for i, T in enumerate(flow.system.transformations):
        row = []
        for j in range(flow.m):
            total = s[i][j] + pt.heights[i][j]
            e = total.floor()
            if e:
                base = T.power_point(e, base)
            row.append(total.frac())
        new_heights.append(tuple(row))
    return SuspensionPoint(base, tuple(new_heights))


@dataclass(frozen=True)
class ExtendedObservable:
    """Lift of a base observable to the suspension: the plain extension
    ignores heights, the delta-box extension multiplies by the indicator of
    all heights lying in [0, delta]."""

    f: Observable
    kind: str = "plain"
    delta: FixedReal | None = None

    def __post_init__(self):
        if self.kind not in ("plain", "delta-box"):
            raise ValueError(f"unknown extension kind {self.kind!r}")
        if self.kind == "delta-box" and self.delta is None:
            raise ValueError("delta-box extension needs delta")

    def eval_point(self, space, pt: SuspensionPoint) -> complex:
        val = self.f.eval_point(space, pt.base)
        if self.kind == "delta-box":
            for row in pt.heights:
                for h in row:
                    if h > self.delta:
                        return 0j
        return val


# ---------------------------------------------------------------------------
# Flow identities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FlowPowerReport:
    n_max: int
    checked: int
    all_exact: bool
    first_mismatch: int | None


def flow_power_identity_check(
    flow: SuspensionFlow,
    s: FixedReal,
    pt: SuspensionPoint,
    n_max: int,
    f: Observable | None = None,
) -> FlowPowerReport:
    """For a single-direction flow, compare the iterated time-s map S^n with
    the closed form (T^[ns+b] x, {ns+b}) for n <= n_max, bit-exactly; when f
    is given, also compare f at the iterated base against f(T^[ns] x) from
    height 0."""
    if flow.ell != 1 or flow.m != 1:
        raise ValueError("the closed-form check needs a single direction")
    T = flow.system.transformations[0]
    space = flow.system.space
    grid = ((s,),)
    current = pt
    zero_current = SuspensionPoint(pt.base, flow.zero_grid())
    mismatch = None
    n = 0
    for n in range(1, n_max + 1):
        current = flow_apply(flow, grid, current)
        zero_current = flow_apply(flow, grid, zero_current)
        total = s * n + pt.heights[0][0]
        closed = SuspensionPoint(
            T.power_point(total.floor(), pt.base), (((total).frac(),),)
        )
        if current != closed:
            mismatch = n
            break
        if f is not None:
            direct = f.eval_point(space, T.power_point((s * n).floor(), pt.base))
            lifted = f.eval_point(space, zero_current.base)
            if direct != lifted:
                mismatch = n
                break
    return FlowPowerReport(
        n_max=n_max,
        checked=n if mismatch is None else mismatch,
        all_exact=mismatch is None,
        first_mismatch=mismatch,
    )


# ---------------------------------------------------------------------------
# Scaling inequality for floor-compressed averages
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FloorScalingReport:
    lhs: float
    rhs: float
    s: FixedReal
    k: int
    constant: float

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs


def scaling_constant(k: int, s: FixedReal) -> float:
    """s^k (floor(1/s) + 1)^k."""
    inv_floor = int(Fraction(1) / s.as_fraction())
    return float(s.as_fraction() ** k * (inv_floor + 1) ** k)


def floor_scaling_check(
    a: np.ndarray, s, k: int, scales: tuple[int, ...] | None = None
) -> FloorScalingReport:
    """Compare the grid average of a([n_1 s], ..., [n_k s]) with
    s^k(floor(1/s)+1)^k times the grid average of a itself.

    Both limsups are truncated as the max over two window scales.  ``a`` is a
    nonnegative k-dimensional array indexed from 0."""
    s = FixedReal.coerce(s)
    if s <= ZERO:
        raise ValueError("s must be positive")
    if a.ndim != k:
        raise ValueError("array dimension must equal k")
    if np.any(a < 0):
        raise ValueError("the inequality needs nonnegative entries")
    V = min(a.shape)
    # largest N with [N s] <= V - 1
    N = int(Fraction(V) / s.as_fraction())
    while (s * N).floor() > V - 1:
        N -= 1
    if N < 4:
        raise ValueError("array too small for the requested s")
    if scales is None:
        scales = (N // 2, N)
    idx_full = np.array([(s * n).floor() for n in range(1, N + 1)], dtype=np.int64)
    lhs = 0.0
    rhs_avg = 0.0
    for N_scale in scales:
        idx = idx_full[:N_scale]
        lhs = max(lhs, float(a[np.ix_(*([idx] * k))].mean()))
        V_scale = int(idx[N_scale - 1]) + 1
        sl = slice(0, V_scale)
        rhs_avg = max(rhs_avg, float(a[(sl,) * k].mean()))
    const = scaling_constant(k, s)
    return FloorScalingReport(lhs=lhs, rhs=const * rhs_avg, s=s, k=k, constant=const)


# ---------------------------------------------------------------------------
# Seminorm transfer through the suspension
# ---------------------------------------------------------------------------


def transfer_constants(k: int, s) -> tuple[int, float]:
    """(c_k, c_{k,s}) with c_k = (k+1)^{2^k} and
    c_{k,s} = c_k s^k (floor(1/s)+1)^k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    s = FixedReal.coerce(s)
    if s <= ZERO:
        raise ValueError("s must be positive")
    c_k = (k + 1) ** (1 << k)
    return c_k, float(c_k * Fraction(scaling_constant(k, s)))


@dataclass(frozen=True)
class SeminormTransferReport:
    k: int
    s: Fraction
    suspension_seminorm: float
    base_seminorm: float
    c_k: int
    c_ks: float

    @property
    def bound(self) -> float:
        return self.c_ks * self.base_seminorm

    @property
    def margin(self) -> float:
        return self.bound - self.suspension_seminorm


def suspension_permutation(
    system: CommutingSystem, T: Transformation, s: Fraction
) -> tuple[np.ndarray, int]:
    """Permutation of (base point, height cell) indices realizing the time-s
    map of the single-direction suspension when s = a/b is rational and
    heights live on the 1/b grid.

    On that grid the map is (p, j) -> (T^[(a+j)/b] p, (a+j) mod b); each
    Lebesgue height cell [j/b, (j+1)/b) maps onto a single cell, so the grid
    system is a full-measure factor and seminorms computed on it are the true
    suspension seminorms."""
    a, b = s.numerator, s.denominator
    if a < 0:
        raise ValueError("s must be positive")
    perm_t = transformation_permutation(system, T)
    Q = len(perm_t)
    powers = {}
    out = np.empty(Q * b, dtype=np.int64)
    for j in range(b):
        e = (a + j) // b
        if e not in powers:
            powers[e] = permutation_power(perm_t, e)
        moved = powers[e]
        j2 = (a + j) % b
        out[np.arange(Q) * b + j] = moved * b + j2
    return out, Q


def seminorm_transfer_check(
    f: Observable,
    system: CommutingSystem,
    T: Transformation,
    s,
    k: int,
    budget: int = 100_000_000,
) -> SeminormTransferReport:
    """Exact check that the step-k seminorm of the plain extension of f on
    the suspension is at most c_{k,s} times the step-(k+1) seminorm of f on
    the base.  Needs a finite base and rational s."""
    if not system.is_finite:
        raise ValueError("the exact check needs a finite base system")
    s_frac = FixedReal.coerce(s).as_fraction()
    if not FixedReal.coerce(s).exact:
        raise ValueError("s must be an exactly-representable rational")
    perm_s, Q = suspension_permutation(system, T, s_frac)
    b = s_frac.denominator
    P = permutation_order(perm_s)
    if (P ** max(k - 1, 1)) * P * Q * b > budget:
        raise BudgetError("suspension seminorm exceeds the budget")
    f_values = f.values_on(system)
    hat_values = np.repeat(f_values, b)
    susp = exact_seminorm_pow(hat_values, perm_s, k) ** (1.0 / (1 << k))
    perm_t = transformation_permutation(system, T)
    base = exact_seminorm_pow(f_values, perm_t, k + 1) ** (1.0 / (1 << (k + 1)))
    c_k, c_ks = transfer_constants(k, s)
    return SeminormTransferReport(
        k=k,
        s=s_frac,
        suspension_seminorm=float(susp),
        base_seminorm=float(base),
        c_k=c_k,
        c_ks=c_ks,
    )


# ---------------------------------------------------------------------------
# Delta-box transference bound
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WeakAntiUniformBound:
    delta: FixedReal
    C_delta: float
    c_delta: float
    lhs: float
    box_correlation: float
    densities: tuple[Fraction, ...]

    @property
    def rhs(self) -> float:
        return self.C_delta * self.box_correlation + self.c_delta

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs


def weak_anti_uniform_bound(
    spec: CorrelationSpec,
    b_values: np.ndarray,
    delta,
    window: tuple[int, int],
) -> WeakAntiUniformBound:
    """Verify |avg a(n) b(n)| <= delta^{-lm} |avg a~(n) b(n)| + c_delta on
    the window, where a~ integrates the correlation against heights confined
    to the box [0, delta]^{lm}.

    a~(n) is computed exactly by corner expansion: each iterate position
    either keeps its floor (height measure delta - w) or gains 1 (measure
    w = max(0, {p(n)} + delta - 1)).  c_delta is 2 sup|b| times the summed
    window densities of the near-wraparound sets {n : {p_ij(n)} >= 1-delta},
    which bounds the per-n discrepancy between a(n) and delta^{-lm} a~(n)."""
    delta = FixedReal.coerce(delta)
    if not (ZERO < delta < ONE):
        raise ValueError("delta must lie in (0, 1)")
    start, stop = window
    if len(b_values) != stop - start:
        raise ValueError("b sample does not match the window")
    ev = CorrelationEvaluator(spec)
    ell, m = spec.ell, spec.m
    lm = ell * m
    delta_frac = delta.as_fraction()
    bad_counts = [[0] * m for _ in range(ell)]
    sum_ab = 0j
    sum_box = 0j
    for offset, n in enumerate(range(start, stop)):
        exps = spec.exponents(n)
        weights = {}
        for i in range(ell):
            for j in range(m):
                fr = eval_frac(spec.iterates[i][j], n)
                if fr >= ONE - delta:
                    bad_counts[i][j] += 1
                w = fr + delta - ONE
                if w > ZERO:
                    weights[(i, j)] = w.as_fraction()
        a_n = ev.value(n)
        if not weights:
            box_n = complex(delta_frac**lm) * a_n
        else:
            positions = list(weights)
            box_n = 0j
            outside = delta_frac ** (lm - len(positions))
            for subset in itertools.product((0, 1), repeat=len(positions)):
                measure = Fraction(outside)
                bumped = [row[:] for row in exps]
                for (i, j), up in zip(positions, subset):
                    w = weights[(i, j)]
                    measure *= w if up else (delta_frac - w)
                    if up:
                        bumped[i][j] += 1
                box_n += float(measure) * ev.value_at_exponents(bumped)
        weight_b = b_values[offset]
        sum_ab += a_n * weight_b
        sum_box += box_n * weight_b
    count = stop - start
    sup_b = float(np.max(np.abs(b_values))) if count else 0.0
    densities = tuple(
        Fraction(bad_counts[i][j], count) for i in range(ell) for j in range(m)
    )
    c_delta = 2.0 * sup_b * float(sum(densities))
    return WeakAntiUniformBound(
        delta=delta,
        C_delta=float(Fraction(1) / delta_frac**lm),
        c_delta=c_delta,
        lhs=abs(sum_ab / count),
        box_correlation=abs(sum_box / count),
        densities=densities,
    )
