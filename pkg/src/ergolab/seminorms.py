"""Uniformity seminorms for bounded sequences and cube seminorms for
observables on commuting systems.

Two evaluation paths exist for the cube seminorms.  On finite cyclic systems
the nested averages are exact: each averaging index runs over the full
permutation order, so the truncated recursion collapses to the true limit.
On torus systems the recursion runs over n = 1..N with every integral
resolved analytically through character frequency bookkeeping; no sampling
enters, only the truncation of the averages.

Both paths share the recursion

    |||f|||_{k}^{2^k} = avg_n |||conj(f) . T^n f|||_{k-1}^{2^{k-1}},
    |||g|||_1^2      = avg_n int conj(g) . T^n g dmu,

with the base case equal to ||E(g | invariants)||^2 when the average covers a
full period.  Averaging indices start at 1, never 0; including n = 0 injects
a diagonal term of size 1/N that swamps small seminorms.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import cmath

import numpy as np

from .systems import (
    AutomorphismAction,
    BudgetError,
    Character,
    CommutingSystem,
    CyclicFactor,
    IdentityAction,
    Observable,
    RotationAction,
    ShiftAction,
    Transformation,
    TorusFactor,
    permutation_order,
    permutation_power,
    transformation_permutation,
)

_MASK64 = (1 << 64) - 1


# ---------------------------------------------------------------------------
# Sequence uniformity seminorms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SeqSeminormConfig:
    k: int
    H: int = 64

    def __post_init__(self):
        if not 1 <= self.k <= 4:
            raise ValueError("sequence seminorm step k must be in 1..4")
        if self.H < 8:
            raise ValueError("shift truncation H must be at least 8")


class InsufficientWindowError(ValueError):
    """The sample window is too short for the requested shift depth."""


def _seq_pow(values: np.ndarray, k: int, H: int) -> float:
    """Truncated ||a||^{2^k} on the given values."""
    if len(values) < 2 * H:
        raise InsufficientWindowError(
            f"window of length {len(values)} cannot absorb {H} shifts"
        )
    if k == 1:
        return abs(np.mean(values)) ** 2
    total = 0.0
    for h in range(1, H + 1):
        prod = values[h:] * np.conj(values[:-h])
        total += _seq_pow(prod, k - 1, H)
    return total / H


def seq_seminorm(sample, cfg: SeqSeminormConfig) -> float:
    """Truncated uniformity seminorm ||a||_{I,k} of a sequence sample.

    Level 1 is the modulus of the window mean; level k averages the level
    k-1 value of the shifted products sigma_h(a) . conj(a) over H shifts.
    """
    values = np.asarray(sample.values, dtype=np.complex128)
    pow_val = _seq_pow(values, cfg.k, cfg.H)
    return float(max(pow_val, 0.0) ** (1.0 / (1 << cfg.k)))


# ---------------------------------------------------------------------------
# Cube seminorms: exact path on finite systems
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HKSeminormConfig:
    k: int
    N: int = 64
    exact: bool = True
    budget: int = 100_000_000

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("cube seminorm step k must be >= 1")
        if self.N < 1:
            raise ValueError("truncation N must be >= 1")


def exact_seminorm_pow(values: np.ndarray, perm: np.ndarray, k: int) -> float:
    """|||f|||_k^{2^k} by exact nested sums over a finite permutation system.

    ``values`` holds f on the enumerated points, ``perm`` the index
    permutation of T.  Every average runs over n = 1..P with P the
    permutation order, which makes the recursion equal to the limit.
    """
    P = permutation_order(perm)
    powers = [permutation_power(perm, n) for n in range(1, P + 1)]
    return _exact_pow_rec(np.asarray(values, dtype=np.complex128), powers, k)


def _exact_pow_rec(values, powers, k: int) -> float:
    P = len(powers)
    if k == 1:
        # ||E(f|I)||^2 via orbit means; squaring before averaging keeps
        # roundoff quadratically small, so exact zeros stay ~1e-32.
        proj = values.astype(np.complex128) / P
        for pn in powers[:-1]:
            proj += values[pn] / P
        return float(np.mean(np.abs(proj) ** 2))
    total = 0.0
    conj_v = np.conj(values)
    for pn in powers:
        total += _exact_pow_rec(conj_v * values[pn], powers, k - 1)
    return total / P


# ---------------------------------------------------------------------------
# Cube seminorms: analytic character path for torus systems
# ---------------------------------------------------------------------------


class _PullbackCache:
    """Exact pullback of characters under T^n with incrementally grown
    matrix chains for automorphism factors."""

    def __init__(self, space, T: Transformation):
        self.space = space
        self.T = T
        self._chains: dict[int, list] = {}
        for idx, a in enumerate(T.actions):
            if isinstance(a, AutomorphismAction):
                d = a.dim
                ident = [[1 if i == j else 0 for j in range(d)] for i in range(d)]
                self._chains[idx] = [ident, [list(r) for r in a.matrix]]

    def _matrix(self, idx: int, n: int):
        chain = self._chains[idx]
        base = chain[1]
        while len(chain) <= n:
            prev = chain[-1]
            d = len(base)
            chain.append(
                [
                    [
                        sum(prev[i][t] * base[t][j] for t in range(d))
                        for j in range(d)
                    ]
                    for i in range(d)
                ]
            )
        return chain[n]

    def pullback(self, char: Character, n: int) -> tuple[Character, complex]:
        if n < 0:
            raise ValueError("the analytic path only pulls back by n >= 0")
        new_freqs = []
        phase = Fraction(0)
        for idx, (f, a, k) in enumerate(
            zip(self.space, self.T.actions, char.freqs)
        ):
            if isinstance(a, IdentityAction):
                new_freqs.append(k)
            elif isinstance(a, ShiftAction):
                new_freqs.append(k)
                phase += Fraction(k * n * a.r, a.q)
            elif isinstance(a, RotationAction):
                new_freqs.append(k)
                for ki, alpha in zip(k, a.alpha):
                    phase += Fraction(ki * n * alpha.raw64, 1 << 64)
            elif isinstance(a, AutomorphismAction):
                mat = self._matrix(idx, n)
                d = a.dim
                new_freqs.append(
                    tuple(
                        sum(mat[j][i] * k[j] for j in range(d)) for i in range(d)
                    )
                )
            else:
                raise TypeError(f"unsupported action {type(a).__name__}")
        return Character(tuple(new_freqs)), cmath.exp(
            2j * cmath.pi * float(phase % 1)
        )


def _neg_freqs(freqs):
    return tuple(
        -k if isinstance(k, int) else tuple(-ki for ki in k) for k in freqs
    )


def _conj_terms(terms):
    return tuple(
        (c.conjugate(), Character(_neg_freqs(ch.freqs))) for c, ch in terms
    )


def _mul_terms(a, b):
    out: dict = {}
    for ca, cha in a:
        for cb, chb in b:
            freqs = tuple(
                fa + fb
                if isinstance(fa, int)
                else tuple(x + y for x, y in zip(fa, fb))
                for fa, fb in zip(cha.freqs, chb.freqs)
            )
            out[freqs] = out.get(freqs, 0j) + ca * cb
    return tuple((c, Character(f)) for f, c in out.items() if c != 0)


def _terms_pullback(terms, cache: _PullbackCache, n: int):
    return tuple(
        (c * ph, ch2)
        for c, ch in terms
        for ch2, ph in [cache.pullback(ch, n)]
    )


def _char_pow_rec(terms, cache: _PullbackCache, space, k: int, N: int) -> float:
    if k == 1:
        conj_terms = _conj_terms(terms)
        total = 0j
        for n in range(1, N + 1):
            pulled = _terms_pullback(terms, cache, n)
            for c, ch in _mul_terms(conj_terms, pulled):
                if ch.is_trivial(space):
                    total += c
        return max((total / N).real, 0.0)
    conj_terms = _conj_terms(terms)
    total = 0.0
    for n in range(1, N + 1):
        prod = _mul_terms(conj_terms, _terms_pullback(terms, cache, n))
        total += _char_pow_rec(prod, cache, space, k - 1, N)
    return total / N


# ---------------------------------------------------------------------------
# Public cube seminorm entry points
# ---------------------------------------------------------------------------


def hk_seminorm(
    f: Observable,
    system: CommutingSystem,
    T: Transformation,
    cfg: HKSeminormConfig,
) -> float:
    """Cube seminorm |||f|||_{k, mu, T}.

    Exact on finite systems (averages over the full permutation order).  On
    torus systems the character path is analytic in the integrals and
    truncated at N per averaging level; cost scales like N^(k-1) times the
    term-pair count, so keep k <= 3 there.
    """
    if system.is_finite and cfg.exact:
        perm = transformation_permutation(system, T)
        P = permutation_order(perm)
        size = len(perm)
        if (P ** max(cfg.k - 1, 1)) * P * size > cfg.budget:
            raise BudgetError(
                f"exact cube sums need ~{(P ** max(cfg.k - 1, 1)) * P * size} "
                f"operations, over the budget {cfg.budget}"
            )
        values = f.values_on(system)
        pow_val = _exact_pow_rec(
            values, [permutation_power(perm, n) for n in range(1, P + 1)], cfg.k
        )
        return float(pow_val ** (1.0 / (1 << cfg.k)))
    if cfg.k > 3:
        raise ValueError("the truncated character path supports k <= 3")
    if (cfg.N ** cfg.k) * max(len(f.terms) ** 2, 1) > cfg.budget:
        raise BudgetError("character path truncation exceeds the budget")
    cache = _PullbackCache(system.space, T)
    pow_val = _char_pow_rec(f.terms, cache, system.space, cfg.k, cfg.N)
    return float(pow_val ** (1.0 / (1 << cfg.k)))


def hk_seminorm_bruteforce(
    f: Observable, system: CommutingSystem, T: Transformation, k: int
) -> float:
    """Independent oracle: direct 2^k-cube sum over all index tuples
    (n_1..n_k) in [1, P]^k on a finite system.  Exponential in k."""
    if not system.is_finite:
        raise ValueError("the brute-force oracle needs a finite space")
    perm = transformation_permutation(system, T)
    P = permutation_order(perm)
    values = f.values_on(system)
    powers = {n: permutation_power(perm, n) for n in range(0, k * P + 1)}
    import itertools

    total = 0j
    for tup in itertools.product(range(1, P + 1), repeat=k):
        prod = np.ones(len(values), dtype=np.complex128)
        for eps in range(1 << k):
            shift = sum(tup[i] for i in range(k) if (eps >> i) & 1)
            term = values[powers[shift]]
            if bin(eps).count("1") % 2 == 1:
                term = np.conj(term)
            prod *= term
        total += np.mean(prod)
    pow_val = max((total / P**k).real, 0.0)
    return float(pow_val ** (1.0 / (1 << k)))


@dataclass(frozen=True)
class InverseDirectionReport:
    """Margins for the three comparison relations between cube seminorms:
    tensor square against the next step, monotonicity in k, and symmetry
    under time reversal.  Nonnegative margins mean the relation holds."""

    tensor_lhs: float
    tensor_rhs: float
    mono_lower: float
    mono_upper: float
    symmetry_forward: float
    symmetry_backward: float

    @property
    def tensor_margin(self) -> float:
        return self.tensor_rhs - self.tensor_lhs

    @property
    def mono_margin(self) -> float:
        return self.mono_upper - self.mono_lower

    @property
    def symmetry_margin(self) -> float:
        return abs(self.symmetry_forward - self.symmetry_backward)


def hk_inverse_direction_checks(
    f: Observable, system: CommutingSystem, T: Transformation, k: int
) -> InverseDirectionReport:
    """Exact evaluation of |||f (x) conj(f)|||_k on the product system
    against |||f|||_{k+1}^2, of |||f|||_k against |||f|||_{k+1}, and of the
    T against T^{-1} seminorms.  Finite systems only."""
    if not system.is_finite:
        raise ValueError("inverse-direction checks need a finite system")
    perm = transformation_permutation(system, T)
    values = f.values_on(system)

    norm_k = exact_seminorm_pow(values, perm, k) ** (1.0 / (1 << k))
    norm_k1 = exact_seminorm_pow(values, perm, k + 1) ** (1.0 / (1 << (k + 1)))

    size = len(values)
    tensor_values = np.kron(values, np.conj(values))
    tensor_perm = (perm[:, None] * size + perm[None, :]).reshape(-1)
    tensor_norm = exact_seminorm_pow(tensor_values, tensor_perm, k) ** (
        1.0 / (1 << k)
    )

    inv_perm = np.empty_like(perm)
    inv_perm[perm] = np.arange(size)
    norm_k_inv = exact_seminorm_pow(values, inv_perm, k) ** (1.0 / (1 << k))

    return InverseDirectionReport(
        tensor_lhs=float(tensor_norm),
        tensor_rhs=float(norm_k1**2),
        mono_lower=float(norm_k),
        mono_upper=float(norm_k1),
        symmetry_forward=float(norm_k),
        symmetry_backward=float(norm_k_inv),
    )
