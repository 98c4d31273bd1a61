"""Polynomial family classification and van der Corput reduction.

A family is stored as an ell x m grid: row i collects the exponents of the
i-th transformation, column j the exponents of the j-th factor.  The niceness
conditions are pure integer degree arithmetic.  Real families reduce to
integer ones by splitting each polynomial into one coordinate per nonzero
monomial (leading coordinate first, zero-padded on the right to d+1 slots).

The reduction routine repeatedly replaces the column family {q_j} by
{q_j(n+h) - q_p(n), q_j(n) - q_p(n)} for a pivot column q_p, with a fresh
shift symbol h per step, discarding columns that are constant in n and
merging columns that differ by constants.  The number of steps until nothing
nonconstant remains is the depth d; the associated seminorm level is d + 1.
The pivot rule (most frequent leading transformation, then minimal degree,
then lowest column index) is a recorded artifact convention; the trace keeps
every choice inspectable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import sympy

from .poly import RealPolynomial

_N = sympy.Symbol("n")


# ---------------------------------------------------------------------------
# Families and niceness
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PolyFamily:
    """ell x m grid of polynomial iterates; columns are the factor tuples."""

    grid: tuple[tuple[RealPolynomial, ...], ...]

    def __post_init__(self):
        if not self.grid or not self.grid[0]:
            raise ValueError("family must be nonempty")
        m = len(self.grid[0])
        if any(len(row) != m for row in self.grid):
            raise ValueError("ragged family grid")

    @classmethod
    def from_coeff_grid(cls, rows) -> "PolyFamily":
        return cls(
            tuple(
                tuple(RealPolynomial.from_coeffs(c) for c in row) for row in rows
            )
        )

    @property
    def ell(self) -> int:
        return len(self.grid)

    @property
    def m(self) -> int:
        return len(self.grid[0])

    def max_degree(self) -> int:
        return max(
            (_deg(p) for row in self.grid for p in row), default=-1
        )


def _deg(p: RealPolynomial) -> int:
    """Degree with the zero polynomial at -1, so strict comparisons against
    absent entries behave correctly."""
    return -1 if p.is_zero() else p.degree


def _deg_diff(p: RealPolynomial, q: RealPolynomial) -> int:
    diff = [a - b for a, b in _aligned_coeffs(p, q)]
    for i in range(len(diff) - 1, -1, -1):
        if diff[i].numer != 0:
            return i
    return -1


def _aligned_coeffs(p: RealPolynomial, q: RealPolynomial):
    from .fixedpoint import ZERO

    n = max(len(p.coefficients), len(q.coefficients))
    a = list(p.coefficients) + [ZERO] * (n - len(p.coefficients))
    b = list(q.coefficients) + [ZERO] * (n - len(q.coefficients))
    return zip(a, b)


def _require_integer(fam: PolyFamily):
    for row in fam.grid:
        for p in row:
            for c in p.coefficients:
                if c.shift != 0:
                    raise ValueError(
                        "niceness is defined for integer-coefficient families"
                    )


@dataclass(frozen=True)
class NicenessVerdict:
    nice: bool
    failing_condition: str | None = None

    def __bool__(self) -> bool:
        return self.nice


def is_nice(fam: PolyFamily) -> NicenessVerdict:
    """Degree-ordering conditions on an integer family: the top-left entry
    dominates its own row weakly, every later row strictly, and pairwise
    differences against the first column dominate row-wise differences; a
    family of maximum degree 1 may have only one nonzero entry."""
    _require_integer(fam)
    g = fam.grid
    d11 = _deg(g[0][0])
    for j in range(fam.m):
        if d11 < _deg(g[0][j]):
            return NicenessVerdict(False, "top-left entry must dominate row 1")
    for i in range(1, fam.ell):
        for j in range(fam.m):
            if d11 <= _deg(g[i][j]):
                return NicenessVerdict(
                    False, "top-left entry must strictly dominate later rows"
                )
    for i in range(1, fam.ell):
        for j in range(1, fam.m):
            if _deg_diff(g[0][0], g[0][j]) <= _deg_diff(g[i][0], g[i][j]):
                return NicenessVerdict(
                    False,
                    "row-1 column differences must strictly dominate "
                    "later-row differences",
                )
    if fam.max_degree() == 1:
        nonzero = sum(
            1 for row in g for p in row if not p.is_zero()
        )
        if nonzero > 1:
            return NicenessVerdict(
                False, "a degree-1 family may have only one nonzero entry"
            )
    return NicenessVerdict(True)


def vectorize_family(fam: PolyFamily) -> PolyFamily:
    """Split every entry into d+1 integer coordinates: for an entry of
    degree r the coordinates are t^r, ..., t^0 (each present iff its
    coefficient is nonzero), zero-padded on the right to length d+1.  The
    row blocks of the result keep the original transformation order."""
    d = max(fam.max_degree(), 0)
    zero = RealPolynomial.from_coeffs([0])
    rows: list[list[RealPolynomial]] = [
        [] for _ in range(fam.ell * (d + 1))
    ]
    for j in range(fam.m):
        for i in range(fam.ell):
            p = fam.grid[i][j]
            coords: list[RealPolynomial] = []
            if not p.is_zero():
                r = p.degree
                for c in range(r + 1):
                    power = r - c
                    if p.coefficients[power].numer != 0:
                        coords.append(
                            RealPolynomial.from_coeffs([0] * power + [1])
                        )
                    else:
                        coords.append(zero)
            coords += [zero] * (d + 1 - len(coords))
            for c in range(d + 1):
                rows[i * (d + 1) + c].append(coords[c])
    return PolyFamily(tuple(tuple(r) for r in rows))


def is_r_nice(fam: PolyFamily) -> NicenessVerdict:
    """Real-coefficient niceness: vectorize every entry and test the
    resulting integer family."""
    return is_nice(vectorize_family(fam))


# ---------------------------------------------------------------------------
# van der Corput reduction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PetStep:
    family_before: tuple[tuple[str, ...], ...]
    pivot_index: int
    family_after: tuple[tuple[str, ...], ...]


@dataclass(frozen=True)
class PetTrace:
    steps: tuple[PetStep, ...]
    depth: int
    k_estimate: int
    complete: bool


class DepthGuardExceeded(RuntimeError):
    def __init__(self, trace: PetTrace):
        super().__init__(
            f"reduction did not finish within {trace.depth} steps"
        )
        self.trace = trace


def _column_nonconst(col) -> bool:
    return any(sympy.degree(e, _N) >= 1 if e != 0 else False for e in col)


def _column_key(col):
    """Canonical key of a column modulo constants in n."""
    parts = []
    for e in col:
        expanded = sympy.expand(e)
        nonconst = expanded - expanded.subs(_N, 0)
        parts.append(sympy.srepr(sympy.expand(nonconst)))
    return tuple(parts)


def _column_degree(col) -> int:
    best = 0
    for e in col:
        if e != 0:
            d = sympy.degree(e, _N)
            if d is not sympy.S.NegativeInfinity:
                best = max(best, int(d))
    return best


def _leading_row(col) -> int:
    degs = []
    for e in col:
        if e == 0:
            degs.append(-1)
        else:
            d = sympy.degree(e, _N)
            degs.append(-1 if d is sympy.S.NegativeInfinity else int(d))
    top = max(degs)
    return degs.index(top)


def _pick_pivot(columns) -> int:
    candidates = [
        j for j, col in enumerate(columns) if _column_nonconst(col)
    ]
    lead = {j: _leading_row(columns[j]) for j in candidates}
    freq: dict[int, int] = {}
    for j in candidates:
        freq[lead[j]] = freq.get(lead[j], 0) + 1
    best_freq = max(freq.values())
    pool = [j for j in candidates if freq[lead[j]] == best_freq]
    pool.sort(key=lambda j: (_column_degree(columns[j]), j))
    return pool[0]


def _render(columns) -> tuple[tuple[str, ...], ...]:
    return tuple(tuple(str(sympy.expand(e)) for e in col) for col in columns)


def pet_reduce(fam: PolyFamily, max_depth: int = 12) -> PetTrace:
    """Iterate the van der Corput substitution until every column is
    constant in n, recording each pivot choice.  Coefficients enter the
    symbolic computation as exact rationals of the quantized values, so the
    recorded depth is reproducible bit-for-bit."""
    columns = []
    for j in range(fam.m):
        col = []
        for i in range(fam.ell):
            p = fam.grid[i][j]
            expr = sum(
                sympy.Rational(c.numer, 1 << c.shift) * _N**k
                for k, c in enumerate(p.coefficients)
            )
            col.append(sympy.expand(expr))
        columns.append(tuple(col))
    if not any(_column_nonconst(c) for c in columns):
        raise ValueError("the family has no nonconstant entry to reduce")

    steps = []
    depth = 0
    while any(_column_nonconst(c) for c in columns):
        if depth >= max_depth:
            trace = PetTrace(
                steps=tuple(steps),
                depth=depth,
                k_estimate=depth + 1,
                complete=False,
            )
            raise DepthGuardExceeded(trace)
        before = _render(columns)
        pivot = _pick_pivot(columns)
        h = sympy.Symbol(f"h{depth + 1}")
        pivot_col = columns[pivot]
        new_cols = []
        seen = set()
        for col in columns:
            shifted = tuple(
                sympy.expand(e.subs(_N, _N + h) - p)
                for e, p in zip(col, pivot_col)
            )
            plain = tuple(
                sympy.expand(e - p) for e, p in zip(col, pivot_col)
            )
            for cand in (shifted, plain):
                if not _column_nonconst(cand):
                    continue
                key = _column_key(cand)
                if key in seen:
                    continue
                seen.add(key)
                new_cols.append(cand)
        columns = new_cols
        depth += 1
        steps.append(
            PetStep(
                family_before=before,
                pivot_index=pivot,
                family_after=_render(columns),
            )
        )
    return PetTrace(
        steps=tuple(steps),
        depth=depth,
        k_estimate=depth + 1,
        complete=True,
    )


# ---------------------------------------------------------------------------
# Numeric van der Corput inequality
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VdcReport:
    lhs: float
    rhs: float
    H: int
    scales: tuple[int, ...]

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs


def vdc_numeric_check(
    v: np.ndarray, H: int, scales: tuple[int, ...] | None = None
) -> VdcReport:
    """Truncated comparison of ||avg v_n||^2 against 4 avg_h |avg
    <v_{n+h}, v_n>|, with each limsup realized as the max over two window
    scales.

    ``v`` has one vector per row; the window must exceed 2H."""
    v = np.asarray(v, dtype=np.complex128)
    if v.ndim == 1:
        v = v[:, None]
    N = v.shape[0]
    if N <= 2 * H:
        raise ValueError("window must be longer than 2H")
    if scales is None:
        scales = (N // 2, N)
    lhs = 0.0
    for Ns in scales:
        mean_vec = v[:Ns].mean(axis=0)
        lhs = max(lhs, float(np.sum(np.abs(mean_vec) ** 2)))
    total = 0.0
    for h in range(1, H + 1):
        inner = np.sum(v[h:] * np.conj(v[:-h]), axis=1)
        best = 0.0
        for Ns in scales:
            Ns = min(Ns, len(inner))
            best = max(best, abs(complex(inner[:Ns].mean())))
        total += best
    return VdcReport(lhs=lhs, rhs=4.0 * total / H, H=H, scales=tuple(scales))
