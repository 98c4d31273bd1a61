"""Least-squares split of a bounded sequence into a structured part from a
basis of bounded generators plus a residual, with a certified residual norm.

The projection minimizes the window mean of |a - sum c_j psi_j|^2 through
the Gram matrix of time-averaged inner products <u, v> = avg u conj(v).
For all-torus bases the Gram matrix is evaluated in closed form (geometric
sums with exact wraparound phases); otherwise basis values are streamed in
chunks, so window length times basis size never materializes as one matrix.
The normal equations are solved without regularization first (a
rank-deficient Gram matrix is legitimate, e.g. when smoothed approximants
lie in the span of the characters alongside them); a ridge proportional to
trace/size is applied, and flagged, only when the unregularized solve
leaves a visible normal-equation residual.

The decomposition walks a ladder of growing bases.  A basis may carry
Fejer damping weights: the structured part is then the tapered projection,
whose sup-norm stays controlled for sequences that factor through the
damped frequency axis, while the recorded projection itself stays the pure
least-squares one (so its residual is exactly orthogonal to the basis).
The structured part is finally clamped to sup-norm 1 by rescaling, with the
excess moved into the residual and the rescaling recorded.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .nil import NilBasis, nilseq_values

CHUNK = 4096

#: Ridge scale relative to trace(gram)/size when regularization is needed.
RIDGE_SCALE = 1e-8

#: Normal-equation residual (relative to the rhs scale) that triggers the
#: ridge fallback.
SOLVE_TOLERANCE = 1e-8

_MASK64 = (1 << 64) - 1
_U64 = np.uint64
_TWO64 = float(1 << 64)


@dataclass
class GramProjection:
    basis: NilBasis
    window: tuple[int, int]
    gram: np.ndarray
    rhs: np.ndarray
    coefficients: np.ndarray
    regularization: float
    ridge_applied: bool
    mean_sq_input: float
    residual_norm: float
    orth_margins: np.ndarray
    nil_sup: float

    def nil_values(self, window: tuple[int, int] | None = None) -> np.ndarray:
        window = window or self.window
        start, stop = window
        out = np.zeros(stop - start, dtype=np.complex128)
        for lo in range(start, stop, CHUNK):
            hi = min(lo + CHUNK, stop)
            B = self.basis.values_matrix((lo, hi))
            out[lo - start : hi - start] = self.coefficients @ B
        return out


def _window_chunks(window):
    start, stop = window
    for lo in range(start, stop, CHUNK):
        yield lo, min(lo + CHUNK, stop)


def _torus_terms(basis: NilBasis):
    """Flatten an all-torus basis into (member index, coefficient with the
    offset phase folded in, 64-bit frequency numerator) triples, or None if
    any member is not a torus nilsequence."""
    rows = []
    coeffs = []
    raws = []
    for k, psi in enumerate(basis.members):
        if psi.kind != "torus":
            return None
        for c, jvec in psi.terms:
            raw_freq = 0
            raw_off = 0
            for j, gamma, beta in zip(jvec, psi.freqs, psi.offset):
                raw_freq = (raw_freq + j * gamma.raw64) & _MASK64
                raw_off = (raw_off + j * beta.raw64) & _MASK64
            rows.append(k)
            coeffs.append(c * cmath.exp(2j * cmath.pi * (raw_off / _TWO64)))
            raws.append(raw_freq)
    return rows, coeffs, raws


class _BasisEvaluator:
    """Chunked member-value matrices, with a vectorized fast path for
    all-torus bases (one phase outer product per chunk instead of one pass
    per member)."""

    def __init__(self, basis: NilBasis):
        self.basis = basis
        flat = _torus_terms(basis)
        if flat is None:
            self.flat = None
        else:
            rows, coeffs, raws = flat
            self.flat = (
                np.array(rows, dtype=np.int64),
                np.array(coeffs, dtype=np.complex128),
                np.array(raws, dtype=_U64),
            )

    def chunk(self, lo: int, hi: int) -> np.ndarray:
        if self.flat is None:
            return self.basis.values_matrix((lo, hi))
        rows, coeffs, raws = self.flat
        n = np.arange(lo, hi, dtype=np.int64).astype(_U64)
        phases = np.outer(raws, n)  # uint64 wraparound = torus mod 1
        term_vals = np.exp(2j * np.pi * (phases.astype(np.float64) / _TWO64))
        B = np.zeros((len(self.basis), hi - lo), dtype=np.complex128)
        for t in range(len(rows)):
            B[rows[t]] += coeffs[t] * term_vals[t]
        return B


def _analytic_gram(basis: NilBasis, window: tuple[int, int]):
    """Closed-form Gram matrix of a torus basis over an integer window:
    every entry is a finite sum of geometric means of e(n d/2^64), with the
    endpoint phases computed by exact 64-bit wraparound."""
    flat = _torus_terms(basis)
    if flat is None:
        return None
    rows, coeffs, raws = flat
    start, stop = window
    W = stop - start
    T = len(rows)
    raw_arr = np.array(raws, dtype=_U64)
    # Pairwise frequency differences; uint64 arithmetic wraps mod 2^64,
    # which is exactly the torus identification.
    diff = raw_arr[None, :] - raw_arr[:, None]
    mean = np.empty((T, T), dtype=np.complex128)
    zero = diff == 0
    z = np.exp(2j * np.pi * (diff.astype(np.float64) / _TWO64))
    p_stop = np.exp(
        2j * np.pi * ((diff * _U64(stop % (1 << 64))).astype(np.float64) / _TWO64)
    )
    p_start = np.exp(
        2j * np.pi * ((diff * _U64(start % (1 << 64))).astype(np.float64) / _TWO64)
    )
    denom = np.where(zero, 1.0, z - 1.0)
    mean = (p_stop - p_start) / (denom * W)
    mean[zero] = 1.0
    # Member-by-term incidence with the term coefficients.
    S = np.zeros((len(basis), T), dtype=np.complex128)
    for t, (k, c) in enumerate(zip(rows, coeffs)):
        S[k, t] += c
    # gram[k, j] = avg_n psi_j(n) conj(psi_k(n))
    return np.conj(S) @ mean @ S.T


def gram_project(a, basis: NilBasis) -> GramProjection:
    """Project a sequence sample onto the span of the basis members over the
    sample's own window."""
    if len(basis) == 0:
        raise ValueError("cannot project onto an empty basis")
    window = a.window
    W = window[1] - window[0]
    K = len(basis)
    if W < 10 * K:
        raise ValueError(
            f"window length {W} is too short for a basis of size {K} "
            f"(need at least {10 * K})"
        )
    values = np.asarray(a.values, dtype=np.complex128)

    evaluator = _BasisEvaluator(basis)
    gram = _analytic_gram(basis, window)
    accumulate_gram = gram is None
    if accumulate_gram:
        gram = np.zeros((K, K), dtype=np.complex128)
    rhs = np.zeros(K, dtype=np.complex128)
    mean_sq = 0.0
    for lo, hi in _window_chunks(window):
        B = evaluator.chunk(lo, hi)
        a_chunk = values[lo - window[0] : hi - window[0]]
        if accumulate_gram:
            gram += np.conj(B) @ B.T
        rhs += np.conj(B) @ a_chunk
        mean_sq += float(np.sum(np.abs(a_chunk) ** 2))
    if accumulate_gram:
        gram /= W
    rhs /= W
    mean_sq /= W

    coeffs, *_ = np.linalg.lstsq(gram, rhs, rcond=None)
    scale = max(float(np.max(np.abs(rhs))), 1.0)
    normal_resid = float(np.max(np.abs(gram @ coeffs - rhs)))
    ridge = 0.0
    ridge_applied = False
    if not np.all(np.isfinite(coeffs)) or normal_resid > SOLVE_TOLERANCE * scale:
        ridge = RIDGE_SCALE * float(np.real(np.trace(gram))) / K
        coeffs = np.linalg.solve(gram + ridge * np.eye(K), rhs)
        ridge_applied = True

    res_sq = 0.0
    orth = np.zeros(K, dtype=np.complex128)
    sup = 0.0
    for lo, hi in _window_chunks(window):
        B = evaluator.chunk(lo, hi)
        a_chunk = values[lo - window[0] : hi - window[0]]
        nil_chunk = coeffs @ B
        e_chunk = a_chunk - nil_chunk
        res_sq += float(np.sum(np.abs(e_chunk) ** 2))
        orth += np.conj(B) @ e_chunk
        sup = max(sup, float(np.max(np.abs(nil_chunk))))
    res_sq /= W
    orth /= W

    return GramProjection(
        basis=basis,
        window=window,
        gram=gram,
        rhs=rhs,
        coefficients=coeffs,
        regularization=ridge,
        ridge_applied=ridge_applied,
        mean_sq_input=mean_sq,
        residual_norm=float(np.sqrt(max(res_sq, 0.0))),
        orth_margins=np.abs(orth),
        nil_sup=sup,
    )


def residual_orthogonality(proj: GramProjection) -> np.ndarray:
    """|<e, psi_k>| for every basis member, measured from the residual
    values themselves (not inferred from the normal equations)."""
    return proj.orth_margins


def _applied_stats(values, basis, coeffs, window):
    """Residual L2 norm and structured-part sup when the given coefficient
    vector (damped or rescaled, not necessarily the projection's own) is
    applied to the basis."""
    res_sq = 0.0
    sup = 0.0
    start, stop = window
    evaluator = _BasisEvaluator(basis)
    for lo, hi in _window_chunks(window):
        B = evaluator.chunk(lo, hi)
        nil_chunk = coeffs @ B
        e_chunk = values[lo - start : hi - start] - nil_chunk
        res_sq += float(np.sum(np.abs(e_chunk) ** 2))
        sup = max(sup, float(np.max(np.abs(nil_chunk))))
    return float(np.sqrt(res_sq / (stop - start))), sup


@dataclass
class DecompositionReport:
    epsilon_target: float
    residuals: tuple[float, ...]
    certified: bool
    ladder_index: int | None
    residual_seminorm: float
    nil_sup: float
    damped: bool
    rescaled: bool
    coefficients: np.ndarray
    projection: GramProjection

    def nil_values(self, window: tuple[int, int] | None = None) -> np.ndarray:
        window = window or self.projection.window
        start, stop = window
        out = np.zeros(stop - start, dtype=np.complex128)
        for lo, hi in _window_chunks(window):
            B = self.projection.basis.values_matrix((lo, hi))
            out[lo - start : hi - start] = self.coefficients @ B
        return out

    def summary(self) -> str:
        state = (
            f"certified at index {self.ladder_index}"
            if self.certified
            else "not certified"
        )
        return (
            f"{state}: residual {self.residual_seminorm:.6g} "
            f"against target {self.epsilon_target:g}"
        )


def decompose(a, ladder, epsilon: float) -> DecompositionReport:
    """Walk a ladder of growing bases until the residual norm drops to
    epsilon.  Failure to certify is a result, not an exception.

    If a basis carries damping weights, the structured part applies them to
    the projection coefficients; the recorded projection stays the pure
    least-squares one.  The structured part is clamped to sup-norm 1: if it
    overshoots, the coefficients are rescaled and the excess moves into the
    residual, with the rescaling recorded."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    values = np.asarray(a.values, dtype=np.complex128)
    residuals = []
    last = None
    coeffs = None
    resid = sup = 0.0
    damped = False
    certified_at = None
    for idx, basis in enumerate(ladder):
        proj = gram_project(a, basis)
        last = proj
        coeffs = proj.coefficients
        damped = bool(basis.damping)
        if damped:
            coeffs = coeffs * np.asarray(basis.damping, dtype=np.float64)
            resid, sup = _applied_stats(values, basis, coeffs, proj.window)
        else:
            resid, sup = proj.residual_norm, proj.nil_sup
        residuals.append(resid)
        if resid <= epsilon:
            certified_at = idx
            break
    assert last is not None, "ladder must be nonempty"

    rescaled = False
    if sup > 1.0:
        rescaled = True
        coeffs = coeffs / sup
        resid, sup = _applied_stats(values, last.basis, coeffs, last.window)
        residuals[-1] = resid
        if certified_at is not None and resid > epsilon:
            certified_at = None

    return DecompositionReport(
        epsilon_target=float(epsilon),
        residuals=tuple(residuals),
        certified=certified_at is not None,
        ladder_index=certified_at,
        residual_seminorm=resid,
        nil_sup=sup,
        damped=damped,
        rescaled=rescaled,
        coefficients=coeffs,
        projection=last,
    )
