"""Config-driven scenario runner.

Usage:
    ergolab run <config.json> [--out DIR]
    ergolab list
    ergolab validate <config.json>

Exit codes: 0 all declared checks pass; 2 a check failed; 3 the run could
not certify its target (decomposition above epsilon, depth or budget guard);
4 config error.  Set ERGOLAB_THREADS to cap BLAS thread counts.

Every run writes report.json, one or more CSV tables, and a rendered figure
into the output directory.  Re-running with the same config and seed gives
byte-identical CSV/JSON except for the report's "timing" key.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .config import (
    ConfigError,
    parse_basis,
    parse_fraction,
    parse_observable,
    parse_polynomial,
    parse_real,
    parse_system,
    parse_window,
    parse_windows,
)
from .correlate import (
    CorrelationSpec,
    SequenceSample,
    cauchy_report,
    corr_seq,
    corr_seq_bruteforce,
    multi_average,
)
from .decomp import decompose, residual_orthogonality
from .fixedpoint import FixedReal
from .nil import nilseq_values
from .pet import DepthGuardExceeded, PolyFamily, is_r_nice, pet_reduce
from .poly import frac_density, sup_frac_density
from .report import (
    RunReport,
    new_figure,
    save_figure,
    write_csv,
    write_report,
    write_sequence_csv,
)
from .seminorms import (
    HKSeminormConfig,
    InsufficientWindowError,
    hk_inverse_direction_checks,
    hk_seminorm,
)
from .suspension import (
    SuspensionFlow,
    SuspensionPoint,
    flow_power_identity_check,
    seminorm_transfer_check,
    transfer_constants,
)
from .systems import BudgetError, CommutingSystem

_MASK64 = (1 << 64) - 1


class NonCertification(RuntimeError):
    """The run finished but could not certify its declared target."""


# ---------------------------------------------------------------------------
# Shared builders
# ---------------------------------------------------------------------------


def _build_spec(cfg: dict, allow_null_f0: bool) -> CorrelationSpec:
    system = parse_system(
        cfgmod.require(cfg, "system"), seed=cfg.get("seed")
    )
    grid = tuple(
        tuple(parse_polynomial(p) for p in row)
        for row in cfgmod.require(cfg, "polynomials")
    )
    obs_decls = cfgmod.require(cfg, "observables")
    observables = []
    for i, decl in enumerate(obs_decls):
        if decl is None:
            if i == 0 and allow_null_f0:
                observables.append(None)
                continue
            raise ConfigError("only the first observable may be null")
        observables.append(parse_observable(decl))
    try:
        return CorrelationSpec(
            system=system, iterates=grid, observables=tuple(observables)
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _tol(cfg: dict, name: str, default: float) -> float:
    return float(cfg.get("tolerances", {}).get(name, default))


# ---------------------------------------------------------------------------
# Scenarios
# ---------------------------------------------------------------------------


def run_correlate(cfg: dict, out: Path) -> RunReport:
    spec = _build_spec(cfg, allow_null_f0=False)
    window = parse_window(cfgmod.require(cfg, "window"))
    report = RunReport(
        scenario="correlate",
        claim=(
            "Correlation sequences of commuting transformations along "
            "integer parts of real polynomial iterates are bounded by 1 "
            "and exactly computable on finite systems."
        ),
    )
    sample = corr_seq(spec, window)
    sup = float(np.max(np.abs(sample.values)))
    report.add_check("bounded_by_one", 1.0 + 1e-9 - sup,
                     detail=f"max |a(n)| = {sup:.6g}")
    if cfg.get("oracle", False):
        if not spec.system.is_finite:
            raise ConfigError("the brute-force oracle needs a finite system")
        oracle = corr_seq_bruteforce(spec, window)
        diff = float(np.max(np.abs(sample.values - oracle.values)))
        report.add_check(
            "matches_bruteforce_oracle",
            _tol(cfg, "oracle", 1e-12) - diff,
            detail=f"max deviation {diff:.3g}",
        )
    report.results = {
        "window": list(window),
        "provenance": sample.provenance,
        "sup": sup,
        "mean": complex(np.mean(sample.values)),
    }
    csv_path = write_sequence_csv(out, "sequence.csv", sample)
    fig = new_figure()
    ax = fig.add_subplot(111)
    ns = np.arange(window[0], window[1])
    ax.plot(ns, sample.values.real, lw=0.8, label="re a(n)")
    ax.plot(ns, sample.values.imag, lw=0.8, label="im a(n)")
    ax.set_xlabel("n")
    ax.set_title("correlation sequence")
    ax.legend()
    fig_path = save_figure(fig, out, "sequence.png")
    report.artifacts = {"csv": [csv_path.name], "figure": [fig_path.name]}
    return report


def run_converge(cfg: dict, out: Path) -> RunReport:
    spec = _build_spec(cfg, allow_null_f0=True)
    family = parse_windows(cfgmod.require(cfg, "windows"))
    report = RunReport(
        scenario="converge",
        claim=(
            "Averages of products of commuting transformations along "
            "integer-part polynomial iterates converge in L2: consecutive "
            "ladder averages become Cauchy."
        ),
    )
    try:
        table = cauchy_report(spec, family)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    tail_tol = _tol(cfg, "tail", 1e-9)
    report.add_check(
        "tail_difference_small",
        tail_tol - table.tail_difference(),
        detail=f"last consecutive L2 difference {table.tail_difference():.3g}",
    )
    report.results = {
        "windows": [list(w) for w in table.windows],
        "l2_norms": list(table.l2_norms),
        "differences": list(table.differences),
    }
    rows = []
    for i, w in enumerate(table.windows):
        rows.append(
            (i, w[1] - w[0], table.l2_norms[i],
             table.differences[i - 1] if i else "")
        )
    csv_path = write_csv(
        out, "convergence.csv",
        ["index", "length", "l2_norm", "difference_to_previous"], rows,
    )
    fig = new_figure()
    ax = fig.add_subplot(111)
    lengths = [w[1] - w[0] for w in table.windows][1:]
    floor = 1e-17
    ax.semilogy(lengths, [max(d, floor) for d in table.differences], "o-")
    ax.set_xlabel("window length")
    ax.set_ylabel("consecutive L2 difference")
    ax.set_title("Cauchy differences of the averages")
    fig_path = save_figure(fig, out, "convergence.png")
    report.artifacts = {"csv": [csv_path.name], "figure": [fig_path.name]}
    return report


def run_zero_limit(cfg: dict, out: Path) -> RunReport:
    spec = _build_spec(cfg, allow_null_f0=True)
    family = parse_windows(cfgmod.require(cfg, "windows"))
    report = RunReport(
        scenario="zero-limit",
        claim=(
            "On weakly mixing systems the averaged product along a nice "
            "integer-part polynomial family tends to 0 in L2."
        ),
    )
    norms = []
    for w in family.windows:
        _, l2 = multi_average(spec, w)
        norms.append(l2)
    bound = _tol(cfg, "l2", 0.05)
    report.add_check(
        "final_l2_below_bound", bound - norms[-1],
        detail=f"L2 at the largest window {norms[-1]:.4g}",
    )
    report.add_check(
        "l2_shrinks_at_larger_window", norms[-2] - norms[-1],
        detail=f"{norms[-2]:.4g} -> {norms[-1]:.4g}",
    )
    report.results = {
        "windows": [list(w) for w in family.windows],
        "l2_norms": norms,
    }
    csv_path = write_csv(
        out, "zero_limit.csv", ["length", "l2_norm"],
        [(b - a, v) for (a, b), v in zip(family.windows, norms)],
    )
    fig = new_figure()
    ax = fig.add_subplot(111)
    ax.loglog([b - a for a, b in family.windows], norms, "o-")
    ax.set_xlabel("window length")
    ax.set_ylabel("L2 norm of the average")
    ax.set_title("decay of the averaged product")
    fig_path = save_figure(fig, out, "zero_limit.png")
    report.artifacts = {"csv": [csv_path.name], "figure": [fig_path.name]}
    return report


def run_seminorm(cfg: dict, out: Path) -> RunReport:
    system = parse_system(cfgmod.require(cfg, "system"), seed=cfg.get("seed"))
    f = parse_observable(cfgmod.require(cfg, "observable"))
    t_idx = int(cfg.get("transformation", 0))
    if not 0 <= t_idx < len(system.transformations):
        raise ConfigError("transformation index out of range")
    T = system.transformations[t_idx]
    ks = [int(k) for k in cfgmod.require(cfg, "ks")]
    report = RunReport(
        scenario="seminorm",
        claim=(
            "Cube seminorms grade uniformity: a character is invisible "
            "below its level and has full seminorm at it, and the levels "
            "are monotone and symmetric under time reversal."
        ),
    )
    values = {}
    for k in ks:
        hk_cfg = HKSeminormConfig(
            k=k,
            N=int(cfg.get("N", 64)),
            exact=bool(cfg.get("exact", True)),
            budget=int(cfg.get("budget", 100_000_000)),
        )
        values[k] = hk_seminorm(f, system, T, hk_cfg)
    for expect in cfg.get("expect", []):
        k = int(cfgmod.require(expect, "k", "expect entry"))
        target = float(cfgmod.require(expect, "value", "expect entry"))
        tol = float(expect.get("tol", 1e-9))
        got = values[k]
        report.add_check(
            f"seminorm_k{k}_equals_{target:g}",
            tol - abs(got - target),
            detail=f"|||f|||_{k} = {got:.6g}",
        )
    inv_margins = None
    if cfg.get("inverse_checks") is not None:
        k = int(cfg["inverse_checks"])
        inv = hk_inverse_direction_checks(f, system, T, k)
        inv_margins = {
            "tensor": inv.tensor_margin,
            "monotone": inv.mono_margin,
            "symmetry": inv.symmetry_margin,
        }
        tol = _tol(cfg, "margin", 1e-9)
        for name, margin in inv_margins.items():
            report.add_check(f"{name}_relation_k{k}", margin, tolerance=tol)
    report.results = {
        "seminorms": {str(k): v for k, v in values.items()},
        "inverse_margins": inv_margins,
    }
    csv_path = write_csv(
        out, "seminorms.csv", ["k", "seminorm"],
        [(k, values[k]) for k in ks],
    )
    fig = new_figure()
    ax = fig.add_subplot(111)
    ax.bar([str(k) for k in ks], [values[k] for k in ks])
    ax.set_xlabel("level k")
    ax.set_ylabel("cube seminorm")
    ax.set_title("uniformity seminorm by level")
    fig_path = save_figure(fig, out, "seminorms.png")
    report.artifacts = {"csv": [csv_path.name], "figure": [fig_path.name]}
    return report


def run_suspension(cfg: dict, out: Path) -> RunReport:
    system = parse_system(cfgmod.require(cfg, "system"), seed=cfg.get("seed"))
    if not system.is_finite:
        raise ConfigError("the suspension scenario needs a finite system")
    f = parse_observable(cfgmod.require(cfg, "observable"))
    t_idx = int(cfg.get("transformation", 0))
    if not 0 <= t_idx < len(system.transformations):
        raise ConfigError("transformation index out of range")
    T = system.transformations[t_idx]
    s = parse_fraction(cfgmod.require(cfg, "s"))
    if not 0 < s <= 1:
        raise ConfigError("the time scale s must lie in (0, 1]")
    k = int(cfg.get("k", 1))
    report = RunReport(
        scenario="suspension",
        claim=(
            "Uniformity seminorms transfer between a system and its unit "
            "suspension sampled at a real time scale, with the explicit "
            "constant c_k s^k (floor(1/s)+1)^k."
        ),
    )
    single = CommutingSystem(
        space=system.space, transformations=(T,), sampler=system.sampler
    )
    flow = SuspensionFlow(single, m=1)
    from .systems import enumerate_points

    base_pt = enumerate_points(system.space)[0]
    pt = SuspensionPoint(base_pt, flow.zero_grid())
    flow_report = flow_power_identity_check(
        flow,
        FixedReal.from_fraction(s),
        pt,
        int(cfg.get("n_max", 256)),
        f=f,
    )
    report.add_check(
        "flow_power_identity_exact",
        0.0 if flow_report.all_exact else -1.0,
        detail=f"checked n <= {flow_report.n_max}",
    )
    transfer = seminorm_transfer_check(
        f, system, T, s, k, budget=int(cfg.get("budget", 100_000_000))
    )
    tol = _tol(cfg, "margin", 1e-6)
    report.add_check(
        "transfer_bound_holds", transfer.margin, tolerance=tol,
        detail=(
            f"suspension {transfer.suspension_seminorm:.6g} <= "
            f"{transfer.c_ks:.6g} * base {transfer.base_seminorm:.6g}"
        ),
    )
    c_k, c_ks = transfer_constants(k, FixedReal.from_fraction(s))
    report.results = {
        "s": str(s),
        "k": k,
        "c_k": c_k,
        "c_ks": c_ks,
        "base_seminorm": transfer.base_seminorm,
        "suspension_seminorm": transfer.suspension_seminorm,
        "flow_identity": {
            "checked": flow_report.checked,
            "all_exact": flow_report.all_exact,
        },
    }
    csv_path = write_csv(
        out, "transfer.csv", ["quantity", "value"],
        [
            ("c_k", c_k),
            ("c_ks", c_ks),
            ("base_seminorm", transfer.base_seminorm),
            ("suspension_seminorm", transfer.suspension_seminorm),
            ("margin", transfer.margin),
        ],
    )
    fig = new_figure()
    ax = fig.add_subplot(111)
    ax.bar(
        ["suspension", "c_ks * base"],
        [transfer.suspension_seminorm, c_ks * transfer.base_seminorm],
    )
    ax.set_ylabel(f"level-{k} seminorm")
    ax.set_title("seminorm transfer bound")
    fig_path = save_figure(fig, out, "transfer.png")
    report.artifacts = {"csv": [csv_path.name], "figure": [fig_path.name]}
    return report


def run_pet(cfg: dict, out: Path) -> RunReport:
    grid = cfgmod.require(cfg, "polynomials")
    fam = PolyFamily.from_coeff_grid(
        [[_coeff_list(p) for p in row] for row in grid]
    )
    report = RunReport(
        scenario="pet",
        claim=(
            "Repeated van der Corput substitution reduces an integer-part "
            "polynomial family to constants in finitely many steps, giving "
            "a finite uniformity level for its averages."
        ),
    )
    trace = pet_reduce(fam, max_depth=int(cfg.get("max_depth", 12)))
    trace2 = pet_reduce(fam, max_depth=int(cfg.get("max_depth", 12)))
    report.add_check(
        "reduction_deterministic",
        0.0 if trace == trace2 else -1.0,
    )
    if "expect_depth" in cfg:
        want = int(cfg["expect_depth"])
        report.add_check(
            f"depth_equals_{want}",
            0.0 if trace.depth == want else -abs(trace.depth - want),
            detail=f"depth {trace.depth}",
        )
    nice = None
    if cfg.get("check_nice", False):
        verdict = is_r_nice(fam)
        nice = bool(verdict)
        report.add_check(
            "family_is_nice",
            0.0 if verdict else -1.0,
            detail=verdict.failing_condition or "",
        )
    report.results = {
        "depth": trace.depth,
        "k_estimate": trace.k_estimate,
        "complete": trace.complete,
        "nice": nice,
        "steps": [
            {
                "pivot": st.pivot_index,
                "columns_before": len(st.family_before),
                "columns_after": len(st.family_after),
                "family_after": [list(c) for c in st.family_after],
            }
            for st in trace.steps
        ],
    }
    csv_path = write_csv(
        out, "reduction.csv", ["step", "pivot_index", "columns_after"],
        [(i + 1, st.pivot_index, len(st.family_after))
         for i, st in enumerate(trace.steps)],
    )
    fig = new_figure()
    ax = fig.add_subplot(111)
    counts = [len(trace.steps[0].family_before)] + [
        len(st.family_after) for st in trace.steps
    ]
    ax.plot(range(len(counts)), counts, "o-")
    ax.set_xlabel("reduction step")
    ax.set_ylabel("nonconstant columns")
    ax.set_title(f"van der Corput reduction (depth {trace.depth})")
    fig_path = save_figure(fig, out, "reduction.png")
    report.artifacts = {"csv": [csv_path.name], "figure": [fig_path.name]}
    return report


def _coeff_list(p):
    if not isinstance(p, list):
        raise ConfigError("each polynomial entry must be a coefficient list")
    return [parse_real(c) for c in p]


def _decompose_input(cfg: dict) -> SequenceSample:
    decl = cfgmod.require(cfg, "sequence")
    kind = cfgmod.require(decl, "kind", "sequence")
    window = parse_window(cfgmod.require(cfg, "window"))
    if kind == "floor-product":
        inner = parse_real(cfgmod.require(decl, "inner", "sequence"))
        outer = parse_real(cfgmod.require(decl, "outer", "sequence"))
        raw_i = inner.raw64
        raw_o = outer.raw64 & _MASK64
        start, stop = window
        phases = np.array(
            [
                ((((n * raw_i) >> 64) * raw_o) & _MASK64) / float(1 << 64)
                for n in range(start, stop)
            ]
        )
        return SequenceSample(
            window=window,
            values=np.exp(2j * np.pi * phases),
            provenance={"kind": "floor-product"},
        )
    if kind == "correlation":
        spec = _build_spec(decl, allow_null_f0=False)
        return corr_seq(spec, window)
    raise ConfigError(f"unknown sequence kind {kind!r}")


def run_decompose(cfg: dict, out: Path) -> RunReport:
    sample = _decompose_input(cfg)
    ladder = [parse_basis(b) for b in cfgmod.require(cfg, "ladder")]
    if not ladder:
        raise ConfigError("the ladder needs at least one basis")
    epsilon = float(cfgmod.require(cfg, "epsilon"))
    report = RunReport(
        scenario="decompose",
        claim=(
            "A bounded sequence driven by integer-part polynomial phases "
            "splits into a structured almost periodic part bounded by 1 "
            "plus a residual small in L2."
        ),
    )
    try:
        result = decompose(sample, ladder, epsilon)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    orth = residual_orthogonality(result.projection)
    tol = _tol(cfg, "orthogonality", 1e-6)
    report.add_check(
        "projection_residual_orthogonal",
        tol - float(orth.max()),
        detail=f"max |<e, psi>| = {float(orth.max()):.3g}",
    )
    mono = min(
        (a - b for a, b in zip(result.residuals, result.residuals[1:])),
        default=0.0,
    )
    report.add_check(
        "residuals_nonincreasing", mono, tolerance=_tol(cfg, "monotone", 1e-9)
    )
    report.results = {
        "certified": result.certified,
        "ladder_index": result.ladder_index,
        "residuals": list(result.residuals),
        "residual_seminorm": result.residual_seminorm,
        "nil_sup": result.nil_sup,
        "damped": result.damped,
        "rescaled": result.rescaled,
        "epsilon": epsilon,
        "coefficient_count": len(result.coefficients),
    }
    nil = result.nil_values()
    resid = sample.values - nil
    start = sample.window[0]
    csv_path = write_csv(
        out,
        "decomposition.csv",
        ["n", "re(a)", "im(a)", "re(nil)", "im(nil)", "re(e)", "im(e)"],
        (
            (start + i, a.real, a.imag, p.real, p.imag, r.real, r.imag)
            for i, (a, p, r) in enumerate(zip(sample.values, nil, resid))
        ),
    )
    ladder_csv = write_csv(
        out, "residuals.csv", ["ladder_index", "residual"],
        list(enumerate(result.residuals)),
    )
    fig = new_figure(8.0, 6.0)
    ax = fig.add_subplot(211)
    show = min(200, len(sample.values))
    ns = np.arange(start, start + show)
    ax.plot(ns, sample.values.real[:show], lw=0.8, label="re a(n)")
    ax.plot(ns, nil.real[:show], lw=0.8, label="re structured part")
    ax.set_xlabel("n")
    ax.legend()
    ax2 = fig.add_subplot(212)
    ax2.semilogy(range(len(result.residuals)), result.residuals, "o-")
    ax2.axhline(epsilon, color="gray", ls="--", label="epsilon")
    ax2.set_xlabel("ladder index")
    ax2.set_ylabel("residual L2")
    ax2.legend()
    fig_path = save_figure(fig, out, "decomposition.png")
    report.artifacts = {
        "csv": [csv_path.name, ladder_csv.name],
        "figure": [fig_path.name],
    }
    return report


def run_density(cfg: dict, out: Path) -> RunReport:
    poly = parse_polynomial(cfgmod.require(cfg, "polynomial"))
    deltas = [parse_fraction(d) for d in cfgmod.require(cfg, "deltas")]
    length = int(cfgmod.require(cfg, "length"))
    shifts = [int(s) for s in cfg.get("shifts", [0])]
    report = RunReport(
        scenario="density",
        claim=(
            "The fractional parts of a real polynomial visit the top "
            "interval [1-delta, 1) with density controlled by delta, and "
            "the density vanishes with delta."
        ),
    )
    rows = []
    densities = []
    for d in deltas:
        dens = sup_frac_density(poly, d, length, shifts=shifts)
        single = frac_density(poly, d, (1, 1 + length))
        densities.append(float(dens))
        rows.append((str(d), float(dens), single.periodic_flag))
    for expect in cfg.get("expect", []):
        d = parse_fraction(cfgmod.require(expect, "delta", "expect entry"))
        lo = float(expect.get("lo", 0.0))
        hi = float(cfgmod.require(expect, "hi", "expect entry"))
        got = float(sup_frac_density(poly, d, length, shifts=shifts))
        report.add_check(
            f"density_at_delta_{d}_in_band",
            min(got - lo, hi - got),
            detail=f"density {got:.6g} vs [{lo:g}, {hi:g}]",
        )
    report.results = {
        "length": length,
        "shifts": shifts,
        "densities": {str(d): v for d, v in zip(deltas, densities)},
    }
    csv_path = write_csv(
        out, "density.csv", ["delta", "density", "periodic"], rows
    )
    fig = new_figure()
    ax = fig.add_subplot(111)
    xs = [float(d) for d in deltas]
    ax.plot(xs, densities, "o-", label="measured density")
    ax.plot(xs, xs, "--", color="gray", label="delta")
    ax.set_xlabel("delta")
    ax.set_ylabel("density of {p(n)} in [1-delta, 1)")
    ax.legend()
    ax.set_title("top-interval visit density")
    fig_path = save_figure(fig, out, "density.png")
    report.artifacts = {"csv": [csv_path.name], "figure": [fig_path.name]}
    return report


# ---------------------------------------------------------------------------
# Registry and entry points
# ---------------------------------------------------------------------------


SCENARIOS = {
    "correlate": (
        run_correlate,
        ["system", "polynomials", "observables", "window"],
        "evaluate a correlation sequence, optionally against the "
        "brute-force oracle",
    ),
    "converge": (
        run_converge,
        ["system", "polynomials", "observables", "windows"],
        "L2-Cauchy ladder for the averaged product",
    ),
    "zero-limit": (
        run_zero_limit,
        ["system", "polynomials", "observables", "windows"],
        "decay of the averaged product on weakly mixing systems",
    ),
    "seminorm": (
        run_seminorm,
        ["system", "observable", "ks"],
        "cube seminorms by level, with comparison relations",
    ),
    "suspension": (
        run_suspension,
        ["system", "observable", "s"],
        "flow identities and the seminorm transfer constant",
    ),
    "pet": (
        run_pet,
        ["polynomials"],
        "van der Corput reduction depth of a polynomial family",
    ),
    "decompose": (
        run_decompose,
        ["sequence", "window", "ladder", "epsilon"],
        "structured-plus-residual split over a basis ladder",
    ),
    "density": (
        run_density,
        ["polynomial", "deltas", "length"],
        "visit density of fractional parts near 1",
    ),
}


def _limit_threads():
    raw = os.environ.get("ERGOLAB_THREADS")
    if not raw:
        return
    try:
        n = max(1, int(raw))
    except ValueError:
        return
    try:
        from threadpoolctl import threadpool_limits

        threadpool_limits(limits=n)
    except ImportError:
        pass


def run_scenario(cfg: dict, out_dir: Path) -> int:
    name = cfgmod.require(cfg, "scenario")
    if name not in SCENARIOS:
        raise ConfigError(
            f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}"
        )
    fn, _, _ = SCENARIOS[name]
    t0 = time.perf_counter()
    report = fn(cfg, out_dir)
    seconds = time.perf_counter() - t0
    path = write_report(report, out_dir, cfg, seconds)
    for check in report.checks:
        state = "PASS" if check.passed else "FAIL"
        print(f"  [{state}] {check.name} (margin {check.margin:+.3g})")
    print(f"report written to {path}")
    if report.results.get("certified") is False:
        print("NOT CERTIFIED: the run did not reach its target")
        return 3
    if not report.all_passed:
        return 2
    return 0


def main(argv=None) -> int:
    _limit_threads()
    parser = argparse.ArgumentParser(
        prog="ergolab",
        description="config-driven experiments on integer-part polynomial "
        "correlation sequences",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="execute a scenario config")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=None, help="output directory")
    sub.add_parser("list", help="list available scenarios")
    p_val = sub.add_parser("validate", help="check a config without running")
    p_val.add_argument("config")
    args = parser.parse_args(argv)

    if args.command == "list":
        for name in sorted(SCENARIOS):
            _, keys, blurb = SCENARIOS[name]
            print(f"{name}: {blurb}")
            print(f"  required keys: {', '.join(keys)}")
        return 0

    try:
        cfg = cfgmod.load_config(args.config)
        name = cfgmod.require(cfg, "scenario")
        if name not in SCENARIOS:
            raise ConfigError(
                f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}"
            )
        _, keys, _ = SCENARIOS[name]
        missing = [k for k in keys if k not in cfg]
        if missing:
            raise ConfigError(
                f"scenario {name!r} config is missing keys: {missing}"
            )
        if args.command == "validate":
            print(f"config OK: scenario {name}")
            return 0
        out_dir = Path(
            args.out if args.out is not None else cfg.get("output_dir", "out")
        )
        return run_scenario(cfg, out_dir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 4
    except (BudgetError, DepthGuardExceeded, InsufficientWindowError) as exc:
        print(f"not certifiable within budget: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
