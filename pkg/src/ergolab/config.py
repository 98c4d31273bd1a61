"""Config-file schema for the scenario runner.

Configs are plain JSON.  Real numbers may be written as JSON numbers, as
decimal strings ("0.25", "-3", "1/3"), or as the named constants "sqrt2",
"sqrt3", "sqrt5", "sqrt6", "phi", "e", "pi"; every one of them is quantized
once onto the dyadic 2**-64 grid before any computation.

Declarations:

system:
    {"factors": [{"kind": "cyclic", "q": 12} | {"kind": "torus", "dim": 2}],
     "transformations": [[action, ...], ...],   # one action per factor
     "samples": 512}                            # sample count for tori
    with action one of
    {"kind": "identity"} | {"kind": "shift", "r": 1}
    | {"kind": "rotation", "alpha": ["sqrt2"]}
    | {"kind": "automorphism", "matrix": [[2, 1], [1, 1]]}

polynomial:    list of coefficients, constant term first, e.g. [0, "sqrt2"]
observable:    [{"coeff": 1.0, "freqs": [1]}, ...]   (coeff may be [re, im];
               freqs has one entry per factor: an int for a cyclic factor, a
               list of ints for a torus factor)
windows:       {"kind": "doubling", "start": 64, "count": 4, "base": 0}
               or {"kind": "explicit", "windows": [[0, 64], [0, 128], ...]}
basis:         {"kind": "torus", "frequencies": ["sqrt2"], "size": 8,
                "cross_depth": 1, "taper": false, "smoothed_delta": null}
               or {"kind": "factorial" | "factorial-shifted", "k": 2}
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from .correlate import WindowFamily
from .fixedpoint import FixedReal
from .nil import NilBasis, make_basis
from .poly import RealPolynomial
from .systems import (
    AutomorphismAction,
    CommutingSystem,
    CyclicFactor,
    IdentityAction,
    Observable,
    RotationAction,
    Sampler,
    ShiftAction,
    TorusFactor,
    Transformation,
)


class ConfigError(ValueError):
    """The config file is malformed or references undefined declarations."""


def load_config(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    return cfg


def require(cfg: dict, key: str, context: str = "config"):
    if key not in cfg:
        raise ConfigError(f"{context} is missing required key {key!r}")
    return cfg[key]


def parse_real(value) -> FixedReal:
    try:
        if isinstance(value, bool):
            raise TypeError("booleans are not numbers")
        if isinstance(value, (int, float)):
            return FixedReal.coerce(value)
        if isinstance(value, str):
            return FixedReal.from_decimal(value)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"cannot parse real number {value!r}: {exc}") from exc
    raise ConfigError(f"cannot parse real number {value!r}")


def parse_fraction(value) -> Fraction:
    try:
        if isinstance(value, int):
            return Fraction(value)
        if isinstance(value, str):
            return Fraction(value)
        if isinstance(value, float):
            return Fraction(value).limit_denominator(10**6)
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"cannot parse fraction {value!r}: {exc}") from exc
    raise ConfigError(f"cannot parse fraction {value!r}")


def parse_polynomial(coeffs) -> RealPolynomial:
    if not isinstance(coeffs, list) or not coeffs:
        raise ConfigError("a polynomial is a nonempty list of coefficients")
    return RealPolynomial(tuple(parse_real(c) for c in coeffs))


def _parse_factor(decl) -> CyclicFactor | TorusFactor:
    kind = require(decl, "kind", "factor")
    if kind == "cyclic":
        return CyclicFactor(int(require(decl, "q", "cyclic factor")))
    if kind == "torus":
        return TorusFactor(int(require(decl, "dim", "torus factor")))
    raise ConfigError(f"unknown factor kind {kind!r}")


def _parse_action(decl, factor):
    kind = require(decl, "kind", "action")
    if kind == "identity":
        return IdentityAction()
    if kind == "shift":
        if not isinstance(factor, CyclicFactor):
            raise ConfigError("shift actions need a cyclic factor")
        return ShiftAction(q=factor.q, r=int(require(decl, "r", "shift")))
    if kind == "rotation":
        if not isinstance(factor, TorusFactor):
            raise ConfigError("rotation actions need a torus factor")
        alpha = require(decl, "alpha", "rotation")
        if len(alpha) != factor.dim:
            raise ConfigError("rotation vector length must match the torus dim")
        return RotationAction(alpha=tuple(parse_real(a) for a in alpha))
    if kind == "automorphism":
        if not isinstance(factor, TorusFactor):
            raise ConfigError("automorphism actions need a torus factor")
        matrix = require(decl, "matrix", "automorphism")
        if len(matrix) != factor.dim or any(
            len(row) != factor.dim for row in matrix
        ):
            raise ConfigError("automorphism matrix shape must match the torus")
        try:
            return AutomorphismAction(
                matrix=tuple(tuple(int(x) for x in row) for row in matrix)
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown action kind {kind!r}")


def parse_system(decl, seed: int | None = None) -> CommutingSystem:
    factors = tuple(
        _parse_factor(f) for f in require(decl, "factors", "system")
    )
    trans = []
    for row in require(decl, "transformations", "system"):
        if len(row) != len(factors):
            raise ConfigError(
                "each transformation needs one action per factor"
            )
        trans.append(
            Transformation(
                tuple(_parse_action(a, f) for a, f in zip(row, factors))
            )
        )
    samples = int(decl.get("samples", 512))
    sampler = Sampler(seed=0 if seed is None else int(seed), count=samples)
    if not all(isinstance(f, CyclicFactor) for f in factors) and seed is None:
        raise ConfigError("a seed is mandatory for sampled (torus) systems")
    try:
        return CommutingSystem(
            space=factors, transformations=tuple(trans), sampler=sampler
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def parse_observable(decl) -> Observable:
    if not isinstance(decl, list) or not decl:
        raise ConfigError("an observable is a nonempty list of terms")
    terms = []
    for term in decl:
        coeff = term.get("coeff", 1.0)
        if isinstance(coeff, list):
            if len(coeff) != 2:
                raise ConfigError("complex coeff must be [re, im]")
            coeff = complex(coeff[0], coeff[1])
        else:
            coeff = complex(coeff)
        freqs = require(term, "freqs", "observable term")
        terms.append(
            (
                coeff,
                tuple(
                    tuple(int(x) for x in f) if isinstance(f, list) else int(f)
                    for f in freqs
                ),
            )
        )
    from .systems import Character

    return Observable(
        tuple((c, Character(freqs)) for c, freqs in terms)
    )


def parse_windows(decl) -> WindowFamily:
    kind = require(decl, "kind", "windows")
    try:
        if kind == "doubling":
            return WindowFamily.doubling(
                int(require(decl, "start", "windows")),
                int(require(decl, "count", "windows")),
                base=int(decl.get("base", 0)),
            )
        if kind == "explicit":
            wins = require(decl, "windows", "windows")
            return WindowFamily(tuple((int(a), int(b)) for a, b in wins))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown windows kind {kind!r}")


def parse_window(decl) -> tuple[int, int]:
    if (
        not isinstance(decl, list)
        or len(decl) != 2
        or decl[0] >= decl[1]
    ):
        raise ConfigError("a window is a [start, stop] pair with start < stop")
    return int(decl[0]), int(decl[1])


def parse_basis(decl) -> NilBasis:
    kind = require(decl, "kind", "basis")
    try:
        if kind == "torus":
            smoothed = decl.get("smoothed_delta")
            return make_basis(
                "torus",
                frequencies=tuple(
                    parse_real(f) for f in require(decl, "frequencies", "basis")
                ),
                size=int(decl.get("size", 1)),
                cross_depth=int(decl.get("cross_depth", 1)),
                smoothed_delta=(
                    None if smoothed is None else parse_fraction(smoothed)
                ),
                taper=bool(decl.get("taper", False)),
            )
        if kind in ("factorial", "factorial-shifted"):
            return make_basis(kind, k=int(require(decl, "k", "basis")))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown basis kind {kind!r}")
