"""Desk-scale laboratory for integer-part polynomial correlation sequences
over commuting measure-preserving systems.

Everything that can be exact is exact: real inputs are quantized once onto
the dyadic 2**-64 grid, torus dynamics are 64-bit wraparound arithmetic,
finite systems are fully enumerated, and the floating point that remains is
confined to final magnitudes of exactly-accumulated quantities.
"""

from .fixedpoint import FixedReal, ZERO, ONE, floor_identity_holds
from .poly import (
    RealPolynomial,
    eval_floor,
    eval_frac,
    frac_density,
    sup_frac_density,
)
from .systems import (
    CommutingSystem,
    CyclicFactor,
    Observable,
    Sampler,
    TorusFactor,
    Transformation,
)
from .correlate import (
    CorrelationSpec,
    SequenceSample,
    WindowFamily,
    cauchy_report,
    corr_seq,
    corr_seq_bruteforce,
    multi_average,
    uniform_seminorm,
)
from .seminorms import (
    HKSeminormConfig,
    SeqSeminormConfig,
    hk_seminorm,
    hk_seminorm_bruteforce,
    hk_inverse_direction_checks,
    seq_seminorm,
)
from .nil import (
    HeisenbergElement,
    NilBasis,
    Nilsequence,
    heisenberg_pow,
    make_basis,
    malcev_reduce,
    nilseq_values,
)
from .suspension import (
    SuspensionFlow,
    SuspensionPoint,
    flow_apply,
    floor_scaling_check,
    flow_power_identity_check,
    seminorm_transfer_check,
    transfer_constants,
    weak_anti_uniform_bound,
)
from .pet import (
    PolyFamily,
    is_nice,
    is_r_nice,
    pet_reduce,
    vdc_numeric_check,
    vectorize_family,
)
from .decomp import decompose, gram_project, residual_orthogonality

__version__ = "0.1.0"

__all__ = [
    "FixedReal",
    "ZERO",
    "ONE",
    "floor_identity_holds",
    "RealPolynomial",
    "eval_floor",
    "eval_frac",
    "frac_density",
    "sup_frac_density",
    "CommutingSystem",
    "CyclicFactor",
    "TorusFactor",
    "Observable",
    "Sampler",
    "Transformation",
    "CorrelationSpec",
    "SequenceSample",
    "WindowFamily",
    "cauchy_report",
    "corr_seq",
    "corr_seq_bruteforce",
    "multi_average",
    "uniform_seminorm",
    "HKSeminormConfig",
    "SeqSeminormConfig",
    "hk_seminorm",
    "hk_seminorm_bruteforce",
    "hk_inverse_direction_checks",
    "seq_seminorm",
    "HeisenbergElement",
    "NilBasis",
    "Nilsequence",
    "heisenberg_pow",
    "make_basis",
    "malcev_reduce",
    "nilseq_values",
    "SuspensionFlow",
    "SuspensionPoint",
    "flow_apply",
    "floor_scaling_check",
    "flow_power_identity_check",
    "seminorm_transfer_check",
    "transfer_constants",
    "weak_anti_uniform_bound",
    "PolyFamily",
    "is_nice",
    "is_r_nice",
    "pet_reduce",
    "vdc_numeric_check",
    "vectorize_family",
    "decompose",
    "gram_project",
    "residual_orthogonality",
    "__version__",
]
