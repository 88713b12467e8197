"""Exact normed lattices, small-basis invariants and monomial section rings."""

from __future__ import annotations

from .chain import (
    ChainBoundResult,
    ChainSpec,
    GrowthBoundReport,
    chain_lambda_bound,
    graded_growth_transfer,
    ideal_quotient_growth,
    round_lift,
)
from .lambdas import (
    EnumerationCapError,
    LambdaResult,
    SmallBasisCertificate,
    enumerate_small_vectors,
    lambda_push_bound,
    lambda_q_exact,
    lambda_z_exact,
    verify_certificate,
)
from .lattice import (
    ContainmentError,
    Lattice,
    ModuleMap,
    hermite_normal_form,
    quotient_module,
    saturate,
    smith_normal_form,
)
from .models import (
    BaseLocusError,
    FubiniStudy,
    MonomialIdeal,
    MonomialModel,
    NormedGradedRing,
    Weighted,
    WeightedGeneral,
    base_locus_q,
    build_model,
    corollary_b_check,
    ideal_filtration,
    small_section_chain,
    strictly_small_span,
    sup_norm_monomial,
    sup_norm_section,
    theorem_a_check,
    veronese,
)
from .norms import (
    Ellipsoid,
    NormedModule,
    Polyhedral,
    QuotientNorm,
    Scaled,
    SubNorm,
    WeightedL1,
    WeightedSup,
    eval_norm,
    four_space_norms,
    operator_norm,
    quotient_norm_minimizer,
)
from .reals import CReal, rpow, rsqrt

__version__ = "0.1.0"
