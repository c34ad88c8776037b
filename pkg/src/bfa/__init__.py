"""Exact and Monte-Carlo analysis of boolean functions on the hypercube."""

from .core import (
    RealTable,
    SpectralSummary,
    Spectrum,
    TruthTable,
    chi,
    distance,
    inner_product,
    inverse_wht,
    maj_influence,
    maj_level_weights,
    maj_stability,
    make_family,
    parse_function,
    serialize_function,
    summary,
    wht,
)
from .gaussian import (
    GaussianSampler,
    MultilinearPoly,
    gstab,
    gstab_mc,
    rotation_bound_check,
    maj_stab_limit,
    ornstein_uhlenbeck_mc,
    rotation_sensitivity_mc,
    sheppard,
    sheppard_mc,
    wk_maj_limit,
)
from .inequalities import (
    InequalityReport,
    bonami_check,
    edge_isoperimetry_check,
    hypercontractivity_check,
    kkl_check,
    level1_check,
    mist_check,
    poincare_check,
    sse_check,
    two_pi_check,
)
from .invariance import (
    SmoothThreshold,
    WeightedSum,
    berry_esseen_gap,
    carbery_wright_mc,
    equal_weights,
    hybrid_smooth_gap,
    invariance_gap,
    rademacher_cdf_exact,
    reasonable_constant,
    smooth_threshold,
)
from .operators import (
    CorrelatedPair,
    InfluenceProfile,
    McReport,
    convolve,
    correlated_pair,
    derivative,
    edge_weight,
    influences,
    noise_operator,
    noisy_influence,
    stability,
    stability_mc,
)
from .testers import (
    QuasirandomReport,
    TestOutcome,
    blr,
    kkmo_test,
    local_decode,
    nae_test,
    nearest_linear,
    nearest_signed_dictator,
    quasirandomness,
    threexor_test,
)
from .ulc import (
    CspInstance,
    LongCodeTester,
    UlcInstance,
    csp_exact_kkmo_value,
    csp_value,
    csp_value_stream,
    decode_labelling,
    dictator_assignment,
    labelling_value,
    phi_star,
    planted_instance,
    reduce_to_csp,
    ulc_brute_opt,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
