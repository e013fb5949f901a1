"""Decentralized online monotone continuous DR-submodular maximization."""

from .algorithms import (
    DmfwConfig,
    DobgaConfig,
    MonoDmfwConfig,
    Trace,
    dobga_eta,
    mono_dmfw_eta,
    run_dmfw,
    run_dobga,
    run_mono_dmfw,
    suggest_blocking,
)
from .boosting import (
    ONE_MINUS_INV_E,
    ZSampler,
    auxiliary_value,
    boosted_gradient,
    check_boosting_inequality,
    reference_boosted_gradient,
    sample_z,
)
from .evaluation import (
    RegretReport,
    alpha_regret,
    audit_counters,
    offline_opt,
    probe_report,
)
from .network import (
    Graph,
    WeightMatrix,
    build_topology,
    consensus_mix,
    metropolis_weights,
    spectral_beta,
)
from .objectives import (
    FacilityLocationObjective,
    ObjectiveStream,
    QuadraticObjective,
    facility_set_value,
    facility_stream,
    noisy_gradient,
    quadratic_stream,
)
from .oracle import LinearOracle, measured_regret
from .region import FeasibleRegion

__all__ = [name for name in dir() if not name.startswith("_")]
