"""Plug-in estimation and asymptotic inference for phi-divergences on finite supports."""
from .framework import (
    BDViolation,
    DivergenceEstimate,
    PhiSpec,
    as_bound_constants,
    asymptotic_variance,
    gradient_weights,
    j_functional,
    multinomial_covariance,
    symmetrized_value,
    symmetrized_variance,
)
from .inference import (
    EstimateRequest,
    TestResult,
    as_rate_certificate,
    confidence_interval,
    estimate,
    wald_test,
)
from .kernels import BACKEND
from .measures import MeasureKind, divergence, named_constants, parse_measure, phi_spec_for, s_alpha
from .montecarlo import SimulationConfig, SimulationReport, as_ratio_check, emit, ks_normality, run
from .pmf import (
    CountTable,
    ProbabilityVector,
    SampleBatch,
    empirical_pmf,
    joint_sup_deviation,
    sample_categorical,
    sup_deviation,
    validate_bd,
)

__version__ = "0.1.0"
