"""Verification harness: exhaustive symmetry sweeps, orbit oracles and
chi-square tests of distributional symmetry."""

from .exhaustive import (MAX_ORACLE_WORK, all_arrays, check_equivariance_exhaustive,
                         check_invariance_exhaustive, rel_deviation, verify_maximal_invariant)
from .report import TestReport
from .stats import (InsufficientSamplesError, chi2_goodness_of_fit, chi2_sf, chi2_table,
                    chi2_two_sample, cond_indep_test,
                    discretize, joint_invariance_test, merge_cells)
from .sufficiency import iid_law, markov_law, mixture_law, sufficiency_test

__all__ = [
    "MAX_ORACLE_WORK", "chi2_goodness_of_fit", "all_arrays", "check_equivariance_exhaustive", "check_invariance_exhaustive",
    "rel_deviation", "verify_maximal_invariant", "TestReport", "InsufficientSamplesError", "chi2_sf",
    "chi2_table", "chi2_two_sample", "cond_indep_test", "discretize", "joint_invariance_test",
    "merge_cells", "iid_law", "markov_law", "mixture_law", "sufficiency_test",
]
