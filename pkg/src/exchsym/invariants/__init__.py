from .augment import AugCanon, axis_subsets, broadcast_vertex, z_array, z_array_joint, z_augment
from .canon import (JOINT_MAX_N, CanonResult, FeasibilityError, canon_array, canon_brute,
                    check_feasible, search_cost)
from .measures import (DiscreteDist, EmpiricalMeasure, empirical_measure, orbit_law_pmf,
                       orbit_law_sample, orbit_partition, sort_tau)
from .semigroup import OPS, EmptyFoldError, SemigroupStat, semigroup_fold, semigroup_merge

__all__ = [
    "AugCanon", "axis_subsets", "broadcast_vertex", "z_array", "z_array_joint", "z_augment",
    "JOINT_MAX_N", "CanonResult", "FeasibilityError", "canon_array", "canon_brute",
    "check_feasible", "search_cost",
    "DiscreteDist", "EmpiricalMeasure", "empirical_measure", "orbit_law_pmf", "orbit_law_sample",
    "orbit_partition", "sort_tau",
    "OPS", "EmptyFoldError", "SemigroupStat", "semigroup_fold", "semigroup_merge",
]
