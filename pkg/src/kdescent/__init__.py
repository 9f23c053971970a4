"""Exact counts and asymptotic constants for permutations by k-descent set."""

from .errors import KDescentError, NumericalError, ParameterError, VerificationError
from .exact import (
    CountTriangle, DescentSpec, GeneralTable, build_general_table, build_triangle,
    count_with_set, f_total, fmn_alternating, g3_sequence, parametrized_count, sandwich_bounds,
)
from .oracle import OracleReport, PatternQuery, enumerate_counts, joint_counts
from .asymptotics import GrowthProfile, OrderStatSpec, PhiEvaluator, growth_rate, phi, phi_diagnostics
from .integrals import ConstantResult, c_constant, convergence_report, dasy_integral_direct, equidist_constant
from .series import TruncatedSeries2D, build_series, verify_gen_identity

__version__ = "0.1.0"
