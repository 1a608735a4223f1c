"""Numerical toolkit for operator monotone and operator convex functions.

Loewner and Kraus matrix criteria, the transform algebra on positive
operator monotone functions of the half-line, integral representations
(unit interval, half-line and Pick form) and measure inversion.
"""

__version__ = "0.1.0"

from .catalog import CATALOG, catalog_lookup, compose, from_spec
from .criteria import (
    Certificate,
    check_convex,
    check_monotone,
    counterexample_pair,
    mollify,
    pair_certificate,
    slope_function,
    verify_witness,
)
from .divided import Grid, divdiff1, divdiff2, kraus_matrices, loewner_matrix
from .errors import (
    ConstantFunctionError,
    DomainError,
    EvaluationError,
    OpmonError,
    SamplingError,
    SymmetryError,
)
from .functions import ScalarFunction
from .hermitian import HermitianMatrix, Interval, apply_function, eigen_decompose, loewner_leq, sample_ordered_pair
from .inversion import SampleSet, density_scan, fit_measure, moment_probe, stieltjes_functional
from .representations import (
    PickRepresentation,
    RepresentingMeasure,
    convert_measure,
    eval_measure,
    eval_pick,
    measure_function,
    to_pick,
)
from .transforms import (
    decomposition_check,
    derivative_sum_check,
    extreme_function,
    lambda_map,
    mobius_transport,
    poly_lambda,
    sharp,
    star,
    t_transform,
)

__all__ = [name for name in dir() if not name.startswith("_")]
