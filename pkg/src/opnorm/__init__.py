"""Operator norms ``||A||_{q->p}`` with certified bounds.

The fixed-point iteration (:func:`compute_norm`) handles nonnegative
matrices with ``1 < p <= q < inf``; :mod:`opnorm.oracle` supplies brute
force ground truth and :mod:`opnorm.instances` builds structured test
instances with known witnesses.
"""

__version__ = "0.1.0"

from .analysis import (
    CriticalityReport,
    StabilityReport,
    critical_residual,
    criticality,
    fd_gradient,
    gradient_f,
    hessian_quadform,
    hessian_terms,
    stability_probe,
)
from .boyd import ConvergenceReport, IterationState, Potentials, apply_S, compute_norm, potentials, shift_correction
from .core import (
    INF,
    CertifiedBounds,
    NormParams,
    PositiveMatrix,
    UnitVector,
    dual_exponent,
    dualize,
    lp_norm,
    ones_norm,
    positivity_shift,
    ratio_f,
)
from .errors import FormatError, InvalidInputError, OpNormError, PreconditionError, SizeError
from .instances import (
    GadgetInstance,
    Graph,
    WeightedInstance,
    amplify,
    build_gadget,
    builtin_graph,
    edge_term,
    gadget_objective,
    lift_to_qp,
    max_cut,
    tensor,
)
from .io import read_matrix, write_matrix
from .oracle import OracleResult, brute_norm, interpolation_estimate, longest_vector
