"""Finite-dimensional spatial derivatives and the operator form of strong subadditivity."""

from .algebras import (
    MatrixAlgebra,
    PositiveFunctional,
    PurificationPair,
    close_generators,
    commutant,
    factor_algebra,
    functional_from_density,
    is_faithful,
    is_subalgebra,
    max_entangled,
    purify,
    restrict_functional,
)
from .gns import (
    GnsSpace,
    SpatialDerivative,
    StandardForm,
    check_intertwining,
    closed_form_tripartite,
    gns,
    gns_subspace_projection,
    r_op,
    relative_modular,
    spatial_derivative,
    standard_form,
    theta,
)
from .linalg import (
    HermitianEig,
    Tolerance,
    herm_eig,
    herm_power,
    kron,
    loewner_leq,
    partial_trace,
)
from .verify import VerificationReport

__version__ = "0.1.0"
