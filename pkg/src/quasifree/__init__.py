"""Quasi-free fermion chains: Pfaffians, string order, split defect, Z2 index."""

__version__ = "0.1.0"

from .exceptions import (
    ConfigError,
    DegenerateGroundStateError,
    QuasifreeError,
    SplitNotConvergedError,
    ValidationError,
    WindowError,
)
from .pfaffian import canonical_form, pfaffian, validate_antisymmetric
from .monomials import (
    FermionMonomial,
    Kind,
    annihilate,
    create,
    maj_even,
    maj_odd,
    number_pm,
    parity_string,
)
from .quadratic import (
    GroundState,
    MajoranaCovariance,
    QuadraticHamiltonian,
    SelfDualCut,
    build_model,
    covariance_to_projection,
    energy_expectation,
    graded_product,
    ground_state,
    majorana_form,
    model_params,
    one_particle_spectrum,
    transform_covariance,
)
from .jordan_wigner import (
    JWImage,
    PauliString,
    jw_fermion_to_pauli,
    jw_pauli_to_fermion,
    pauli_model,
)
from .ed import (
    EDOperator,
    EDState,
    apply_monomial,
    ed_build,
    ed_expectation,
    ed_ground,
    parity_operator,
)
from .observables import (
    SplitDefectSeries,
    StringCorrelatorSpec,
    StringOrderVerdict,
    Z2IndexResult,
    bloch_invariant,
    default_string_pair,
    detect_string_order,
    gap_inequality_check,
    random_local_probes,
    random_one_sided_rotation,
    split_defect,
    string_correlator,
    wick_expectation,
    z2_index,
)
