"""Wave-particle-mixedness complementarity toolkit."""

from .errors import ComplabError, ValidationError
from .measures import (
    MeasureTriple,
    SaturationParams,
    boundary_gap,
    coherence_l1,
    concurrence_two_qubit,
    durr_measures,
    linear_entropy,
    predictability,
    saturating_state,
    tcr_triple,
)
from .qmatrix import (
    DensityMatrix,
    PureState,
    RngSpec,
    partial_trace_detector,
    pure_state,
    random_density,
    tensor_product,
    validate_density,
)
from .wwd import averaged_tcr, averages, build_interaction, decompose, evolve, reduced_states, validate_povm
from .povm_design import scenario, SCENARIOS
from .explorer import sample_region, sweep, verify_properties

__version__ = "0.1.0"
