"""Fermionic states, processes and measurements under the parity
superselection rule, plus the full ancilla-assisted process-tomography
protocol built from the Majorana gate set."""

from .labels import (
    MajoranaLabel,
    PhasedLabel,
    commutation_sign,
    dense,
    label_basis,
    majorana_matrices,
    parity_operator,
    product,
)
from .channels import (
    FermionPOVM,
    FermionState,
    ProcessRep,
    SRInvalidMapError,
    apply_process,
    embed_process,
    extend_to_composite,
    is_cp,
    is_sr_valid_map,
    is_tp,
    random_valid_map,
    random_valid_state,
    sr_report,
    to_chi,
    to_choi,
    to_kraus,
    to_transfer,
    validate_povm,
    validate_process,
    validate_state,
)
from .gates import (
    GateSpec,
    circuit_unitary,
    gate_unitary,
    init_pair_state,
    pairwise_measurement_povm,
    unitary_channel,
)
from .protocol import (
    generate_G,
    generate_U,
    measurement_operators,
    no_ancilla_rank,
    prepared_states,
    verify_GHIJ,
)
from .tomography import (
    ExperimentRecord,
    IncompleteDesignError,
    ReconstructionResult,
    error_metrics,
    reconstruct_full,
    simulate_experiment,
    structured_even_block,
    transfer_blocks,
)

__version__ = "0.1.0"
