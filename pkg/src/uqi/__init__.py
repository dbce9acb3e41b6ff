"""Density-matrix simulation of imaging with undetected photons.

Four qubits model the two signal/idler photon pairs; a two-parameter
channel models the semi-transparent object; a renormalizing mode mixer
makes the idlers indistinguishable; measurements on the signals alone
recover the object's transmission and phase.
"""

__version__ = "0.1.0"

from .channels import (
    ChiMatrix,
    KrausChannel,
    ModeMixer,
    ObjectParams,
    apply_channel,
    apply_mode_mixer,
    chi_matrix,
    choi_matrix,
    choi_psd_check,
    identity_channel,
    mode_mixer,
    normalize_angle,
    object_channel,
)
from .circuit import (
    MeasurementPair,
    PipelineStages,
    ProbeState,
    SignalState,
    bell_ket,
    detection_probabilities,
    measurement_pair,
    pipeline_stages,
    prepare_probe,
    prepare_werner,
    probe_ket,
    run_pipeline,
    sample_detections,
    sample_detections_with_miss,
)
from .gates import Gate, apply_unitary, cnot, cz, hadamard, pauli, phase_shifter
from .qcore import (
    DEFAULT_REGISTER,
    DensityMatrix,
    PauliString,
    Register,
    basis_ket,
    embed,
    hermitian_eigenvalues,
    kron,
    partial_trace,
    partial_transpose,
    pauli_decompose,
    pauli_reconstruct,
)
from .tomography import (
    ImageMaps,
    ObjectEstimate,
    ScanResult,
    SchmidtData,
    aapt_predict,
    estimate_object,
    image_scan,
    operator_schmidt,
    visibility,
)
