"""Two-qubit entanglement trapping in a photonic band gap, enhanced by weak
measurement and measurement reversal."""
from .dynamics import AmplitudeState, Trajectory, drift_matrix, evolve, norm, protocol_amplitudes
from .entanglement import ConcurrenceResult, concurrence_general, concurrence_protocol, concurrence_x
from .integrate import IntegratorOptions
from .optimize import (
    OptimalPoint,
    SweepGrid,
    TimeSampler,
    esd_threshold,
    evaluate_point,
    first_zero_time,
    grid_validate,
    optimal_curves,
    optimal_pr,
    sweep,
)
from .protocol import (
    MeasurementStrengths,
    PostBranch,
    XComponents,
    assemble_x,
    post_measure,
    pre_measure,
    select_branch,
    to_density_matrix,
)
from .spectral import (
    DEFAULT_SPECTRUM,
    BandGapSpectrum,
    PseudomodeParams,
    check_perfect_gap,
    derive_pseudomodes,
    spectral_density,
)

__version__ = "0.1.0"
