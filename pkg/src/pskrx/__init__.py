"""Exact evaluation, optimisation and simulation of on-off detection receivers for PSK coherent states."""
from .baselines import (
    QuadratureSpec,
    analytic_receiver_qpsk,
    analytic_success_qpsk,
    helstrom_mpsk,
    heterodyne_mpsk,
    heterodyne_qpsk,
    heterodyne_wedge_oracle,
    heterodyne_with_efficiency,
    kennedy_nulling_qpsk,
    kennedy_optamp_qpsk,
)
from .core import (
    IDEAL,
    DecodeTable,
    NoiseModel,
    PskAlphabet,
    ReceiverParams,
    build_decode_table,
    click_probability,
    mean_photon_numbers,
    ml_decode,
    output_amplitudes,
    pattern_probability,
    success_probability,
)
from .errors import CapacityError, NumericalError, PskrxError, QuadratureError
from .kernels import BACKEND
from .montecarlo import TrialPlan, TrialReport, confusion_matrix_check, simulate
from .optimizer import OptimizationResult, OptimizerSettings, objective, optimize, sphere_embed, sweep_modes
from .results import SweepResult

__version__ = "0.1.0"
