"""Undersampled Fourier-grid reconstruction with resampling error bars.

The package reconstructs images from retained-line subsets of their
frequency-domain measurements via a TV-regularized splitting solver,
and estimates the pixelwise reconstruction error as full signed images
using leave-one-out (jackknife) and resampled-measurement (bootstrap)
schemes, without access to ground truth.  A validation harness scores
those estimates against the actual error when ground truth is known.
"""

from .errbars import (
    BOOTSTRAP_FACTOR,
    JACKKNIFE_FACTOR,
    BootstrapConfig,
    FullReconMode,
    JackknifeConfig,
    ModeStack,
    bootstrap_map,
    calibrate,
    error_modes,
    jackknife_map,
    synthesize_full_data,
)
from .errors import (
    ComplexResidueWarning,
    CorruptFileError,
    DegenerateTrainingError,
    DimsMismatchError,
    EmptyMaskError,
    EmptyStackError,
    EmptySumWarning,
    ExperimentStageError,
    OverwriteRefusedError,
    PhantomSizeError,
    PlanMismatchError,
    ReconbarsError,
    UnsupportedFormatError,
)
from .grids import GridDims, as_dims, dims_of
from .harness import (
    ExperimentFailure,
    ExperimentReport,
    ExperimentSpec,
    actual_error,
    agreement_metrics,
    resolve_image,
    run_batch,
    run_experiment,
    save_report,
)
from .kspace import (
    NoiseSpec,
    add_measurement_noise,
    forward_transform,
    inverse_transform,
    normalize_image,
)
from .phantom import shepp_logan
from .rasters import (
    RenderMode,
    load_image,
    load_map,
    render,
    save_image,
    save_map,
    save_pgm,
)
from .sampling import (
    LineSet,
    SamplingPlan,
    SamplingScheme,
    default_num_draws,
    draw_bootstrap_sets,
    draw_sampling_set,
    fixed_subset,
    full_mask,
    leave_one_out,
    line_pixels,
    mask_from_set,
    round_half_away,
)
from .seeds import (
    BOOTSTRAP_STREAM,
    NOISE_STREAM,
    SAMPLING_STREAM,
    rng_for,
    substream_seed,
)
from .solver import (
    GradientField,
    SolverParams,
    diff_adjoint,
    forward_diff,
    objective_value,
    periodic_laplacian_symbol,
    reconstruct,
    shrink2,
)

__version__ = "0.1.0"
