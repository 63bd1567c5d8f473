"""Exception and warning types shared across the package."""


class ReconbarsError(Exception):
    """Base class for all library errors."""


class DimsMismatchError(ReconbarsError):
    """Inputs that must share one grid shape do not."""


class EmptyMaskError(ReconbarsError):
    """A sampling mask retains no frequency at all."""


class PlanMismatchError(ReconbarsError):
    """A sampling plan disagrees with the line set it is paired with."""


class DegenerateTrainingError(ReconbarsError):
    """Calibration training pairs carry no usable signal."""


class EmptyStackError(ReconbarsError):
    """A mode decomposition was requested for zero difference maps."""


class PhantomSizeError(ReconbarsError):
    """Requested phantom dimensions are too small to rasterize."""


class UnsupportedFormatError(ReconbarsError):
    """An image file is in a format the loader does not handle."""


class CorruptFileError(ReconbarsError):
    """An image file is recognized but cannot be decoded."""


class OverwriteRefusedError(ReconbarsError):
    """An output path already exists and overwriting was not forced."""


class ExperimentStageError(ReconbarsError):
    """A pipeline stage failed; carries the stage name for triage."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


class ComplexResidueWarning(UserWarning):
    """An inverse transform discarded a suspiciously large imaginary part."""


class EmptySumWarning(UserWarning):
    """An estimator's sum ranged over an empty index set."""
