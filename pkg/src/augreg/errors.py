"""Exception types shared across the package."""


class AugregError(Exception):
    """Base class; ``code`` is the machine-readable name used by the CLI."""

    code = "Error"

    def __init__(self, message="", **details):
        super().__init__(message)
        self.details = details


def _make(name, doc):
    return type(name, (AugregError,), {"code": name, "__doc__": doc})


NotSymmetric = _make("NotSymmetric", "Input matrix is not symmetric within tolerance.")
NotPositiveDefinite = _make("NotPositiveDefinite", "Input matrix is not positive-definite.")
InvalidParam = _make("InvalidParam", "A parameter lies outside its domain.")
ZeroEigenvalue = _make("ZeroEigenvalue", "A required eigenvalue is zero.")
OddDimensionForRotation = _make("OddDimensionForRotation", "Rotation needs an even dimension.")
MissingSpectrum = _make("MissingSpectrum", "The operation needs the data spectrum.")
SingularExpectedCov = _make("SingularExpectedCov", "Expected augmentation covariance is singular.")
SingularSystem = _make("SingularSystem", "The regularized normal equations are singular.")
SingularCov = _make("SingularCov", "The limit covariance is singular.")
SingularSigmaBar = _make("SingularSigmaBar", "Covariance of the mean-augmented data is singular.")
DivergenceDetected = _make("DivergenceDetected", "The iterate norm blew up.")
Degenerate = _make("Degenerate", "Survival and contamination are both zero.")
ZeroTailEigenvalue = _make("ZeroTailEigenvalue", "The eigenvalue after the split is zero.")
InvalidSplit = _make("InvalidSplit", "Split index out of range.")
InvalidIndex = _make("InvalidIndex", "Index out of range.")
UnknownPreset = _make("UnknownPreset", "No preset with that name.")
UnknownColumn = _make("UnknownColumn", "Column not present in the table.")
ConfigError = _make("ConfigError", "Invalid experiment configuration.")
IoError = _make("IoError", "Could not write output.")
