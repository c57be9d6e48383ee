"""Data augmentation for linear regression and classification as implicit spectral regularization."""
from . import augment, bounds, estimate, metrics, model, numerics
from .errors import AugregError

__version__ = "0.1.0"

__all__ = ["augment", "bounds", "estimate", "metrics", "model", "numerics", "AugregError", "__version__"]
