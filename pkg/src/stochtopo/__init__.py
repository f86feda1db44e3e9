"""Level-set topology optimization with uncertain microstructures.

The package covers the full pipeline: synthesis of random two-phase
microstructures, homogenization into catalogs of constitutive tensors,
a 2D level-set macroscale model with ersatz material, adjoint design
sensitivities, and stochastic-gradient optimizers (SGD, Adam, GCMMA)
that use a handful of random microstructure layouts per iteration.
"""
from .streams import RandomStream

__version__ = "0.1.0"

__all__ = ["RandomStream", "__version__"]
