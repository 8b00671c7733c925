from . import chains
from . import device
from . import lattice

__all__ = ["chains", "device", "lattice"]
