"""Joint IRS reflection and hybrid beamforming for mmWave MIMO links."""

from .numerics import DegenerateChannelError

__version__ = "0.1.0"
__all__ = ["DegenerateChannelError", "__version__"]
