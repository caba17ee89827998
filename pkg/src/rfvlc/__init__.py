"""Coverage and rate analysis for coexisting indoor RF and VLC downlink networks."""
from .config import NetworkConfig, load_config

__version__ = "0.1.0"

__all__ = ["NetworkConfig", "load_config", "__version__"]
