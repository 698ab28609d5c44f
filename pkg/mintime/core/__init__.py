from .errors import ConfigError, InputError, MintimeError, ThresholdFailure
from .rng import SplitMix64
from .types import TOOL_VERSION, Vector

__all__ = [
    "ConfigError",
    "InputError",
    "MintimeError",
    "SplitMix64",
    "TOOL_VERSION",
    "ThresholdFailure",
    "Vector",
]
