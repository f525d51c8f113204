"""High-precision Lindstedt series for the dissipative standard map."""

__version__ = "0.1.0"

from .arith import Context, Frequency, make_context, make_frequency, preset_frequency, PRESETS  # noqa: E402
from .trigpoly import TrigPoly  # noqa: E402
from .lindstedt import LindstedtSeries, expand, drift_series  # noqa: E402

__all__ = [
    "Context", "Frequency", "make_context", "make_frequency", "preset_frequency", "PRESETS",
    "TrigPoly", "LindstedtSeries", "expand", "drift_series", "__version__",
]
