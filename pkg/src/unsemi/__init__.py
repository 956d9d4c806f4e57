"""Compile semialgebraic set descriptions into single-polynomial lifts."""

__version__ = "0.1.0"

from .formula import ParseError, parse, to_nnf, to_text  # noqa: E402
from .gadget import BridgeError, WitnessPair, reduce_components  # noqa: E402
from .lift import Lift, compile_formula, synth_witness  # noqa: E402
from .poly import AffineMap, Polynomial  # noqa: E402
from .verify import VerifyConfig, check_projection, estimate_components  # noqa: E402

__all__ = [
    "AffineMap", "BridgeError", "Lift", "ParseError", "Polynomial", "VerifyConfig",
    "WitnessPair", "__version__", "check_projection", "compile_formula",
    "estimate_components", "parse", "reduce_components", "synth_witness", "to_nnf",
    "to_text",
]
