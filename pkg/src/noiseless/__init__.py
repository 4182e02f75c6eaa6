"""Decoherence-free subspaces and noiseless subsystems of quantum channels."""

__version__ = "0.1.0"

from .channel import Channel, Projector, load_channel, validate_channel  # noqa: E402
from .catalog import builtin_example  # noqa: E402
from .algebra import commutant, structure_decompose, verify_decomposition  # noqa: E402
from .nsfinder import (  # noqa: E402
    check_projector_condition,
    find_invariant_projectors,
    noiseless_subsystems,
    verify_fixpoint_set,
    verify_ns,
)

__all__ = [
    "Channel",
    "Projector",
    "__version__",
    "builtin_example",
    "check_projector_condition",
    "commutant",
    "find_invariant_projectors",
    "load_channel",
    "noiseless_subsystems",
    "structure_decompose",
    "validate_channel",
    "verify_decomposition",
    "verify_fixpoint_set",
    "verify_ns",
]
