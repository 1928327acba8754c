from .codebook import BindingOperator, Codebook, generate_codebook, make_binding
from .config import ExperimentSpec, SweepConfig
from .harness import compare, run_sweep, run_trials, run_trials_async
from .memory import Activation, InputSequence, MemoryState, NetworkConfig, encode_sequence
from .theory import LinearLargeM, accuracy_numeric, capacity_search, item_info, moment_curve, snr

__version__ = "0.1.0"
VERSION = tuple(map(int, __version__.split(".")))


__all__ = (
    "VERSION",
    "Activation",
    "BindingOperator",
    "Codebook",
    "ExperimentSpec",
    "InputSequence",
    "LinearLargeM",
    "MemoryState",
    "NetworkConfig",
    "SweepConfig",
    "accuracy_numeric",
    "capacity_search",
    "compare",
    "encode_sequence",
    "generate_codebook",
    "item_info",
    "make_binding",
    "moment_curve",
    "run_sweep",
    "run_trials",
    "run_trials_async",
    "snr",
)
