"""Workbench for dynamic graph storage experiments.

Builds adjacency-backed dynamic graphs whose per-vertex neighbor storage,
concurrency control, and versioning are all swappable, plus the machinery
to race them: workload generation, a threaded benchmark harness, analytics
kernels, a static CSR baseline, and a brute-force reference model for
correctness checks.
"""

from .containers import CONTAINER_KINDS, ContainerConfig, make_container
from .errors import (
    BlockCodecError,
    ConfigError,
    TxnStateError,
    UnsupportedQueryError,
    WorkloadMismatchError,
)
from .graph import CC_MODES, GraphConfig, build_graph

__version__ = "0.1.0"

__all__ = [
    "CC_MODES",
    "CONTAINER_KINDS",
    "ContainerConfig",
    "GraphConfig",
    "build_graph",
    "make_container",
    "BlockCodecError",
    "ConfigError",
    "TxnStateError",
    "UnsupportedQueryError",
    "WorkloadMismatchError",
    "__version__",
]
