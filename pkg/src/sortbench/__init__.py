"""Online sorting into an array of size (1+eps)n: strategies, workloads and a benchmark harness."""

from .engine import ArrayState, Strategy, new_strategy, run
from .metrics import audit, brute_force_opt, cost, opt_cost
from .params import derive_level, derive_top, growth_root, omega
from .workloads import WorkloadSpec, generate

__version__ = "0.1.0"

__all__ = [
    "ArrayState",
    "Strategy",
    "WorkloadSpec",
    "audit",
    "brute_force_opt",
    "cost",
    "derive_level",
    "derive_top",
    "generate",
    "growth_root",
    "new_strategy",
    "omega",
    "opt_cost",
    "run",
]
