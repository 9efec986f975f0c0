"""Interval-valued optimization on Hadamard manifolds."""
__version__ = "0.1.0"

from .interval import Interval, add, compare, gh_diff, hausdorff, norm, scale
from .manifold import Euclidean, PositiveOrthant, Product, parse_kind
from .rivf import Rivf, gh_dir_deriv
from .problem import Riop, SolveSettings, check_efficiency, sample_feasible, scalarize, solve, solve_scalar
from .kkt import Multipliers, check_kkt, find_multipliers
from .duality import check_no_gap, check_weak_duality, is_dual_feasible, lagrangian
from .config import ProblemConfig, load_config, parse_config, render_config

__all__ = [
    "__version__",
    "Interval", "add", "compare", "gh_diff", "hausdorff", "norm", "scale",
    "Euclidean", "PositiveOrthant", "Product", "parse_kind",
    "Rivf", "gh_dir_deriv",
    "Riop", "SolveSettings", "check_efficiency", "sample_feasible", "scalarize", "solve", "solve_scalar",
    "Multipliers", "check_kkt", "find_multipliers",
    "check_no_gap", "check_weak_duality", "is_dual_feasible", "lagrangian",
    "ProblemConfig", "load_config", "parse_config", "render_config",
]
