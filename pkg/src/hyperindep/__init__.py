"""Independent sets in random hypergraphs: local and low-degree algorithms,
exact oracles, threshold formulas and overlap-gap probes."""

from types import ModuleType as _ModuleType

from .core import (
    GammaVector,
    Hypergraph,
    HypergraphError,
    PartiteHypergraph,
    RootedHypergraph,
    is_gamma_balanced,
    is_independent,
    neighborhood,
    read_hypergraph,
    symmetric_difference_size,
    write_hypergraph,
)
from .local import (
    LocalFunction,
    VertexLabels,
    adapt_greedy_to_gw,
    certified_greedy,
    count_neighborhood_types,
    estimate_root_density,
    random_greedy,
    run_local_on_hypergraph,
)
from .lowdeg import (
    check_optimization,
    compile_local_to_polynomial,
    degree1_balanced,
    round_values,
)
from .models import (
    InterpolationPath,
    build_regular_hypertree,
    greedy_delta,
    partite_p,
    sample_gw_hypertree,
    sample_partite_hypergraph,
    sample_uniform_hypergraph,
    uniform_p,
)
from .ogp import PathExperiment, build_overlap_sequence, detect_c_bad, estimate_stability, measure_fixed_set_overlap
from .oracle import max_gamma_balanced, max_independent_set, max_P_independent
from .seeding import Seed
from .theory import balanced_params, target_sizes, uniform_thresholds

__version__ = "0.1.0"

__all__ = [name for name, obj in list(globals().items()) if not name.startswith("_") and not isinstance(obj, _ModuleType)]
