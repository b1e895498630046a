"""Contagion-preserving network sparsifiers.

Effective-resistance and uniform edge sampling, discrete-time SI simulation,
fidelity metrics and epidemic edge importance.
"""

__version__ = "0.1.0"

from .errors import (
    CPNSError,
    ConvergenceError,
    DegenerateError,
    EdgeListParseError,
    GuardExceeded,
    ValidationError,
)
from .graph import WeightedGraph, connected_components, laplacian, load_edge_list, save_edge_list
from .generators import GeneratorSpec, generate
from .spectral import (
    ResistanceSketch,
    approx_resistance,
    exact_resistance,
    pair_resistance,
    spanning_tree_edge_probability,
)
from .sparsify import Sparsifier, embeddedness, q_for_fraction, ss_sample, uniform_sample
from .contagion import (
    ImportanceTable,
    InfectionTree,
    SIConfig,
    Trajectory,
    epidemic_edge_importance,
    infection_tree,
    si_run,
    transmission_prob,
)
from .metrics import (
    MetricSeries,
    baseline,
    compare_series,
    fraction_infected,
    hamming,
    importance_pairs,
    mutual_information,
    pearson_r,
)
