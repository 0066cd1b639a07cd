"""Persistence diagrams of Cech filtrations over sparse random point clouds.

Simulation harnesses for the three scaling regimes of rescaled diagram
counts, exact small-configuration cycle indicators, and Monte Carlo
estimators for the limiting intensity measures, all reproducible down to
the byte for a fixed seed.
"""

from .cech import FilteredComplex, build_filtration
from .cycles import (
    BirthDeath,
    birth_death,
    count_alive_cycles,
    count_connected_tuples,
    count_isolated_alive_cycles,
    facets_indicator,
    filled_indicator,
    sandwich_check,
    single_cycle_indicator,
)
from .geometry import min_enclosing_ball, neighbor_graph, simplex_value
from .kernels import IMPLEMENTATION as KERNEL_IMPLEMENTATION
from .limits import (
    McEstimate,
    estimate_betti_limit,
    estimate_connected_volume,
    estimate_limit_measure,
    estimate_window_mass,
    intensity_constant,
)
from .persistence import (
    Diagram,
    Rectangle,
    compute_diagram,
    count_rectangle,
    persistent_betti,
    persistent_betti_oracle,
)
from .regimes import (
    ExperimentConfig,
    RadiusSpec,
    classify,
    palm_mean_check,
    run_divergence,
    run_experiment,
    run_poisson,
    run_vanishing,
)
from .sampling import (
    Density,
    PointCloud,
    SampleSpec,
    TruncatedGaussian,
    UniformCube,
    load_points_csv,
    sample,
    save_cloud_csv,
)

__version__ = "0.1.0"
