"""MAP inference for pairwise grid MRFs with tree-based iterated local search."""

from . import _backend
from .graph import (
    Graph,
    GridGraph,
    build_grid,
    local_conditional_energy,
    make_labeling,
    neighbors,
    random_labeling,
    total_energy,
)
from .inference import loopy_bp, message_stats, scanline, track_messages, tree_bp_map
from .ising import generate_ising
from .models import (
    DenoiseModel,
    EnergyModel,
    IsingModel,
    ScaledModel,
    StereoPottsModel,
    TableModel,
    make_denoise,
    make_ising,
    make_stereo,
    scale_singleton,
)
from .oracle import brute_force_map
from .pgm import PgmImage, read_pgm, write_pgm
from .search import IlsConfig, IlsState, accept, adjust_beta, icm, perturb, ticm, tils
from .trace import RunTrace, write_trace
from .trees import (
    ConditionalTree,
    absorb,
    comb_schedule,
    conditional_tree_energy,
    row_column_schedule,
    site_schedule,
)


def backend():
    """Name of the active kernel backend: ``"compiled"`` or ``"python"``."""
    return _backend.name


__version__ = "0.1.0"
