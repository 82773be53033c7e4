"""Networks of armed-group violence built from municipal victimization records.

The package turns raw event rows into per-period bipartite incidence
matrices, projects them onto either mode, measures the resulting weighted
graphs, fits Poisson stochastic block models by variational EM with ICL
model selection, tracks community flows across periods, and checks fits
with simulation-based goodness-of-fit envelopes.
"""

from .bipartite import IncidenceMatrix, StrengthSummary
from .community import EmConfig, FlowMatrix, Partition, SbmFit
from .ingest import EventRecord, GroupTimeline, IngestError, PeriodPartition
from .projection import WeightedGraph

__all__ = [
    "EventRecord",
    "GroupTimeline",
    "IngestError",
    "PeriodPartition",
    "IncidenceMatrix",
    "StrengthSummary",
    "WeightedGraph",
    "Partition",
    "SbmFit",
    "EmConfig",
    "FlowMatrix",
]

__version__ = "0.1.0"
