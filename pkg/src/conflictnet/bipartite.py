"""Bipartite incidence matrices and their descriptive statistics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

Side = Literal["municipalities", "structures"]


@dataclass(frozen=True, eq=False)
class IncidenceMatrix:
    """Victim-count matrix with municipality rows and structure columns.

    Every row and every column must hold at least one positive entry; the
    0 x 0 matrix is the only admissible empty instance.
    """

    municipalities: tuple[str, ...]
    structures: tuple[str, ...]
    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.dtype.kind not in "iu":
            if not np.all(counts == np.floor(counts)):
                raise ValueError("incidence counts must be integers")
            counts = counts.astype(np.int64)
        else:
            counts = counts.astype(np.int64)
        if counts.shape != (len(self.municipalities), len(self.structures)):
            raise ValueError(
                f"counts shape {counts.shape} does not match "
                f"{len(self.municipalities)} municipalities x "
                f"{len(self.structures)} structures"
            )
        if counts.size and counts.min() < 0:
            raise ValueError("incidence counts must be non-negative")
        if counts.shape[0] and not np.all(counts.sum(axis=1) > 0):
            raise ValueError("every municipality row needs a positive entry")
        if counts.shape[1] and not np.all(counts.sum(axis=0) > 0):
            raise ValueError("every structure column needs a positive entry")
        if len(set(self.municipalities)) != len(self.municipalities):
            raise ValueError("duplicate municipality ids")
        if len(set(self.structures)) != len(self.structures):
            raise ValueError("duplicate structure ids")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def shape(self) -> tuple[int, int]:
        return self.counts.shape


@dataclass(frozen=True)
class StrengthSummary:
    """Eight-number summary of a strength (or any numeric) distribution."""

    minimum: float
    q1: float
    median: float
    mean: float
    q3: float
    maximum: float
    sd: float
    skewness: float

    def as_row(self) -> tuple[float, ...]:
        """Values in canonical column order Min..Asymmetry."""
        return (
            self.minimum,
            self.q1,
            self.median,
            self.mean,
            self.q3,
            self.maximum,
            self.sd,
            self.skewness,
        )


SUMMARY_COLUMNS = ("Min", "Q1", "Median", "Mean", "Q3", "Max", "SD", "Asymmetry")


def bipartite_order_size_density(matrix: IncidenceMatrix) -> tuple[int, int, int, float]:
    """(n_municipalities, n_structures, n_links, density) of the incidence.

    A link is a positive cell; density is links over n*m, zero for the
    empty matrix.
    """
    n, m = matrix.shape
    links = int(np.count_nonzero(matrix.counts))
    density = links / (n * m) if n and m else 0.0
    return n, m, links, density


def degree_and_strength(matrix: IncidenceMatrix, side: Side) -> dict[str, tuple[int, int]]:
    """Per-node (degree, strength) on the chosen side.

    Degree counts distinct counterparts; strength sums victim counts.
    """
    if side == "municipalities":
        ids, axis = matrix.municipalities, 1
    elif side == "structures":
        ids, axis = matrix.structures, 0
    else:
        raise ValueError(f"unknown side {side!r}")
    degrees = np.count_nonzero(matrix.counts, axis=axis)
    strengths = matrix.counts.sum(axis=axis)
    return {
        node: (int(degrees[i]), int(strengths[i])) for i, node in enumerate(ids)
    }


def bipartite_components(matrix: IncidenceMatrix) -> tuple[int, int]:
    """(component count, giant component order) of the bipartite graph.

    Orders count nodes from both sides together; the empty matrix has
    zero components.
    """
    n, m = matrix.shape
    if n + m == 0:
        return 0, 0
    rows, cols = np.nonzero(matrix.counts)
    data = np.ones(len(rows), dtype=np.int8)
    adj = csr_matrix(
        (data, (rows, cols + n)), shape=(n + m, n + m)
    )
    count, labels = connected_components(adj, directed=False)
    sizes = np.bincount(labels, minlength=count)
    return int(count), int(sizes.max())


def strength_summary(values: Sequence[float]) -> StrengthSummary:
    """Summarize a non-empty list of values.

    Quantiles use linear interpolation between order statistics; SD is the
    sample standard deviation; asymmetry is the moment skewness
    m3 / m2^(3/2) with population moments, defined as 0 for constant data.
    """
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError("cannot summarize an empty list")
    q1, med, q3 = np.quantile(arr, [0.25, 0.5, 0.75])
    mean = arr.mean()
    sd = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    m2 = float(((arr - mean) ** 2).mean())
    m3 = float(((arr - mean) ** 3).mean())
    skew = m3 / m2**1.5 if m2 > 0 else 0.0
    return StrengthSummary(
        minimum=float(arr.min()),
        q1=float(q1),
        median=float(med),
        mean=float(mean),
        q3=float(q3),
        maximum=float(arr.max()),
        sd=sd,
        skewness=skew,
    )
