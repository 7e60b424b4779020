"""Finite open-boundary geometries and real-space Hamiltonians.

Sites sit on a half-cell grid: the sublattice with offsets (sx, sy) in
cell (ix, iy) has grid coordinates (2*ix + sx, 2*iy + sy), and nearest
neighbours are unit steps on that grid.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .model import SUBLATTICE_OFFSETS, SUBLATTICES, ModelParams

SHAPES = ("square", "triangle", "polygon")
BOUNDARY_CLASSES = (
    "bulk",
    "edge_bottom",
    "edge_left",
    "edge_right",
    "edge_top",
    "edge_oblique",
    "corner",
)

_STEPS = {(1, 0): "edge_right", (-1, 0): "edge_left", (0, 1): "edge_top", (0, -1): "edge_bottom"}
_STAIR_STEPS = frozenset({(1, 0), (0, 1)})


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class SiteInfo:
    index: int
    ix: int
    iy: int
    sub: str
    position: tuple[float, float]
    boundary_class: str

    @property
    def grid(self) -> tuple[int, int]:
        sx, sy = SUBLATTICE_OFFSETS[self.sub]
        return 2 * self.ix + sx, 2 * self.iy + sy


@dataclass(frozen=True)
class LatticeGeometry:
    shape: str
    L: int
    cells: tuple[tuple[int, int], ...]
    sites: tuple[SiteInfo, ...]

    @property
    def cell_count(self) -> int:
        return len(self.cells)

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    def classes(self) -> np.ndarray:
        return np.array([s.boundary_class for s in self.sites])

    def grid_coords(self) -> np.ndarray:
        return np.array([s.grid for s in self.sites], dtype=int)

    def positions(self) -> np.ndarray:
        return np.array([s.position for s in self.sites], dtype=float)

    def index_of(self, ix: int, iy: int, sub: str) -> int:
        for s in self.sites:
            if (s.ix, s.iy, s.sub) == (ix, iy, sub):
                return s.index
        raise KeyError((ix, iy, sub))


def _cells_for(shape: str, L: int, cells: Iterable[tuple[int, int]] | None):
    if shape == "square":
        return [(ix, iy) for iy in range(L) for ix in range(L)]
    if shape == "triangle":
        return [(ix, iy) for iy in range(L) for ix in range(L) if ix + iy <= L - 1]
    if cells is None:
        raise GeometryError("polygon shape needs an explicit list of kept cells")
    kept = sorted({(int(ix), int(iy)) for ix, iy in cells}, key=lambda c: (c[1], c[0]))
    if not kept:
        raise GeometryError("polygon has no cells")
    return kept


def _site_grid(cells) -> list[tuple[int, int, str]]:
    out = []
    for ix, iy in sorted(cells, key=lambda c: (c[1], c[0])):
        for sub in SUBLATTICES:
            out.append((ix, iy, sub))
    return out


def _missing_steps(grid: tuple[int, int], occupied: set) -> set:
    x, y = grid
    return {d for d in _STEPS if (x + d[0], y + d[1]) not in occupied}


def _classify(shape, L, ix, iy, missing) -> str:
    if not missing:
        return "bulk"
    if shape == "triangle" and ix + iy == L - 1 and missing <= _STAIR_STEPS:
        return "edge_oblique"
    if len(missing) >= 2:
        return "corner"
    return _STEPS[next(iter(missing))]


def build_geometry(shape: str, L: int, cells: Sequence[tuple[int, int]] | None = None) -> LatticeGeometry:
    """Build an open-boundary cluster of whole unit cells.

    ``square`` keeps ``0 <= ix, iy < L``; ``triangle`` keeps
    ``ix + iy <= L - 1`` (a staircase hypotenuse along (1, -1)).
    ``polygon`` takes an explicit cell list and gets only the
    missing-neighbour classes, never ``edge_oblique``.

    Sites are ordered lexicographically by (iy, ix, sublattice).
    """
    if shape not in SHAPES:
        raise GeometryError(f"unknown shape {shape!r}; expected one of {SHAPES}")
    if isinstance(L, bool) or not isinstance(L, (int, np.integer)) or L < 1:
        raise GeometryError(f"L must be a positive integer, got {L!r}")
    L = int(L)
    kept = _cells_for(shape, L, cells)
    raw = _site_grid(kept)
    grids = []
    for ix, iy, sub in raw:
        sx, sy = SUBLATTICE_OFFSETS[sub]
        grids.append((2 * ix + sx, 2 * iy + sy))
    occupied = set(grids)
    sites = []
    for n, ((ix, iy, sub), g) in enumerate(zip(raw, grids)):
        missing = _missing_steps(g, occupied)
        sites.append(SiteInfo(
            index=n, ix=ix, iy=iy, sub=sub,
            position=(g[0] / 2, g[1] / 2),
            boundary_class=_classify(shape, L, ix, iy, missing),
        ))
    return LatticeGeometry(shape=shape, L=L, cells=tuple(kept), sites=tuple(sites))


def classify_boundary(geometry: LatticeGeometry) -> dict[int, str]:
    """Site index -> boundary class, recomputed from the cell list."""
    occupied = {s.grid for s in geometry.sites}
    return {
        s.index: _classify(geometry.shape, geometry.L, s.ix, s.iy, _missing_steps(s.grid, occupied))
        for s in geometry.sites
    }


def bonds(geometry: LatticeGeometry) -> list[tuple[int, int]]:
    """Nearest-neighbour pairs (i < j) interior to the geometry."""
    lookup = {s.grid: s.index for s in geometry.sites}
    out = []
    for s in geometry.sites:
        x, y = s.grid
        for dx, dy in ((1, 0), (0, 1)):
            j = lookup.get((x + dx, y + dy))
            if j is not None:
                out.append((min(s.index, j), max(s.index, j)))
    return sorted(out)


@dataclass(frozen=True)
class ObcHamiltonian:
    matrix: sp.csr_matrix
    geometry: LatticeGeometry
    params: ModelParams

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()


def assemble_obc(params: ModelParams, geometry: LatticeGeometry) -> ObcHamiltonian:
    """Real-space Hamiltonian with hopping t on every interior bond."""
    onsite = dict(zip(SUBLATTICES, params.onsite()))
    n = geometry.n_sites
    pairs = bonds(geometry)
    rows = [s.index for s in geometry.sites]
    cols = list(rows)
    data = [onsite[s.sub] for s in geometry.sites]
    for i, j in pairs:
        rows += [i, j]
        cols += [j, i]
        data += [params.t, params.t]
    mat = sp.coo_matrix((np.asarray(data, dtype=complex), (rows, cols)), shape=(n, n)).tocsr()
    mat.sort_indices()
    return ObcHamiltonian(matrix=mat, geometry=geometry, params=params)


def open_chain(n: int, onsite: Sequence[complex], t: float) -> np.ndarray:
    """Dense n-site open chain, on-site values repeating with period len(onsite)."""
    H = np.diag(np.array([onsite[i % len(onsite)] for i in range(n)], dtype=complex))
    idx = np.arange(n - 1)
    H[idx, idx + 1] = t
    H[idx + 1, idx] = t
    return H


def geometry_csv(geometry: LatticeGeometry, extra: dict[str, np.ndarray] | None = None) -> str:
    """CSV text with one row per site; ``extra`` appends float columns."""
    from .io import fmt

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    extra = extra or {}
    writer.writerow(["site_index", "ix", "iy", "sublattice", "x", "y", "boundary_class", *extra])
    for s in geometry.sites:
        writer.writerow([
            s.index, s.ix, s.iy, s.sub, fmt(s.position[0]), fmt(s.position[1]), s.boundary_class,
            *(fmt(col[s.index]) for col in extra.values()),
        ])
    return buf.getvalue()
