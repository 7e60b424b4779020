"""Diagonalization and aggregation: OBC spectra, PBC clouds, W(n), skin reports."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .lattice import BOUNDARY_CLASSES, LatticeGeometry, ObcHamiltonian
from .model import ModelParams, build_bloch
from .parallel import ordered_map

DENSE_CAP = 6000
SKIN_THRESHOLD = 2.0


class CapacityError(RuntimeError):
    pass


class SolverError(RuntimeError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


@dataclass(frozen=True)
class SpectrumResult:
    eigenvalues: np.ndarray
    right_eigenvectors: np.ndarray | None
    residuals: np.ndarray

    def __len__(self):
        return len(self.eigenvalues)


class _Union:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, i):
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def join(self, i, j):
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[max(ri, rj)] = min(ri, rj)

    def groups(self):
        out = {}
        for i in range(len(self.parent)):
            out.setdefault(self.find(i), []).append(i)
        return [g for g in out.values() if len(g) > 1]


def merge_defective_clusters(w: np.ndarray, v: np.ndarray, radius: float | None = None) -> np.ndarray:
    """Replace split Jordan-block eigenvalues by their cluster mean.

    A defective eigenvalue of block size 2 comes back from LAPACK split
    by ~sqrt(eps*||H||) with nearly parallel eigenvectors.  The cluster
    mean is well conditioned, the individual members are not.  Members
    are merged only if they lie within ``radius`` of each other and their
    unit eigenvectors overlap by more than 0.999.
    """
    w = np.array(w, dtype=complex)
    n = len(w)
    if n < 2:
        return w
    scale = max(1.0, float(np.abs(w).max()))
    if radius is None:
        radius = 64 * np.sqrt(np.finfo(float).eps) * scale
    order = np.argsort(w.real, kind="stable")
    uf = _Union(n)
    for a in range(n):
        i = order[a]
        for b in range(a + 1, n):
            j = order[b]
            if w[j].real - w[i].real > radius:
                break
            if abs(w[j] - w[i]) <= radius and abs(np.vdot(v[:, i], v[:, j])) > 0.999:
                uf.join(i, j)
    for group in uf.groups():
        w[group] = w[group].mean()
    return w


def _sort_key(w):
    return np.lexsort((w.imag, w.real))


def diagonalize(H: np.ndarray, want_vectors: bool = True, max_dim: int = DENSE_CAP) -> SpectrumResult:
    """Dense non-symmetric eigendecomposition with residual enforcement."""
    H = np.asarray(H, dtype=complex)
    n = H.shape[0]
    if n > max_dim:
        raise CapacityError(
            f"matrix dimension {n} exceeds the dense-solver cap {max_dim}; lower L or raise the cap"
        )
    try:
        w, v = sla.eig(H, check_finite=True)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"eigensolver failed: {exc}", index=_failing_index(str(exc))) from exc
    v = v / np.linalg.norm(v, axis=0)
    # residuals belong to the solver's own pairs, before cluster merging
    residuals = np.linalg.norm(H @ v - v * w, axis=0)
    bound = 1e-8 * max(np.abs(H).max(), 1.0) * n
    bad = np.flatnonzero(residuals > bound)
    if bad.size:
        raise SolverError(
            f"eigenpair {bad[0]} residual {residuals[bad[0]]:.3e} exceeds bound {bound:.3e}",
            index=int(bad[0]),
        )
    w = merge_defective_clusters(w, v)
    order = _sort_key(w)
    return SpectrumResult(
        eigenvalues=w[order],
        right_eigenvectors=v[:, order] if want_vectors else None,
        residuals=residuals[order],
    )


def _failing_index(message: str):
    digits = [int(tok) for tok in message.replace(")", " ").split() if tok.isdigit()]
    return digits[0] if digits else None


def obc_spectrum(H: ObcHamiltonian | np.ndarray, want_vectors: bool = True, max_dim: int = DENSE_CAP) -> SpectrumResult:
    """Full eigendecomposition of an open-boundary Hamiltonian.

    Eigenvalues are sorted by (re, im); eigenvector columns have unit
    2-norm.
    """
    if isinstance(H, ObcHamiltonian):
        if H.dimension > max_dim:
            raise CapacityError(
                f"matrix dimension {H.dimension} exceeds the dense-solver cap {max_dim}; "
                "lower L or raise the cap"
            )
        H = H.toarray()
    return diagonalize(H, want_vectors=want_vectors, max_dim=max_dim)


def bz_axis(grid_n: int, endpoint: bool = False) -> np.ndarray:
    """Uniform momenta from -pi inclusive; +pi is appended only if ``endpoint``."""
    j = np.arange(grid_n + 1 if endpoint else grid_n)
    return -np.pi + 2 * np.pi * j / grid_n


@dataclass(frozen=True)
class PbcCloud:
    kx: np.ndarray
    ky: np.ndarray
    energies: np.ndarray  # (gridN_ky, gridN_kx, 4), sorted by (re, im) per k

    @property
    def flat(self) -> np.ndarray:
        return self.energies.reshape(-1)


def _sorted_eigvals(H):
    w = np.linalg.eigvals(H)
    idx = np.lexsort((w.imag, w.real), axis=-1)
    return np.take_along_axis(w, idx, axis=-1)


def pbc_cloud(params: ModelParams, grid_n: int, workers: int | None = None) -> PbcCloud:
    """Dense eigenvalues of H(k) on the uniform grid_n x grid_n zone mesh."""
    if grid_n < 2:
        raise ValueError(f"grid_n must be >= 2, got {grid_n}")
    k = bz_axis(grid_n)

    def row(ky):
        return _sorted_eigvals(build_bloch(params, (k, np.full_like(k, ky))))

    rows = ordered_map(row, k, workers)
    return PbcCloud(kx=k, ky=k, energies=np.stack(rows))


def _box_index(points, cell):
    # boxes are centred on multiples of cell so the exact lines Im = 0,
    # -gamma/2, -gamma never sit on a box edge
    ix = np.floor(points.real / cell + 0.5).astype(np.int64)
    iy = np.floor(points.imag / cell + 0.5).astype(np.int64)
    return ix, iy


def raster_boxes(points: np.ndarray, cell: float) -> set[tuple[int, int]]:
    if cell <= 0:
        raise ValueError(f"cell must be > 0, got {cell}")
    points = np.asarray(points, dtype=complex).reshape(-1)
    if points.size == 0:
        return set()
    ix, iy = _box_index(points, cell)
    return set(zip(ix.tolist(), iy.tolist()))


def spectral_area(cloud, cell: float = 0.05) -> float:
    """Box-counting area of a point cloud in the complex plane."""
    points = cloud.flat if isinstance(cloud, PbcCloud) else cloud
    return len(raster_boxes(points, cell)) * cell**2


def inside_raster(points, boxes: set, cell: float, pad: float = 0.0) -> np.ndarray:
    """True where a point is within ``pad`` (box metric) of an occupied box."""
    points = np.asarray(points, dtype=complex).reshape(-1)
    reach = int(np.ceil(pad / cell - 1e-12)) if pad > 0 else 0
    ix, iy = _box_index(points, cell)
    out = np.zeros(points.size, dtype=bool)
    for n, (a, b) in enumerate(zip(ix.tolist(), iy.tolist())):
        out[n] = any(
            (a + da, b + db) in boxes
            for da in range(-reach, reach + 1)
            for db in range(-reach, reach + 1)
        )
    return out


@dataclass(frozen=True)
class WDistribution:
    values: np.ndarray
    geometry: LatticeGeometry
    n_states: int
    energy_window: tuple[float, float] | None = None


def w_distribution(spec: SpectrumResult, geometry: LatticeGeometry,
                   energy_window: tuple[float, float] | None = None) -> WDistribution:
    """Sitewise average of |psi_m(n)|^2 over unit-norm right eigenvectors.

    With ``energy_window=(lo, hi)`` only eigenstates with lo <= Re E <= hi
    enter the average.
    """
    if spec.right_eigenvectors is None:
        raise ValueError("w_distribution needs eigenvectors; diagonalize with want_vectors=True")
    v = spec.right_eigenvectors
    if v.shape[0] != geometry.n_sites:
        raise ValueError(f"eigenvectors have {v.shape[0]} rows, geometry has {geometry.n_sites} sites")
    if energy_window is not None:
        lo, hi = energy_window
        keep = (spec.eigenvalues.real >= lo) & (spec.eigenvalues.real <= hi)
        v = v[:, keep]
        if v.shape[1] == 0:
            raise ValueError(f"no eigenstates with Re E in [{lo}, {hi}]")
    weights = (np.abs(v) ** 2).sum(axis=1) / v.shape[1]
    return WDistribution(values=weights, geometry=geometry, n_states=v.shape[1],
                         energy_window=None if energy_window is None else tuple(energy_window))


@dataclass(frozen=True)
class GdseReport:
    shape: str
    L: int
    threshold: float
    means: dict[str, float]
    ratios: dict[str, float]
    verdicts: dict[str, str]
    counts: dict[str, int] = field(default_factory=dict)
    energy_window: tuple[float, float] | None = None

    def as_document(self, params: ModelParams | None = None) -> dict:
        doc = {"geometry": {"shape": self.shape, "L": self.L}}
        if params is not None:
            doc["parameters"] = {"t": params.t, "m": params.m, "gamma": params.gamma, "eta": params.eta}
        doc["energy_window"] = list(self.energy_window) if self.energy_window else None
        doc["threshold"] = self.threshold
        doc["classes"] = {
            name: {
                "sites": self.counts[name],
                "mean": self.means[name],
                "ratio": self.ratios[name],
                "verdict": self.verdicts.get(name, "reference"),
            }
            for name in self.means
        }
        return doc


def gdse_report(W: WDistribution, threshold: float = SKIN_THRESHOLD) -> GdseReport:
    """Per-class mean intensity, edge/bulk ratios, and skin verdicts."""
    classes = W.geometry.classes()
    if not np.any(classes == "bulk"):
        raise ValueError("geometry has no bulk sites; use a larger L")
    means, counts = {}, {}
    for name in BOUNDARY_CLASSES:
        sel = classes == name
        if sel.any():
            means[name] = float(W.values[sel].mean())
            counts[name] = int(sel.sum())
    bulk = means["bulk"]
    ratios = {name: mean / bulk for name, mean in means.items()}
    verdicts = {
        name: ("skin" if ratio >= threshold else "no-skin")
        for name, ratio in ratios.items() if name != "bulk"
    }
    return GdseReport(shape=W.geometry.shape, L=W.geometry.L, threshold=threshold,
                      means=means, ratios=ratios, verdicts=verdicts, counts=counts,
                      energy_window=W.energy_window)
