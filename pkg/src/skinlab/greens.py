"""Resolvent spectral function, equal-frequency contours, DDS and edge channels."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from skimage.measure import find_contours

from .model import ModelParams, Momentum, build_bloch, closed_form_bands, exceptional_lines, reduce_momentum
from .parallel import ordered_map
from .spectra import bz_axis

EDGES = ("vertical", "horizontal", "oblique")
DDS_FRACTION = 0.1
OPEN_FRACTION = 0.1
EL_FLAG_DISTANCE = 1e-6


class OffContourError(ValueError):
    pass


def _split(k):
    if isinstance(k, Momentum):
        return np.asarray(k.kx, float), np.asarray(k.ky, float)
    kx, ky = k
    return np.broadcast_arrays(np.asarray(kx, float), np.asarray(ky, float))


def spectral_function(params: ModelParams, E: float, k, eta: float | None = None):
    """A(E, k) = -Im Tr[(E + i eta - H(k))^-1] by a direct 4x4 solve.

    ``k`` may hold arrays; the result has their shape.
    """
    eta = params.eta if eta is None else eta
    if eta <= 0:
        raise ValueError(f"eta must be > 0, got {eta}")
    kx, ky = _split(k)
    H = build_bloch(params, (kx, ky))
    resolvent = (E + 1j * eta) * np.eye(4) - H
    eye = np.broadcast_to(np.eye(4, dtype=complex), resolvent.shape)
    G = np.linalg.solve(resolvent, eye)
    trace = np.trace(G, axis1=-2, axis2=-1)
    if not np.all(np.isfinite(trace)):
        raise FloatingPointError("resolvent solve produced non-finite values")
    return -trace.imag


def spectral_function_from_bands(params: ModelParams, E: float, k, eta: float | None = None):
    """Pole-sum form of A(E, k) built from the closed-form bands."""
    eta = params.eta if eta is None else eta
    eps = closed_form_bands(params, _split(k))
    width = eta - eps.imag
    return (width / ((E - eps.real) ** 2 + width**2)).sum(axis=-1)


@dataclass(frozen=True)
class SpectralGrid:
    E: float
    eta: float
    grid_n: int
    kx: np.ndarray
    ky: np.ndarray
    values: np.ndarray  # values[iy, ix]


def afunc_grid(params: ModelParams, E: float, grid_n: int, workers: int | None = None) -> SpectralGrid:
    """A(E, k) sampled on the uniform zone mesh, rows indexed by ky."""
    if grid_n < 16:
        raise ValueError(f"grid_n must be >= 16, got {grid_n}")
    k = bz_axis(grid_n)
    rows = ordered_map(lambda ky: spectral_function(params, E, (k, np.full_like(k, ky))), k, workers)
    return SpectralGrid(E=float(E), eta=params.eta, grid_n=grid_n, kx=k, ky=k.copy(), values=np.stack(rows))


@dataclass(frozen=True)
class EfcContour:
    """One polyline of Re eps_band(k) = E with per-vertex annotations."""

    band: int
    kx: np.ndarray
    ky: np.ndarray
    lifetimes: np.ndarray
    dos: np.ndarray
    near_exceptional: np.ndarray

    def __len__(self):
        return len(self.kx)


def _bisect_edges(f, ka, kb, iterations=60):
    """Root of f on the straight segments ka -> kb (arrays of shape (n, 2))."""
    fa = f(ka)
    fb = f(kb)
    lo = np.zeros(len(ka))
    hi = np.ones(len(ka))
    ok = fa * fb <= 0
    flo = fa
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        fm = f(ka + (kb - ka) * mid[:, None])
        left = np.sign(fm) == np.sign(flo)
        lo = np.where(left, mid, lo)
        flo = np.where(left, fm, flo)
        hi = np.where(left, hi, mid)
    return 0.5 * (lo + hi), ok


def _refine(vertices, axis, level_fn):
    """Move marching-squares vertices onto the exact level along their grid edge."""
    r, c = vertices[:, 0], vertices[:, 1]
    n = len(axis) - 1
    row_int = np.abs(r - np.rint(r)) < 1e-9
    col_int = np.abs(c - np.rint(c)) < 1e-9
    # along-row edges have integer r; along-column edges have integer c
    r0 = np.where(row_int, np.rint(r), np.floor(r)).astype(int)
    c0 = np.where(col_int, np.rint(c), np.floor(c)).astype(int)
    r0 = np.clip(r0, 0, n)
    c0 = np.clip(c0, 0, n)
    r1 = np.where(row_int, r0, np.minimum(r0 + 1, n))
    c1 = np.where(col_int, c0, np.minimum(c0 + 1, n))
    ka = np.stack([axis[c0], axis[r0]], axis=1)
    kb = np.stack([axis[c1], axis[r1]], axis=1)
    step = 2 * np.pi / n
    linear = np.stack([-np.pi + c * step, -np.pi + r * step], axis=1)
    on_node = row_int & col_int
    if on_node.all():
        return linear
    s, ok = _bisect_edges(lambda k: level_fn(k[:, 0], k[:, 1]), ka, kb)
    refined = ka + (kb - ka) * s[:, None]
    use = ok & ~on_node
    return np.where(use[:, None], refined, linear)


def extract_efc(params: ModelParams, E: float, grid_n: int) -> list[EfcContour]:
    """Equal-frequency contours Re eps_j(k) = E for each closed-form branch.

    Marching squares on the periodic mesh (the +pi edge is included so
    contours close across the zone boundary), then each vertex is
    bisected onto the exact level along its grid edge.  Vertices within
    1e-6 of an exceptional line are flagged.
    """
    if grid_n < 64:
        raise ValueError(f"grid_n must be >= 64, got {grid_n}")
    axis = bz_axis(grid_n, endpoint=True)
    KX, KY = np.meshgrid(axis, axis)
    bands = closed_form_bands(params, (KX, KY))
    lines = np.asarray(exceptional_lines(params))
    out = []
    for j in range(bands.shape[-1]):
        def level(kx, ky, j=j):
            return closed_form_bands(params, (kx, ky))[..., j].real - E

        for verts in find_contours(bands[..., j].real, E):
            k = _refine(verts, axis, level)
            kx, ky = k[:, 0], k[:, 1]
            eps = closed_form_bands(params, (kx, ky))[:, j]
            if lines.size:
                gap = np.abs(reduce_momentum(ky[:, None] - lines[None, :])).min(axis=1)
                flagged = gap <= EL_FLAG_DISTANCE
            else:
                flagged = np.zeros(len(kx), dtype=bool)
            out.append(EfcContour(
                band=j,
                kx=reduce_momentum(kx),
                ky=reduce_momentum(ky),
                lifetimes=eps.imag,
                dos=spectral_function(params, E, (kx, ky)),
                near_exceptional=flagged,
            ))
    return out


@dataclass(frozen=True)
class DdsReport:
    E: float
    delta: float
    dos_ratio: float
    contours: list
    threshold: float
    verdict: bool

    @property
    def n_vertices(self) -> int:
        return sum(len(c) for c in self.contours)

    def as_document(self) -> dict:
        return {
            "E": self.E,
            "delta": self.delta,
            "dos_ratio": self.dos_ratio,
            "threshold": self.threshold,
            "contours": len(self.contours),
            "vertices": self.n_vertices,
            "verdict": self.verdict,
        }


def dds_metric(params: ModelParams, E: float, grid_n: int, fraction: float = DDS_FRACTION,
               contours: list[EfcContour] | None = None) -> DdsReport:
    """Lifetime spread along the contours at energy E.

    ``delta`` is max - min of Im eps over every vertex of every band; the
    contour carries dynamical degeneracy splitting when delta exceeds
    ``fraction * gamma``.
    """
    if contours is None:
        contours = extract_efc(params, E, grid_n)
    threshold = fraction * params.gamma
    if not contours:
        return DdsReport(E=float(E), delta=0.0, dos_ratio=1.0, contours=[], threshold=threshold, verdict=False)
    life = np.concatenate([c.lifetimes for c in contours])
    dos = np.concatenate([c.dos for c in contours])
    delta = float(life.max() - life.min())
    return DdsReport(E=float(E), delta=delta, dos_ratio=float(dos.max() / dos.min()),
                     contours=contours, threshold=threshold, verdict=bool(delta > threshold))


def _conserved(edge, kx, ky):
    if edge == "vertical":
        return ky
    if edge == "horizontal":
        return kx
    return kx - ky


def _periodic_gap(a, b):
    return np.abs(reduce_momentum(np.asarray(a) - np.asarray(b)))


@dataclass(frozen=True)
class Partner:
    band: int
    kx: float
    ky: float
    dos: float
    lifetime: float
    open: bool


@dataclass(frozen=True)
class ChannelReport:
    E: float
    edge: str
    k_requested: tuple[float, float]
    k_incident: tuple[float, float]
    incident_band: int
    incident_dos: float
    incident_lifetime: float
    tolerance: float
    open_fraction: float
    partners: list[Partner]

    @property
    def open_partners(self) -> list[Partner]:
        return [p for p in self.partners if p.open]

    @property
    def verdict(self) -> str:
        return "reflective" if self.open_partners else "skin-accumulating"

    @property
    def best_partner_dos(self) -> float:
        return max((p.dos for p in self.partners), default=0.0)

    def as_document(self) -> dict:
        return {
            "E": self.E,
            "edge": self.edge,
            "k_requested": list(self.k_requested),
            "k_incident": list(self.k_incident),
            "incident_band": self.incident_band,
            "incident_dos": self.incident_dos,
            "incident_lifetime": self.incident_lifetime,
            "tolerance": self.tolerance,
            "open_fraction": self.open_fraction,
            "partners": [
                {"band": p.band, "kx": p.kx, "ky": p.ky, "dos": p.dos, "lifetime": p.lifetime, "open": p.open}
                for p in self.partners
            ],
            "verdict": self.verdict,
        }


def scattering_channels(params: ModelParams, E: float, k_i, edge: str, grid_n: int,
                        open_fraction: float = OPEN_FRACTION, tolerance: float | None = None,
                        contours: list[EfcContour] | None = None) -> ChannelReport:
    """Reflection channels for a wave at k_i striking an edge.

    The incident momentum is snapped to the nearest contour vertex.
    Vertical edges conserve ky, horizontal edges kx, and the (1, -1)
    staircase conserves kx - ky, all modulo 2*pi.  A partner is open when
    its A is at least ``open_fraction`` of the incident A; the edge
    accumulates skin modes when no partner is open.
    """
    if edge not in EDGES:
        raise ValueError(f"unknown edge {edge!r}; expected one of {EDGES}")
    if contours is None:
        contours = extract_efc(params, E, grid_n)
    step = 2 * np.pi / grid_n
    tol = 2 * step if tolerance is None else tolerance
    kx_req, ky_req = (float(v) for v in _split(k_i))
    if not contours:
        raise OffContourError(f"no equal-frequency contour at E={E}")
    band = np.concatenate([np.full(len(c), c.band) for c in contours])
    kx = np.concatenate([c.kx for c in contours])
    ky = np.concatenate([c.ky for c in contours])
    dos = np.concatenate([c.dos for c in contours])
    life = np.concatenate([c.lifetimes for c in contours])

    dist = np.hypot(_periodic_gap(kx, kx_req), _periodic_gap(ky, ky_req))
    # ties resolve to the larger A so the incident wave is the long-lived one
    best = np.lexsort((-dos, np.round(dist, 12)))[0]
    if dist[best] > 2 * step:
        raise OffContourError(
            f"k_i=({kx_req:.6g}, {ky_req:.6g}) is {dist[best]:.3g} from the nearest contour point "
            f"({kx[best]:.6g}, {ky[best]:.6g}); limit is {2 * step:.3g}"
        )
    kx0, ky0, a0 = kx[best], ky[best], dos[best]

    mismatch = _periodic_gap(_conserved(edge, kx, ky), _conserved(edge, kx0, ky0))
    separation = np.hypot(_periodic_gap(kx, kx0), _periodic_gap(ky, ky0))
    chosen = np.flatnonzero((mismatch <= tol) & (separation > tol))
    partners = [
        Partner(band=int(band[n]), kx=float(kx[n]), ky=float(ky[n]), dos=float(dos[n]),
                lifetime=float(life[n]), open=bool(dos[n] >= open_fraction * a0))
        for n in chosen
    ]
    return ChannelReport(
        E=float(E), edge=edge, k_requested=(kx_req, ky_req), k_incident=(float(kx0), float(ky0)),
        incident_band=int(band[best]), incident_dos=float(a0), incident_lifetime=float(life[best]),
        tolerance=tol, open_fraction=open_fraction, partners=partners,
    )
