"""Four-band lossy Bloch Hamiltonian and its separable closed-form bands.

Basis order is (A, B, D, C) with intra-cell offsets A=(0,0), B=(1/2,0),
D=(0,1/2), C=(1/2,1/2).  Detuning -m/+m alternates along x, loss 0/gamma
alternates along y, so the Bloch matrix is the Kronecker sum

    H(k) = H_y(ky) (x) 1 + 1 (x) H_x(kx)

with 2x2 chain blocks.  Phases carry integer lattice vectors only, which
keeps H(k) exactly 2*pi periodic.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SUBLATTICES = ("A", "B", "D", "C")
# (sx, sy) half-cell offsets per sublattice, in basis order
SUBLATTICE_OFFSETS = {"A": (0, 0), "B": (1, 0), "D": (0, 1), "C": (1, 1)}

# branch labels (sign of x root, sign of y root) for closed_form_bands columns
BRANCHES = ((1, 1), (1, -1), (-1, 1), (-1, -1))


@dataclass(frozen=True)
class ModelParams:
    """Scalars that fix the lattice model.

    Defaults are the reference set m = 2t, gamma = 2t with a resolvent
    broadening eta = 0.05 t.
    """

    t: float = 1.0
    m: float = 2.0
    gamma: float = 2.0
    eta: float = 0.05

    def __post_init__(self):
        for name in ("t", "m", "gamma", "eta"):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if self.t <= 0:
            raise ValueError(f"t must be > 0, got {self.t}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.eta <= 0:
            raise ValueError(f"eta must be > 0, got {self.eta}")

    def onsite(self) -> np.ndarray:
        """On-site energies in (A, B, D, C) order."""
        m, g = self.m, self.gamma
        return np.array([-m, m, -m - 1j * g, m - 1j * g], dtype=complex)


def reduce_momentum(k):
    """Map momenta into the fundamental zone [-pi, pi)."""
    k = np.asarray(k, dtype=float)
    return np.mod(k + np.pi, 2 * np.pi) - np.pi


@dataclass(frozen=True)
class Momentum:
    kx: float
    ky: float

    def __post_init__(self):
        object.__setattr__(self, "kx", float(reduce_momentum(self.kx)))
        object.__setattr__(self, "ky", float(reduce_momentum(self.ky)))

    def __iter__(self):
        yield self.kx
        yield self.ky


def _split_k(k):
    if isinstance(k, Momentum):
        return np.asarray(k.kx, dtype=float), np.asarray(k.ky, dtype=float)
    kx, ky = k
    return np.asarray(kx, dtype=float), np.asarray(ky, dtype=float)


def chain_block_x(params: ModelParams, kx) -> np.ndarray:
    """2x2 Bloch block of the detuned x chain, basis (left, right)."""
    kx = np.asarray(kx, dtype=float)
    out = np.zeros(kx.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = -params.m
    out[..., 1, 1] = params.m
    out[..., 0, 1] = params.t * (1 + np.exp(-1j * kx))
    out[..., 1, 0] = params.t * (1 + np.exp(1j * kx))
    return out


def chain_block_y(params: ModelParams, ky) -> np.ndarray:
    """2x2 Bloch block of the lossy y chain, basis (lower, upper)."""
    ky = np.asarray(ky, dtype=float)
    out = np.zeros(ky.shape + (2, 2), dtype=complex)
    out[..., 1, 1] = -1j * params.gamma
    out[..., 0, 1] = params.t * (1 + np.exp(-1j * ky))
    out[..., 1, 0] = params.t * (1 + np.exp(1j * ky))
    return out


def build_bloch(params: ModelParams, k) -> np.ndarray:
    """Bloch Hamiltonian H(k) in (A, B, D, C) order.

    Parameters
    ----------
    params : ModelParams
    k : Momentum or (kx, ky)
        Components may be arrays of a common shape; the result then has
        shape ``kx.shape + (4, 4)``.

    Returns
    -------
    H : complex ndarray, shape (..., 4, 4)
    """
    kx, ky = _split_k(k)
    kx, ky = np.broadcast_arrays(kx, ky)
    hx = chain_block_x(params, kx)
    hy = chain_block_y(params, ky)
    eye = np.eye(2)
    # index = 2*y_sub + x_sub
    H = np.einsum("...ab,cd->...acbd", hy, eye) + np.einsum("ab,...cd->...acbd", eye, hx)
    return H.reshape(kx.shape + (4, 4))


def x_roots(params: ModelParams, kx) -> np.ndarray:
    """Positive x-chain root sqrt(m^2 + 2t^2(1 + cos kx))."""
    kx = np.asarray(kx, dtype=float)
    return np.sqrt(params.m**2 + 2 * params.t**2 * (1 + np.cos(kx)))


def y_discriminant(params: ModelParams, ky) -> np.ndarray:
    """2t^2(1 + cos ky) - gamma^2/4; negative inside the lossless pocket."""
    ky = np.asarray(ky, dtype=float)
    return 2 * params.t**2 * (1 + np.cos(ky)) - params.gamma**2 / 4


def y_roots(params: ModelParams, ky) -> np.ndarray:
    """Principal square root of the y discriminant (imaginary when negative)."""
    return np.emath.sqrt(y_discriminant(params, ky)).astype(complex)


def closed_form_bands(params: ModelParams, k) -> np.ndarray:
    """All four bands from the Kronecker-sum structure.

    Column ``j`` holds branch ``BRANCHES[j]``: ``sx*ex(kx) - i*gamma/2 +
    sy*ey(ky)``.  With the principal root both real and imaginary parts
    are continuous over the whole zone, so each column is usable as a
    smooth band field (branches only touch on exceptional lines).
    """
    kx, ky = _split_k(k)
    kx, ky = np.broadcast_arrays(kx, ky)
    ex = x_roots(params, kx)
    ey = y_roots(params, ky)
    shift = -0.5j * params.gamma
    return np.stack([sx * ex + shift + sy * ey for sx, sy in BRANCHES], axis=-1)


def exceptional_lines(params: ModelParams) -> list[float]:
    """ky values in [-pi, pi) where the y block is defective.

    There the two y roots coalesce, so H(k) is non-diagonalizable along
    the full line kx in [-pi, pi).
    """
    if params.gamma == 0:
        return []
    c = params.gamma**2 / (8 * params.t**2) - 1
    if c > 1:
        return []
    root = float(np.arccos(min(c, 1.0)))
    if root == 0.0:
        return [0.0]
    if root >= np.pi:
        return [-np.pi]
    return [-root, root]
