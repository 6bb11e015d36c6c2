"""Cubic boxes, hopping kernels, dispersions, and Kac coupling matrices.

The finite box is Lambda_L = {-L..L}^d with |Lambda_L| = (2L+1)^d sites in
a fixed lexicographic order.  Hopping kernels are finitely supported
reflection-symmetric maps Z^d -> R; the dispersion is their cosine
transform.  Kac coupling matrices carry gamma^d f(gamma (x-y)) over site
pairs, with either the literal open-box displacement or the minimum-image
displacement under periodic boundary conditions.

All types are immutable after construction and all operations are pure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .potentials import PairPotential

__all__ = [
    "LatticeBox",
    "HoppingKernel",
    "ModelParams",
    "MeanFieldParams",
    "discrete_laplacian",
    "dispersion",
    "kac_coupling_matrix",
    "hopping_matrix",
]

OPEN, PERIODIC = "open", "periodic"
_BOUNDARIES = (OPEN, PERIODIC)


class LatticeBox:
    """Cubic box {-L..L}^d with deterministic lexicographic site order."""

    def __init__(self, d: int, L: int, boundary: str = PERIODIC):
        if d < 1 or L < 0:
            raise ConfigError("need d >= 1 and L >= 0")
        if boundary not in _BOUNDARIES:
            raise ConfigError(f"boundary must be one of {_BOUNDARIES}")
        self.d = int(d)
        self.L = int(L)
        self.boundary = boundary
        axes = [np.arange(-L, L + 1)] * d
        mesh = np.meshgrid(*axes, indexing="ij")
        self.sites = np.stack([m.ravel() for m in mesh], axis=-1)  # (n_sites, d)
        self.n_sites = self.sites.shape[0]
        self.extent = 2 * L + 1

    def displacement(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """x - y, wrapped to the minimum image under periodic boundary."""
        delta = np.asarray(x) - np.asarray(y)
        if self.boundary == PERIODIC:
            delta = (delta + self.L) % self.extent - self.L
        return delta

    def displacement_table(self) -> np.ndarray:
        """(n_sites, n_sites, d) table of displacements between all pairs."""
        return self.displacement(self.sites[:, None, :], self.sites[None, :, :])

    def wrap_index(self, coords: np.ndarray) -> np.ndarray:
        """Site index of coordinates wrapped into the box (periodic only)."""
        wrapped = (np.asarray(coords) + self.L) % self.extent - self.L
        idx = np.zeros(wrapped.shape[:-1], dtype=int)
        for j in range(self.d):
            idx = idx * self.extent + (wrapped[..., j] + self.L)
        return idx

    def __repr__(self):
        return f"LatticeBox(d={self.d}, L={self.L}, boundary={self.boundary!r})"


class HoppingKernel:
    """Finitely supported reflection-symmetric h: Z^d -> R.

    ``entries`` maps offset tuples to values; h(-z) = h(z) is enforced at
    construction (missing mirrors are filled in, contradictions rejected).
    """

    def __init__(self, entries: dict, d: int):
        if d < 1:
            raise ConfigError("need d >= 1")
        self.d = int(d)
        table: dict[tuple, float] = {}
        for offset, value in dict(entries).items():
            z = tuple(int(c) for c in np.atleast_1d(offset))
            if len(z) != d:
                raise ConfigError(f"hopping offset {z} has wrong dimension (d={d})")
            value = float(value)
            mirror = tuple(-c for c in z)
            for key in (z,) if z == mirror else (z, mirror):
                if key in table and table[key] != value:
                    raise ConfigError("hopping kernel not reflection-symmetric")
                table[key] = value
        self.entries = {z: v for z, v in sorted(table.items()) if v != 0.0}
        self.support_radius = max(
            (max(abs(c) for c in z) for z in self.entries), default=0
        )

    def offsets_values(self):
        if not self.entries:
            return np.zeros((0, self.d), dtype=int), np.zeros(0)
        zs = np.array(list(self.entries.keys()), dtype=int)
        vs = np.array(list(self.entries.values()), dtype=float)
        return zs, vs

    def __repr__(self):
        return f"HoppingKernel(d={self.d}, entries={self.entries})"


def discrete_laplacian(d: int, scale: float = 1.0) -> HoppingKernel:
    """h(0) = 2d, h(z) = -1 for |z| = 1, zero otherwise (times scale)."""
    entries = {tuple([0] * d): 2.0 * d * scale}
    for j in range(d):
        for s in (+1, -1):
            z = [0] * d
            z[j] = s
            entries[tuple(z)] = -1.0 * scale
    return HoppingKernel(entries, d)


@dataclass(frozen=True)
class ModelParams:
    """Parameters of the short-range Kac model (kinetic + BCS + repulsion)."""

    beta: float
    hopping: HoppingKernel
    f_plus: PairPotential | None
    f_minus: PairPotential | None
    gamma_plus: float = 0.5
    gamma_minus: float = 0.5
    include_onsite_correction: bool = False

    def __post_init__(self):
        if self.beta <= 0:
            raise ConfigError("beta must be positive")
        for name, g in (("gamma_plus", self.gamma_plus), ("gamma_minus", self.gamma_minus)):
            if not (0.0 < g < 1.0):
                raise ConfigError(f"{name} must lie in the open interval (0,1)")
        for name, p in (("f_plus", self.f_plus), ("f_minus", self.f_minus)):
            if p is not None and p.d != self.hopping.d:
                raise ConfigError(f"{name} dimension differs from hopping kernel")


@dataclass(frozen=True)
class MeanFieldParams:
    """Parameters of the mean-field model and its quadratic approximants."""

    beta: float
    hopping: HoppingKernel
    eta_plus: float = 0.0
    eta_minus: float = 0.0

    def __post_init__(self):
        if self.beta <= 0:
            raise ConfigError("beta must be positive")
        if self.eta_plus < 0 or self.eta_minus < 0:
            raise ConfigError("mean-field couplings eta must be nonnegative")


def dispersion(h: HoppingKernel, k) -> np.ndarray | float:
    """hhat(k) = sum_z h(z) cos(k.z); real by reflection symmetry.

    k has shape (..., d).
    """
    k = np.asarray(k, float)
    if k.shape == () and h.d == 1:
        k = k.reshape(1)
    if k.shape[-1] != h.d:
        raise ConfigError(f"momentum has dimension {k.shape[-1]}, expected {h.d}")
    zs, vs = h.offsets_values()
    if len(vs) == 0:
        return np.zeros(k.shape[:-1]) if k.ndim > 1 else 0.0
    phases = np.cos(np.tensordot(k, zs.T, axes=1))  # (..., n_offsets)
    out = phases @ vs
    return out if out.shape else float(out)


def hopping_matrix(h: HoppingKernel, box: LatticeBox) -> np.ndarray:
    """Site matrix t[x][y] of the kinetic term on the box.

    Open boundary: t[x][y] = h(x-y) literally.  Periodic boundary: the
    kernel is folded onto the torus (full image sum), which makes the
    matrix circulant with eigenvalues hhat(k) on the discrete momentum
    grid; this is what makes finite-grid momentum sums and real-space
    diagonalization agree exactly, including L < support_radius.
    """
    n = box.n_sites
    t = np.zeros((n, n))
    zs, vs = h.offsets_values()
    if len(vs) == 0:
        return t
    if box.boundary == OPEN:
        delta = box.displacement_table()  # (n, n, d)
        for z, v in zip(zs, vs):
            t += v * np.all(delta == z, axis=-1)
    else:
        for z, v in zip(zs, vs):
            targets = box.wrap_index(box.sites - z)  # y with x - y ~ z
            t[np.arange(n), targets] += v
    return t


def kac_coupling_matrix(p: PairPotential | None, gamma: float,
                        box: LatticeBox) -> np.ndarray:
    """V[x][y] = gamma^d f(gamma * delta(x,y)) over all site pairs.

    delta is the literal open-box displacement, or the minimum-image
    displacement under periodic boundary (not a full image sum; image
    corrections are below tolerance in the tested L*gamma regimes).
    """
    n = box.n_sites
    if p is None:
        return np.zeros((n, n))
    if not (0.0 < gamma < 1.0):
        raise ConfigError("gamma must lie in the open interval (0,1)")
    if p.d != box.d:
        raise ConfigError("potential dimension differs from box dimension")
    delta = box.displacement_table().astype(float)
    V = gamma**box.d * np.asarray(p.eval(gamma * delta), float)
    return 0.5 * (V + V.T)  # exact symmetry at rounding level
