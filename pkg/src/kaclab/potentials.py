"""Pair-potential families with certified lattice-sum machinery.

A pair potential here is a reflection-symmetric real function f on R^d
together with an evaluable Fourier transform

    fhat(k) = int f(x) exp(-i k.x) d^d x .

The module provides the built-in families (Yukawa-type, plain Gaussian,
Gaussian mixtures, tabulated splines), cone diagnostics (positive
definiteness of fhat and the scaling-monotone property
fhat(k/gamma) <= fhat(k) for gamma in (0,1)), numerically certified
truncations for sums over Z^d based on the integral test for monotone
radial majorants, a Poisson-summation checker, and the explicit
integral-test constant M_g bounding sum_z |gamma^d f(gamma z + a)|
uniformly in a for gamma < 1.

All potentials are immutable after construction; every operation is pure,
so they are safe to share across parallel parameter sweeps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, interpolate, special

from .errors import AccuracyError, ConfigError, UnsupportedPotentialError

__all__ = [
    "PairPotential",
    "PlainGaussian",
    "GaussianMixture",
    "Yukawa",
    "TableSpline",
    "GridSpec",
    "TruncationSpec",
    "ConeReport",
    "cone_check",
    "poisson_sum",
    "series_tail_bound",
    "integral_test_constant",
    "fourier_lattice_tail",
    "kac_lattice_sum",
    "decay_seminorm",
    "make_potential",
]


def _sphere_area(n: int) -> float:
    # surface of the unit sphere in R^n
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


# ---------------------------------------------------------------------------
# monotone radial majorants, g(|x|) >= |f(x)|, with exact moments and tails
# ---------------------------------------------------------------------------


class RadialMajorant:
    """Monotone decreasing g: R+ -> R+ with closed-form moments and tails."""

    def at_zero(self) -> float:
        raise NotImplementedError

    def moment(self, k: int) -> float:
        """int_0^inf g(u) u^k du."""
        raise NotImplementedError

    def tail(self, n: int, r0: float) -> float:
        """int_{r0}^inf g(u) u^{n-1} du."""
        raise NotImplementedError


class ExponentialMajorant(RadialMajorant):
    def __init__(self, amplitude: float, rate: float):
        if amplitude < 0 or rate <= 0:
            raise ConfigError("exponential majorant needs amplitude >= 0, rate > 0")
        self.amplitude = amplitude
        self.rate = rate

    def __call__(self, r):
        return self.amplitude * np.exp(-self.rate * np.asarray(r, float))

    def at_zero(self):
        return self.amplitude

    def moment(self, k):
        return self.amplitude * math.factorial(k) / self.rate ** (k + 1)

    def tail(self, n, r0):
        r0 = max(r0, 0.0)
        q = special.gammaincc(n, self.rate * r0)  # regularized upper Gamma
        return self.amplitude * math.gamma(n) * q / self.rate**n


class GaussianMajorant(RadialMajorant):
    """g(u) = amplitude * exp(-s u^2)."""

    def __init__(self, amplitude: float, s: float):
        if amplitude < 0 or s <= 0:
            raise ConfigError("gaussian majorant needs amplitude >= 0, s > 0")
        self.amplitude = amplitude
        self.s = s

    def __call__(self, r):
        return self.amplitude * np.exp(-self.s * np.asarray(r, float) ** 2)

    def at_zero(self):
        return self.amplitude

    def moment(self, k):
        return self.amplitude * math.gamma((k + 1) / 2.0) / (2.0 * self.s ** ((k + 1) / 2.0))

    def tail(self, n, r0):
        r0 = max(r0, 0.0)
        q = special.gammaincc(n / 2.0, self.s * r0 * r0)
        return self.amplitude * math.gamma(n / 2.0) * q / (2.0 * self.s ** (n / 2.0))


class CauchyMajorant(RadialMajorant):
    """g(u) = c0 / (u^2 + c1); only the zeroth moment is finite (d = 1 use)."""

    def __init__(self, c0: float, c1: float):
        self.c0 = c0
        self.c1 = c1

    def __call__(self, r):
        return self.c0 / (np.asarray(r, float) ** 2 + self.c1)

    def at_zero(self):
        return self.c0 / self.c1

    def moment(self, k):
        if k > 0:
            raise UnsupportedPotentialError(
                "pure Yukawa Fourier majorant has divergent moments beyond k=0"
            )
        return self.c0 * math.pi / (2.0 * math.sqrt(self.c1))

    def tail(self, n, r0):
        if n > 1:
            raise UnsupportedPotentialError(
                "pure Yukawa Fourier majorant only supports 1-dimensional tails"
            )
        s = math.sqrt(self.c1)
        return self.c0 / s * (math.pi / 2.0 - math.atan(max(r0, 0.0) / s))


class SumMajorant(RadialMajorant):
    def __init__(self, parts):
        self.parts = list(parts)

    def __call__(self, r):
        return sum(p(r) for p in self.parts)

    def at_zero(self):
        return sum(p.at_zero() for p in self.parts)

    def moment(self, k):
        return sum(p.moment(k) for p in self.parts)

    def tail(self, n, r0):
        return sum(p.tail(n, r0) for p in self.parts)


class TableMajorant(RadialMajorant):
    """Piecewise-constant decreasing envelope of tabulated |f| samples.

    Compactly supported: zero beyond the last tabulated radius.
    """

    def __init__(self, radii, values):
        radii = np.asarray(radii, float)
        env = np.abs(np.asarray(values, float))
        if radii[0] != 0.0 or np.any(np.diff(radii) <= 0):
            raise ConfigError("table majorant needs strictly increasing radii from 0")
        # running max from the right makes the envelope monotone decreasing
        self.env = np.maximum.accumulate(env[::-1])[::-1]
        self.radii = radii

    def __call__(self, r):
        r = np.asarray(r, float)
        idx = np.searchsorted(self.radii, r, side="right") - 1
        out = np.where(
            (r >= self.radii[-1]) | (idx < 0), 0.0, self.env[np.clip(idx, 0, len(self.env) - 1)]
        )
        return out

    def at_zero(self):
        return float(self.env[0])

    def moment(self, k):
        r = self.radii
        return float(np.sum(self.env[:-1] * (r[1:] ** (k + 1) - r[:-1] ** (k + 1)) / (k + 1)))

    def tail(self, n, r0):
        r = np.clip(self.radii, max(r0, 0.0), None)
        return float(np.sum(self.env[:-1] * (r[1:] ** n - r[:-1] ** n) / n))


# ---------------------------------------------------------------------------
# integral-test bounds on lattice sums
# ---------------------------------------------------------------------------


def integral_test_constant(majorant: RadialMajorant, d: int) -> float:
    """Explicit constant M_g with sum_z |gamma^d f(gamma z + a)| <= M_g.

    Valid uniformly in the shift a and in gamma in (0,1), for any f
    dominated by the monotone radial majorant g.  Assembled from g(0) and
    the moments int g(u) u^k du, k = 0..d-1.
    """
    g0 = majorant.at_zero()
    half_sqrt_d = math.sqrt(d) / 2.0
    total = g0
    for n in range(1, d + 1):
        inner = half_sqrt_d**n * g0
        for k in range(n):
            inner += math.comb(n - 1, k) * half_sqrt_d ** (n - 1 - k) * majorant.moment(k)
        total += math.comb(d, n) * _sphere_area(n) * inner
    return total


def _lattice_tail(majorant: RadialMajorant, d: int, scale: float, radius: int,
                  prefactor: float = 1.0) -> float:
    """Certified bound on prefactor * sum_{|z|_inf > radius} g(scale*|z|).

    Cell-by-cell comparison with the radial integral, one sub-lattice of
    non-zero components at a time; every cell of a point with
    |z|_inf > radius lies in {|x| >= radius - 1}.
    """
    if radius < 2:
        return math.inf
    total = 0.0
    for n in range(1, d + 1):
        total += math.comb(d, n) * _sphere_area(n) * scale ** (-n) * majorant.tail(
            n, scale * (radius - 1)
        )
    return prefactor * total


def _truncation_radius(majorant, d, scale, tol, prefactor=1.0, shift=0.0,
                       max_radius=200_000) -> int:
    """Smallest integer R with the certified tail below tol."""
    shift = int(math.ceil(shift))

    def tail(r):
        return _lattice_tail(majorant, d, scale, r - shift, prefactor=prefactor)

    r = 2 + shift
    while tail(r) > tol:
        r *= 2
        if r > max_radius:
            raise AccuracyError(
                f"truncation radius beyond {max_radius} needed for tail <= {tol:g}",
                values={"radius": r, "tail": tail(r)},
            )
    lo, hi = (2 + shift), r
    while lo < hi:
        mid = (lo + hi) // 2
        if tail(mid) <= tol:
            hi = mid
        else:
            lo = mid + 1
    return hi


def _integer_box(d: int, radius: int) -> np.ndarray:
    axes = [np.arange(-radius, radius + 1)] * d
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


# ---------------------------------------------------------------------------
# potential families
# ---------------------------------------------------------------------------


class PairPotential:
    """Base class: reflection-symmetric f on R^d with evaluable fhat.

    ``sign`` records the role the potential plays in the model ("plus" for
    the density-density repulsion, "minus" for the Cooper-pair hopping);
    it does not change any values.
    """

    family = "abstract"

    def __init__(self, d: int, sign: str = "plus"):
        if d < 1:
            raise ConfigError("dimension must be a positive integer")
        if sign not in ("plus", "minus"):
            raise ConfigError("sign must be 'plus' or 'minus'")
        self.d = int(d)
        self.sign = sign

    # -- evaluation ---------------------------------------------------------

    def eval(self, x) -> np.ndarray | float:
        """f(x); x has shape (..., d)."""
        x = self._check_point(x)
        return self._eval(x)

    def fourier(self, k) -> np.ndarray | float:
        """fhat(k) = int f(x) exp(-i k.x) dx; k has shape (..., d)."""
        k = self._check_point(k)
        return self._fourier(k)

    def born_zero(self) -> float:
        """fhat(0) = int f(x) dx, the mean-field coupling of the family."""
        return float(self.fourier(np.zeros(self.d)))

    def _check_point(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape == () and self.d == 1:
            x = x.reshape(1)
        if x.shape[-1] != self.d:
            raise ConfigError(f"point has dimension {x.shape[-1]}, expected {self.d}")
        if not np.all(np.isfinite(x)):
            raise ConfigError("non-finite evaluation point")
        return x

    def _eval(self, x):
        raise NotImplementedError

    def _fourier(self, k):
        raise NotImplementedError

    # -- certified majorants -------------------------------------------------

    def radial_majorant(self) -> RadialMajorant:
        raise UnsupportedPotentialError(
            f"no real-space majorant for family {self.family!r} in d={self.d}"
        )

    def fourier_majorant(self) -> RadialMajorant:
        raise UnsupportedPotentialError(
            f"no Fourier-space majorant for family {self.family!r} in d={self.d}"
        )

    def params(self) -> dict:
        raise NotImplementedError

    def __repr__(self):
        inner = ", ".join(f"{k}={v!r}" for k, v in self.params().items())
        return f"{type(self).__name__}(d={self.d}, {inner})"


class PlainGaussian(PairPotential):
    """f(x) = exp(-|x|^2 / width^2)."""

    family = "plain_gaussian"

    def __init__(self, width: float = 1.0, d: int = 1, sign: str = "plus"):
        super().__init__(d, sign)
        if width <= 0:
            raise ConfigError("gaussian width must be positive")
        self.width = float(width)

    def _eval(self, x):
        r2 = np.sum(x * x, axis=-1)
        return np.exp(-r2 / self.width**2)

    def _fourier(self, k):
        k2 = np.sum(k * k, axis=-1)
        amp = (self.width * math.sqrt(math.pi)) ** self.d
        return amp * np.exp(-self.width**2 * k2 / 4.0)

    def radial_majorant(self):
        return GaussianMajorant(1.0, 1.0 / self.width**2)

    def fourier_majorant(self):
        amp = (self.width * math.sqrt(math.pi)) ** self.d
        return GaussianMajorant(amp, self.width**2 / 4.0)

    def params(self):
        return {"width": self.width}


class GaussianMixture(PairPotential):
    """f(x) = sum_i w_i exp(-(s_i1 x_1^2 + ... + s_id x_d^2)), w_i > 0.

    The anisotropic scales keep the family inside the scaling-monotone cone
    while allowing non-radial test cases.
    """

    family = "gaussian_mixture"

    def __init__(self, terms, d: int = 1, sign: str = "plus"):
        super().__init__(d, sign)
        parsed = []
        for weight, scales in terms:
            scales = tuple(float(s) for s in np.atleast_1d(scales))
            if len(scales) != d:
                raise ConfigError(f"term needs {d} scales, got {len(scales)}")
            if weight <= 0 or any(s <= 0 for s in scales):
                raise ConfigError("mixture weights and scales must be positive")
            parsed.append((float(weight), scales))
        if not parsed:
            raise ConfigError("mixture needs at least one term")
        self.terms = parsed

    def _eval(self, x):
        out = 0.0
        for w, scales in self.terms:
            out = out + w * np.exp(-np.sum(np.asarray(scales) * x * x, axis=-1))
        return out

    def _fourier(self, k):
        out = 0.0
        for w, scales in self.terms:
            s = np.asarray(scales)
            amp = w * np.prod(np.sqrt(math.pi / s))
            out = out + amp * np.exp(-np.sum(k * k / (4.0 * s), axis=-1))
        return out

    def radial_majorant(self):
        # exp(-sum s_j x_j^2) <= exp(-min_j(s_j) |x|^2)
        return SumMajorant(
            GaussianMajorant(w, min(scales)) for w, scales in self.terms
        )

    def fourier_majorant(self):
        parts = []
        for w, scales in self.terms:
            amp = w * np.prod(np.sqrt(math.pi / np.asarray(scales)))
            parts.append(GaussianMajorant(float(amp), 1.0 / (4.0 * max(scales))))
        return SumMajorant(parts)

    def params(self):
        return {"terms": self.terms}


class Yukawa(PairPotential):
    """Yukawa-type potential defined through its Fourier transform,

        fhat(k) = c0 exp(-c2 |k|^2) / (|k|^2 + c1),

    positive definite and scaling monotone for all parameter choices.
    c2 = 0 is the bare Yukawa case (kept for d = 1, where the real-space
    profile has the closed form (c0 / 2 sqrt(c1)) exp(-sqrt(c1) |x|));
    c2 > 0 regularizes short distances.
    """

    family = "yukawa"

    def __init__(self, c0: float, c1: float, c2: float = 0.0, d: int = 1,
                 sign: str = "minus"):
        super().__init__(d, sign)
        if c0 <= 0 or c1 <= 0 or c2 < 0:
            raise ConfigError("yukawa needs c0 > 0, c1 > 0, c2 >= 0")
        if c2 == 0.0 and d != 1:
            raise ConfigError(
                "bare yukawa (c2=0) is only evaluable in real space for d=1; "
                "use c2 > 0 for d >= 2"
            )
        if c2 > 0.0 and d > 3:
            raise ConfigError("yukawa real-space quadrature implemented for d <= 3")
        self.c0, self.c1, self.c2 = float(c0), float(c1), float(c2)
        self._radial_cache: dict[float, float] = {}

    def _fourier(self, k):
        k2 = np.sum(k * k, axis=-1)
        return self.c0 * np.exp(-self.c2 * k2) / (k2 + self.c1)

    def _fhat_radial(self, q):
        return self.c0 * np.exp(-self.c2 * q * q) / (q * q + self.c1)

    def _radial_value(self, r: float) -> float:
        """Inverse Fourier transform of the radial profile at radius r."""
        key = round(r, 12)
        hit = self._radial_cache.get(key)
        if hit is not None:
            return hit
        if self.c2 == 0.0:  # d = 1 closed form
            s = math.sqrt(self.c1)
            val = self.c0 / (2.0 * s) * math.exp(-s * r)
        else:
            kmax = math.sqrt(max(math.log(self.c0 / (self.c1 * 1e-20)), 1.0) / self.c2)
            if self.d == 1:
                if r == 0.0:
                    val = integrate.quad(self._fhat_radial, 0, kmax, limit=200)[0] / math.pi
                else:
                    val = integrate.quad(
                        self._fhat_radial, 0, kmax, weight="cos", wvar=r, limit=400
                    )[0] / math.pi
            elif self.d == 2:
                val = integrate.quad(
                    lambda q: self._fhat_radial(q) * special.j0(q * r) * q,
                    0, kmax, limit=400,
                )[0] / (2.0 * math.pi)
            else:  # d == 3
                if r == 0.0:
                    val = integrate.quad(
                        lambda q: self._fhat_radial(q) * q * q, 0, kmax, limit=200
                    )[0] / (2.0 * math.pi**2)
                else:
                    val = integrate.quad(
                        lambda q: self._fhat_radial(q) * q, 0, kmax,
                        weight="sin", wvar=r, limit=400,
                    )[0] / (2.0 * math.pi**2 * r)
        self._radial_cache[key] = val
        return val

    def _eval(self, x):
        r = np.sqrt(np.sum(x * x, axis=-1))
        flat = np.atleast_1d(r).ravel()
        vals = np.array([self._radial_value(float(v)) for v in flat])
        return vals.reshape(np.shape(r)) if np.shape(r) else float(vals[0])

    def radial_majorant(self):
        if self.d != 1:
            raise UnsupportedPotentialError(
                "certified yukawa real-space majorant available for d=1 only"
            )
        # f = (gaussian of variance 2*c2) * (bare yukawa); |x-z| >= |x|-|z|
        # gives A exp(-sqrt(c1)|x|) with A = (c0/2 sqrt(c1)) E[exp(sqrt(c1)|Z|)]
        s = math.sqrt(self.c1)
        if self.c2 == 0.0:
            amp = self.c0 / (2.0 * s)
        else:
            sigma = math.sqrt(2.0 * self.c2)
            mgf = 2.0 * math.exp(self.c1 * self.c2) * special.ndtr(s * sigma)
            amp = self.c0 / (2.0 * s) * mgf
        return ExponentialMajorant(amp, s)

    def fourier_majorant(self):
        if self.c2 > 0.0:
            return GaussianMajorant(self.c0 / self.c1, self.c2)
        if self.d == 1:
            return CauchyMajorant(self.c0, self.c1)
        raise UnsupportedPotentialError(
            "bare yukawa Fourier sums are not absolutely convergent for d >= 2"
        )

    def params(self):
        return {"c0": self.c0, "c1": self.c1, "c2": self.c2}


class TableSpline(PairPotential):
    """Radial cubic-spline potential from samples (radii, values).

    Zero extrapolation beyond the last tabulated radius.  Cone membership
    cannot be certified from samples; cone_check on this family is a
    sampled diagnostic only.
    """

    family = "table_spline"

    def __init__(self, radii, values, d: int = 1, sign: str = "plus"):
        super().__init__(d, sign)
        radii = np.asarray(radii, float)
        values = np.asarray(values, float)
        if radii.ndim != 1 or radii.shape != values.shape or len(radii) < 4:
            raise ConfigError("table spline needs matching 1-d arrays, >= 4 samples")
        if radii[0] != 0.0 or np.any(np.diff(radii) <= 0):
            raise ConfigError("table radii must increase strictly from 0")
        self.radii = radii
        self.values = values
        self._spline = interpolate.CubicSpline(radii, values, extrapolate=False)
        self._fourier_cache: dict[float, float] = {}

    @property
    def table_radius(self) -> float:
        return float(self.radii[-1])

    def _eval(self, x):
        r = np.sqrt(np.sum(x * x, axis=-1))
        out = self._spline(np.clip(r, 0.0, self.table_radius))
        return np.where(r > self.table_radius, 0.0, out)

    def _radial_eval(self, r):
        r = np.asarray(r, float)
        out = self._spline(np.clip(r, 0.0, self.table_radius))
        return np.where(r > self.table_radius, 0.0, out)

    def _fourier_radial(self, q: float) -> float:
        key = round(q, 12)
        hit = self._fourier_cache.get(key)
        if hit is not None:
            return hit
        rmax = self.table_radius
        if self.d == 1:
            if q == 0.0:
                val = 2.0 * integrate.quad(self._radial_eval, 0, rmax, limit=200)[0]
            else:
                val = 2.0 * integrate.quad(
                    self._radial_eval, 0, rmax, weight="cos", wvar=q, limit=400
                )[0]
        elif self.d == 2:
            val = 2.0 * math.pi * integrate.quad(
                lambda r: self._radial_eval(r) * special.j0(q * r) * r,
                0, rmax, limit=400,
            )[0]
        elif self.d == 3:
            if q == 0.0:
                val = 4.0 * math.pi * integrate.quad(
                    lambda r: self._radial_eval(r) * r * r, 0, rmax, limit=200
                )[0]
            else:
                val = 4.0 * math.pi / q * integrate.quad(
                    lambda r: self._radial_eval(r) * r, 0, rmax,
                    weight="sin", wvar=q, limit=400,
                )[0]
        else:
            raise UnsupportedPotentialError("table spline Fourier implemented for d <= 3")
        self._fourier_cache[key] = val
        return val

    def _fourier(self, k):
        q = np.sqrt(np.sum(k * k, axis=-1))
        flat = np.atleast_1d(q).ravel()
        uniq, inv = np.unique(np.round(flat, 12), return_inverse=True)
        vals = np.array([self._fourier_radial(float(v)) for v in uniq])[inv]
        return vals.reshape(np.shape(q)) if np.shape(q) else float(vals[0])

    def radial_majorant(self):
        return TableMajorant(self.radii, self.values)

    def fourier_majorant(self):
        if not np.any(self.values):
            return GaussianMajorant(0.0, 1.0)  # zero function, zero transform
        raise UnsupportedPotentialError(
            "no certified Fourier majorant for sampled potentials"
        )

    def params(self):
        return {"radii": self.radii.tolist(), "values": self.values.tolist()}


_FAMILIES = {
    "plain_gaussian": PlainGaussian,
    "gaussian_mixture": GaussianMixture,
    "yukawa": Yukawa,
    "table_spline": TableSpline,
}


def make_potential(family: str, d: int, sign: str = "plus", **params) -> PairPotential:
    """Factory used by the config layer; family names as in _FAMILIES."""
    try:
        cls = _FAMILIES[family]
    except KeyError:
        raise ConfigError(
            f"unknown potential family {family!r}; known: {sorted(_FAMILIES)}"
        ) from None
    return cls(d=d, sign=sign, **params)


# ---------------------------------------------------------------------------
# cone diagnostics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    """Sampling grid for cone diagnostics: |k_j| <= radius, points per axis."""

    radius: float = 20.0
    points_per_axis: int = 101

    def __post_init__(self):
        if self.radius <= 0 or self.points_per_axis < 2:
            raise ConfigError("grid radius and resolution must be positive")


@dataclass(frozen=True)
class ConeReport:
    positive_definite: bool
    scaling_monotone: bool
    min_fourier_value: float
    monotonicity_violation: float
    grid_spec: tuple

    def as_dict(self):
        return {
            "positive_definite": self.positive_definite,
            "scaling_monotone": self.scaling_monotone,
            "min_fourier_value": self.min_fourier_value,
            "monotonicity_violation": self.monotonicity_violation,
            "grid_spec": list(self.grid_spec),
        }


_SCALING_GAMMAS = (0.5, 0.25, 0.1)


def cone_check(p: PairPotential, eps: float = 1.0, grid: GridSpec | None = None,
               tol_pd: float = 1e-9, tol_sm: float = 1e-9) -> ConeReport:
    """Sampled membership test for the positive-definite / scaling-monotone cones.

    Samples fhat on the tensor grid, reports the minimum value, and checks
    fhat(k/gamma) <= fhat(k) + tol_sm for gamma in {0.5, 0.25, 0.1}.
    """
    if eps <= 0:
        raise ConfigError("eps must be positive")
    grid = grid or GridSpec()
    axes = [np.linspace(-grid.radius, grid.radius, grid.points_per_axis)] * p.d
    mesh = np.meshgrid(*axes, indexing="ij")
    K = np.stack([m.ravel() for m in mesh], axis=-1)
    base = np.asarray(p.fourier(K), float)
    min_val = float(base.min())
    violation = 0.0
    for gamma in _SCALING_GAMMAS:
        scaled = np.asarray(p.fourier(K / gamma), float)
        violation = max(violation, float(np.max(scaled - base)))
    violation = max(violation, 0.0)
    return ConeReport(
        positive_definite=bool(min_val >= -tol_pd),
        scaling_monotone=bool(violation <= tol_sm),
        min_fourier_value=min_val,
        monotonicity_violation=violation,
        grid_spec=(grid.radius, grid.points_per_axis),
    )


# ---------------------------------------------------------------------------
# certified lattice sums and Poisson summation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TruncationSpec:
    tol: float = 1e-12
    max_radius: int = 200_000


def _real_lattice_sum(p: PairPotential, gamma: float, shift, trunc: TruncationSpec):
    """sum_z gamma^d f(gamma (z + shift)) with certified truncation."""
    g = p.radial_majorant()
    shift = np.asarray(shift, float)
    shift_norm = float(np.linalg.norm(shift))
    radius = _truncation_radius(
        g, p.d, gamma, trunc.tol, prefactor=gamma**p.d, shift=shift_norm,
        max_radius=trunc.max_radius,
    )
    Z = _integer_box(p.d, radius)
    vals = np.asarray(p.eval(gamma * (Z + shift)), float)
    return gamma**p.d * math.fsum(vals)  # compensated: noise stays at one ulp


def kac_lattice_sum(p: PairPotential, gamma: float,
                    trunc: TruncationSpec | None = None) -> float:
    """S(gamma) = sum_{z in Z^d} gamma^d f(gamma z), certified truncation.

    For scaling-monotone f this is nondecreasing in gamma and tends to
    fhat(0) as gamma -> 0+ (Poisson summation term by term).
    """
    if not (0 < gamma):
        raise ConfigError("gamma must be positive")
    trunc = trunc or TruncationSpec()
    return _real_lattice_sum(p, gamma, np.zeros(p.d), trunc)


def poisson_sum(p: PairPotential, gamma: float, a,
                truncation: TruncationSpec | None = None) -> tuple[float, float]:
    """Both sides of the Poisson summation identity, independently truncated.

    lhs = sum_z gamma^d f(gamma a + gamma z)
    rhs = Re sum_z fhat(2 pi z / gamma) exp(2 pi i z.a)

    Each series is truncated with its own certified tail below the spec
    tolerance; the pair is returned for comparison.
    """
    if gamma <= 0:
        raise ConfigError("gamma must be positive")
    trunc = truncation or TruncationSpec()
    a = np.atleast_1d(np.asarray(a, float))
    if a.shape != (p.d,):
        raise ConfigError(f"shift a must have dimension {p.d}")

    lhs = _real_lattice_sum(p, gamma, a, trunc)

    ghat = p.fourier_majorant()
    scale = 2.0 * math.pi / gamma
    radius = _truncation_radius(ghat, p.d, scale, trunc.tol, max_radius=trunc.max_radius)
    Z = _integer_box(p.d, radius)
    vals = np.asarray(p.fourier(scale * Z), float)
    phases = np.cos(2.0 * math.pi * (Z @ a))
    rhs = math.fsum(vals * phases)
    return lhs, rhs


def series_tail_bound(p: PairPotential, eps: float, gamma: float) -> float:
    """The constant M_g bounding sum_z |gamma^d f(gamma z + a)| for gamma < 1.

    Uses the closed-form monotone radial majorant of the family; raises
    UnsupportedPotentialError when none is known.
    """
    if eps <= 0:
        raise ConfigError("eps must be positive")
    if not (0 < gamma < 1):
        raise ConfigError("the uniform bound M_g requires gamma in (0,1)")
    return integral_test_constant(p.radial_majorant(), p.d)


def fourier_lattice_tail(p: PairPotential, gamma: float,
                         trunc: TruncationSpec | None = None) -> float:
    """sum_{k in Z^d \\ {0}} |fhat(k / gamma)| with certified truncation.

    The decay of this quantity as gamma -> 0 (generically O(gamma^2)) is
    what makes lattice sums converge to the Born value.
    """
    if not (0 < gamma < 1):
        raise ConfigError("gamma must lie in (0,1)")
    trunc = trunc or TruncationSpec()
    ghat = p.fourier_majorant()
    radius = _truncation_radius(ghat, p.d, 1.0 / gamma, trunc.tol,
                                max_radius=trunc.max_radius)
    Z = _integer_box(p.d, radius)
    Z = Z[np.any(Z != 0, axis=1)]
    vals = np.abs(np.asarray(p.fourier(Z / gamma), float))
    return float(np.sum(vals))


# ---------------------------------------------------------------------------
# decay-norm diagnostic (grid-sampled seminorm, derivatives up to order 2)
# ---------------------------------------------------------------------------


def decay_seminorm(p: PairPotential, eps: float, radius: float = 10.0,
                   points: int = 201, h: float = 1e-4) -> float:
    """Grid-sampled version of the weighted decay norm, |l| <= 2 only.

    sum_{|l|<=2} (1/l!) max_grid (1+|x|)^{d+eps+|l|} |d^l f(x)|, with
    central finite differences.  Diagnostic only: the true norm takes a
    supremum over R^d and derivatives up to order 2d, which cannot be
    certified from samples.
    """
    if eps <= 0:
        raise ConfigError("eps must be positive")
    d = p.d
    axes = [np.linspace(-radius, radius, points)] * d
    mesh = np.meshgrid(*axes, indexing="ij")
    X = np.stack([m.ravel() for m in mesh], axis=-1)
    r = np.linalg.norm(X, axis=-1)

    total = 0.0
    # order 0
    total += float(np.max((1.0 + r) ** (d + eps) * np.abs(np.asarray(p.eval(X), float))))
    # first derivatives
    for j in range(d):
        plus = X.copy(); plus[:, j] += h
        minus = X.copy(); minus[:, j] -= h
        dj = (np.asarray(p.eval(plus), float) - np.asarray(p.eval(minus), float)) / (2 * h)
        total += float(np.max((1.0 + r) ** (d + eps + 1) * np.abs(dj)))
    # second derivatives (j, l)
    f0 = np.asarray(p.eval(X), float)
    for j in range(d):
        for l in range(j, d):
            if j == l:
                plus = X.copy(); plus[:, j] += h
                minus = X.copy(); minus[:, j] -= h
                djj = (np.asarray(p.eval(plus), float) - 2 * f0
                       + np.asarray(p.eval(minus), float)) / h**2
                total += 0.5 * float(np.max((1.0 + r) ** (d + eps + 2) * np.abs(djj)))
            else:
                pp = X.copy(); pp[:, j] += h; pp[:, l] += h
                pm = X.copy(); pm[:, j] += h; pm[:, l] -= h
                mp = X.copy(); mp[:, j] -= h; mp[:, l] += h
                mm = X.copy(); mm[:, j] -= h; mm[:, l] -= h
                djl = (np.asarray(p.eval(pp), float) - np.asarray(p.eval(pm), float)
                       - np.asarray(p.eval(mp), float) + np.asarray(p.eval(mm), float)) / (4 * h**2)
                total += float(np.max((1.0 + r) ** (d + eps + 2) * np.abs(djl)))
    return total
