"""The two-person zero-sum thermodynamic game of a mean-field model.

Payoff (to be minimized by the attractive player over c_-, maximized by
the repulsive player over c_+):

    payoff(c_-, c_+) = -c_+^2 + c_-^2 - P~(c_-, c_+),

with P~ the thermodynamic-limit pressure of the quadratic approximating
Hamiltonian.  The conventional and non-conventional pressures are the two
orderings of the optimizations,

    P_sharp = -min_{c_-} max_{c_+} payoff,
    P_flat  = -max_{c_+} min_{c_-} payoff,

which satisfy P_sharp <= P_flat always, with equality for purely
attractive or purely repulsive models.

Gauge fixing: the pairing term is U(1)-invariant, so c_- is restricted to
[0, inf) real; only Re c_+ enters the Hamiltonian while -|c_+|^2 penalizes
any imaginary part, so Im c_+ = 0.  Search boxes c_- in [0,1] and c_+ in
[0,2] follow from the self-consistency c = <...> and the operator norms
||a a|| = 1, ||n_up + n_down|| = 2; optima pinned at the upper box edge
are flagged, never silently accepted.

Gap-equation normalization: with pair = <a^dag_up a^dag_down> and
density = <n_up + n_down> per site in the approximating model, the
residual uses the fixed points

    c_- = sqrt(eta_-) * pair,      c_+ = sqrt(eta_+) * density,

chosen so that the payoff gradient is exactly
(2 (c_- - sqrt(eta_-) pair), -2 (c_+ - sqrt(eta_+) density)); stationarity
of the payoff and residual zero are the same equations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import ConfigError
from .lattice import MeanFieldParams
from .quasifree import QuadratureSpec, bz_gibbs_expectations, quasifree_pressure

__all__ = [
    "GamePoint",
    "GameResult",
    "GapSolution",
    "OptimizerSpec",
    "DecisionResult",
    "payoff",
    "decision_rule",
    "solve_game",
    "gap_residual",
    "solve_gap_fixed_point",
    "payoff_gradient_fd",
    "quasiconvexity_report",
]


@dataclass(frozen=True)
class GamePoint:
    """Gauge-fixed strategies: c_minus = |c_-| >= 0, c_plus = Re c_+."""

    c_minus: float
    c_plus: float

    def __post_init__(self):
        if self.c_minus < 0:
            raise ConfigError("c_minus is a gauge-fixed modulus, must be >= 0")
        if not (np.isfinite(self.c_minus) and np.isfinite(self.c_plus)):
            raise ConfigError("game point must be finite")


@dataclass(frozen=True)
class OptimizerSpec:
    c_minus_box: tuple = (0.0, 1.0)
    c_plus_box: tuple = (0.0, 2.0)
    grid_points: int = 33
    xtol: float = 1e-10
    degeneracy_window: float = 1e-6
    max_iter: int = 500
    tol_gap: float = 1e-9

    def __post_init__(self):
        if self.grid_points < 3:
            raise ConfigError("need at least 3 grid points")
        if self.xtol <= 0 or self.tol_gap <= 0:
            raise ConfigError("tolerances must be positive")


class DecisionResult(NamedTuple):
    c_plus: float
    payoff_value: float
    at_boundary: bool


@dataclass(frozen=True)
class GameResult:
    p_sharp: float
    p_flat: float
    argmin_sharp: GamePoint
    argmax_flat: GamePoint
    gap_residual_sharp: float
    gap_residual_flat: float
    saddle_gap: float  # p_flat - p_sharp, >= 0 up to tolerance
    degenerate_minima: tuple = ()
    boundary_flagged: bool = False

    def as_dict(self):
        return {
            "p_sharp": self.p_sharp,
            "p_flat": self.p_flat,
            "argmin_sharp": [self.argmin_sharp.c_minus, self.argmin_sharp.c_plus],
            "argmax_flat": [self.argmax_flat.c_minus, self.argmax_flat.c_plus],
            "gap_residual_sharp": self.gap_residual_sharp,
            "gap_residual_flat": self.gap_residual_flat,
            "saddle_gap": self.saddle_gap,
            "degenerate_minima": [[g.c_minus, g.c_plus] for g in self.degenerate_minima],
            "boundary_flagged": self.boundary_flagged,
        }


@dataclass(frozen=True)
class GapSolution:
    c_minus: float
    c_plus: float
    residual: float
    iterations: int
    converged: bool


# ---------------------------------------------------------------------------
# payoff and 1-d optimizers
# ---------------------------------------------------------------------------


def payoff(mf: MeanFieldParams, g: GamePoint, quad: QuadratureSpec | None = None) -> float:
    """-c_+^2 + c_-^2 - P~(c_-, c_+)."""
    return (-g.c_plus**2 + g.c_minus**2
            - quasifree_pressure(mf, g.c_minus, g.c_plus, quad))


_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_min(f: Callable[[float], float], lo: float, hi: float,
                xtol: float, max_iter: int):
    """Golden-section minimization on [lo, hi]; returns (x, f(x), n_evals)."""
    x1 = hi - _INVPHI * (hi - lo)
    x2 = lo + _INVPHI * (hi - lo)
    f1, f2 = f(x1), f(x2)
    evals = 2
    while hi - lo > xtol and evals < max_iter:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _INVPHI * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _INVPHI * (hi - lo)
            f2 = f(x2)
        evals += 1
    return (x1, f1, evals) if f1 <= f2 else (x2, f2, evals)


def _grid_refine_min(f: Callable[[float], float], lo: float, hi: float,
                     opt: OptimizerSpec):
    """All local minima of f on [lo, hi]: coarse grid, then golden refinement.

    Returns a list of (x, f(x)) sorted by value; the grid guards against
    the multiple minima of first-order transitions.
    """
    xs = np.linspace(lo, hi, opt.grid_points)
    fs = np.array([f(x) for x in xs])
    candidates = []
    n = len(xs)
    for i in range(n):
        left = fs[i - 1] if i > 0 else math.inf
        right = fs[i + 1] if i < n - 1 else math.inf
        if fs[i] <= left and fs[i] <= right:
            a = xs[max(i - 1, 0)]
            b = xs[min(i + 1, n - 1)]
            x, fx, _ = _golden_min(f, a, b, opt.xtol, opt.max_iter)
            if fs[i] < fx:  # keep the grid point if refinement stalled
                x, fx = xs[i], fs[i]
            candidates.append((float(x), float(fx)))
    # dedupe near-identical refinements
    candidates.sort(key=lambda t: t[0])
    merged = []
    for x, fx in candidates:
        if merged and abs(x - merged[-1][0]) < 10 * opt.xtol:
            if fx < merged[-1][1]:
                merged[-1] = (x, fx)
        else:
            merged.append((x, fx))
    merged.sort(key=lambda t: t[1])
    return merged


# ---------------------------------------------------------------------------
# decision rule and the game
# ---------------------------------------------------------------------------


def decision_rule(mf: MeanFieldParams, c_minus: float,
                  quad: QuadratureSpec | None = None,
                  opt: OptimizerSpec | None = None) -> DecisionResult:
    """r_+(c_-): the unique maximizer of the payoff over c_+ at fixed c_-.

    The payoff is strictly concave in c_+ (pressure convex in the linear
    coupling plus the -c_+^2 penalty), so golden-section search is exact.
    For eta_+ = 0 the repulsive strategy space degenerates and r_+ = 0.
    A maximizer pinned at the upper box edge is flagged, not silent.
    """
    opt = opt or OptimizerSpec()
    if mf.eta_plus == 0.0:
        value = payoff(mf, GamePoint(c_minus, 0.0), quad)
        return DecisionResult(0.0, value, False)
    lo, hi = opt.c_plus_box

    def neg(c_plus):
        return -payoff(mf, GamePoint(c_minus, c_plus), quad)

    x, fx, _ = _golden_min(neg, lo, hi, opt.xtol, opt.max_iter)
    at_boundary = (hi - x) <= 10 * opt.xtol
    return DecisionResult(float(x), -float(fx), bool(at_boundary))


def _min_over_c_minus(mf, c_plus, quad, opt):
    """Inner minimization over c_-; shared by both game orderings."""
    lo, hi = opt.c_minus_box

    def f(c_minus):
        return payoff(mf, GamePoint(c_minus, c_plus), quad)

    if mf.eta_minus == 0.0:
        # payoff = c_-^2 + const: minimum at the origin, no search needed
        return [(0.0, f(0.0))]
    return _grid_refine_min(f, lo, hi, opt)


def solve_game(mf: MeanFieldParams, quad: QuadratureSpec | None = None,
               opt: OptimizerSpec | None = None) -> GameResult:
    """Solve both orderings of the thermodynamic game.

    p_sharp: outer minimization over c_- of the decision-rule payoff
    (grid + golden refinement, all near-degenerate minima reported);
    p_flat: outer maximization over c_+ of the inner c_- minimum.
    """
    opt = opt or OptimizerSpec()
    boundary_flagged = False

    # sharp ordering: min over c_-, inner max over c_+
    def sharp_value(c_minus):
        return decision_rule(mf, c_minus, quad, opt).payoff_value

    if mf.eta_minus == 0.0:
        sharp_candidates = [(0.0, sharp_value(0.0))]
    else:
        sharp_candidates = _grid_refine_min(
            sharp_value, *opt.c_minus_box, opt=opt
        )
    cm_star, sharp_val = sharp_candidates[0]
    rule = decision_rule(mf, cm_star, quad, opt)
    boundary_flagged |= rule.at_boundary
    argmin_sharp = GamePoint(cm_star, rule.c_plus)
    degenerate = tuple(
        GamePoint(x, decision_rule(mf, x, quad, opt).c_plus)
        for x, fx in sharp_candidates[1:]
        if fx - sharp_val <= opt.degeneracy_window
    )
    p_sharp = -sharp_val

    # flat ordering: max over c_+ of the inner minimum over c_-
    def flat_value(c_plus):
        return _min_over_c_minus(mf, c_plus, quad, opt)[0][1]

    if mf.eta_plus == 0.0:
        cp_star, flat_val = 0.0, flat_value(0.0)
    else:
        # coarse bracket first (the inner minimum can switch basins), then
        # golden refinement of the concave outer profile
        lo, hi = opt.c_plus_box
        xs = np.linspace(lo, hi, opt.grid_points)
        vals = np.array([flat_value(x) for x in xs])
        i = int(np.argmax(vals))
        a, b = xs[max(i - 1, 0)], xs[min(i + 1, len(xs) - 1)]
        cp_star, neg_val, _ = _golden_min(
            lambda cp: -flat_value(cp), a, b, opt.xtol, opt.max_iter
        )
        if vals[i] > -neg_val:
            cp_star, neg_val = xs[i], -vals[i]
        cp_star, flat_val = float(cp_star), float(-neg_val)
        boundary_flagged |= bool((hi - cp_star) <= 10 * opt.xtol)
    inner = _min_over_c_minus(mf, cp_star, quad, opt)
    argmax_flat = GamePoint(inner[0][0], cp_star)
    p_flat = -flat_val

    res_sharp = gap_residual(mf, argmin_sharp, quad)
    res_flat = gap_residual(mf, argmax_flat, quad)
    return GameResult(
        p_sharp=p_sharp,
        p_flat=p_flat,
        argmin_sharp=argmin_sharp,
        argmax_flat=argmax_flat,
        gap_residual_sharp=res_sharp,
        gap_residual_flat=res_flat,
        saddle_gap=p_flat - p_sharp,
        degenerate_minima=degenerate,
        boundary_flagged=boundary_flagged,
    )


# ---------------------------------------------------------------------------
# gap equations
# ---------------------------------------------------------------------------


def _gap_map(mf, g: GamePoint, quad):
    pair, density = bz_gibbs_expectations(mf, g.c_minus, g.c_plus, quad)
    rhs_minus = math.sqrt(mf.eta_minus) * float(np.real(pair))
    rhs_plus = math.sqrt(mf.eta_plus) * density
    return rhs_minus, rhs_plus


def gap_residual(mf: MeanFieldParams, g: GamePoint,
                 quad: QuadratureSpec | None = None) -> float:
    """Euclidean distance of (c_-, c_+) from its Gibbs-expectation update.

    Zero exactly at self-consistent (stationary) points of the payoff;
    equal to half the payoff gradient norm.
    """
    rhs_minus, rhs_plus = _gap_map(mf, g, quad)
    return math.hypot(g.c_minus - rhs_minus, g.c_plus - rhs_plus)


def solve_gap_fixed_point(mf: MeanFieldParams, start: GamePoint,
                          quad: QuadratureSpec | None = None,
                          damping: float = 1.0,
                          opt: OptimizerSpec | None = None) -> GapSolution:
    """Damped fixed-point iteration of the gap equations.

    g <- (1 - damping) g + damping * RHS(g) until the residual drops below
    tol_gap or max_iter is reached; non-convergence is reported through the
    flag, not an exception, and the best iterate seen is returned.
    """
    if not (0.0 < damping <= 1.0):
        raise ConfigError("damping must lie in (0, 1]")
    opt = opt or OptimizerSpec()
    g = start
    best = (math.inf, start, 0)
    for iteration in range(1, opt.max_iter + 1):
        rhs_minus, rhs_plus = _gap_map(mf, g, quad)
        residual = math.hypot(g.c_minus - rhs_minus, g.c_plus - rhs_plus)
        if residual < best[0]:
            best = (residual, g, iteration)
        if residual <= opt.tol_gap:
            return GapSolution(g.c_minus, g.c_plus, residual, iteration, True)
        g = GamePoint(
            max((1 - damping) * g.c_minus + damping * rhs_minus, 0.0),
            (1 - damping) * g.c_plus + damping * rhs_plus,
        )
    residual, g, iteration = best
    return GapSolution(g.c_minus, g.c_plus, residual, iteration, False)


def payoff_gradient_fd(mf: MeanFieldParams, g: GamePoint,
                       quad: QuadratureSpec | None = None,
                       step: float = 1e-5) -> tuple[float, float]:
    """Central finite-difference gradient of the payoff at g.

    The ungauged payoff is even in c_- (the pressure depends on |c_-|
    only), so below the step size the central stencil reflects through
    the origin; in particular the derivative at c_- = 0 is exactly zero.
    """
    def val(cm, cp):
        return payoff(mf, GamePoint(cm, cp), quad)

    if g.c_minus >= step:
        d_minus = (val(g.c_minus + step, g.c_plus)
                   - val(g.c_minus - step, g.c_plus)) / (2 * step)
    else:
        d_minus = (val(g.c_minus + step, g.c_plus)
                   - val(step - g.c_minus, g.c_plus)) / (2 * step)
    d_plus = (val(g.c_minus, g.c_plus + step)
              - val(g.c_minus, g.c_plus - step)) / (2 * step)
    return float(d_minus), float(d_plus)


@dataclass(frozen=True)
class QuasiconvexityReport:
    quasi_convex: bool
    max_violation: float
    n_samples: int


def quasiconvexity_report(mf: MeanFieldParams, c_plus: float,
                          quad: QuadratureSpec | None = None,
                          n_samples: int = 101,
                          box: tuple = (0.0, 1.0),
                          tol: float = 1e-10) -> QuasiconvexityReport:
    """Sampled level-set convexity of payoff(., c_+) on the c_- interval.

    In one dimension, every sublevel set is an interval iff the sampled
    profile is unimodal (nonincreasing to its minimum, nondecreasing
    after).  Diagnostic only; equality of the two game values is never
    asserted from this.
    """
    xs = np.linspace(box[0], box[1], n_samples)
    fs = np.array([payoff(mf, GamePoint(x, c_plus), quad) for x in xs])
    m = int(np.argmin(fs))
    down = np.diff(fs[: m + 1])
    up = np.diff(fs[m:])
    violation = 0.0
    if down.size:
        violation = max(violation, float(np.max(down, initial=0.0)))
    if up.size:
        violation = max(violation, float(np.max(-up, initial=0.0)))
    return QuasiconvexityReport(bool(violation <= tol), violation, n_samples)
