"""Scalar majorizing functions and the one-dimensional Halley machinery.

A majorizing function h is a scalar convex model of a nonlinear operator. The
functions in this module locate its smallest positive zero t*, iterate the
scalar Halley map toward it, and extract the constants that drive a priori
error bounds. Everything downstream (certificates, the integral-equation
harness) reduces to these scalar computations.

The structural assumptions used throughout:

  A1: h(0) > 0, h''(0) > 0 and h'(0) = -1.
  A2: h'' is convex and strictly increasing on [0, R).
  A3: h has a zero in (0, R); at the smallest one, t*, the slope h'(t*) is
      strictly negative.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .exceptions import AssumptionError, DegenerateRootError, NoRootError

__all__ = [
    "MajorantFunction",
    "CubicMajorant",
    "SmaleMajorant",
    "CallableMajorant",
    "AssumptionReport",
    "MajorizingSequence",
    "check_assumptions",
    "smallest_root",
    "uniqueness_radius",
    "halley_ratio",
    "halley_map",
    "majorizing_sequence",
    "cubic_error_constant",
]

_ROOT_RESIDUAL_SCALE = 1e-14
_SLOPE_FLOOR = 1e-12


class MajorantFunction:
    """Interface for a scalar majorizing function on [0, R).

    Subclasses provide ``value``, ``deriv`` and ``second_deriv``. The left
    derivative of h'' defaults to the exact third derivative when one is
    available and to a backward difference otherwise.
    """

    @property
    def domain_bound(self) -> float:
        """Right end R of the domain [0, R)."""
        return math.inf

    def value(self, t: float) -> float:
        raise NotImplementedError

    def deriv(self, t: float) -> float:
        raise NotImplementedError

    def second_deriv(self, t: float) -> float:
        raise NotImplementedError

    def third_deriv(self, t: float) -> float | None:
        """Exact h'''(t) when the concrete type has one, else None."""
        return None

    def second_deriv_left(self, t: float) -> float:
        """Left derivative of h'' at t.

        For twice-plus differentiable majorants this is just h'''(t). The
        fallback is a one-sided difference with step 1e-6 * max(1, t).
        """
        third = self.third_deriv(t)
        if third is not None:
            return third
        step = 1e-6 * max(1.0, t)
        if t - step <= 0.0:
            return (self.second_deriv(t + step) - self.second_deriv(t)) / step
        return (self.second_deriv(t) - self.second_deriv(t - step)) / step

    def closed_form_roots(self) -> tuple[float, float] | None:
        """(t*, t**) when the type admits a closed form, else None."""
        return None

    def rate_constant(self) -> float | None:
        """Closed-form Q-cubic rate constant when available, else None."""
        return None


@dataclass(frozen=True)
class CubicMajorant(MajorantFunction):
    """h(t) = beta - t + (eta/2) t^2 + (lip/6) t^3 on [0, inf).

    This is the majorant induced by a Lipschitz bound ``lip`` on the scaled
    second derivative of the operator, with ``beta`` bounding the first scaled
    residual and ``eta`` the second derivative at the start point.
    """

    beta: float
    eta: float
    lip: float

    def __post_init__(self):
        if not (self.beta >= 0.0 and math.isfinite(self.beta)):
            raise ValueError(f"beta must be a nonnegative real, got {self.beta}")
        if not (self.eta >= 0.0 and math.isfinite(self.eta)):
            raise ValueError(f"eta must be a nonnegative real, got {self.eta}")
        if not (self.lip > 0.0 and math.isfinite(self.lip)):
            raise ValueError(f"lip must be a positive real, got {self.lip}")

    def value(self, t: float) -> float:
        return self.beta - t + 0.5 * self.eta * t * t + self.lip * t ** 3 / 6.0

    def deriv(self, t: float) -> float:
        return -1.0 + self.eta * t + 0.5 * self.lip * t * t

    def second_deriv(self, t: float) -> float:
        return self.eta + self.lip * t

    def third_deriv(self, t: float) -> float:
        return self.lip

    def criterion_bound(self) -> float:
        """Largest beta still compatible with a certified iteration."""
        s = math.sqrt(self.eta ** 2 + 2.0 * self.lip)
        return 2.0 * (self.eta + 2.0 * s) / (3.0 * (self.eta + s) ** 2)

    def slope_root(self) -> float:
        """The unique positive zero r1 of h', which separates t* from t**."""
        return 2.0 / (self.eta + math.sqrt(self.eta ** 2 + 2.0 * self.lip))

    def closed_form_roots(self) -> tuple[float, float] | None:
        # Roots of (lip/6) t^3 + (eta/2) t^2 - t + beta. A certified input
        # has two nonnegative real roots straddled by r1 (plus one negative).
        coeffs = np.array([self.lip / 6.0, 0.5 * self.eta, -1.0, self.beta])
        roots = np.roots(coeffs)
        scale = max(1.0, self.slope_root())
        real = sorted(float(r.real) for r in roots
                      if abs(r.imag) <= 1e-8 * max(1.0, abs(r)))
        nonneg = [r for r in real if r >= -1e-14 * scale]
        if len(nonneg) < 2:
            return None
        t_lo = _newton_polish(self, max(nonneg[0], 0.0))
        t_hi = _newton_polish(self, nonneg[1])
        t_lo = _nudge_down(self, t_lo, lambda v: v >= 0.0)
        t_hi = _nudge_down(self, t_hi, lambda v: v <= 0.0)
        return (t_lo, t_hi)

    def rate_constant(self) -> float:
        ts = smallest_root(self)
        denom = 1.0 - self.eta * ts - 0.5 * self.lip * ts * ts
        if denom <= _SLOPE_FLOOR:
            raise DegenerateRootError(
                f"slope at t*={ts} is {-denom}, too close to zero for a rate constant")
        num = 3.0 * (self.eta + self.lip * ts) ** 2 + 2.0 * self.lip * denom
        return num / (9.0 * denom * denom)


@dataclass(frozen=True)
class SmaleMajorant(MajorantFunction):
    """h(t) = beta - t + gamma t^2 / (1 - gamma t) on [0, 1/gamma).

    The analytic-function majorant. All derivatives are available in closed
    form: h''(t) = 2 gamma / (1 - gamma t)^3 and h''' likewise.
    """

    beta: float
    gamma: float

    def __post_init__(self):
        if not (self.beta >= 0.0 and math.isfinite(self.beta)):
            raise ValueError(f"beta must be a nonnegative real, got {self.beta}")
        if not (self.gamma > 0.0 and math.isfinite(self.gamma)):
            raise ValueError(f"gamma must be a positive real, got {self.gamma}")

    @property
    def domain_bound(self) -> float:
        return 1.0 / self.gamma

    @property
    def alpha(self) -> float:
        return self.beta * self.gamma

    def value(self, t: float) -> float:
        return self.beta - t + self.gamma * t * t / (1.0 - self.gamma * t)

    def deriv(self, t: float) -> float:
        return 1.0 / (1.0 - self.gamma * t) ** 2 - 2.0

    def second_deriv(self, t: float) -> float:
        return 2.0 * self.gamma / (1.0 - self.gamma * t) ** 3

    def third_deriv(self, t: float) -> float:
        return 6.0 * self.gamma ** 2 / (1.0 - self.gamma * t) ** 4

    def criterion_bound(self) -> float:
        """Criterion threshold for alpha = beta * gamma."""
        return 3.0 - 2.0 * math.sqrt(2.0)

    def closed_form_roots(self) -> tuple[float, float] | None:
        a = self.alpha
        disc = (1.0 + a) ** 2 - 8.0 * a
        if disc < 0.0:
            # Allow for rounding right at the criterion boundary, where the
            # two roots collide into a double root.
            if disc > -64.0 * np.finfo(float).eps * (1.0 + a) ** 2:
                disc = 0.0
            else:
                return None
        s = math.sqrt(disc)
        t_lo = (1.0 + a - s) / (4.0 * self.gamma)
        t_hi = (1.0 + a + s) / (4.0 * self.gamma)
        t_lo = _nudge_down(self, t_lo, lambda v: v >= 0.0)
        if t_hi > t_lo:
            t_hi = _nudge_down(self, t_hi, lambda v: v <= 0.0)
        return (t_lo, t_hi)

    def rate_constant(self) -> float:
        ts = smallest_root(self)
        q = 1.0 - self.gamma * ts
        denom = 2.0 * q * q - 1.0
        if denom <= _SLOPE_FLOOR:
            raise DegenerateRootError(
                f"slope at t*={ts} is {-denom / (q * q)}, too close to zero for a rate constant")
        return 8.0 * self.gamma ** 2 / (3.0 * denom * denom)


@dataclass(frozen=True)
class CallableMajorant(MajorantFunction):
    """Majorant assembled from user-supplied evaluation rules."""

    value_fn: Callable[[float], float]
    deriv_fn: Callable[[float], float]
    second_deriv_fn: Callable[[float], float]
    bound: float = math.inf
    third_deriv_fn: Callable[[float], float] | None = None
    second_deriv_left_fn: Callable[[float], float] | None = None

    @property
    def domain_bound(self) -> float:
        return self.bound

    def value(self, t: float) -> float:
        return float(self.value_fn(t))

    def deriv(self, t: float) -> float:
        return float(self.deriv_fn(t))

    def second_deriv(self, t: float) -> float:
        return float(self.second_deriv_fn(t))

    def third_deriv(self, t: float) -> float | None:
        if self.third_deriv_fn is None:
            return None
        return float(self.third_deriv_fn(t))

    def second_deriv_left(self, t: float) -> float:
        if self.second_deriv_left_fn is not None:
            return float(self.second_deriv_left_fn(t))
        return super().second_deriv_left(t)


@dataclass(frozen=True)
class AssumptionReport:
    """Outcome of checking A1, A2, A3 for one majorant."""

    a1_holds: bool
    a2_holds: bool
    a3_holds: bool
    t_star: float | None
    h_prime_at_t_star: float | None
    diagnostics: tuple[str, ...] = ()

    @property
    def all_hold(self) -> bool:
        return self.a1_holds and self.a2_holds and self.a3_holds


@dataclass(frozen=True)
class MajorizingSequence:
    """The scalar iteration t_{k+1} = H_h(t_k) from t_0 = 0.

    ``gaps[k]`` is the a priori error budget t* - t_k available at step k.
    ``converged_at`` is the first index whose gap fell below the tolerance,
    or None if the iteration stopped for another reason.
    """

    points: tuple[float, ...]
    t_star: float
    gaps: tuple[float, ...]
    converged_at: int | None


# ---------------------------------------------------------------------------
# root finding


def _newton_polish(h: MajorantFunction, t: float, steps: int = 3) -> float:
    for _ in range(steps):
        slope = h.deriv(t)
        if abs(slope) < 1e-300:
            break
        step = h.value(t) / slope
        t_new = t - step
        if not (0.0 <= t_new < h.domain_bound):
            break
        t = t_new
        if abs(step) < 1e-17 * max(1.0, t):
            break
    return t


def _nudge_down(h: MajorantFunction, t: float, keep: Callable[[float], bool],
                max_steps: int = 200) -> float:
    # Walk down one float at a time until the residual has the wanted sign.
    # Keeps t* on the h >= 0 side and t** on the h <= 0 side so that interval
    # properties (l_h >= 0, gaps >= 0) survive rounding.
    t = float(t)
    for _ in range(max_steps):
        if keep(h.value(t)):
            return t
        t = math.nextafter(t, 0.0)
    return t


def _locate_minimum(h: MajorantFunction) -> float | None:
    """Zero of h' in (0, R), or None when h' stays negative up to R."""
    bound = h.domain_bound
    hi = 1.0 if math.isinf(bound) else 0.5 * bound
    found = False
    for _ in range(200):
        if h.deriv(hi) >= 0.0:
            found = True
            break
        if math.isinf(bound):
            hi *= 2.0
        else:
            nxt = hi + 0.5 * (bound - hi)
            if nxt - hi < 1e-15 * bound:
                break
            hi = nxt
    if not found:
        return None
    lo = 0.0
    for _ in range(200):
        if hi - lo <= 1e-15 * max(1.0, hi):
            break
        mid = 0.5 * (lo + hi)
        if h.deriv(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _far_edge(h: MajorantFunction) -> float:
    bound = h.domain_bound
    if math.isinf(bound):
        return 1e8
    return bound * (1.0 - 1e-12)


def _generic_smallest_root(h: MajorantFunction) -> float:
    h0 = h.value(0.0)
    if h0 < 0.0:
        raise NoRootError(f"h(0) = {h0} is negative, no majorizing zero to find")
    if h0 == 0.0:
        return 0.0
    t_min = _locate_minimum(h)
    edge = t_min if t_min is not None else _far_edge(h)
    if h.value(edge) > 0.0:
        raise NoRootError(
            f"h stays positive on [0, {edge:.6g}]; the convergence criterion fails")
    # Scan a geometric grid toward the minimum so the bracket lands on the
    # first sign change even if the input is not perfectly convex.
    bracket_lo, bracket_hi = 0.0, edge
    prev = 0.0
    for k in range(48, -1, -1):
        t = edge * 0.5 ** k
        if h.value(t) <= 0.0:
            bracket_lo, bracket_hi = prev, t
            break
        prev = t
    lo, hi = bracket_lo, bracket_hi
    for _ in range(200):
        if hi - lo <= 1e-15 * max(1.0, hi):
            break
        mid = 0.5 * (lo + hi)
        if h.value(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    t = _newton_polish(h, 0.5 * (lo + hi))
    return _nudge_down(h, t, lambda v: v >= 0.0)


@lru_cache(maxsize=None)
def _cached_roots(h: MajorantFunction) -> tuple[float, float | None]:
    closed = h.closed_form_roots()
    if closed is not None:
        return (closed[0], closed[1])
    return (_generic_smallest_root(h), None)


def smallest_root(h: MajorantFunction) -> float:
    """Smallest t in [0, R) with h(t) = 0, to residual 1e-14 * max(1, h(0)).

    Uses the closed form when the concrete type provides one, otherwise
    brackets by a geometric scan toward the minimum of h and bisects, with a
    short Newton polish. Raises NoRootError when h never crosses zero, which
    is exactly the failure of the convergence criterion.
    """
    return _cached_roots(h)[0]


def uniqueness_radius(h: MajorantFunction) -> float:
    """sup of the set {t in [t*, R): h(t) <= 0}, the uniqueness radius.

    For both concrete majorants this is the second zero t**. If h stays
    nonpositive all the way to a finite R, R itself is returned and a warning
    notes that the supremum is not attained.
    """
    t_star, second = _cached_roots(h)
    if second is not None:
        return second
    edge = _far_edge(h)
    if h.value(edge) <= 0.0:
        warnings.warn("h never returns to positive values before the domain edge; "
                      "reporting the edge, the supremum is not attained", RuntimeWarning)
        return h.domain_bound
    lo = t_star
    hi = edge
    # Expand from t* until h is positive, then bisect back.
    width = max(t_star, 1.0) * 1e-6
    probe = t_star
    for _ in range(200):
        nxt = min(probe + width, edge)
        if h.value(nxt) > 0.0:
            lo, hi = probe, nxt
            break
        probe = nxt
        width *= 2.0
        if probe >= edge:
            break
    for _ in range(200):
        if hi - lo <= 1e-15 * max(1.0, hi):
            break
        mid = 0.5 * (lo + hi)
        if h.value(mid) <= 0.0:
            lo = mid
        else:
            hi = mid
    t = _newton_polish(h, 0.5 * (lo + hi))
    return _nudge_down(h, t, lambda v: v <= 0.0)


# ---------------------------------------------------------------------------
# the scalar Halley machinery


def halley_ratio(h: MajorantFunction, t: float) -> float:
    """The ratio L_h(t) = h(t) h''(t) / (2 h'(t)^2).

    On [0, t*] of a valid majorant this lies in [0, 1/4]; it measures how far
    the Halley correction deviates from the Newton one.
    """
    slope = h.deriv(t)
    if abs(slope) < 1e-300:
        raise DegenerateRootError(f"h'({t}) vanishes, ratio undefined")
    return h.value(t) * h.second_deriv(t) / (2.0 * slope * slope)


def halley_map(h: MajorantFunction, t: float) -> float:
    """One scalar Halley step from t, valid for 0 <= t < t*.

    Strictly increases toward t* and never overshoots it in exact arithmetic.
    """
    t_star = smallest_root(h)
    if not (0.0 <= t < t_star):
        raise ValueError(f"t = {t} is outside [0, t*) with t* = {t_star}")
    ratio = halley_ratio(h, t)
    return t - h.value(t) / ((1.0 - ratio) * h.deriv(t))


def check_assumptions(h: MajorantFunction, grid_size: int = 64) -> AssumptionReport:
    """Check A1 exactly at 0, A2 on a grid, A3 via root finding.

    A2 is tested by monotonicity and midpoint convexity of h'' on a uniform
    grid over [0, min(R, T)] where T is twice the minimum of h (or twice t*
    when the minimum is out of reach). The criterion boundary, where
    h'(t*) = 0, is reported as a failure of A3.
    """
    if grid_size < 16:
        raise ValueError(f"grid_size must be at least 16, got {grid_size}")
    notes: list[str] = []

    h0: float | None = None
    a1 = True
    try:
        h0 = h.value(0.0)
        hp0 = h.deriv(0.0)
        hpp0 = h.second_deriv(0.0)
    except Exception as exc:  # diagnostic, not a crash
        a1 = False
        notes.append(f"evaluation at t = 0 failed: {exc}")
    else:
        if not h0 > 0.0:
            a1 = False
            notes.append(f"h(0) = {h0:.6g} is not positive")
        if not hpp0 > 0.0:
            a1 = False
            notes.append(f"h''(0) = {hpp0:.6g} is not positive")
        if not abs(hp0 + 1.0) <= 1e-12:
            a1 = False
            notes.append(f"h'(0) = {hp0:.6g} differs from -1")

    # A3 first: its root, if any, also sets the extent of the A2 grid.
    t_star: float | None = None
    slope: float | None = None
    if h0 is not None and h0 == 0.0:
        t_star = 0.0
        slope = h.deriv(0.0)
        notes.append("h(0) = 0: start point is already the zero")
    elif h0 is not None and h0 > 0.0:
        try:
            t_star = smallest_root(h)
            slope = h.deriv(t_star)
        except NoRootError as exc:
            notes.append(str(exc))
    a3 = t_star is not None and t_star > 0.0 and slope is not None \
        and slope < -_SLOPE_FLOOR
    if t_star is not None and t_star > 0.0 and slope is not None \
            and not slope < -_SLOPE_FLOOR:
        notes.append(f"h'(t*) = {slope:.6g} is not strictly negative "
                     "(criterion boundary)")

    t_min = _locate_minimum(h)
    if t_min is not None:
        extent = 2.0 * t_min
    elif t_star is not None and t_star > 0.0:
        extent = 2.0 * t_star
    else:
        extent = 1.0
    bound = h.domain_bound
    if math.isfinite(bound):
        extent = min(extent, bound * (1.0 - 1e-9))

    a2 = True
    try:
        grid = np.linspace(0.0, extent, grid_size)
        vals = np.array([h.second_deriv(float(t)) for t in grid])
        scale = max(1.0, float(np.max(np.abs(vals))))
        diffs = np.diff(vals)
        if not (np.all(diffs > -1e-12 * scale) and vals[-1] > vals[0]):
            a2 = False
            notes.append("h'' is not strictly increasing on the sample grid")
        mid_excess = vals[1:-1] - 0.5 * (vals[:-2] + vals[2:])
        if not np.all(mid_excess <= 1e-12 * scale):
            a2 = False
            notes.append("h'' fails midpoint convexity on the sample grid")
    except Exception as exc:  # diagnostic, not a crash
        a2 = False
        notes.append(f"h'' evaluation failed on [0, {extent:.6g}]: {exc}")

    return AssumptionReport(
        a1_holds=a1,
        a2_holds=a2,
        a3_holds=a3,
        t_star=t_star,
        h_prime_at_t_star=slope,
        diagnostics=tuple(notes),
    )


def majorizing_sequence(h: MajorantFunction, max_iters: int = 25,
                        tol: float = 1e-12) -> MajorizingSequence:
    """Iterate the Halley map from t_0 = 0 until the gap to t* closes.

    Stops when t* - t_k < tol (recorded in ``converged_at``), when the step
    t_{k+1} - t_k drops below tol * t* (stagnation near the float ceiling),
    or after max_iters steps. Raises AssumptionError when A1, A2 or A3 fails.
    """
    if max_iters < 1:
        raise ValueError(f"max_iters must be at least 1, got {max_iters}")
    if not tol > 0.0:
        raise ValueError(f"tol must be positive, got {tol}")
    report = check_assumptions(h)
    if not report.all_hold:
        raise AssumptionError(report)
    t_star = smallest_root(h)

    points = [0.0]
    converged_at: int | None = None
    stagnated = False
    while True:
        gap = t_star - points[-1]
        if gap < tol:
            converged_at = len(points) - 1
            break
        if stagnated or len(points) > max_iters:
            break
        nxt = halley_map(h, points[-1])
        if nxt >= t_star:
            # rounding pushed past the root; settle on the largest float below
            nxt = float(np.nextafter(t_star, 0.0))
        step = nxt - points[-1]
        if step <= 0.0:
            break
        points.append(nxt)
        if step < tol * t_star:
            stagnated = True

    gaps = tuple(t_star - p for p in points)
    return MajorizingSequence(points=tuple(points), t_star=t_star,
                              gaps=gaps, converged_at=converged_at)


def cubic_error_constant(h: MajorantFunction) -> float:
    """Generic Q-cubic rate constant at t*.

    Evaluates (1/3) (h''(t*)/h'(t*))^2 + (2/9) D-h''(t*) / (-h'(t*)) where
    D- is the left derivative of h''. Concrete majorants also carry a closed
    form (``rate_constant``); the two agree to rounding.
    """
    t_star = smallest_root(h)
    slope = h.deriv(t_star)
    if slope >= -_SLOPE_FLOOR:
        raise DegenerateRootError(
            f"h'(t*) = {slope:.6g} is not strictly negative; the rate constant "
            "degenerates at the criterion boundary")
    curvature = h.second_deriv(t_star)
    left_third = h.second_deriv_left(t_star)
    return (curvature / slope) ** 2 / 3.0 + (2.0 / 9.0) * left_third / (-slope)
