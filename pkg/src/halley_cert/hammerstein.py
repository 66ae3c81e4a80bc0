"""Nonlinear Hammerstein integral equation on [0, 1] and its certificates.

The equation is

    u(s) = f(s) + lam * integral_0^1 G(s, t) u(t)^power dt

with the Green kernel of -d^2/ds^2 under zero boundary values. Start-point
bounds for the certificate come in closed form: with M = max_s int G(s, t) dt
= 1/8 and f = 1, the scaled quantities are beta = |lam| / (8 - 3 |lam|) and
eta = lip = 6 |lam| / (8 - 3 |lam|), which certify for |lam| < 32/27.

Discretization is Nystrom style on a uniform grid including both endpoints.
The kernel integrals are done per grid element with fixed-order Gauss
quadrature; since every node sits on an element boundary, the kink of
G(s_i, .) at t = s_i never lands inside a panel. Values between nodes come
from piecewise-linear interpolation, so the scheme is O(m^-2) accurate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .certificate import (
    ConvergenceCertificate,
    ErrorBoundReport,
    KantorovichInputs,
    kantorovich_certificate,
    verify_error_bound,
)
from .problem import NonlinearProblem, SolveTrace, family_solve, halley_solve

__all__ = [
    "HammersteinSpec",
    "Table1Row",
    "HammersteinReport",
    "LAMBDA_DOMAIN_LIMIT",
    "LAMBDA_CRITERION_LIMIT",
    "green_kernel",
    "uniform_grid",
    "quadrature_weights",
    "integrate_against_kernel",
    "discretize",
    "analytic_bounds",
    "table1",
    "table1_csv",
    "solve_and_check",
]

# The closed-form bounds need 8 - 3|lam| > 0; the criterion further needs
# |lam| below 32/27.
LAMBDA_DOMAIN_LIMIT = 8.0 / 3.0
LAMBDA_CRITERION_LIMIT = 32.0 / 27.0

_QUAD_ORDER = 4


@dataclass(frozen=True)
class HammersteinSpec:
    """One instance: coupling lam, integer power >= 2, node count >= 8.

    ``forcing`` is the function f; None means the constant 1 used by the
    reference tables. It must be positive on the grid.
    """

    lam: float
    power: int = 3
    nodes: int = 32
    forcing: Callable[[float], float] | None = None

    def __post_init__(self):
        if not (math.isfinite(self.lam) and abs(self.lam) < LAMBDA_DOMAIN_LIMIT):
            raise ValueError(
                f"lam must satisfy |lam| < {LAMBDA_DOMAIN_LIMIT:.6g}, got {self.lam}")
        if self.power < 2:
            raise ValueError(f"power must be at least 2, got {self.power}")
        if self.nodes < 8:
            raise ValueError(f"nodes must be at least 8, got {self.nodes}")


def green_kernel(s, t):
    """G(s, t) = t (1 - s) for t <= s and s (1 - t) for s <= t.

    Equals min(s, t) * (1 - max(s, t)); broadcasts over array arguments.
    """
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    return np.minimum(s, t) * (1.0 - np.maximum(s, t))


def uniform_grid(m: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, m)


def _gauss_panels(edges: np.ndarray, order: int):
    """Gauss points and weights for each panel [edges[k], edges[k+1]]."""
    gx, gw = np.polynomial.legendre.leggauss(order)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * np.diff(edges)
    pts = mid[:, None] + half[:, None] * gx[None, :]
    wts = half[:, None] * gw[None, :]
    return pts, wts


def quadrature_weights(grid: np.ndarray, order: int = _QUAD_ORDER) -> np.ndarray:
    """Matrix W with sum_j W[i, j] g(s_j) ~ int_0^1 G(s_i, t) g(t) dt.

    Row i integrates G(s_i, .) against the piecewise-linear interpolant of g
    on the grid, panel by panel with Gauss quadrature. G(s_i, .) is linear on
    every panel (the kink sits on a panel edge), so each panel integral is
    exact and the row sums reproduce int G(s_i, t) dt = s_i (1 - s_i) / 2 to
    rounding.
    """
    grid = np.asarray(grid, dtype=float)
    m = grid.size
    spacing = np.diff(grid)
    pts, wts = _gauss_panels(grid, order)          # (m-1, order) each
    # hat-function values on each panel: left node falls off, right ramps up
    left = (grid[1:, None] - pts) / spacing[:, None]
    right = (pts - grid[:-1, None]) / spacing[:, None]
    kernel = green_kernel(grid[:, None, None], pts[None, :, :])  # (m, m-1, order)
    w = np.zeros((m, m))
    w[:, :-1] += np.einsum("ikq,kq,kq->ik", kernel, wts, left)
    w[:, 1:] += np.einsum("ikq,kq,kq->ik", kernel, wts, right)
    return w


def integrate_against_kernel(s: float, func: Callable[[float], float],
                             grid: np.ndarray, order: int = _QUAD_ORDER) -> float:
    """int_0^1 G(s, t) func(t) dt by the same panel rule as the weights.

    The panel edges are the grid nodes plus s itself, so the kernel kink is
    always a panel edge; for polynomial func up to degree 2 * order - 2 the
    result is exact to rounding.
    """
    grid = np.asarray(grid, dtype=float)
    edges = np.unique(np.concatenate([grid, [float(s)]]))
    pts, wts = _gauss_panels(edges, order)
    vals = np.array([func(float(t)) for t in pts.ravel()]).reshape(pts.shape)
    return float(np.sum(green_kernel(s, pts) * wts * vals))


def discretize(spec: HammersteinSpec) -> NonlinearProblem:
    """Nystrom system for the spec: F_i(u) = u_i - f(s_i) - lam sum_j w_ij u_j^p.

    The Jacobian and second-derivative actions fall out of the same weight
    matrix. Uses the max-norm, in which the analytic bounds are stated.
    """
    grid = uniform_grid(spec.nodes)
    w = quadrature_weights(grid)
    if spec.forcing is None:
        f_vec = np.ones(spec.nodes)
    else:
        f_vec = np.array([float(spec.forcing(float(s))) for s in grid])
        if not np.all(f_vec > 0.0):
            raise ValueError("forcing must be positive on the grid")
    lam = spec.lam
    p = spec.power

    def eval_f(u):
        u = np.asarray(u, dtype=float)
        return u - f_vec - lam * (w @ u ** p)

    def eval_jacobian(u):
        u = np.asarray(u, dtype=float)
        return np.eye(spec.nodes) - p * lam * (w * (u ** (p - 1))[None, :])

    def eval_second(u, v, z):
        u = np.asarray(u, dtype=float)
        return -p * (p - 1) * lam * (w @ (u ** (p - 2) * np.asarray(v) * np.asarray(z)))

    return NonlinearProblem(
        dim=spec.nodes,
        eval_f=eval_f,
        eval_jacobian=eval_jacobian,
        eval_second=eval_second,
        norm_kind="max",
    )


def analytic_bounds(lam: float) -> tuple[float, float, float]:
    """Closed-form (beta, eta, lip) for forcing 1 and power 3.

    lam = 0 degenerates to (0, 0, 0); a certificate needs lip > 0, so
    callers treat that row separately.
    """
    a = abs(lam)
    if not (math.isfinite(a) and a < LAMBDA_DOMAIN_LIMIT):
        raise ValueError(
            f"bounds require |lam| < {LAMBDA_DOMAIN_LIMIT:.6g}, got {lam}")
    denom = 8.0 - 3.0 * a
    beta = a / denom
    eta = 6.0 * a / denom
    return beta, eta, eta


@dataclass(frozen=True)
class Table1Row:
    """Existence and uniqueness radii for one coupling value."""

    lam: float
    existence: float | None
    uniqueness: float | None
    certified: bool


def table1(lambdas: Sequence[float] = (0.25, 0.5, 0.75, 1.0),
           seq_len: int = 10) -> list[Table1Row]:
    """Radii table over the given couplings.

    lam = 0 is the linear equation: the solution is f itself, existence
    radius 0, unique everywhere. Couplings beyond the criterion produce a
    row flagged not certified instead of radii.
    """
    rows = []
    for lam in lambdas:
        if lam == 0.0:
            rows.append(Table1Row(lam=0.0, existence=0.0,
                                  uniqueness=math.inf, certified=True))
            continue
        beta, eta, lip = analytic_bounds(lam)
        cert = kantorovich_certificate(KantorovichInputs(beta, eta, lip),
                                       seq_len=seq_len)
        if cert.certified:
            rows.append(Table1Row(lam=lam, existence=cert.t_star,
                                  uniqueness=cert.uniqueness_radius,
                                  certified=True))
        else:
            rows.append(Table1Row(lam=lam, existence=None, uniqueness=None,
                                  certified=False))
    return rows


def _csv_number(x: float | None) -> str:
    if x is None:
        return ""
    return format(x, ".17g")


def table1_csv(rows: Sequence[Table1Row]) -> str:
    lines = ["lambda,existence,uniqueness"]
    for r in rows:
        lines.append(",".join([_csv_number(r.lam), _csv_number(r.existence),
                               _csv_number(r.uniqueness)]))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class HammersteinReport:
    """Everything solve_and_check learned about one instance."""

    spec: HammersteinSpec
    trace: SolveTrace
    certificate: ConvergenceCertificate | None
    start_distance: float
    containment_ok: bool
    error_bounds: ErrorBoundReport | None
    note: str = ""


def solve_and_check(spec: HammersteinSpec, tol: float = 1e-12,
                    max_iters: int = 30,
                    coeffs: Sequence[float] | None = None) -> HammersteinReport:
    """Discretize, solve from u_0 = f, and audit the certificate promises.

    Checks that the solution stays within the existence radius of the start
    and that the per-step errors obey the majorizing schedule. ``coeffs``
    switches the iteration to the truncated series family (None is Halley).
    The schedule is the one guaranteed for Halley steps; slower family
    members (Newton in particular) may fail the audit while converging
    perfectly well, and the report records that honestly. The closed-form
    certificate is only available for the reference setup (power 3,
    forcing 1); other specs solve without one.
    """
    problem = discretize(spec)
    grid = uniform_grid(spec.nodes)
    if spec.forcing is None:
        u0 = np.ones(spec.nodes)
    else:
        u0 = np.array([float(spec.forcing(float(s))) for s in grid])

    if coeffs is None:
        trace = halley_solve(problem, u0, tol=tol, max_iters=max_iters)
    else:
        trace = family_solve(problem, u0, coeffs, tol=tol, max_iters=max_iters)

    cert: ConvergenceCertificate | None = None
    note = ""
    if spec.lam == 0.0:
        note = "linear equation, the start point is the solution"
    elif spec.power != 3 or spec.forcing is not None:
        note = "no closed-form bounds for this forcing or power"
    else:
        beta, eta, lip = analytic_bounds(spec.lam)
        cert = kantorovich_certificate(KantorovichInputs(beta, eta, lip))
        if not cert.certified:
            note = (f"criterion failed: beta = {cert.criterion_lhs:.6g} is not "
                    f"below {cert.criterion_rhs:.6g}")

    limit = np.asarray(trace.iterates[-1], dtype=float)
    start_distance = float(np.max(np.abs(limit - u0)))
    radius = cert.t_star if cert is not None and cert.certified else 0.0
    containment_ok = start_distance <= radius * (1.0 + 1e-8) + 1e-13

    bounds: ErrorBoundReport | None = None
    if cert is not None and cert.certified and trace.converged:
        bounds = verify_error_bound(trace, cert)
    return HammersteinReport(
        spec=spec,
        trace=trace,
        certificate=cert,
        start_distance=start_distance,
        containment_ok=containment_ok,
        error_bounds=bounds,
        note=note,
    )
