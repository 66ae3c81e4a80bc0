"""Semilocal convergence certificates built from majorizing functions.

A certificate answers, before running any iteration in R^n: does a solution
exist near the start point, in what ball is it unique, how fast does Halley's
method close in on it, and what error budget is available after k steps. The
two flavors differ only in the majorant driving them: a cubic polynomial
model under a Lipschitz bound on the second derivative, and the rational
model used for analytic operators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from .majorant import (
    CubicMajorant,
    MajorantFunction,
    MajorizingSequence,
    SmaleMajorant,
    majorizing_sequence,
    smallest_root,
    uniqueness_radius,
)
from .problem import NonlinearProblem, SolveTrace, _lu_factor_checked

__all__ = [
    "KantorovichInputs",
    "SmaleInputs",
    "ConvergenceCertificate",
    "InitialConditionsReport",
    "ErrorBoundCheck",
    "ErrorBoundReport",
    "SMALE_CRITERION_BOUND",
    "kantorovich_certificate",
    "smale_certificate",
    "check_initial_conditions",
    "verify_error_bound",
]

SMALE_CRITERION_BOUND = 3.0 - 2.0 * math.sqrt(2.0)

_DEFAULT_SEQ_TOL = 1e-12
_BOUND_SLACK = 1.0 + 1e-8
_NOISE_FLOOR = 1e-13


@dataclass(frozen=True)
class KantorovichInputs:
    """Scaled start-point data: residual bound beta, second-derivative bound
    eta, and Lipschitz constant lip of the scaled second derivative."""

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


@dataclass(frozen=True)
class SmaleInputs:
    """Start-point data for the analytic setting: residual bound beta and
    the derivative-growth rate gamma."""

    beta: float
    gamma: float

    def __post_init__(self):
        if not (self.beta >= 0.0 and math.isfinite(self.beta)):
            raise ValueError(f"beta must be a nonnegative real, got {self.beta}")
        if not (self.gamma > 0.0 and math.isfinite(self.gamma)):
            raise ValueError(f"gamma must be a positive real, got {self.gamma}")

    @property
    def alpha(self) -> float:
        return self.beta * self.gamma


@dataclass(frozen=True)
class ConvergenceCertificate:
    """Verdict plus the radii, rate constant and error schedule behind it.

    ``verdict`` is "certified" exactly when criterion_lhs < criterion_rhs
    strictly. For a failed criterion everything past the two criterion sides
    is None. ``apriori_errors[k]`` equals t_star - sequence.points[k].
    """

    majorant_kind: str
    verdict: str
    criterion_lhs: float
    criterion_rhs: float
    t_star: float | None
    uniqueness_radius: float | None
    rate_constant: float | None
    sequence: MajorizingSequence | None
    apriori_errors: tuple[float, ...] | None
    majorant: MajorantFunction | None = field(default=None, compare=False, repr=False)

    @property
    def certified(self) -> bool:
        return self.verdict == "certified"

    @property
    def criterion_margin(self) -> float:
        return (self.criterion_rhs - self.criterion_lhs) / self.criterion_rhs

    def to_json_dict(self) -> dict:
        return {
            "kind": self.majorant_kind,
            "verdict": self.verdict,
            "criterion": {
                "lhs": self.criterion_lhs,
                "rhs": self.criterion_rhs,
                "margin": self.criterion_margin,
            },
            "t_star": self.t_star,
            "uniqueness_radius": self.uniqueness_radius,
            "rate_constant": self.rate_constant,
            "sequence": None if self.sequence is None else list(self.sequence.points),
            "apriori_errors": None if self.apriori_errors is None
                              else list(self.apriori_errors),
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "ConvergenceCertificate":
        points = data.get("sequence")
        apriori = data.get("apriori_errors")
        sequence = None
        if points is not None:
            gaps = tuple(float(g) for g in (apriori or []))
            converged_at = None
            for k, g in enumerate(gaps):
                if g < _DEFAULT_SEQ_TOL:
                    converged_at = k
                    break
            sequence = MajorizingSequence(
                points=tuple(float(t) for t in points),
                t_star=float(data["t_star"]),
                gaps=gaps,
                converged_at=converged_at,
            )
        return cls(
            majorant_kind=str(data["kind"]),
            verdict=str(data["verdict"]),
            criterion_lhs=float(data["criterion"]["lhs"]),
            criterion_rhs=float(data["criterion"]["rhs"]),
            t_star=None if data["t_star"] is None else float(data["t_star"]),
            uniqueness_radius=(None if data["uniqueness_radius"] is None
                               else float(data["uniqueness_radius"])),
            rate_constant=(None if data["rate_constant"] is None
                           else float(data["rate_constant"])),
            sequence=sequence,
            apriori_errors=None if apriori is None
                           else tuple(float(g) for g in apriori),
        )


def _trivial_sequence(t_star: float) -> MajorizingSequence:
    return MajorizingSequence(points=(0.0,), t_star=t_star,
                              gaps=(t_star - 0.0,), converged_at=0)


def _certified(kind: str, lhs: float, rhs: float, h: MajorantFunction,
               seq_len: int) -> ConvergenceCertificate:
    t_star = smallest_root(h)
    t_out = uniqueness_radius(h)
    rate = h.rate_constant()
    if t_star <= 0.0:
        # beta = 0: the start point already solves the system and the
        # majorizing sequence never leaves the origin.
        seq = _trivial_sequence(t_star)
    else:
        seq = majorizing_sequence(h, max_iters=seq_len, tol=_DEFAULT_SEQ_TOL)
    return ConvergenceCertificate(
        majorant_kind=kind,
        verdict="certified",
        criterion_lhs=lhs,
        criterion_rhs=rhs,
        t_star=t_star,
        uniqueness_radius=t_out,
        rate_constant=rate,
        sequence=seq,
        apriori_errors=seq.gaps,
        majorant=h,
    )


def _failed(kind: str, lhs: float, rhs: float,
            h: MajorantFunction | None) -> ConvergenceCertificate:
    return ConvergenceCertificate(
        majorant_kind=kind,
        verdict="criterion_failed",
        criterion_lhs=lhs,
        criterion_rhs=rhs,
        t_star=None,
        uniqueness_radius=None,
        rate_constant=None,
        sequence=None,
        apriori_errors=None,
        majorant=h,
    )


def kantorovich_certificate(inputs: KantorovichInputs,
                            seq_len: int = 10) -> ConvergenceCertificate:
    """Certificate from (beta, eta, lip) under the cubic majorant.

    Certifies iff beta < 2(eta + 2s) / (3 (eta + s)^2) with s = sqrt(eta^2
    + 2 lip), strictly. beta = 0 yields the trivial certificate t* = 0.
    """
    if seq_len < 1:
        raise ValueError(f"seq_len must be at least 1, got {seq_len}")
    h = CubicMajorant(beta=inputs.beta, eta=inputs.eta, lip=inputs.lip)
    bound = h.criterion_bound()
    if not inputs.beta < bound:
        return _failed("kantorovich", inputs.beta, bound, h)
    return _certified("kantorovich", inputs.beta, bound, h, seq_len)


def smale_certificate(inputs: SmaleInputs,
                      seq_len: int = 10) -> ConvergenceCertificate:
    """Certificate from (beta, gamma) under the rational analytic majorant.

    Certifies iff alpha = beta * gamma < 3 - 2 sqrt(2), strictly.
    """
    if seq_len < 1:
        raise ValueError(f"seq_len must be at least 1, got {seq_len}")
    h = SmaleMajorant(beta=inputs.beta, gamma=inputs.gamma)
    if not inputs.alpha < SMALE_CRITERION_BOUND:
        return _failed("smale", inputs.alpha, SMALE_CRITERION_BOUND, h)
    return _certified("smale", inputs.alpha, SMALE_CRITERION_BOUND, h, seq_len)


@dataclass(frozen=True)
class InitialConditionsReport:
    """Comparison of measured start-point quantities against h(0) and h''(0).

    The bilinear norm of the scaled second derivative cannot be maximized
    exactly, so ``second_norm`` is a sampled lower bound over sign-pattern
    and random probe vectors; ``second_is_lower_bound`` records that.
    """

    residual_norm: float
    residual_bound: float
    residual_ok: bool
    second_norm: float
    second_bound: float
    second_ok: bool
    second_is_lower_bound: bool = True

    @property
    def both_hold(self) -> bool:
        return self.residual_ok and self.second_ok


def _sign_probes(n: int, num_random: int, seed: int) -> np.ndarray:
    probes = [np.ones(n)]
    alt = np.ones(n)
    alt[1::2] = -1.0
    probes.append(alt)
    for j in range(n):
        v = np.ones(n)
        v[j] = -1.0
        probes.append(v)
        w = -np.ones(n)
        w[j] = 1.0
        probes.append(w)
    rng = np.random.default_rng(seed)
    for _ in range(num_random):
        probes.append(rng.choice([-1.0, 1.0], size=n))
    return np.unique(np.array(probes), axis=0)


def check_initial_conditions(p: NonlinearProblem, x0, h: MajorantFunction,
                             num_random_probes: int = 32,
                             seed: int = 0) -> InitialConditionsReport:
    """Check |F'(x0)^{-1} F(x0)| <= h(0) and |F'(x0)^{-1} F''(x0)| <= h''(0).

    The first quantity is computed exactly (one linear solve). The second is
    a bilinear operator norm estimated from below by probing; for the
    max-norm the extreme points of the unit ball are sign vectors, which is
    why those are the probe set.
    """
    x0 = np.asarray(x0, dtype=float)
    lu_piv = _lu_factor_checked(np.asarray(p.eval_jacobian(x0), dtype=float))
    d = scipy.linalg.lu_solve(lu_piv, np.asarray(p.eval_f(x0), dtype=float))
    residual_norm = p.vector_norm(d)
    residual_bound = h.value(0.0)

    probes = _sign_probes(p.dim, num_random_probes, seed)
    if p.norm_kind == "euclidean":
        probes = probes / np.linalg.norm(probes, axis=1, keepdims=True)
    best = 0.0
    for u in probes:
        for v in probes:
            b_uv = scipy.linalg.lu_solve(
                lu_piv, np.asarray(p.eval_second(x0, u, v), dtype=float))
            best = max(best, p.vector_norm(b_uv))
    second_bound = h.second_deriv(0.0)
    return InitialConditionsReport(
        residual_norm=float(residual_norm),
        residual_bound=float(residual_bound),
        residual_ok=residual_norm <= residual_bound * _BOUND_SLACK,
        second_norm=float(best),
        second_bound=float(second_bound),
        second_ok=best <= second_bound * _BOUND_SLACK,
    )


@dataclass(frozen=True)
class ErrorBoundCheck:
    """One row of the a priori error-bound verification."""

    index: int
    error: float
    gap: float
    containment_ok: bool
    recursion_bound: float | None
    recursion_ok: bool | None
    vacuous: bool


@dataclass(frozen=True)
class ErrorBoundReport:
    """Per-step verification of the error schedule promised by a certificate.

    ``mismatch`` is set when the trace is not covered by the certificate at
    all (the initial error already exceeds the existence radius); no checks
    are fabricated in that case.
    """

    checks: tuple[ErrorBoundCheck, ...]
    mismatch: bool = False
    message: str = ""

    @property
    def all_ok(self) -> bool:
        if self.mismatch:
            return False
        return all(c.containment_ok and (c.recursion_ok is not False)
                   for c in self.checks)


def verify_error_bound(trace: SolveTrace, cert: ConvergenceCertificate,
                       noise_floor: float = _NOISE_FLOOR) -> ErrorBoundReport:
    """Check the trace against the certificate's majorizing schedule.

    Treats the final iterate as the limit x*. For each earlier step k the
    containment |x* - x_k| <= t* - t_k and the cubic recursion
    |x* - x_{k+1}| <= (t* - t_{k+1}) (|x* - x_k| / (t* - t_k))^3 must hold,
    each up to a slack factor of 1 + 1e-8. Errors at or below ``noise_floor``
    are rounding noise; their rows are marked vacuous and pass.
    """
    if not cert.certified:
        raise ValueError("certificate did not certify; nothing to verify against")
    if cert.sequence is None or cert.t_star is None:
        raise ValueError("certificate carries no majorizing sequence")
    if not trace.converged:
        raise ValueError(
            f"trace did not converge (stop reason {trace.stop_reason!r})")

    xs = [np.asarray(x, dtype=float) for x in trace.iterates]
    limit = xs[-1]
    if trace.norm_kind == "euclidean":
        norm = np.linalg.norm
    else:
        def norm(v):
            return np.max(np.abs(v))
    errors = [float(norm(x - limit)) for x in xs]

    t_star = cert.t_star
    points = list(cert.sequence.points)
    if len(points) < len(xs) and cert.majorant is not None:
        refreshed = majorizing_sequence(cert.majorant, max_iters=len(xs) + 1,
                                        tol=1e-16)
        points = list(refreshed.points)
    # Past float saturation of the scalar sequence the budget is exhausted.
    gaps = [t_star - points[k] if k < len(points) else 0.0
            for k in range(len(xs))]

    if errors and errors[0] > t_star * _BOUND_SLACK and errors[0] > noise_floor:
        return ErrorBoundReport(
            checks=(),
            mismatch=True,
            message=(f"initial error {errors[0]:.6g} exceeds the existence "
                     f"radius {t_star:.6g}; the certificate does not cover "
                     "this trace"),
        )

    checks: list[ErrorBoundCheck] = []
    for k in range(len(xs) - 1):
        e_k = errors[k]
        gap_k = gaps[k]
        vacuous = e_k <= noise_floor
        containment_ok = vacuous or e_k <= gap_k * _BOUND_SLACK
        recursion_bound: float | None = None
        e_next = errors[k + 1]
        if vacuous or gap_k <= 0.0:
            # the budget ratio e_k / gap_k is all noise here
            recursion_ok: bool | None = e_next <= noise_floor
        else:
            recursion_bound = gaps[k + 1] * (e_k / gap_k) ** 3
            recursion_ok = (e_next <= noise_floor
                            or e_next <= recursion_bound * _BOUND_SLACK)
        checks.append(ErrorBoundCheck(
            index=k,
            error=e_k,
            gap=gap_k,
            containment_ok=bool(containment_ok),
            recursion_bound=recursion_bound,
            recursion_ok=recursion_ok,
            vacuous=bool(vacuous),
        ))
    return ErrorBoundReport(checks=tuple(checks))
