"""Weighted Poincare constants for two-piece weights, and the rate-improvement
fixed-point iteration they enable.

For a weight w1 on (0, pi], w2 on (pi, 2pi] the sharp constant in

    int (f - f_avg)^2 w dx <= C_w^2 int (f')^2 dx

is C_w^2 = 1/c_min, where c_min is the smallest lambda > 0 at which the 5x5
matching matrix of the constrained Euler-Lagrange problem

    u'' + lambda w u = tau,  periodic C^1 matching, zero mean

becomes singular. The matrix is assembled literally (no symbolic
simplification) so every entry can be audited; the determinant is evaluated
by LU with partial pivoting.

Equal weights make the smallest eigenvalue doubly degenerate (the sin/cos
pair), so besides sign changes the scan also refines even-order touches of
the determinant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import NumericalError, ValidationError
from .profiles import as_profile

_ROOT_XTOL = 1e-12
#: |det|/scale below this at a refined local minimum counts as an even root.
_TOUCH_RTOL = 1e-8
_CLOSE_ROOT_WINDOW = 1e-3


@dataclass(frozen=True)
class TwoPieceWeight:
    """Positive weight w1 on (0, pi], w2 on (pi, 2pi]."""

    w1: float
    w2: float

    def __post_init__(self):
        if self.w1 <= 0 or self.w2 <= 0:
            raise ValidationError(f"weights must be positive, got ({self.w1}, {self.w2})")

    def scaled(self, c: float) -> "TwoPieceWeight":
        return TwoPieceWeight(c * self.w1, c * self.w2)

    @property
    def sup(self) -> float:
        return max(self.w1, self.w2)


def matching_matrix(lam, weight: TwoPieceWeight) -> np.ndarray:
    """The 5x5 matrix of periodic C^1 matching + zero-mean constraints.

    Columns weight the coefficients (c1, c2, c3, c4, tau) of the piecewise
    solution c1 sin(sqrt(lam w1) x) + c2 cos(...) + tau/(lam w1) (and the
    w2 analogue); rows are value/derivative matching at 0 and pi and the
    zero-average constraint. ``lam`` may be a scalar or an array; the result
    is (..., 5, 5).
    """
    lam = np.asarray(lam, dtype=float)
    if np.any(lam <= 0):
        raise ValidationError("lambda must be positive")
    w1, w2 = weight.w1, weight.w2
    r1 = math.pi * np.sqrt(lam * w1)  # phase of the first piece over its half period
    r2 = math.pi * np.sqrt(lam * w2)
    tau_col = (w2 - w1) / (lam * w1 * w2)
    zeros = np.zeros_like(lam)
    rows = [
        [zeros + 0.0, zeros + 1.0, -np.sin(2 * r2), -np.cos(2 * r2), tau_col],
        [np.sin(r1), np.cos(r1), -np.sin(r2), -np.cos(r2), tau_col],
        [
            zeros + math.sqrt(w1),
            zeros,
            -math.sqrt(w2) * np.cos(2 * r2),
            math.sqrt(w2) * np.sin(2 * r2),
            zeros,
        ],
        [
            math.sqrt(w1) * np.cos(r1),
            -math.sqrt(w1) * np.sin(r1),
            -math.sqrt(w2) * np.cos(r2),
            math.sqrt(w2) * np.sin(r2),
            zeros,
        ],
        [
            (1.0 - np.cos(r1)) / math.sqrt(w1),
            np.sin(r1) / math.sqrt(w1),
            (np.cos(r2) - np.cos(2 * r2)) / math.sqrt(w2),
            (np.sin(2 * r2) - np.sin(r2)) / math.sqrt(w2),
            math.pi * (w2 + w1) / (np.sqrt(lam) * w1 * w2),
        ],
    ]
    m = np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)
    return m


def det_M_lambda(lam: float, weight: TwoPieceWeight) -> float:
    """Determinant of the matching matrix at one lambda > 0."""
    return float(np.linalg.det(matching_matrix(lam, weight)))


def _det_batch(lams: np.ndarray, weight: TwoPieceWeight) -> np.ndarray:
    return np.linalg.det(matching_matrix(lams, weight))


@dataclass(frozen=True)
class PoincareResult:
    """Smallest constrained eigenvalue and the resulting sharp constant."""

    c_min: float
    c_omega_sq: float
    roots: tuple
    close_root_flag: bool = False  # another root within 1e-3 of the first

    @property
    def c_omega(self) -> float:
        """The sharp constant itself, sqrt(1/c_min)."""
        return math.sqrt(self.c_omega_sq)


def weighted_poincare(
    weight: TwoPieceWeight,
    lam_max: float | None = None,
    scan_step: float = 1e-3,
) -> PoincareResult:
    """Scan (0, lam_max] for the first singular lambda; C_w^2 = 1/c_min.

    Sign changes are bisected to 1e-12; even-order touches (degenerate
    eigenvalues, e.g. equal weights) are caught by refining local minima of
    |det| and accepting them when the determinant vanishes to rounding.
    """
    if lam_max is None:
        lam_max = 4.0 / min(weight.w1, weight.w2)  # classical bound with margin
    grid = np.arange(scan_step, lam_max + scan_step / 2.0, scan_step)
    dets = _det_batch(grid, weight)
    scale = float(np.max(np.abs(dets)))
    if scale == 0.0:
        raise NumericalError("determinant vanished identically on the scan grid")

    roots: list[float] = []
    sign_change = np.nonzero(np.sign(dets[:-1]) * np.sign(dets[1:]) < 0)[0]
    for i in sign_change:
        roots.append(
            brentq(lambda lam: det_M_lambda(lam, weight), grid[i], grid[i + 1], xtol=_ROOT_XTOL)
        )

    absdet = np.abs(dets)
    interior = np.nonzero((absdet[1:-1] < absdet[:-2]) & (absdet[1:-1] < absdet[2:]))[0] + 1
    for i in interior:
        if absdet[i] > 1e-3 * scale:
            continue  # ordinary valley, not a touch of zero
        res = minimize_scalar(
            lambda lam: abs(det_M_lambda(lam, weight)),
            bounds=(grid[i - 1], grid[i + 1]),
            method="bounded",
            options={"xatol": _ROOT_XTOL},
        )
        local_scale = max(float(np.max(absdet[max(0, i - 50) : i + 50])), 1e-30)
        if res.fun < _TOUCH_RTOL * local_scale:
            roots.append(float(res.x))

    roots = sorted(roots)
    deduped: list[float] = []
    for r in roots:
        if not deduped or r - deduped[-1] > 1e-9:
            deduped.append(r)
    if not deduped:
        raise NumericalError(
            f"no singular lambda in (0, {lam_max}]; increase lam_max"
        )
    c_min = deduped[0]
    close = len(deduped) > 1 and deduped[1] - c_min < _CLOSE_ROOT_WINDOW
    return PoincareResult(
        c_min=c_min, c_omega_sq=1.0 / c_min, roots=tuple(deduped), close_root_flag=close
    )


def weight_from_sigma(sigma, theta: float, alpha: float) -> TwoPieceWeight:
    """Weight (sigma - alpha)^2 / (2 sigma - theta - alpha), piece by piece."""
    profile = as_profile(sigma)
    s1, s2 = profile.as_two_piece()
    vals = []
    for s in (s1, s2):
        den = 2.0 * s - theta - alpha
        if den <= 0:
            raise ValidationError(
                f"nonpositive denominator 2*{s} - {theta} - {alpha} in the weight"
            )
        vals.append((s - alpha) ** 2 / den)
    return TwoPieceWeight(*vals)


@dataclass(frozen=True)
class ImprovedAlphaResult:
    alpha_max: float
    iterates: tuple
    converged: bool
    stopped_inadmissible: bool = False

    @property
    def iterations(self) -> int:
        return len(self.iterates) - 1


def improved_alpha(
    sigma,
    theta: float,
    alpha0: float,
    tol: float = 1e-6,
    max_iter: int = 100,
) -> ImprovedAlphaResult:
    """Iterate alpha -> theta - theta^2 C^2_{w_alpha} / 4 to its fixed point.

    Replacing the plain Poincare step by the weighted inequality turns the
    admissibility condition into alpha <= theta - theta^2 C^2_{w_alpha}/4;
    iterating from an admissible alpha0 (e.g. the perturbative rate) climbs
    monotonically to the improved rate alpha_max. Stops early, flagged, if an
    iterate leaves the admissible set.
    """

    def cap(alpha: float) -> float:
        c2 = weighted_poincare(weight_from_sigma(sigma, theta, alpha)).c_omega_sq
        return theta - theta**2 * c2 / 4.0

    slack = max(10.0 * tol, 1e-9)
    current_cap = cap(alpha0)
    if not 0.0 < alpha0 <= current_cap + slack:
        raise ValidationError(
            f"alpha0 = {alpha0} is inadmissible: needs 0 < alpha0 <= {current_cap}"
        )
    iterates = [alpha0]
    alpha = alpha0
    converged = False
    stopped = False
    for _ in range(max_iter):
        candidate = current_cap  # theta - theta^2 C^2_{w_alpha}/4
        try:
            candidate_cap = cap(candidate)
        except (ValidationError, NumericalError):
            stopped = True
            break
        if candidate <= 0.0 or candidate > candidate_cap + slack:
            stopped = True
            break
        iterates.append(candidate)
        if abs(candidate - alpha) < tol:
            alpha = candidate
            converged = True
            break
        alpha = candidate
        current_cap = candidate_cap
    return ImprovedAlphaResult(
        alpha_max=alpha,
        iterates=tuple(iterates),
        converged=converged,
        stopped_inadmissible=stopped,
    )
