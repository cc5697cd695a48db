"""Spectral gap of the damped wave (telegrapher) form of the two-velocity
system, and the optimal-rate bundle it yields for two-piece relaxation.

After rescaling the torus to unit length, sigma~(xi) = pi * sigma(2 pi xi),
the nonzero eigenvalues gamma of the second-order operator solve

    det M(gamma) = -sin(t1/2) sin(t2/2) (1 + (t2/t1)^2)
                   + 2 (t2/t1) (cos(t1/2) cos(t2/2) - 1) = 0,

with t_j = sqrt(gamma (2 sigma_j - gamma)) on the principal branch. The
determinant flips sign under t_j -> -t_j, so the branch choice does not move
the zero set. The optimal rate is (1/pi) min(|sigma~|_L1, gap).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import NumericalError, ValidationError
from .profiles import as_profile
from .rates import SOURCE_BERNARD_SALVARANI, RateReport

_DEGENERATE_TOL = 1e-12
#: roots this close to the degenerate points gamma = 2 sigma_j are discarded
#: (the piecewise solution turns linear there and the formula breaks down).
_DEGENERATE_EXCLUSION = 1e-6
_ROOT_DET_TOL = 1e-9
_DEDUPE_TOL = 1e-8


@dataclass(frozen=True)
class TelegrapherProblem:
    """Rescaled two-piece damping: sigma1 on (0, 1/2], sigma2 on (1/2, 1]."""

    sigma1: float
    sigma2: float
    re_max: float | None = None
    im_max: float | None = None

    def __post_init__(self):
        if self.sigma1 <= 0 or self.sigma2 <= 0:
            raise ValidationError(
                f"damping values must be positive, got ({self.sigma1}, {self.sigma2})"
            )
        if self.re_max is None:
            object.__setattr__(self, "re_max", 2.0 * min(self.sigma1, self.sigma2))
        if self.im_max is None:
            object.__setattr__(self, "im_max", 4.0 * max(self.sigma1, self.sigma2))
        if self.re_max <= 0 or self.im_max <= 0:
            raise ValidationError("search strip must have positive extent")

    @property
    def l1_norm(self) -> float:
        """L1 norm of the rescaled damping over the unit torus."""
        return 0.5 * (self.sigma1 + self.sigma2)


def rescale_sigma(sigma) -> TelegrapherProblem:
    """sigma~ = pi * sigma(2 pi xi) for a constant or two-piece profile."""
    profile = as_profile(sigma)
    s1, s2 = profile.as_two_piece()
    return TelegrapherProblem(math.pi * s1, math.pi * s2)


def _tau(gamma, sigma_j):
    return np.sqrt(gamma * (2.0 * sigma_j - gamma) + 0j)


def det_M_gamma(gamma: complex, problem: TelegrapherProblem) -> complex:
    """Closed-form matching determinant; errors on the degenerate branch t1 = 0."""
    t1 = _tau(gamma, problem.sigma1)
    if abs(t1) < _DEGENERATE_TOL:
        raise NumericalError(
            f"gamma = {gamma} hits the degenerate branch tau1 = 0 (gamma = 0 or 2*sigma1)"
        )
    t2 = _tau(gamma, problem.sigma2)
    ratio = t2 / t1
    return complex(
        -np.sin(t1 / 2.0) * np.sin(t2 / 2.0) * (1.0 + ratio**2)
        + 2.0 * ratio * (np.cos(t1 / 2.0) * np.cos(t2 / 2.0) - 1.0)
    )


def _det_batch(gammas: np.ndarray, problem: TelegrapherProblem) -> np.ndarray:
    t1 = _tau(gammas, problem.sigma1)
    t2 = _tau(gammas, problem.sigma2)
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        ratio = np.where(np.abs(t1) < _DEGENERATE_TOL, np.nan, t2 / t1)
        return -np.sin(t1 / 2.0) * np.sin(t2 / 2.0) * (1.0 + ratio**2) + 2.0 * ratio * (
            np.cos(t1 / 2.0) * np.cos(t2 / 2.0) - 1.0
        )


def matching_matrix(gamma: complex, problem: TelegrapherProblem) -> np.ndarray:
    """The printed 4x4 C^1-matching matrix; det equals det_M_gamma."""
    t1 = _tau(gamma, problem.sigma1)
    t2 = _tau(gamma, problem.sigma2)
    if abs(t1) < _DEGENERATE_TOL:
        raise NumericalError("degenerate branch tau1 = 0")
    r = t2 / t1
    return np.array(
        [
            [1.0, 0.0, -np.cos(t2), -np.sin(t2)],
            [0.0, 1.0, r * np.sin(t2), -r * np.cos(t2)],
            [np.cos(t1 / 2.0), np.sin(t1 / 2.0), -np.cos(t2 / 2.0), -np.sin(t2 / 2.0)],
            [np.sin(t1 / 2.0), -np.cos(t1 / 2.0), -r * np.sin(t2 / 2.0), r * np.cos(t2 / 2.0)],
        ],
        dtype=complex,
    )


@dataclass(frozen=True)
class GapResult:
    """Smallest real part over the eigenvalues found in the search strip."""

    gap: float
    eigenvalue: complex
    roots: tuple
    on_boundary: bool = False  # minimum sits at the strip edge: widen re_max

    @property
    def minimiser_is_real(self) -> bool:
        return abs(self.eigenvalue.imag) < 1e-9


def _newton_batch(seeds: np.ndarray, problem: TelegrapherProblem, tol: float, iters: int):
    z = seeds.astype(complex)
    step = np.full(z.shape, np.inf)
    for _ in range(iters):
        f = _det_batch(z, problem)
        h = 1e-7 * (1.0 + np.abs(z))
        fp = (_det_batch(z + h, problem) - _det_batch(z - h, problem)) / (2.0 * h)
        with np.errstate(invalid="ignore", divide="ignore"):
            new_step = f / fp
        moving = np.isfinite(new_step) & (np.abs(new_step) > 0)
        step = np.where(moving, new_step, 0.0)
        z = z - step
        if np.all(np.abs(step) < tol):
            break
    return z, np.abs(step)


def telegrapher_gap(
    problem: TelegrapherProblem,
    seeds: tuple[int, int] = (200, 200),
    newton_tol: float = 1e-12,
    newton_iters: int = 60,
) -> GapResult:
    """Find the eigenvalues in the strip 0 < Re < re_max, |Im| <= im_max.

    Real roots come from a dense scan with bisection (the determinant is real
    on the real axis inside the strip); complex ones from damped-free Newton
    started on a seed grid. Roots are deduplicated to 1e-8 and validated by
    |det| < 1e-9; the degenerate points gamma = 2 sigma_j are excluded.
    """
    roots: list[complex] = []
    re_cap = min(problem.re_max, 2.0 * min(problem.sigma1, problem.sigma2))

    # real-axis scan: det is real for 0 < gamma < 2 min(sigma)
    xs = np.linspace(1e-6, re_cap - 1e-9, 4001)
    ds = _det_batch(xs.astype(complex), problem).real
    sign_change = np.nonzero(np.sign(ds[:-1]) * np.sign(ds[1:]) < 0)[0]
    for i in sign_change:
        root = brentq(
            lambda g: det_M_gamma(complex(g), problem).real,
            xs[i],
            xs[i + 1],
            xtol=1e-14,
        )
        roots.append(complex(root))

    # Newton sweep over the complex strip
    nre, nim = seeds
    re_seeds = np.linspace(1e-3, problem.re_max, nre)
    im_seeds = np.linspace(-problem.im_max, problem.im_max, nim)
    grid = (re_seeds[:, None] + 1j * im_seeds[None, :]).ravel()
    z, last_step = _newton_batch(grid, problem, newton_tol, newton_iters)
    ok = np.isfinite(z) & (last_step < 1e-10)
    ok &= (z.real > 1e-9) & (z.real < problem.re_max) & (np.abs(z.imag) <= problem.im_max)
    for s in (problem.sigma1, problem.sigma2):
        ok &= np.abs(z - 2.0 * s) > _DEGENERATE_EXCLUSION
    cand = z[ok]
    if cand.size:
        vals = np.abs(_det_batch(cand, problem))
        cand = cand[vals < _ROOT_DET_TOL]
        roots.extend(cand.tolist())

    deduped: list[complex] = []
    for r in sorted(roots, key=lambda c: (c.real, c.imag)):
        if all(abs(r - d) > _DEDUPE_TOL for d in deduped):
            deduped.append(r)
    if not deduped:
        raise NumericalError(
            "no eigenvalues found in the search strip; enlarge re_max/im_max"
        )
    best = min(deduped, key=lambda c: c.real)
    return GapResult(
        gap=best.real,
        eigenvalue=best,
        roots=tuple(deduped),
        on_boundary=best.real > problem.re_max - 1e-3,
    )


def bs_rate(sigma, **gap_kwargs) -> RateReport:
    """Optimal-rate bundle (1/pi) min(|sigma~|_L1, gap) for a two-piece profile."""
    problem = rescale_sigma(sigma)
    result = telegrapher_gap(problem, **gap_kwargs)
    rate = min(problem.l1_norm, result.gap) / math.pi
    return RateReport(source=SOURCE_BERNARD_SALVARANI, rate=rate)
