"""Twisted entropy functionals for the 2- and 3-velocity systems.

The two-velocity entropy is

    E_theta(f, g) = ||f||^2 + ||g||^2 - theta * <antiderivative(f), g>,

with the real part of the mixed term taken for complex inputs; the
three-velocity variant adds ||h||^2. For |theta| < 2 and mean-zero f the
entropy is equivalent to the plain squared norm with factors 1 -+ |theta|/2.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .profiles import as_samples
from .torus import GridFunction, antiderivative, average, inner, norm_sq


def entropy_2v(f: GridFunction, g: GridFunction, theta: float) -> float:
    """E_theta(f, g); the caller passes f mean-shifted (e.g. u - u_avg)."""
    mixed = inner(antiderivative(f), g)
    return norm_sq(f) + norm_sq(g) - theta * float(np.real(mixed))


def entropy_3v(f: GridFunction, g: GridFunction, h: GridFunction, theta: float) -> float:
    """Three-velocity entropy: entropy_2v(f, g, theta) + ||h||^2."""
    return entropy_2v(f, g, theta) + norm_sq(h)


def equivalence_bounds(theta: float) -> tuple[float, float]:
    """Sandwich factors (1 - |theta|/2, 1 + |theta|/2) for mean-zero f.

    The lower factor is positive only for |theta| < 2; the caller checks.
    """
    return 1.0 - abs(theta) / 2.0, 1.0 + abs(theta) / 2.0


def entropy_evolution_rhs(u: GridFunction, v: GridFunction, sigma, theta: float) -> float:
    """Exact d/dt of E_theta(u - u_avg, v) along the two-velocity flow.

    Evaluates
        -theta ||u - u_avg||^2
        + (1/2pi) int (theta - 2 sigma) v^2 dx
        + (theta/2pi) int sigma * antiderivative(u - u_avg) * v dx
        - theta * v_avg^2.

    u may be passed raw; its average is subtracted internally. Real-valued
    states only (the identity is stated for real solutions).
    """
    if u.is_complex or v.is_complex:
        raise ValidationError("entropy evolution identity applies to real states")
    sig = as_samples(sigma, u.n)
    udev = u - average(u)
    vv = v.values
    term_u = -theta * norm_sq(udev)
    term_v = float(np.mean((theta - 2.0 * sig) * vv**2))
    term_mixed = theta * float(np.mean(sig * antiderivative(udev).values * vv))
    term_avg = -theta * average(v) ** 2
    return term_u + term_v + term_mixed + term_avg
