"""Scalar special functions for the radial spectral calculus.

Bessel J_nu, its positive zeros, the exponentially scaled modified Bessel
e^{-x} I_nu(x), and the Gamma function.  Evaluation is delegated to
scipy.special; zero finding for real (non-integer) order is implemented
here because scipy only ships integer-order zeros.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import brentq
from scipy.special import gamma as _gamma
from scipy.special import ive as _ive
from scipy.special import jv as _jv

# Orders above this are outside the regime the zero finder and the
# quadrature machinery are validated for.
ORDER_LIMIT = 50.0


class ConvergenceError(RuntimeError):
    """Zero finding failed to bracket or converge."""


def _check_order(nu: float) -> float:
    nu = float(nu)
    if not np.isfinite(nu) or nu < 0.0:
        raise ValueError(f"Bessel order must be finite and >= 0, got {nu}")
    if nu >= ORDER_LIMIT:
        raise ValueError(f"Bessel order must be < {ORDER_LIMIT}, got {nu}")
    return nu


def gamma(x):
    """Gamma function on the positive half line."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise ValueError("gamma requires x > 0")
    out = _gamma(x)
    return float(out) if out.ndim == 0 else out


def bessel_j(nu: float, x):
    """Bessel function of the first kind J_nu(x) for x >= 0."""
    nu = _check_order(nu)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0):
        raise ValueError("bessel_j requires x >= 0")
    out = _jv(nu, x)
    return float(out) if out.ndim == 0 else out


def bessel_i_scaled(nu: float, x):
    """Exponentially scaled modified Bessel function e^{-x} I_nu(x).

    Overflow-free for large arguments; this is the combination the
    radial heat kernel needs.
    """
    nu = _check_order(nu)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0):
        raise ValueError("bessel_i_scaled requires x >= 0")
    out = _ive(nu, x)
    return float(out) if out.ndim == 0 else out


def bessel_zeros(nu: float, count: int) -> np.ndarray:
    """First `count` positive zeros of J_nu, strictly increasing.

    Sequential scan with sign-change bracketing plus Brent refinement.
    Robust for 0 <= nu < ORDER_LIMIT; each returned zero z satisfies
    |J_nu(z)| <= 1e-11 (in practice near machine precision).
    """
    nu = _check_order(nu)
    count = int(count)
    if count < 1:
        raise ValueError("count must be >= 1")

    zeros = np.empty(count)
    # J_nu > 0 on (0, j_{nu,1}); start late enough that J_nu does not
    # underflow to 0.0 for large orders.
    x = max(1e-6, 0.75 * nu)
    step = np.pi / 8.0
    prev = _jv(nu, x)
    xprev = x
    found = 0
    last_event = x
    # Gap between consecutive zeros is bounded for nu < 50; the scan cap
    # only guards against a broken bracket.
    max_gap = 16.0 + 2.0 * nu
    while found < count:
        x += step
        cur = _jv(nu, x)
        if prev * cur < 0.0:
            z = brentq(lambda t: _jv(nu, t), xprev, x, xtol=1e-14, rtol=1e-15)
            zeros[found] = z
            found += 1
            last_event = x
        elif cur == 0.0:
            zeros[found] = x
            found += 1
            last_event = x
        elif x - last_event > max_gap:
            raise ConvergenceError(
                f"failed to bracket zero #{found + 1} of J_{nu} by x={x:.3g}"
            )
        xprev, prev = x, cur

    if np.any(np.diff(zeros) <= 0.0):
        raise ConvergenceError("computed zeros are not strictly increasing")
    return zeros
