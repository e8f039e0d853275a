"""Polynomial blends shared by the cutoff machinery.

`c4_step` rises 0 -> 1 on [0, 1] with four vanishing derivatives at both
ends (h'(t) proportional to t^4 (1-t)^4).  `virial_phi` implements the
weight profile phi(s) = s for s <= 1, a degree-8 blend on (1, 2) whose
first four derivatives vanish at s = 2 and match phi(s) = s at s = 1,
and the constant 3/2 beyond.
"""

from __future__ import annotations

import numpy as np

# h'(t) = 630 t^4 (1-t)^4 integrated: exact rational coefficients
_STEP = np.array([0.0, 0.0, 0.0, 0.0, 0.0, 126.0, -420.0, 540.0, -315.0, 70.0])
_STEP_D = {0: _STEP}

# phi(1 + t) = 1 + t - 7 t^5 + 14 t^6 - 10 t^7 + 5/2 t^8 on t in (0, 1)
_PHI = np.array([1.0, 1.0, 0.0, 0.0, 0.0, -7.0, 14.0, -10.0, 2.5])
_PHI_D = {0: _PHI}


def _deriv_coeffs(table, k):
    if k not in table:
        prev = _deriv_coeffs(table, k - 1)
        table[k] = prev[1:] * np.arange(1, len(prev))
    return table[k]


def _polyval(coeffs, t):
    out = np.zeros_like(t)
    for c in coeffs[::-1]:
        out = out * t + c
    return out


def c4_step(t, deriv: int = 0):
    """C^4 smoothstep on [0, 1] (0 below, 1 above), or its derivatives."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    mid = (t > 0.0) & (t < 1.0)
    out[mid] = _polyval(_deriv_coeffs(_STEP_D, deriv), t[mid])
    if deriv == 0:
        out[t >= 1.0] = 1.0
    return out


def virial_phi(s, deriv: int = 0):
    """The virial weight profile phi (or derivative): s, blend, plateau 3/2."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    low = s <= 1.0
    mid = (s > 1.0) & (s < 2.0)
    high = s >= 2.0
    if deriv == 0:
        out[low] = s[low]
        out[high] = 1.5
    elif deriv == 1:
        out[low] = 1.0
    out[mid] = _polyval(_deriv_coeffs(_PHI_D, deriv), s[mid] - 1.0)
    return out


def mass_phi(x, deriv: int = 0):
    """Radial mass cutoff: 1 for x <= 1, C^4 descent on (1, 2), 0 beyond."""
    x = np.asarray(x, dtype=float)
    if deriv == 0:
        return 1.0 - c4_step(x - 1.0)
    return -c4_step(x - 1.0, deriv=deriv)
