"""The operator L_a = -Delta + a/|x|^2: parameters, multipliers, kernels, calculus checks.

Spectral multipliers act diagonally on the Dirichlet eigenbasis of the
radial reduction; the closed-form heat kernel and the Littlewood-Paley /
Bernstein / Sobolev-equivalence ratio checks live here as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import hankel
from .hankel import (
    HankelPlan,
    RadialField,
    analyze,
    lebesgue_norm,
    radial_derivative,
    sphere_area,
    synthesize,
)
from .special_functions import bessel_i_scaled


class HardyViolationError(ValueError):
    """Coupling below the sharp Hardy threshold: L_a unbounded below."""


class ExponentWindowError(ValueError):
    """Lebesgue exponents outside the admissible window of the estimate."""


class InvalidMultiplierError(ValueError):
    pass


# d = 3 local well-posedness limit for the time integrator.
EVOLUTION_COUPLING_FLOOR = -0.25 + 1.0 / 25.0


@dataclass(frozen=True)
class CouplingParams:
    """Dimension, coupling, and the derived spectral exponents.

    sigma = (d-2)/2 - sqrt((d-2)^2/4 + a) controls origin behaviour,
    beta > 0 satisfies a = ((d-2)/2)^2 (beta^2 - 1), and nu = (d-2) beta / 2
    is the Bessel order of the radial reduction.
    """

    d: int
    a: float
    sigma: float
    beta: float
    nu: float
    evolution_admissible: bool


def derive_params(d: int, a: float) -> CouplingParams:
    d = int(d)
    if d < 3:
        raise ValueError(f"dimension must be >= 3, got {d}")
    a = float(a)
    hardy = ((d - 2) / 2.0) ** 2
    if a <= -hardy:
        raise HardyViolationError(
            f"coupling a={a} at or below the Hardy threshold -{hardy}; "
            "every self-adjoint realization is unbounded below"
        )
    nu = math.sqrt(hardy + a)
    sigma = (d - 2) / 2.0 - nu
    beta = 2.0 * nu / (d - 2)
    admissible = d == 3 and a > EVOLUTION_COUPLING_FLOOR
    return CouplingParams(
        d=d, a=a, sigma=sigma, beta=beta, nu=nu, evolution_admissible=admissible
    )


def blowup_coupling_floor(d: int) -> float:
    """Admissibility floor for the finite-time blowup statement."""
    return -(((d - 2) / 2.0) ** 2) + ((d - 2) / (d + 2)) ** 2


_PLAN_CACHE: dict = {}


def cached_plan(params: CouplingParams, R: float, N: int) -> HankelPlan:
    """Plans are immutable; reuse them across experiments."""
    key = (params.d, round(params.a, 14), float(R), int(N))
    plan = _PLAN_CACHE.get(key)
    if plan is None:
        plan = hankel.make_plan(params, float(R), int(N))
        if len(_PLAN_CACHE) > 24:
            _PLAN_CACHE.clear()
        _PLAN_CACHE[key] = plan
    return plan


# ---------------------------------------------------------------------------
# spectral multipliers


@dataclass(frozen=True)
class MultiplierSpec:
    """Diagonal function of L_a applied in the eigenbasis."""

    kind: str
    t: float = 0.0
    s: float = 0.0
    band: float = 0.0
    fn: Optional[Callable[[np.ndarray], np.ndarray]] = None

    @staticmethod
    def propagator(t: float) -> "MultiplierSpec":
        return MultiplierSpec(kind="propagator", t=float(t))

    @staticmethod
    def heat(t: float) -> "MultiplierSpec":
        if t < 0.0:
            raise InvalidMultiplierError("heat flow requires t >= 0")
        return MultiplierSpec(kind="heat", t=float(t))

    @staticmethod
    def fractional(s: float) -> "MultiplierSpec":
        if not -2.0 <= s <= 2.0:
            raise InvalidMultiplierError("fractional power s must lie in [-2, 2]")
        return MultiplierSpec(kind="fractional", s=float(s))

    @staticmethod
    def lp_band(band: float) -> "MultiplierSpec":
        if band <= 0.0:
            raise InvalidMultiplierError("band must be positive")
        return MultiplierSpec(kind="lp_band", band=float(band))

    @staticmethod
    def custom(fn: Callable[[np.ndarray], np.ndarray]) -> "MultiplierSpec":
        return MultiplierSpec(kind="custom", fn=fn)

    def values(self, lam: np.ndarray) -> np.ndarray:
        if self.kind == "propagator":
            return np.exp(-1j * lam * self.t)
        if self.kind == "heat":
            return np.exp(-lam * self.t)
        if self.kind == "fractional":
            return lam ** (self.s / 2.0)
        if self.kind == "lp_band":
            n2 = self.band**2
            return np.exp(-lam / n2) - np.exp(-4.0 * lam / n2)
        if self.kind == "custom":
            if self.fn is None:
                raise InvalidMultiplierError("custom multiplier needs a callable")
            return np.asarray(self.fn(lam))
        raise InvalidMultiplierError(f"unknown multiplier kind {self.kind!r}")


def apply_multiplier(plan: HankelPlan, u: RadialField, spec: MultiplierSpec) -> RadialField:
    c = analyze(plan, u)
    m = spec.values(plan.eigenvalues)
    return synthesize(plan, hankel.SpectralField(plan.grid, m * c.coeffs))


# ---------------------------------------------------------------------------
# quadratic form


@dataclass
class QuadraticFormResult:
    spectral: float
    gradient_potential: float
    completed_square: float
    value: float
    origin_resolved: bool

    def max_relative_spread(self) -> float:
        vals = np.array([self.spectral, self.gradient_potential, self.completed_square])
        scale = max(abs(vals).max(), 1e-300)
        return float((vals.max() - vals.min()) / scale)


def quadratic_form_Q(
    u: RadialField,
    params: CouplingParams,
    plan: HankelPlan,
    deriv: Optional[np.ndarray] = None,
    tail: float = 0.0,
) -> QuadraticFormResult:
    """The form Q(u) = integral |grad u|^2 + a |u|^2/|x|^2, three ways.

    Spectral: sum lambda_k |c_k|^2.  Quadrature: gradient plus potential
    term.  Completed square: integral |d_r u + (sigma/r) u|^2 (all with the
    r^{d-1} measure and the sphere factor).  `deriv` may supply analytic
    derivative samples; `tail` is an exterior correction added to the two
    quadrature forms for fields with known tails beyond the wall.
    """
    g = plan.grid
    omega = sphere_area(g.d)
    c = analyze(plan, u)
    spectral = float(omega * np.sum(plan.eigenvalues * np.abs(c.coeffs) ** 2))

    du = radial_derivative(plan, u).values if deriv is None else np.asarray(deriv)
    r = g.nodes
    w = g.quad_weights
    grad = np.sum(w * np.abs(du) ** 2)
    pot = params.a * np.sum(w * np.abs(u.values) ** 2 / r**2)
    gradient_potential = float(omega * (grad + pot)) + tail

    cs = np.abs(du + params.sigma * u.values / r) ** 2
    completed_square = float(omega * np.sum(w * cs)) + tail

    # r -> 0 resolution check: the first node should carry a negligible
    # share of the potential-term quadrature.
    pot_terms = w * np.abs(u.values) ** 2 / r**2
    tot = np.sum(pot_terms)
    origin_resolved = bool(tot == 0.0 or pot_terms[0] <= 0.05 * tot)

    value = gradient_potential if deriv is not None else spectral
    return QuadraticFormResult(
        spectral=spectral,
        gradient_potential=gradient_potential,
        completed_square=completed_square,
        value=value,
        origin_resolved=origin_resolved,
    )


def h1a_norm(plan: HankelPlan, u: RadialField) -> float:
    """Homogeneous Sobolev norm ||u||_{H^1_a} = sqrt(Q(u)), spectral form."""
    c = analyze(plan, u)
    return float(
        np.sqrt(sphere_area(plan.grid.d) * np.sum(plan.eigenvalues * np.abs(c.coeffs) ** 2))
    )


# ---------------------------------------------------------------------------
# heat kernel


def heat_kernel_radial(params: CouplingParams, t: float, r, r2):
    """Radial-sector heat kernel of L_a (closed form).

    k_nu(t, r, r') = (r r')^{-(d-2)/2} (2t)^{-1} e^{-(r-r')^2/(4t)}
                     * [e^{-z} I_nu(z)],   z = r r' / (2t),

    acting as (e^{-t L_a} f)(r) = integral k_nu(t, r, r') f(r') r'^{d-1} dr'.
    """
    if t <= 0.0:
        raise ValueError("heat kernel requires t > 0")
    r = np.asarray(r, dtype=float)
    r2 = np.asarray(r2, dtype=float)
    if np.any(r <= 0) or np.any(r2 <= 0):
        raise ValueError("heat kernel requires r, r' > 0")
    z = r * r2 / (2.0 * t)
    out = (
        (r * r2) ** (-(params.d - 2) / 2.0)
        / (2.0 * t)
        * np.exp(-((r - r2) ** 2) / (4.0 * t))
        * bessel_i_scaled(params.nu, z)
    )
    return out


def heat_kernel_apply(plan: HankelPlan, params: CouplingParams, t: float, u: RadialField) -> RadialField:
    """Apply the closed-form kernel by quadrature (independent of the multiplier)."""
    g = plan.grid
    K = heat_kernel_radial(params, t, g.nodes[:, None], g.nodes[None, :])
    return RadialField(g, K @ (g.quad_weights * u.values))


def heat_envelope_fit(
    params: CouplingParams,
    t_range=(1e-2, 1e2),
    r_range=(1e-2, 1e2),
    n: int = 20,
    c_candidates=(2.0, 3.0, 4.0, 6.0, 8.0, 12.0),
):
    """Fit envelope constants for the two-sided heat kernel bound.

    Over a log grid in (t, r, r'), the ratio of the kernel to the envelope
    (1 v sqrt(t)/r)^sigma (1 v sqrt(t)/r')^sigma t^{-d/2} e^{-(r-r')^2/(c t)}
    must stay bounded above (with fitted c2) and away from zero (with
    fitted c1).  Returns a dict of fitted constants.
    """
    ts = np.geomspace(*t_range, n)
    rs = np.geomspace(*r_range, n)
    T, R1, R2 = np.meshgrid(ts, rs, rs, indexing="ij")
    z = R1 * R2 / (2.0 * T)
    kern = (
        (R1 * R2) ** (-(params.d - 2) / 2.0)
        / (2.0 * T)
        * np.exp(-((R1 - R2) ** 2) / (4.0 * T))
        * bessel_i_scaled(params.nu, z)
    )
    st = np.sqrt(T)
    weight = (
        np.maximum(1.0, st / R1) ** params.sigma
        * np.maximum(1.0, st / R2) ** params.sigma
        * T ** (-params.d / 2.0)
    )
    best_upper = None
    best_lower = None
    for c in c_candidates:
        env = weight * np.exp(-((R1 - R2) ** 2) / (c * T))
        ratio = kern / env
        hi, lo = float(ratio.max()), float(ratio.min())
        if best_upper is None or hi < best_upper[1]:
            best_upper = (c, hi)
        if best_lower is None or lo > best_lower[1]:
            best_lower = (c, lo)
    return {
        "c_upper": best_upper[0],
        "C_upper": best_upper[1],
        "c_lower": best_lower[0],
        "C_lower": best_lower[1],
    }


# ---------------------------------------------------------------------------
# Littlewood-Paley cutoff and Bernstein / Sobolev checks


def lp_cutoff(lam):
    """Smooth cutoff: 1 on [0, 1], exp(1 - 1/(2 - lam)) on (1, 2), 0 beyond."""
    lam = np.asarray(lam, dtype=float)
    out = np.zeros_like(lam)
    out[lam <= 1.0] = 1.0
    mid = (lam > 1.0) & (lam < 2.0)
    out[mid] = np.exp(1.0 - 1.0 / (2.0 - lam[mid]))
    return out


def lp_partition_defect(lam_max: float, n_points: int = 2001) -> float:
    """Max deviation from 1 of the telescoping sum of phi_N - phi_{N/2} bands."""
    lam = np.geomspace(1e-12 + 1e-16, lam_max, n_points)
    top = 2.0 ** math.ceil(math.log2(lam_max) + 2)
    bot = 2.0 ** math.floor(math.log2(lam[0]) - 2)
    total = np.zeros_like(lam)
    N = bot
    while N <= top:
        total += lp_cutoff(lam / N) - lp_cutoff(2.0 * lam / N)
        N *= 2.0
    return float(np.abs(total - 1.0).max())


def bernstein_window(params: CouplingParams):
    """Admissible (p, q) interval for the band-projection estimates."""
    if params.a >= 0.0 or params.sigma <= 0.0:
        return (1.0, np.inf)
    return (params.d / (params.d - params.sigma), params.d / params.sigma)


def bernstein_ratio(
    plan: HankelPlan,
    u: RadialField,
    band: float,
    p: float,
    q: float,
    params: CouplingParams,
    window=None,
) -> float:
    """||P~_N u||_q / (N^{d/p - d/q} ||u||_p) for the heat-difference band."""
    if q < p:
        raise ExponentWindowError("need p <= q")
    lo, hi = window if window is not None else bernstein_window(params)
    for e in (p, q):
        if not (lo < e <= hi) and not (np.isinf(e) and np.isinf(hi)):
            raise ExponentWindowError(
                f"exponent {e} outside admissible window ({lo}, {hi})"
            )
    d = params.d
    pu = apply_multiplier(plan, u, MultiplierSpec.lp_band(band))
    num = lebesgue_norm(plan.grid, pu.values, q)
    den = band ** (d / p - d / q) * lebesgue_norm(plan.grid, u.values, p)
    return float(num / den)


def _riesz_windows(params: CouplingParams, s: float):
    d, sig = params.d, params.sigma
    hi = min(1.0, (d - sig) / d)
    fwd = ((s + sig) / d, hi)          # ||(-Delta)^{s/2} f||_p <~ ||L_a^{s/2} f||_p
    rev = (max(s / d, sig / d), hi)    # reverse direction
    return fwd, rev


def sobolev_equiv_ratio(
    u: RadialField,
    s: float,
    p: float,
    params: CouplingParams,
    plan: HankelPlan,
    plan_free: Optional[HankelPlan] = None,
):
    """Ratios ||(-Delta)^{s/2} u||_p / ||L_a^{s/2} u||_p and its reciprocal.

    The free fractional Laplacian is applied on the a = 0 plan; fields move
    between the two node sets by exact evaluation of the eigenbasis
    interpolant.
    """
    if not 0.0 < s < 2.0:
        raise ExponentWindowError("s must lie in (0, 2)")
    fwd, rev = _riesz_windows(params, s)
    invp = 1.0 / p
    if not (fwd[0] < invp < fwd[1]) or not (rev[0] < invp < rev[1]):
        raise ExponentWindowError(
            f"1/p = {invp} outside admissible windows {fwd} and {rev}"
        )
    g = plan.grid
    free = derive_params(g.d, 0.0)
    if plan_free is None:
        plan_free = cached_plan(free, g.R, g.N)

    la_u = apply_multiplier(plan, u, MultiplierSpec.fractional(s))
    n_a = lebesgue_norm(g, la_u.values, p)

    if params.a == 0.0:
        n_free = n_a
    else:
        c = analyze(plan, u)
        resampled = hankel.eval_spectral(plan, c, plan_free.grid.nodes)
        uf = RadialField(plan_free.grid, resampled)
        lap_u = apply_multiplier(plan_free, uf, MultiplierSpec.fractional(s))
        n_free = lebesgue_norm(plan_free.grid, lap_u.values, p)

    return n_free / n_a, n_a / n_free
