"""Step-size feasibility and rate constants.

Two regimes are covered.  Constant steps ``eps_i = s * sigma_i * (1 - a) / beta_i``
contract geometrically when the multiplier ``s`` makes three quadratics
``f_1, f_2, f_n`` negative at once; :func:`multiplier_region` finds that set.
Decreasing steps of order ``1/t`` inside :func:`decreasing_step_band` give an
``x_t <= c / t`` guarantee with the constant built by :func:`rate_constant`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import DomainError, HorizonGuardExceeded, RegimeError
from .market import MarketParams

NATURE = "n"


def f_im(sigma1: float, sigma2: float, m: float, i, z: float) -> float:
    """Feasibility quadratic of player ``i`` (1, 2 or ``"n"``) at multiplier ``z``."""
    if not (m > 0 and sigma1 > 0 and sigma2 > 0):
        raise DomainError("m and both moduli must be positive")
    if i in (1, 2):
        s_own, s_oth = (sigma1, sigma2) if i == 1 else (sigma2, sigma1)
        quad = 4 * s_own + 2 * s_oth / m**2
        lin = (2 - 1 / (2 * m)) * s_own - s_oth / (2 * m)
        return quad * z * z - lin * z + 0.75
    if i == NATURE:
        s = sigma1 + sigma2
        return (2 / m**2) * s * z * z + (s / (2 * m)) * z - 0.25
    raise DomainError(f"player must be 1, 2 or 'n', got {i!r}")


def sigma0(m: float) -> float:
    """Modulus above which equal-modulus constant steps are feasible."""
    if not m > 2:
        raise RegimeError(f"threshold is defined for m > 2, got m={m!r}")
    first = 6 * (2 * m * m + 1) / (2 * m - 1) ** 2
    second = (2 * m * m + 7) ** 2 / (8 * m**3 - 36 * m + 8)
    return max(first, second)


@dataclass(frozen=True)
class ConstStepReport:
    """Feasible constant-step multipliers for one market margin and moduli.

    ``(z1, z2)`` is the multiplier interval, ``s_tilde`` the point where the
    normalized quadratics meet and ``H`` their common value there.
    """

    m: float
    sigma1: float
    sigma2: float
    sigma0: Optional[float]
    z1: float
    z2: float
    s_tilde: float
    H: float
    feasible: bool
    recommended_eps: Optional[tuple[float, float]] = None
    reasons: tuple[str, ...] = field(default=())

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.z1 + self.z2)


def _quad_roots(c2: float, c1: float, c0: float) -> Optional[tuple[float, float]]:
    disc = c1 * c1 - 4 * c2 * c0
    if disc < 0:
        return None
    sq = math.sqrt(disc)
    # Cancellation-free pair.
    q = -0.5 * (c1 + math.copysign(sq, c1))
    r1, r2 = q / c2, (c0 / q if q != 0 else -c1 / (2 * c2))
    return (min(r1, r2), max(r1, r2))


def _coeffs(sigma1, sigma2, m, i):
    z0 = f_im(sigma1, sigma2, m, i, 0.0)
    zp = f_im(sigma1, sigma2, m, i, 1.0)
    zm = f_im(sigma1, sigma2, m, i, -1.0)
    return 0.5 * (zp + zm) - z0, 0.5 * (zp - zm), z0


def _nan_report(m, s1, s2, s0, reasons, z1=math.nan, z2=math.nan):
    return ConstStepReport(m, s1, s2, s0, z1, z2, math.nan, math.nan, False, None, tuple(reasons))


def multiplier_region(m: float, sigma1: float, sigma2: float | None = None) -> ConstStepReport:
    """Intersection of ``{z > 0 : f_i(z) < 0}`` over the three players."""
    sigma2 = sigma1 if sigma2 is None else sigma2
    if not (m > 0 and sigma1 > 0 and sigma2 > 0):
        raise DomainError("m and both moduli must be positive")
    s0 = sigma0(m) if m > 2 else None
    reasons = []
    # The threshold is a sufficient condition stated for equal moduli; below it
    # the interval may still be nonempty but is not certified.
    if sigma1 == sigma2:
        if s0 is None:
            reasons.append(f"m={m:g} <= 2: outside the constant-step regime")
        elif sigma1 <= s0:
            reasons.append(f"modulus {sigma1:g} <= threshold {s0:.6g}")

    if sigma1 == sigma2:
        sg = sigma1
        b = 1 - 1 / (2 * m)
        disc = b * b - (3 / (2 * sg)) * (2 + 1 / m**2)
        if disc < 0:
            reasons.append("firm quadratic has no real roots")
            return _nan_report(m, sigma1, sigma2, s0, reasons)
        z1 = (1 / sg) * 0.75 / (b + math.sqrt(disc))
        z2 = (1 / sg) * 0.5 / (1 / m + math.sqrt(1 / m**2 + 4 / (sg * m**2)))
        firm_hi = (b + math.sqrt(disc)) / (2 * (2 + 1 / m**2))
        upper = min(z2, firm_hi)
    else:
        ints = []
        for i in (1, 2):
            roots = _quad_roots(*_coeffs(sigma1, sigma2, m, i))
            if roots is None:
                reasons.append(f"quadratic of firm {i} has no real roots")
                return _nan_report(m, sigma1, sigma2, s0, reasons)
            ints.append(roots)
        nat = _quad_roots(*_coeffs(sigma1, sigma2, m, NATURE))
        z1 = max(lo for lo, _ in ints)
        z2 = nat[1]
        upper = min([z2] + [hi for _, hi in ints])

    if not (z1 < upper and z1 > 0):
        reasons.append(f"empty multiplier interval (z1={z1:.6g}, upper={upper:.6g})")
        return _nan_report(m, sigma1, sigma2, s0, reasons, z1, z2)

    def h(z, i):
        val = f_im(sigma1, sigma2, m, i, z)
        if i == NATURE:
            return val
        return val / (2 * (sigma1 if i == 1 else sigma2))

    diff = lambda z: h(z, 1) - h(z, NATURE)
    if sigma1 == sigma2 and diff(z1) > 0 > diff(upper):
        s_tilde = brentq(diff, z1, upper, xtol=1e-16, rtol=1e-15)
        H = h(s_tilde, 1)
    else:
        # No crossing inside (z1, upper): fall back to the minimax point.
        worst = lambda z: max(h(z, 1), h(z, 2), h(z, NATURE))
        res = minimize_scalar(worst, bounds=(z1, upper), method="bounded",
                              options={"xatol": 1e-14})
        s_tilde, H = float(res.x), float(res.fun)

    probes = (s_tilde, 0.5 * (z1 + upper))
    if any(f_im(sigma1, sigma2, m, i, z) >= 0 for z in probes for i in (1, 2, NATURE)):
        reasons.append("a feasibility quadratic is not negative inside the interval")
    if not -0.25 <= H < 0:
        reasons.append(f"H={H:.6g} outside [-1/4, 0)")
    feasible = not reasons
    return ConstStepReport(m, sigma1, sigma2, s0, z1, z2, s_tilde, H, feasible, None, tuple(reasons))


def const_step_region(params, sigma1: float, sigma2: float | None = None) -> ConstStepReport:
    """Multiplier region for a market (or a bare margin ``m``).

    Given market parameters, also reports the step sizes
    ``eps_i = s_tilde * sigma_i * (1 - a) / beta_i``.
    """
    if not isinstance(params, MarketParams):
        return multiplier_region(float(params), sigma1, sigma2)
    rep = multiplier_region(params.m, sigma1, sigma2)
    if not rep.feasible:
        return rep
    eps = tuple(rep.s_tilde * s * (1 - params.a) / b
                for s, b in zip((rep.sigma1, rep.sigma2), params.beta))
    return ConstStepReport(**{**rep.__dict__, "recommended_eps": eps})


def certified_factor(a: float, H: float) -> float:
    """Per-period contraction ``1 + 2(1 - a)H`` of the weighted squared distance."""
    return 1 + 2 * (1 - a) * H


def contraction_envelope(sigma: float, x1: float, xn1: float, factor: float, t) -> np.ndarray:
    """Envelope ``(sigma x_1 + x_{n,1}) factor**(t-1)`` for ``sigma x_t + x_{n,t}``."""
    t = np.asarray(t, dtype=float)
    return (sigma * x1 + xn1) * factor ** (t - 1)


def geometric_rate_bound(params: MarketParams, sigma: float, t) -> float | np.ndarray:
    """``((1 + 2 sigma)/sigma) * width**2 * ((1 + a)/2)**t``."""
    if not sigma > 0:
        raise DomainError(f"sigma must be > 0, got {sigma!r}")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise DomainError("period must be >= 0")
    val = (1 + 2 * sigma) / sigma * params.width**2 * ((1 + params.a) / 2) ** t_arr
    return float(val) if val.ndim == 0 else val


def decreasing_step_band(params: MarketParams, t) -> tuple[tuple[float, float], tuple[float, float]]:
    """Per-firm ``(lower, upper)`` step sizes for period ``t`` of the
    ``1/(t+1)`` schedule family with a ``c/t`` guarantee."""
    if params.m < 2:
        raise RegimeError(f"band requires m >= 2, got m={params.m!r}")
    if t < 0:
        raise DomainError(f"period must be >= 0, got {t!r}")
    out = []
    for b, d, g in zip(params.beta, params.delta, params.gamma):
        out.append((10 / ((4 * b - d) * (t + 1)), 2 / (max(d, g) * (t + 1))))
    return tuple(out)


@dataclass(frozen=True)
class RateConstantReport:
    rho_a: int
    t_a: int
    t_theta: int
    t_tilde: int
    u: float
    c2: float
    c: float
    theta_bar: float
    tail_verified: bool


def _ceil(x: float) -> int:
    # Guard against ratios like 2/3 * 3 landing one ulp above an integer.
    return math.ceil(x - 1e-12 * max(1.0, abs(x)))


def gradient_box_bound(params: MarketParams, i: int) -> float:
    """Largest ``|g_i|`` over the price box (the gradient is affine)."""
    k = params.firm(i)
    al, be, de, ga = params.alpha[k], params.beta[k], params.delta[k], params.gamma[k]
    lo, hi = params.p_lo, params.p_hi
    return max(2 * be * hi - al - de * lo - ga * lo, al + de * hi + ga * hi - 2 * be * lo)


def rate_constant(params: MarketParams, theta_bar: float | None = None,
                  horizon_guard: int = 10**6, sigma: float = 2.0) -> RateConstantReport:
    """Constant ``c`` in ``x_t <= c / t`` for steps inside the decreasing band.

    ``sigma`` is the firms' modulus; ``R(z) = z**2`` has ``sigma = 2``.
    """
    a, th = params.a, params.theta_max
    if theta_bar is None:
        theta_bar = (1 + th) / 2
    if not th < theta_bar < 1:
        raise DomainError(f"theta_bar must lie in ({th}, 1), got {theta_bar!r}")
    q = a / (1 - a)
    rho = _ceil(q) + 1
    t_a = _ceil(q * (rho + 1) / (rho - q))
    u = (1 - a) * th * math.fsum(a ** (-tau) / tau for tau in range(1, rho + t_a))

    # t_theta: first period after the last violation of the log condition.
    lim = theta_bar / th - 1
    lhs = lambda t: (rho + 1) * math.log(t - rho - 1) / t
    t = rho + 3
    last_bad = None
    while True:
        if t > horizon_guard:
            raise HorizonGuardExceeded(f"t_theta scan passed {horizon_guard}")
        cur = lhs(t)
        if cur > lim:
            last_bad = t
        elif lhs(t + 1) < cur:
            break  # past the single maximum and under the limit
        t += 1
    t_theta = rho + 3 if last_bad is None else last_bad + 1
    tail_ok = all(lhs(s) <= lim for s in range(t_theta, t_theta + 1000))

    width2 = params.width**2
    c2 = 1.01 * max(
        4 * gradient_box_bound(params, i) ** 2
        / (sigma * max(params.delta[i - 1], params.gamma[i - 1]) ** 2)
        for i in (1, 2)
    )
    log_inv_a = -math.log(a)

    def gap(t):
        # log a**(-t) - log LHS, positive when the exponential wins.
        left = (t - rho) * (2 * width2 + u * (2 * t * width2 + c2 + 1) / (1 - theta_bar))
        return t * log_inv_a - math.log(left)

    start = max(rho + t_a, t_theta) + 1
    t = start
    last_bad = None
    while True:
        if t > horizon_guard:
            raise HorizonGuardExceeded(f"t_tilde scan passed {horizon_guard}")
        g = gap(t)
        if g <= 0:
            last_bad = t
        elif gap(t + 1) > g:
            break  # the gap is convex, so once positive and rising it stays positive
        t += 1
    t_tilde = start if last_bad is None else last_bad + 1
    rising = [gap(s) for s in range(t, t + 10 * rho + 1)]
    tail_ok = (
        tail_ok
        and all(gap(s) > 0 for s in range(t_tilde, t + 10 * rho + 1))
        and all(y > x for x, y in zip(rising, rising[1:]))
    )
    c = (2 * t_tilde * width2 + c2 + 1) / (1 - theta_bar)
    return RateConstantReport(rho, t_a, t_theta, t_tilde, u, c2, c, theta_bar, tail_ok)
