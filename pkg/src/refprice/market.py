"""Linear duopoly demand with a memory-based reference price.

Firm ``i`` (1 or 2) facing its own price ``p_i``, the rival price ``p_other``
and the consumers' reference price ``r`` sells

    d_i = alpha_i - beta_i * p_i + delta_i * p_other + gamma_i * r

units, and after both firms post prices the reference price moves to

    r' = a * r + (1 - a) * (theta_1 * p_1 + theta_2 * p_2).

Every price lives in the box ``[p_lo, p_hi]``.  All functions here are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DomainError

# Slack on box membership; convex combinations of box points may land one ulp out.
_BOX_RTOL = 1e-12
_THETA_TOL = 1e-12


def _pair(name: str, value) -> tuple[float, float]:
    try:
        first, second = value
    except (TypeError, ValueError):
        raise DomainError(f"{name} must be a pair of numbers, got {value!r}") from None
    return float(first), float(second)


@dataclass(frozen=True)
class MarketParams:
    """Demand and reference-price parameters for the two-firm market.

    ``m`` is the sensitivity margin, ``beta_i >= m * (delta_i + gamma_i)``.
    Left as ``None`` it is derived as the largest valid value,
    ``min_i beta_i / (delta_i + gamma_i)``; a supplied ``m`` may be smaller
    but never larger than that.
    """

    alpha: tuple[float, float]
    beta: tuple[float, float]
    delta: tuple[float, float]
    gamma: tuple[float, float]
    theta: tuple[float, float]
    a: float
    p_lo: float
    p_hi: float
    m: float | None = field(default=None)

    def __post_init__(self):
        for name in ("alpha", "beta", "delta", "gamma", "theta"):
            object.__setattr__(self, name, _pair(name, getattr(self, name)))
        for name in ("a", "p_lo", "p_hi"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)

        for name in ("alpha", "delta", "gamma"):
            if min(getattr(self, name)) <= 0:
                raise DomainError(f"{name}_i > 0 required, got {getattr(self, name)}")
        t1, t2 = self.theta
        if not (0 < t1 < 1 and 0 < t2 < 1):
            raise DomainError(f"theta_1, theta_2 in (0, 1) required, got {self.theta}")
        if abs(t1 + t2 - 1.0) > _THETA_TOL:
            raise DomainError(f"theta_1 + theta_2 = 1 required, got {t1 + t2!r}")
        if not 0 < self.a < 1:
            raise DomainError(f"a in (0, 1) required, got {self.a!r}")
        if not 0 < self.p_lo < self.p_hi:
            raise DomainError(
                f"0 < p_lo < p_hi required, got p_lo={self.p_lo!r}, p_hi={self.p_hi!r}"
            )

        largest_m = min(b / (d + g) for b, d, g in zip(self.beta, self.delta, self.gamma))
        if self.m is None:
            object.__setattr__(self, "m", largest_m)
        else:
            m = float(self.m)
            if m <= 0:
                raise DomainError(f"m > 0 required, got {m!r}")
            if m > largest_m * (1 + 1e-12):
                raise DomainError(
                    f"beta_i >= m (delta_i + gamma_i) fails: m={m!r} exceeds {largest_m!r}"
                )
            object.__setattr__(self, "m", m)

        # Linear demand is smallest at own price p_hi, rival and reference at p_lo.
        for i in (1, 2):
            k = i - 1
            corner = (
                self.alpha[k]
                - self.beta[k] * self.p_hi
                + (self.delta[k] + self.gamma[k]) * self.p_lo
            )
            if corner < 0:
                raise DomainError(
                    f"demand of firm {i} is negative at the box corner ({corner:.6g})"
                )

    @property
    def width(self) -> float:
        return self.p_hi - self.p_lo

    @property
    def theta_max(self) -> float:
        return max(self.theta)

    def contains(self, x: float) -> bool:
        slack = _BOX_RTOL * max(1.0, abs(self.p_hi))
        return self.p_lo - slack <= x <= self.p_hi + slack

    def check_box(self, **prices: float) -> None:
        """Raise :class:`DomainError` naming the first price outside the box."""
        for name, value in prices.items():
            if not self.contains(value):
                raise DomainError(
                    f"{name}={value!r} outside the price box [{self.p_lo}, {self.p_hi}]"
                )

    def firm(self, i: int) -> int:
        """Zero-based index for firm ``i`` in {1, 2}."""
        if i not in (1, 2):
            raise DomainError(f"firm index must be 1 or 2, got {i!r}")
        return i - 1


@dataclass(frozen=True)
class PriceState:
    """Prices and reference price in period ``t`` (periods count from 1)."""

    p1: float
    p2: float
    r: float
    t: int = 1

    def check(self, params: MarketParams) -> None:
        if self.t < 1:
            raise DomainError(f"period index must be >= 1, got {self.t}")
        params.check_box(p1=self.p1, p2=self.p2, r=self.r)


def demand(params: MarketParams, i: int, p_i: float, p_other: float, r: float) -> float:
    k = params.firm(i)
    params.check_box(p_i=p_i, p_other=p_other, r=r)
    return params.alpha[k] - params.beta[k] * p_i + params.delta[k] * p_other + params.gamma[k] * r


def surcharge_form_demand(
    params: MarketParams, i: int, p1: float, p2: float, r: float
) -> float:
    """Demand written through the perceived surcharge ``p_i - r``.

    Same quantity as :func:`demand`: own-price slope ``beta_i - gamma_i`` plus
    a ``gamma_i`` reward for every unit the reference price exceeds ``p_i``.
    """
    k = params.firm(i)
    params.check_box(p1=p1, p2=p2, r=r)
    own, other = (p1, p2) if i == 1 else (p2, p1)
    b, g = params.beta[k], params.gamma[k]
    return params.alpha[k] - (b - g) * own + params.delta[k] * other + g * (r - own)


def revenue(params: MarketParams, i: int, p1: float, p2: float, r: float) -> float:
    own, other = (p1, p2) if i == 1 else (p2, p1)
    return own * demand(params, i, own, other, r)


def gradient(params: MarketParams, i: int, p1: float, p2: float, r: float) -> float:
    """Derivative of the cost ``-revenue_i`` with respect to ``p_i``."""
    k = params.firm(i)
    params.check_box(p1=p1, p2=p2, r=r)
    own, other = (p1, p2) if i == 1 else (p2, p1)
    return 2.0 * params.beta[k] * own - (
        params.alpha[k] + params.delta[k] * other + params.gamma[k] * r
    )


def nature_gradient(params: MarketParams, p1: float, p2: float, r: float) -> float:
    """Derivative of nature's cost ``r**2 / 2 - (theta_1 p1 + theta_2 p2) r``."""
    params.check_box(p1=p1, p2=p2, r=r)
    return r - (params.theta[0] * p1 + params.theta[1] * p2)


def reference_update(params: MarketParams, r: float, p1: float, p2: float) -> float:
    params.check_box(r=r, p1=p1, p2=p2)
    a = params.a
    return a * r + (1.0 - a) * (params.theta[0] * p1 + params.theta[1] * p2)


def project(params: MarketParams, x: float) -> float:
    """Clamp ``x`` onto ``[p_lo, p_hi]``."""
    return min(max(x, params.p_lo), params.p_hi)
