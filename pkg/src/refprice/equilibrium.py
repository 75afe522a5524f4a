"""Stable equilibrium in closed form, best responses and best-response dynamics."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import DomainError, SingularityError
from .market import MarketParams, reference_update
from .trajectory import Trajectory


@dataclass(frozen=True)
class Sne:
    """Prices and reference price at which nobody wants to move.

    ``interior`` is true only when all three components sit strictly inside
    the price box; otherwise the triple is just the interior candidate and
    may not be an equilibrium of the constrained game.
    """

    p1_star: float
    p2_star: float
    r_star: float
    interior: bool
    params: MarketParams | None = field(default=None, compare=False, repr=False)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.p1_star, self.p2_star, self.r_star)

    def prices(self) -> tuple[float, float]:
        return (self.p1_star, self.p2_star)


def sne_denominator(params: MarketParams) -> float:
    (b1, b2), (d1, d2), (g1, g2), (t1, t2) = params.beta, params.delta, params.gamma, params.theta
    return (2 * b1 - t1 * g1) * (2 * b2 - t2 * g2) - (t2 * g1 + d1) * (t1 * g2 + d2)


def sne_closed_form(params: MarketParams) -> Sne:
    """Solve the two first-order conditions together with ``r = theta . p``."""
    (a1, a2), (b1, b2) = params.alpha, params.beta
    (d1, d2), (g1, g2), (t1, t2) = params.delta, params.gamma, params.theta
    den = sne_denominator(params)
    if not den > 0:
        raise SingularityError(f"equilibrium denominator is not positive ({den!r})")
    p1 = (2 * a1 * b2 - a1 * t2 * g2 + a2 * (d1 + t2 * g1)) / den
    p2 = (2 * a2 * b1 - a2 * t1 * g1 + a1 * (d2 + t1 * g2)) / den
    r = (t1 * (2 * a1 * b2 + a2 * d1) + t2 * (2 * a2 * b1 + a1 * d2)) / den
    lo, hi = params.p_lo, params.p_hi
    interior = all(lo < x < hi for x in (p1, p2, r))
    return Sne(p1, p2, r, interior, params)


def best_response(params: MarketParams, i: int, p_other: float, r: float) -> float:
    """Revenue-maximizing price of firm ``i``, clamped onto the box."""
    k = params.firm(i)
    params.check_box(p_other=p_other, r=r)
    x = (params.alpha[k] + params.delta[k] * p_other + params.gamma[k] * r) / (2.0 * params.beta[k])
    return min(max(x, params.p_lo), params.p_hi)


def best_response_iterates(
    params: MarketParams, r: float, tol: float = 1e-12, max_iter: int = 10**6
) -> list[tuple[float, float]]:
    """Simultaneous best-response iterates started from ``(p_hi, p_hi)``.

    The joint map is monotone, so the sequence never increases in either
    component and stops at the greatest fixed point.  With ``tol=0`` the run
    continues until the iterate repeats exactly.
    """
    params.check_box(r=r)
    (a1, a2), (b1, b2) = params.alpha, params.beta
    (d1, d2), (g1, g2) = params.delta, params.gamma
    lo, hi = params.p_lo, params.p_hi
    p1 = p2 = hi
    out = [(p1, p2)]
    for _ in range(max_iter):
        n1 = min(max((a1 + d1 * p2 + g1 * r) / (2.0 * b1), lo), hi)
        n2 = min(max((a2 + d2 * p1 + g2 * r) / (2.0 * b2), lo), hi)
        step = max(abs(n1 - p1), abs(n2 - p2))
        p1, p2 = n1, n2
        out.append((p1, p2))
        if step <= tol:
            break
    return out


def largest_best_response_profile(
    params: MarketParams, r: float, tol: float = 1e-12, max_iter: int = 10**6
) -> tuple[float, float]:
    return best_response_iterates(params, r, tol, max_iter)[-1]


def best_response_dynamics(params: MarketParams, r1: float, T: int) -> Trajectory:
    """Each period both firms play the largest best-response profile for the
    current reference price, which then updates from those prices."""
    if T < 1:
        raise DomainError(f"horizon must be >= 1, got {T}")
    params.check_box(r1=r1)
    p1s, p2s, rs = [], [], []
    r = float(r1)
    for _ in range(T):
        # Exact float fixed point keeps r_t monotone bit-for-bit.
        p1, p2 = largest_best_response_profile(params, r, tol=0.0)
        p1s.append(p1)
        p2s.append(p2)
        rs.append(r)
        r = reference_update(params, r, p1, p2)
    return Trajectory.from_path(params, p1s, p2s, rs, schedules=("best-response",),
                                label="best-response dynamics")
