"""Online mirror descent pricing: regularizers, step schedules and the loops.

One period of the two-firm run, for each firm simultaneously:

    p_i = clamp(y_i)                      posted price
    g_i = gradient of -revenue_i          observed at the common state
    R_i'(y_i') = R_i'(p_i) - eps_i * g_i  proxy update

after which the reference price moves by the memory rule.  The three-player
variant treats the reference price as a third learner ("nature") whose cost
is ``r**2/2 - (theta . p) r``; with its default map and step it reproduces
the memory rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from .errors import ConfigurationError, DomainError
from .market import MarketParams, PriceState
from .trajectory import Trajectory

# ---------------------------------------------------------------- regularizers


@dataclass(frozen=True, eq=False)
class Regularizer:
    """A strictly convex mirror map ``R`` with its derivative and inverse.

    ``sigma`` is the strong-convexity modulus in the convention
    ``D_R(x, y) >= sigma/2 * (x - y)**2``.
    """

    value: Callable[[float], float]
    derivative: Callable[[float], float]
    inverse_derivative: Callable[[float], float]
    sigma: float
    kind: str = "custom"
    scale: Optional[float] = None

    def __post_init__(self):
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise ConfigurationError(f"strong-convexity modulus must be > 0, got {self.sigma!r}")

    @classmethod
    def quadratic(cls, scale: float = 1.0) -> "Regularizer":
        """``R(x) = scale * x**2 / 2``; ``scale`` is also the modulus."""
        s = float(scale)
        if not (s > 0 and math.isfinite(s)):
            raise ConfigurationError(f"quadratic scale must be > 0, got {scale!r}")
        return cls(
            value=lambda x: 0.5 * s * x * x,
            derivative=lambda x: s * x,
            inverse_derivative=lambda v: v / s,
            sigma=s,
            kind="quadratic",
            scale=s,
        )

    @classmethod
    def entropic(cls, upper: float) -> "Regularizer":
        """``R(x) = x log x`` on ``(0, upper]``, modulus ``1/upper`` there."""
        u = float(upper)
        if not u > 0:
            raise ConfigurationError(f"entropic upper bound must be > 0, got {upper!r}")
        return cls(
            value=lambda x: x * math.log(x),
            derivative=lambda x: 1.0 + math.log(x),
            inverse_derivative=lambda v: math.exp(v - 1.0),
            sigma=1.0 / u,
            kind="entropic",
            scale=u,
        )

    @classmethod
    def custom(cls, value, derivative, sigma, inverse_derivative=None,
               bracket=(-1.0, 1.0)) -> "Regularizer":
        """Wrap user-supplied maps; the inverse is found numerically if absent."""
        if inverse_derivative is None:
            inverse_derivative = _numeric_inverse(derivative, bracket)
        return cls(value, derivative, inverse_derivative, float(sigma), "custom")

    def describe(self) -> str:
        if self.kind == "quadratic":
            return f"quadratic(scale={self.scale:g})"
        if self.kind == "entropic":
            return f"entropic(upper={self.scale:g})"
        return f"custom(sigma={self.sigma:g})"

    def argmin_on_box(self, lo: float, hi: float) -> float:
        """Minimizer of ``R`` over ``[lo, hi]`` via the sign of ``R'``."""
        if self.derivative(lo) >= 0:
            return lo
        if self.derivative(hi) <= 0:
            return hi
        return min(max(self.inverse_derivative(0.0), lo), hi)


def _numeric_inverse(derivative, bracket, grow: float = 2.0, max_grow: int = 60):
    def inverse(v: float) -> float:
        lo, hi = bracket
        try:
            for _ in range(max_grow):
                flo, fhi = derivative(lo) - v, derivative(hi) - v
                if flo <= 0 <= fhi:
                    if flo == 0:
                        return lo
                    if fhi == 0:
                        return hi
                    return brentq(lambda x: derivative(x) - v, lo, hi, xtol=1e-15, rtol=1e-15)
                width = hi - lo
                if flo > 0:
                    lo -= grow * width
                if fhi < 0:
                    hi += grow * width
        except (ValueError, ArithmeticError) as exc:
            raise ConfigurationError(f"mirror map cannot be inverted at {v!r}: {exc}") from exc
        raise ConfigurationError(f"mirror map cannot be inverted at {v!r}: no bracket found")

    return inverse


def mirror_step(reg: Regularizer, p: float, eps: float, g: float) -> float:
    """Proxy ``y`` with ``R'(y) = R'(p) - eps * g``."""
    if eps < 0:
        raise DomainError(f"step size must be >= 0, got {eps!r}")
    try:
        return reg.inverse_derivative(reg.derivative(p) - eps * g)
    except ConfigurationError:
        raise
    except (ValueError, ArithmeticError) as exc:
        raise ConfigurationError(f"mirror step failed for {reg.describe()}: {exc}") from exc


# ---------------------------------------------------------------- step schedules


@dataclass(frozen=True)
class StepSchedule:
    """Step sizes ``eps_t`` for periods ``t = 1, 2, ...``.

    ``constant``: ``c``; ``power``: ``c / (t + offset)**eta``; ``table``: the
    listed values, one per period.  Zero steps are allowed so a player can be
    frozen.
    """

    kind: str
    c: float = 0.0
    eta: float = 0.0
    offset: float = 0.0
    table: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if self.kind not in ("constant", "power", "table"):
            raise ConfigurationError(f"unknown schedule kind {self.kind!r}")
        if self.kind == "table":
            vals = tuple(float(v) for v in self.table)
            if not vals:
                raise ConfigurationError("table schedule needs at least one value")
            if any(not (v >= 0 and math.isfinite(v)) for v in vals):
                raise ConfigurationError("table step sizes must be finite and >= 0")
            object.__setattr__(self, "table", vals)
            return
        if not (self.c >= 0 and math.isfinite(self.c)):
            raise ConfigurationError(f"step scale c must be finite and >= 0, got {self.c!r}")
        if self.kind == "power":
            if not (self.eta >= 0 and math.isfinite(self.eta)):
                raise ConfigurationError(f"eta must be >= 0, got {self.eta!r}")
            if not self.offset > -1:
                raise ConfigurationError(f"offset must exceed -1, got {self.offset!r}")

    @classmethod
    def constant(cls, c: float) -> "StepSchedule":
        return cls("constant", c=float(c))

    @classmethod
    def power(cls, c: float, eta: float, offset: float = 0.0) -> "StepSchedule":
        return cls("power", c=float(c), eta=float(eta), offset=float(offset))

    @classmethod
    def from_table(cls, values) -> "StepSchedule":
        return cls("table", table=tuple(values))

    def values(self, T: int) -> np.ndarray:
        """Step sizes for periods ``1..T``."""
        if T < 1:
            raise DomainError(f"horizon must be >= 1, got {T}")
        if self.kind == "constant":
            return np.full(T, self.c)
        if self.kind == "power":
            t = np.arange(1, T + 1, dtype=float)
            return self.c / (t + self.offset) ** self.eta
        if T > len(self.table):
            raise ConfigurationError(
                f"table schedule has {len(self.table)} entries, horizon needs {T}"
            )
        return np.array(self.table[:T])

    def at(self, t: int) -> float:
        return float(self.values(t)[-1])

    def describe(self) -> str:
        if self.kind == "constant":
            return f"constant(c={self.c:g})"
        if self.kind == "power":
            return f"power(c={self.c:g}, eta={self.eta:g}, offset={self.offset:g})"
        return f"table(n={len(self.table)})"


@dataclass(frozen=True)
class ScheduleClass:
    """Summability facts about a schedule; ``None`` means undetermined."""

    sum_diverges: Optional[bool]
    sum_sq_converges: Optional[bool]
    limit_zero: Optional[bool]
    label: str


def classify_schedule(sched: StepSchedule) -> ScheduleClass:
    """Place a schedule relative to the decreasing, non-summable,
    square-summable class that is known to reach the equilibrium."""
    if sched.kind == "table":
        vals = np.asarray(sched.table)
        tail = vals[len(vals) // 2:]
        if vals[-1] == 0 or (np.all(np.diff(tail) <= 0) and vals[-1] <= 1e-2 * vals.max()):
            limit_zero = True
        elif tail.size > 1 and np.all(tail == tail[0]):
            limit_zero = False
        else:
            limit_zero = None
        return ScheduleClass(None, None, limit_zero, "unknown")
    if sched.c == 0:
        return ScheduleClass(False, True, True, "frozen")
    if sched.kind == "constant" or sched.eta == 0:
        return ScheduleClass(True, False, False, "non-vanishing")
    diverges = sched.eta <= 1
    sq_conv = sched.eta > 0.5
    if diverges and sq_conv:
        label = "sne-convergent"
    elif not diverges:
        label = "may-converge-off-sne"
    else:
        label = "vanishing-slowly"
    return ScheduleClass(diverges, sq_conv, True, label)


# ---------------------------------------------------------------- simulation


def _initial(params: MarketParams, regs, init) -> tuple[list[float], float]:
    """Initial proxies and reference price.

    A :class:`PriceState` pins the first posted prices, so the proxies start
    there.  A bare number is the first reference price; proxies then start
    at the minimizers of the mirror maps over the box.
    """
    if isinstance(init, PriceState):
        init.check(params)
        return [init.p1, init.p2], float(init.r)
    r1 = float(init)
    params.check_box(r1=r1)
    return [reg.argmin_on_box(params.p_lo, params.p_hi) for reg in regs], r1


def _check_horizon(T: int) -> int:
    if int(T) != T or T < 1:
        raise DomainError(f"horizon must be an integer >= 1, got {T!r}")
    return int(T)


def simulate(params: MarketParams, reg1: Regularizer, reg2: Regularizer,
             sched1: StepSchedule, sched2: StepSchedule, init, T: int) -> Trajectory:
    """Two firms run mirror descent while the reference price follows memory."""
    T = _check_horizon(T)
    (y1, y2), r = _initial(params, (reg1, reg2), init)
    e1 = sched1.values(T).tolist()
    e2 = sched2.values(T).tolist()
    (a1, a2), (b1, b2) = params.alpha, params.beta
    (d1, d2), (c1, c2), (t1, t2) = params.delta, params.gamma, params.theta
    lo, hi, a = params.p_lo, params.p_hi, params.a
    keep = 1.0 - a
    cols = np.empty((5, T))
    for k in range(T):
        p1 = min(max(y1, lo), hi)
        p2 = min(max(y2, lo), hi)
        cols[:, k] = (p1, p2, r, y1, y2)
        # Both gradients read the same period-t state.
        g1 = 2.0 * b1 * p1 - (a1 + d1 * p2 + c1 * r)
        g2 = 2.0 * b2 * p2 - (a2 + d2 * p1 + c2 * r)
        y1 = mirror_step(reg1, p1, e1[k], g1)
        y2 = mirror_step(reg2, p2, e2[k], g2)
        r = a * r + keep * (t1 * p1 + t2 * p2)
    return Trajectory.from_path(
        params, cols[0], cols[1], cols[2], cols[3], cols[4],
        schedules=(sched1.describe(), sched2.describe()),
        label=f"omd {reg1.describe()} / {reg2.describe()}",
    )


def simulate_induced(params: MarketParams, reg1: Regularizer, reg2: Regularizer,
                     sched1: StepSchedule, sched2: StepSchedule, init, T: int,
                     reg_n: Regularizer | None = None,
                     sched_n: StepSchedule | None = None) -> Trajectory:
    """Three symmetric mirror-descent players: two firms and nature.

    Nature's proxy starts at the initial reference price.  Its default map is
    ``r**2/2`` with constant step ``1 - a``.
    """
    T = _check_horizon(T)
    reg_n = reg_n or Regularizer.quadratic(1.0)
    sched_n = sched_n or StepSchedule.constant(1.0 - params.a)
    (y1, y2), yn = _initial(params, (reg1, reg2), init)
    e1 = sched1.values(T).tolist()
    e2 = sched2.values(T).tolist()
    en = sched_n.values(T).tolist()
    (a1, a2), (b1, b2) = params.alpha, params.beta
    (d1, d2), (c1, c2), (t1, t2) = params.delta, params.gamma, params.theta
    lo, hi, a = params.p_lo, params.p_hi, params.a
    cols = np.empty((6, T))
    for k in range(T):
        p1 = min(max(y1, lo), hi)
        p2 = min(max(y2, lo), hi)
        r = min(max(yn, lo), hi)
        cols[:, k] = (p1, p2, r, y1, y2, yn)
        g1 = 2.0 * b1 * p1 - (a1 + d1 * p2 + c1 * r)
        g2 = 2.0 * b2 * p2 - (a2 + d2 * p1 + c2 * r)
        s = t1 * p1 + t2 * p2
        y1 = mirror_step(reg1, p1, e1[k], g1)
        y2 = mirror_step(reg2, p2, e2[k], g2)
        if reg_n.kind == "quadratic":
            # For a quadratic map the step is a convex combination of r and s;
            # written that way it matches the memory rule bit-for-bit.
            w = en[k] / reg_n.scale
            if w == 1.0 - a:
                yn = a * r + w * s
            else:
                yn = (1.0 - w) * r + w * s
        else:
            yn = mirror_step(reg_n, r, en[k], r - s)
    return Trajectory.from_path(
        params, cols[0], cols[1], cols[2], cols[3], cols[4], yn=cols[5],
        schedules=(sched1.describe(), sched2.describe(), sched_n.describe()),
        label=f"induced omd {reg1.describe()} / {reg2.describe()} / nature {reg_n.describe()}",
    )
