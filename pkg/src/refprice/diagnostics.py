"""Post-processing of trajectories: distances, convergence verdicts, rate fits."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

import numpy as np

from .equilibrium import Sne, sne_closed_form
from .errors import DomainError
from .omd import Regularizer
from .trajectory import Trajectory

# Squared distances below this are treated as having hit the float floor.
_FLOOR = 1e-24


def bregman(reg: Regularizer, x: float, y: float) -> float:
    """``R(x) - R(y) - R'(y)(x - y)``."""
    if reg.kind == "quadratic":
        return 0.5 * reg.scale * (x - y) ** 2
    val = reg.value(x) - reg.value(y) - reg.derivative(y) * (x - y)
    # Convexity makes this nonnegative; clip rounding noise only.
    return max(val, 0.0)


def dist_to_sne(traj: Trajectory, sne: Sne | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Squared distances ``x_t = |p_t - p*|**2`` and ``x_{n,t} = (r_t - r*)**2``."""
    if sne is None:
        sne = sne_closed_form(traj.params)
    elif sne.params is not None and sne.params != traj.params:
        raise DomainError("equilibrium was computed for different market parameters")
    x = (traj.p1 - sne.p1_star) ** 2 + (traj.p2 - sne.p2_star) ** 2
    xn = (traj.r - sne.r_star) ** 2
    return x, xn


def state_distance(traj: Trajectory, sne: Sne | None = None) -> np.ndarray:
    """Euclidean distance of ``(p1, p2, r)`` from the equilibrium, per period."""
    x, xn = dist_to_sne(traj, sne)
    return np.sqrt(x + xn)


def first_hit(series, level: float) -> Optional[int]:
    """First period (1-indexed) with ``series_t <= level``, or ``None``."""
    hits = np.flatnonzero(np.asarray(series) <= level)
    return int(hits[0]) + 1 if hits.size else None


def _eval_bound(bound, n: int) -> np.ndarray:
    if not callable(bound):
        vals = np.asarray(bound, dtype=float)
        if vals.shape != (n,):
            raise DomainError(f"bound has shape {vals.shape}, series has {n} entries")
        return vals
    t = np.arange(1, n + 1)
    try:
        vals = np.asarray(bound(t), dtype=float)
        if vals.shape == (n,):
            return vals
    except (TypeError, ValueError):
        pass
    return np.array([float(bound(int(k))) for k in t])


def check_rate_bound(series, bound) -> tuple[bool, Optional[int]]:
    """Does ``series_t <= bound(t)`` hold for every recorded period?

    ``bound`` is a function of the 1-indexed period or an array of values.
    Returns ``(holds, first_violation)``.
    """
    s = np.asarray(series, dtype=float)
    bad = np.flatnonzero(~(s <= _eval_bound(bound, s.size)))
    if bad.size:
        return False, int(bad[0]) + 1
    return True, None


def fit_rate(series, model: str = "power", start: int | None = None,
             stop: int | None = None) -> float:
    """Least-squares slope of ``log x_t`` against ``log t`` or ``t``.

    ``start`` and ``stop`` are inclusive 1-indexed periods; the default is
    the last half of the series.
    """
    s = np.asarray(series, dtype=float)
    n = s.size
    start = n // 2 + 1 if start is None else start
    stop = n if stop is None else stop
    if not 1 <= start < stop <= n:
        raise DomainError(f"fit range {start}..{stop} invalid for {n} periods")
    y = s[start - 1:stop]
    if np.any(~(y > 0)):
        raise DomainError("series must be strictly positive on the fitted range")
    t = np.arange(start, stop + 1, dtype=float)
    if model == "power":
        xs = np.log(t)
    elif model == "geometric":
        xs = t
    else:
        raise DomainError(f"model must be 'power' or 'geometric', got {model!r}")
    return float(np.polyfit(xs, np.log(y), 1)[0])


def _rate_class(d: np.ndarray) -> tuple[Optional[str], Optional[float]]:
    """Pick power or geometric decay by which log-fit explains the tail better."""
    # Only the run before the float floor is hit carries rate information.
    floor = np.flatnonzero(d <= _FLOOR)
    stop = int(floor[0]) if floor.size else d.size
    if stop < 8:
        return None, None
    start = stop // 2 + 1
    t = np.arange(start, stop + 1, dtype=float)
    y = np.log(d[start - 1:stop])
    best = None
    for name, xs in (("power", np.log(t)), ("geometric", t)):
        coef, res, *_ = np.polyfit(xs, y, 1, full=True)
        sse = float(res[0]) if res.size else 0.0
        if best is None or sse < best[2]:
            best = (name, float(coef[0]), sse)
    return best[0], best[1]


@dataclass(frozen=True)
class ConvergenceVerdict:
    converged: bool
    t_converged: Optional[int]
    limit_point: Optional[tuple[float, float, float]]
    at_sne: bool
    oscillating: bool
    rate_slope: Optional[float] = None
    rate_class: Optional[str] = None
    bound_violations: tuple[tuple[str, int], ...] = field(default=())
    amplitude: float = 0.0


def detect_convergence(traj: Trajectory, tol: float = 1e-6, window: int = 50,
                       osc_tol: float = 1e-3, sne_tol: float = 1e-2,
                       sne: Sne | None = None,
                       bounds: Mapping[str, Callable] | None = None) -> ConvergenceVerdict:
    """Classify a run as settled, oscillating or neither.

    Settled means every per-component change over the last ``window``
    periods is below ``tol``.  Oscillating means not settled while the
    range of some component over that window exceeds ``osc_tol``.
    ``bounds`` maps names to bounds on ``x_t`` checked with
    :func:`check_rate_bound`.
    """
    if window < 2:
        raise DomainError(f"window must be >= 2, got {window}")
    n = len(traj)
    if n < window:
        raise DomainError(f"trajectory has {n} periods, window needs {window}")
    states = traj.states()
    steps = np.abs(np.diff(states, axis=0)).max(axis=1) if n > 1 else np.zeros(0)
    tail = states[-window:]
    converged = bool(np.all(np.abs(np.diff(tail, axis=0)) < tol))
    amplitude = float((tail.max(axis=0) - tail.min(axis=0)).max())

    if sne is None:
        sne = sne_closed_form(traj.params)
    x, xn = dist_to_sne(traj, sne)

    t_conv = limit = None
    at_sne = False
    rate_class = slope = None
    if converged:
        bad = np.flatnonzero(steps >= tol)
        t_conv = 1 if bad.size == 0 else int(bad[-1]) + 2
        limit = tuple(float(v) for v in states[-1])
        at_sne = bool(np.sqrt(x[-1] + xn[-1]) <= sne_tol)
        if at_sne:
            rate_class, slope = _rate_class(x + xn)

    violations = []
    for name, bound in (bounds or {}).items():
        holds, first = check_rate_bound(x, bound)
        if not holds:
            violations.append((name, first))

    return ConvergenceVerdict(
        converged=converged,
        t_converged=t_conv,
        limit_point=limit,
        at_sne=at_sne,
        oscillating=(not converged) and amplitude > osc_tol,
        rate_slope=slope,
        rate_class=rate_class,
        bound_violations=tuple(violations),
        amplitude=amplitude,
    )
