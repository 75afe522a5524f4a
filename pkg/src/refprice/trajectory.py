"""Immutable per-period record of a pricing run."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .market import MarketParams, PriceState

COLUMNS = ("t", "p1", "p2", "r", "y1", "y2", "g1", "g2", "gn", "d1", "d2", "rev1", "rev2")


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Prices, proxies, gradients, demands and revenues for periods 1..T.

    Row ``k`` holds period ``t = k + 1``.  Gradients, demands and revenues
    are those observed at the posted prices of that period.  ``yn`` is only
    set by the three-player run, where nature keeps its own proxy.
    """

    params: MarketParams
    t: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    r: np.ndarray
    y1: np.ndarray
    y2: np.ndarray
    g1: np.ndarray
    g2: np.ndarray
    gn: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    rev1: np.ndarray
    rev2: np.ndarray
    yn: np.ndarray | None = None
    schedules: tuple[str, ...] = field(default=())
    label: str = ""

    @classmethod
    def from_path(cls, params: MarketParams, p1, p2, r, y1=None, y2=None, yn=None,
                  schedules=(), label="") -> "Trajectory":
        """Build a record from the price path, deriving the observed quantities."""
        p1, p2, r = (np.asarray(v, dtype=float) for v in (p1, p2, r))
        if not (p1.shape == p2.shape == r.shape) or p1.ndim != 1 or p1.size == 0:
            raise DomainError("price columns must be non-empty 1-d arrays of equal length")
        slack = 1e-12 * max(1.0, params.p_hi)
        for name, col in (("p1", p1), ("p2", p2), ("r", r)):
            if col.min() < params.p_lo - slack or col.max() > params.p_hi + slack:
                raise DomainError(f"column {name} leaves the price box")
        al, be, de, ga = params.alpha, params.beta, params.delta, params.gamma
        th1, th2 = params.theta
        d1 = al[0] - be[0] * p1 + de[0] * p2 + ga[0] * r
        d2 = al[1] - be[1] * p2 + de[1] * p1 + ga[1] * r
        g1 = 2.0 * be[0] * p1 - (al[0] + de[0] * p2 + ga[0] * r)
        g2 = 2.0 * be[1] * p2 - (al[1] + de[1] * p1 + ga[1] * r)
        gn = r - (th1 * p1 + th2 * p2)
        return cls(
            params=params,
            t=_frozen(np.arange(1, p1.size + 1)),
            p1=_frozen(p1),
            p2=_frozen(p2),
            r=_frozen(r),
            y1=_frozen(p1 if y1 is None else y1),
            y2=_frozen(p2 if y2 is None else y2),
            g1=_frozen(g1),
            g2=_frozen(g2),
            gn=_frozen(gn),
            d1=_frozen(d1),
            d2=_frozen(d2),
            rev1=_frozen(p1 * d1),
            rev2=_frozen(p2 * d2),
            yn=None if yn is None else _frozen(yn),
            schedules=tuple(schedules),
            label=label,
        )

    def __len__(self) -> int:
        return int(self.t.size)

    def states(self) -> np.ndarray:
        """(T, 3) array of ``(p1, p2, r)`` rows."""
        return np.column_stack((self.p1, self.p2, self.r))

    def state(self, t: int) -> PriceState:
        k = t - 1
        if not 0 <= k < len(self):
            raise DomainError(f"period {t} outside 1..{len(self)}")
        return PriceState(float(self.p1[k]), float(self.p2[k]), float(self.r[k]), t)

    @property
    def final(self) -> PriceState:
        return self.state(len(self))

    def column(self, name: str) -> np.ndarray:
        if name not in COLUMNS and name != "yn":
            raise KeyError(name)
        return getattr(self, name)
