"""JSON experiment configs: loading, validation and round-tripping.

A config is one JSON object.  Only ``market`` is required; everything else
falls back to defaults.  Example::

    {
      "mode": "simulate",
      "market": {"alpha": [5, 6], "beta": [2, 3], "delta": [0.4, 0.7],
                 "gamma": [0.1, 0.5], "theta": [0.8, 0.2], "a": 0.4,
                 "p_lo": 1, "p_hi": 2},
      "regularizers": {"kind": "quadratic", "scale": 1},
      "schedules": {"kind": "power", "c": 1, "eta": 1},
      "init": {"p1": 1, "p2": 1, "r": 1.5},
      "horizon": 10000
    }

``regularizers`` and ``schedules`` take one spec for both firms or a list
of two.  Besides the plain schedule kinds there are market-derived ones:
``matched`` (``scale * (1 - a) / beta_i``), ``band`` (inside the decreasing
band, ``position`` lower/mid/upper) and ``certified`` (the constant steps
recommended for modulus ``sigma``).
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

from .errors import ConfigurationError, RefPriceError
from .market import MarketParams, PriceState
from .omd import Regularizer, StepSchedule

MODES = ("simulate", "simulate-induced", "best-response", "sne", "const-region",
         "rate-constant", "sweep")
SWEEP_QUANTITIES = {"c": ("a", "theta_max"), "t_tilde": ("a", "theta_max"), "sigma0": ("m",)}
_MARKET_KEYS = ("alpha", "beta", "delta", "gamma", "theta", "a", "p_lo", "p_hi", "m")
_TOP_KEYS = {"mode", "market", "regularizers", "schedules", "nature", "init", "horizon",
             "diagnostics", "analysis", "sweep", "output", "description"}
_DIAG_DEFAULTS = {"tol": 1e-6, "window": 50, "osc_tol": 1e-3, "sne_tol": 1e-2}


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str
    market: MarketParams
    regularizers: tuple[dict, dict]
    schedules: tuple[dict, dict]
    nature: dict | None
    init: dict
    horizon: int
    diagnostics: dict
    analysis: dict = field(default_factory=dict)
    sweep: dict | None = None
    output: dict = field(default_factory=dict)
    description: str = ""

    def to_dict(self) -> dict:
        p = self.market
        out = {
            "mode": self.mode,
            "market": {k: (list(getattr(p, k)) if isinstance(getattr(p, k), tuple)
                           else getattr(p, k)) for k in _MARKET_KEYS},
            "regularizers": [dict(r) for r in self.regularizers],
            "schedules": [dict(s) for s in self.schedules],
            "init": dict(self.init),
            "horizon": self.horizon,
            "diagnostics": dict(self.diagnostics),
            "analysis": dict(self.analysis),
            "output": dict(self.output),
        }
        if self.nature is not None:
            out["nature"] = copy.deepcopy(self.nature)
        if self.sweep is not None:
            out["sweep"] = copy.deepcopy(self.sweep)
        if self.description:
            out["description"] = self.description
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    # -- builders used by the runner

    def build_regularizers(self) -> tuple[Regularizer, Regularizer]:
        return tuple(build_regularizer(spec, self.market, f"regularizers[{k}]")
                     for k, spec in enumerate(self.regularizers))

    def build_schedules(self) -> tuple[StepSchedule, StepSchedule]:
        return tuple(build_schedule(spec, self.market, k + 1, f"schedules[{k}]")
                     for k, spec in enumerate(self.schedules))

    def build_nature(self) -> tuple[Regularizer | None, StepSchedule | None]:
        if not self.nature:
            return None, None
        reg = self.nature.get("regularizer")
        sched = self.nature.get("schedule")
        return (
            None if reg is None else build_regularizer(reg, self.market, "nature.regularizer"),
            None if sched is None else build_schedule(sched, self.market, None, "nature.schedule"),
        )

    def build_init(self):
        if "p1" in self.init:
            return PriceState(self.init["p1"], self.init["p2"], self.init["r"])
        return float(self.init["r"])


def _num(value, where: str, integer: bool = False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"expected a number, got {value!r}", where)
    if integer:
        if int(value) != value:
            raise ConfigurationError(f"expected an integer, got {value!r}", where)
        return int(value)
    return float(value)


def _pair_or_single(value, where: str) -> tuple[dict, dict]:
    if isinstance(value, dict):
        return (dict(value), dict(value))
    if isinstance(value, list) and len(value) == 2 and all(isinstance(v, dict) for v in value):
        return (dict(value[0]), dict(value[1]))
    raise ConfigurationError("expected one spec object or a list of two", where)


def build_regularizer(spec: dict, params: MarketParams, where: str) -> Regularizer:
    kind = spec.get("kind", "quadratic")
    if kind == "quadratic":
        return Regularizer.quadratic(_num(spec.get("scale", 1.0), f"{where}.scale"))
    if kind == "entropic":
        return Regularizer.entropic(_num(spec.get("upper", params.p_hi), f"{where}.upper"))
    raise ConfigurationError(f"unknown regularizer kind {kind!r}", f"{where}.kind")


def build_schedule(spec: dict, params: MarketParams, firm: int | None, where: str) -> StepSchedule:
    kind = spec.get("kind")
    if kind == "constant":
        return StepSchedule.constant(_num(spec.get("c"), f"{where}.c"))
    if kind == "power":
        return StepSchedule.power(
            _num(spec.get("c"), f"{where}.c"),
            _num(spec.get("eta", 1.0), f"{where}.eta"),
            _num(spec.get("offset", 0.0), f"{where}.offset"),
        )
    if kind == "table":
        vals = spec.get("values")
        if not isinstance(vals, list):
            raise ConfigurationError("expected a list of step sizes", f"{where}.values")
        return StepSchedule.from_table([_num(v, f"{where}.values") for v in vals])
    if kind in ("matched", "band", "certified") and firm is None:
        raise ConfigurationError(f"{kind!r} steps are defined for firms only", f"{where}.kind")
    k = (firm or 1) - 1
    if kind == "matched":
        scale = _num(spec.get("scale", 1.0), f"{where}.scale")
        return StepSchedule.constant(scale * (1 - params.a) / params.beta[k])
    if kind == "band":
        from .stepsize import decreasing_step_band

        lo, hi = decreasing_step_band(params, 0)[k]
        pos = spec.get("position", "mid")
        weights = {"lower": 0.0, "mid": 0.5, "upper": 1.0}
        if pos not in weights:
            raise ConfigurationError("position must be lower, mid or upper", f"{where}.position")
        w = weights[pos]
        # Band edges scale as 1/(t+1): c/(t + 1)**1 with c the t=0 value.
        return StepSchedule.power((1 - w) * lo + w * hi, 1.0, 1.0)
    if kind == "certified":
        from .stepsize import const_step_region

        sigma = _num(spec.get("sigma"), f"{where}.sigma")
        rep = const_step_region(params, sigma)
        if not rep.feasible:
            raise ConfigurationError(
                f"no certified constant step for sigma={sigma:g}: {'; '.join(rep.reasons)}",
                f"{where}.sigma",
            )
        return StepSchedule.constant(rep.recommended_eps[k])
    raise ConfigurationError(f"unknown schedule kind {kind!r}", f"{where}.kind")


def _check_keys(obj: dict, allowed, where: str):
    extra = set(obj) - set(allowed)
    if extra:
        raise ConfigurationError(f"unknown keys {sorted(extra)}", where)


def from_dict(raw: Any) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigurationError("config must be a JSON object")
    _check_keys(raw, _TOP_KEYS, "config")
    mode = raw.get("mode", "simulate")
    if mode not in MODES:
        raise ConfigurationError(f"unknown mode {mode!r}; expected one of {', '.join(MODES)}", "mode")

    mk = raw.get("market")
    if not isinstance(mk, dict):
        raise ConfigurationError("missing market parameters", "market")
    _check_keys(mk, _MARKET_KEYS, "market")
    missing = [k for k in _MARKET_KEYS[:-1] if k not in mk]
    if missing:
        raise ConfigurationError(f"missing fields {missing}", "market")
    try:
        market = MarketParams(**mk)
    except RefPriceError as exc:
        raise ConfigurationError(str(exc), "market") from None
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"malformed value: {exc}", "market") from None

    regs = _pair_or_single(raw.get("regularizers", {"kind": "quadratic", "scale": 1.0}),
                           "regularizers")
    scheds = _pair_or_single(raw.get("schedules", {"kind": "power", "c": 1.0, "eta": 1.0}),
                             "schedules")
    nature = raw.get("nature")
    if nature is not None:
        if not isinstance(nature, dict):
            raise ConfigurationError("expected an object", "nature")
        _check_keys(nature, ("regularizer", "schedule"), "nature")

    init = raw.get("init", {"p1": market.p_lo, "p2": market.p_lo, "r": market.p_lo})
    if not isinstance(init, dict) or "r" not in init:
        raise ConfigurationError("expected {p1, p2, r} or {r}", "init")
    _check_keys(init, ("p1", "p2", "r"), "init")
    if ("p1" in init) != ("p2" in init):
        raise ConfigurationError("give both p1 and p2 or neither", "init")
    init = {k: _num(v, f"init.{k}") for k, v in init.items()}
    for k, v in init.items():
        if not market.contains(v):
            raise ConfigurationError(f"{v!r} outside the price box", f"init.{k}")

    horizon = _num(raw.get("horizon", 10_000), "horizon", integer=True)
    if horizon < 1:
        raise ConfigurationError("horizon must be >= 1", "horizon")

    diag = dict(_DIAG_DEFAULTS)
    given = raw.get("diagnostics", {})
    _check_keys(given, tuple(_DIAG_DEFAULTS) + ("bounds",), "diagnostics")
    diag.update(given)
    for k in _DIAG_DEFAULTS:
        diag[k] = _num(diag[k], f"diagnostics.{k}", integer=(k == "window"))

    analysis = raw.get("analysis", {})
    if not isinstance(analysis, dict):
        raise ConfigurationError("expected an object", "analysis")
    _check_keys(analysis, ("const_region", "rate_constant", "best_response"), "analysis")
    for k, v in analysis.items():
        if not isinstance(v, dict):
            raise ConfigurationError("expected an object", f"analysis.{k}")
    analysis = copy.deepcopy(analysis)
    sweep = raw.get("sweep")
    if mode == "sweep":
        if not isinstance(sweep, dict):
            raise ConfigurationError("sweep mode needs a sweep block", "sweep")
        q = sweep.get("quantity")
        if q not in SWEEP_QUANTITIES:
            raise ConfigurationError(f"quantity must be one of {sorted(SWEEP_QUANTITIES)}",
                                     "sweep.quantity")
        axes = sweep.get("axes", {})
        for name in SWEEP_QUANTITIES[q]:
            vals = axes.get(name)
            if not isinstance(vals, list) or not vals:
                raise ConfigurationError(f"axis {name!r} needs a non-empty list", f"sweep.axes.{name}")
            for v in vals:
                _num(v, f"sweep.axes.{name}")

    cfg = ExperimentConfig(
        mode=mode, market=market, regularizers=regs, schedules=scheds, nature=nature,
        init=init, horizon=horizon, diagnostics=diag, analysis=analysis, sweep=sweep,
        output=dict(raw.get("output", {})), description=str(raw.get("description", "")),
    )
    # Surface bad specs at load time rather than mid-run.
    if mode in ("simulate", "simulate-induced"):
        cfg.build_regularizers()
        cfg.build_schedules()
        if mode == "simulate-induced":
            cfg.build_nature()
    return cfg


def bundled_configs() -> list[str]:
    root = resources.files("refprice") / "configs"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def resolve_path(path: str | Path):
    """A filesystem path, or the name of a bundled config (``baseline``)."""
    p = Path(path)
    if p.exists():
        return p
    name = p.name[:-5] if p.name.endswith(".json") else p.name
    if p.parent == Path(".") and name in bundled_configs():
        return resources.files("refprice") / "configs" / f"{name}.json"
    raise FileNotFoundError(f"no config at {path} and no bundled config named {name!r}")


def load_config(path: str | Path) -> ExperimentConfig:
    src = resolve_path(path)
    try:
        raw = json.loads(src.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"invalid JSON: {exc}") from None
    return from_dict(raw)
