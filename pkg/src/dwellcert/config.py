"""JSON run configuration shared by every CLI verb.

Example::

    {
      "neuron": {"g_p": 0.75, "g_h": 0.15, "m": 1, "o_h": 0.35, "I": 1},
      "signal": {"periodic": {"T_I": 3.84, "T_0": 3.84, "periods": 20}},
      "x0": [0, 0],
      "k": 0.2,
      "reset": {"v_th": 2.6, "v_R": 0.0, "h_R": {"ON": 0.0, "OFF": 0.0}}
    }

Instead of ``neuron`` a config may list raw modes,
``"modes": [{"id": "A", "a": -1, "b": 2, "c": -3, "d": -4, "B": [0, 0]}, ...]``,
and instead of ``periodic`` an explicit schedule,
``"signal": {"explicit": {"switches": [[0, "A"], [2.5, "B"]], "horizon": 5}}``.
Periodic signals over raw modes name their two modes with ``"on"`` and ``"off"``.
Optional keys: ``dt``, ``seed``, ``initial_mode`` (the mode whose level set holds
``x0``; ``OFF`` for neuron configs, otherwise the first scheduled mode) and
``sweep`` (``{"T": [...], "k": [...], "periods": n}``).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, DwellCertError
from .neuron import DEFAULT_K, OFF, ON, NeuronParams, neuron_modes
from .planar_affine import PlanarAffineMode, validate_mode
from .sim import ResetRule, SwitchingSignal, periodic_signal

_TOP_KEYS = {"neuron", "modes", "signal", "x0", "k", "reset", "dt", "seed", "initial_mode", "sweep"}


@dataclass
class Periodic:
    T_I: float
    T_0: float
    periods: int
    on: str = ON
    off: str = OFF


@dataclass
class RunConfig:
    modes: dict
    neuron: NeuronParams | None = None
    periodic: Periodic | None = None
    signal: SwitchingSignal | None = None
    x0: tuple = (0.0, 0.0)
    k: float = DEFAULT_K
    v_th: float | None = None
    reset: ResetRule | None = None
    dt: float | None = None
    seed: int = 0
    initial_mode: str | None = None
    sweep: dict = field(default_factory=dict)

    def require_signal(self) -> SwitchingSignal:
        if self.signal is None:
            raise ConfigError("signal: required for this command")
        return self.signal

    def require_neuron(self) -> NeuronParams:
        if self.neuron is None:
            raise ConfigError("neuron: this command needs a neuron parameter block")
        return self.neuron

    def start_mode(self) -> str:
        if self.initial_mode is not None:
            return self.initial_mode
        if self.neuron is not None:
            return OFF
        return self.require_signal().switches[0][1]


def _num(obj, key, where, positive=False, required=True, default=None):
    if key not in obj:
        if required:
            raise ConfigError(f"{where}.{key}: missing")
        return default
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{where}.{key}: expected a finite number, got {value!r}")
    if positive and not value > 0:
        raise ConfigError(f"{where}.{key}: must be positive, got {value!r}")
    return float(value)


def _vec2(value, where):
    if (not isinstance(value, list) or len(value) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)):
        raise ConfigError(f"{where}: expected a list of two numbers, got {value!r}")
    return (float(value[0]), float(value[1]))


def _obj(value, where):
    if not isinstance(value, dict):
        raise ConfigError(f"{where}: expected an object, got {type(value).__name__}")
    return value


def parse_config(data: dict) -> RunConfig:
    """Build a :class:`RunConfig` from decoded JSON; raises ``ConfigError`` naming the bad field."""
    data = _obj(data, "config")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"config: unknown keys {sorted(unknown)}")
    if ("neuron" in data) == ("modes" in data):
        raise ConfigError("config: exactly one of 'neuron' or 'modes' is required")

    cfg = RunConfig(modes={})
    if "k" in data:
        cfg.k = _num(data, "k", "config", positive=True)
    if "x0" in data:
        cfg.x0 = _vec2(data["x0"], "x0")
    if "dt" in data and data["dt"] is not None:
        cfg.dt = _num(data, "dt", "config", positive=True)
    if "seed" in data:
        if not isinstance(data["seed"], int) or isinstance(data["seed"], bool):
            raise ConfigError(f"seed: expected an integer, got {data['seed']!r}")
        cfg.seed = data["seed"]
    if "initial_mode" in data:
        cfg.initial_mode = str(data["initial_mode"])

    reset = _obj(data.get("reset", {}), "reset")
    cfg.v_th = _num(reset, "v_th", "reset", required=False)
    v_R = _num(reset, "v_R", "reset", required=False)
    h_R = reset.get("h_R")

    signal_block = _obj(data["signal"], "signal") if "signal" in data else None
    if signal_block is not None and len(signal_block) != 1:
        raise ConfigError("signal: exactly one of 'periodic' or 'explicit' is required")
    if signal_block is not None and "periodic" in signal_block:
        per = _obj(signal_block["periodic"], "signal.periodic")
        periods = per.get("periods", 1)
        if isinstance(periods, bool) or not isinstance(periods, int) or periods < 1:
            raise ConfigError(f"signal.periodic.periods: expected an integer >= 1, got {periods!r}")
        cfg.periodic = Periodic(
            _num(per, "T_I", "signal.periodic", positive=True),
            _num(per, "T_0", "signal.periodic", positive=True),
            periods,
            str(per.get("on", ON)),
            str(per.get("off", OFF)),
        )

    try:
        if "neuron" in data:
            nb = _obj(data["neuron"], "neuron")
            extra = set(nb) - {"g_p", "g_h", "m", "o_h", "I"}
            if extra:
                raise ConfigError(f"neuron: unknown keys {sorted(extra)}")
            T_I = cfg.periodic.T_I if cfg.periodic else 1.0
            T_0 = cfg.periodic.T_0 if cfg.periodic else 1.0
            cfg.neuron = NeuronParams(
                g_p=_num(nb, "g_p", "neuron", positive=True),
                g_h=_num(nb, "g_h", "neuron", positive=True),
                m=_num(nb, "m", "neuron", positive=True),
                o_h=_num(nb, "o_h", "neuron", positive=True),
                I=_num(nb, "I", "neuron", positive=True, required=False, default=1.0),
                T_I=T_I,
                T_0=T_0,
                v_th=cfg.v_th,
                v_R=v_R,
                h_R=h_R,
            )
            off, on = neuron_modes(cfg.neuron)
            cfg.modes = {OFF: off, ON: on}
        else:
            if not isinstance(data["modes"], list) or not data["modes"]:
                raise ConfigError("modes: expected a non-empty list")
            for i, mb in enumerate(data["modes"]):
                where = f"modes[{i}]"
                mb = _obj(mb, where)
                if "id" not in mb:
                    raise ConfigError(f"{where}.id: missing")
                mid = str(mb["id"])
                if mid in cfg.modes:
                    raise ConfigError(f"{where}.id: duplicate mode id {mid!r}")
                mode = PlanarAffineMode(
                    _num(mb, "a", where), _num(mb, "b", where), _num(mb, "c", where), _num(mb, "d", where),
                    _vec2(mb.get("B", [0, 0]), f"{where}.B"), mid,
                )
                try:
                    validate_mode(mode)
                except DwellCertError as exc:
                    raise ConfigError(f"{where}: {exc}") from None
                cfg.modes[mid] = mode
    except DwellCertError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None
    except ValueError as exc:
        raise ConfigError(f"neuron: {exc}") from None

    if cfg.neuron is not None and v_R is not None and h_R is not None:
        try:
            cfg.reset = cfg.neuron.reset_rule()
        except ValueError as exc:
            raise ConfigError(f"reset: {exc}") from None
    elif v_R is not None and h_R is not None:
        if cfg.v_th is None:
            raise ConfigError("reset.v_th: missing")
        if not isinstance(h_R, dict):
            h_R = {mid: h_R for mid in cfg.modes}
        try:
            cfg.reset = ResetRule(cfg.v_th, v_R, {str(k): float(v) for k, v in h_R.items()})
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"reset: {exc}") from None

    if signal_block is not None:
        try:
            if cfg.periodic is not None:
                p = cfg.periodic
                for role, mid in (("on", p.on), ("off", p.off)):
                    if mid not in cfg.modes:
                        raise ConfigError(f"signal.periodic.{role}: unknown mode {mid!r}")
                cfg.signal = periodic_signal(p.on, p.off, p.T_I, p.T_0, p.periods)
            elif "explicit" in signal_block:
                ex = _obj(signal_block["explicit"], "signal.explicit")
                sw = ex.get("switches")
                if not isinstance(sw, list) or not sw:
                    raise ConfigError("signal.explicit.switches: expected a non-empty list of [t, mode]")
                switches = []
                for i, item in enumerate(sw):
                    if not isinstance(item, list) or len(item) != 2:
                        raise ConfigError(f"signal.explicit.switches[{i}]: expected [t, mode]")
                    t = _num({"t": item[0]}, "t", f"signal.explicit.switches[{i}]")
                    mid = str(item[1])
                    if mid not in cfg.modes:
                        raise ConfigError(f"signal.explicit.switches[{i}]: unknown mode {mid!r}")
                    switches.append((t, mid))
                horizon = _num(ex, "horizon", "signal.explicit", required=False, default=switches[-1][0])
                cfg.signal = SwitchingSignal(tuple(switches), horizon)
            else:
                raise ConfigError(f"signal: unknown form {sorted(signal_block)}")
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"signal: {exc}") from None

    if cfg.initial_mode is not None and cfg.initial_mode not in cfg.modes:
        raise ConfigError(f"initial_mode: unknown mode {cfg.initial_mode!r}")

    if "sweep" in data:
        sw = _obj(data["sweep"], "sweep")
        Ts = sw.get("T")
        ks = sw.get("k", [cfg.k])
        for key, seq in (("T", Ts), ("k", ks)):
            if (not isinstance(seq, list) or not seq
                    or not all(isinstance(v, (int, float)) and not isinstance(v, bool) and v > 0 for v in seq)):
                raise ConfigError(f"sweep.{key}: expected a non-empty list of positive numbers")
        periods = sw.get("periods", 20)
        if isinstance(periods, bool) or not isinstance(periods, int) or periods < 1:
            raise ConfigError(f"sweep.periods: expected an integer >= 1, got {periods!r}")
        cfg.sweep = {"T": [float(v) for v in Ts], "k": [float(v) for v in ks], "periods": periods}
    return cfg


def load_config(path) -> RunConfig:
    """Read and parse a JSON config file; JSON syntax errors report line and column."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return parse_config(data)
