"""Linear neuron ``v' = -g_p v + g_h h + I(t)``, ``h' = -m v - o_h h`` under a square-wave current.

The current alternates between ``I`` (mode ``ON``, for ``T_I``) and ``0``
(mode ``OFF``, for ``T_0``). Both modes share the matrix
``[[-g_p, g_h], [-m, -o_h]]``, so the enclosing level is the same for every switch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

from .errors import InvalidLevels
from .jsonio import dumps17
from .planar_affine import PlanarAffineMode, validate_mode
from .sim import ResetRule, SwitchingSignal, periodic_signal

OFF = "OFF"
ON = "ON"
DEFAULT_K = 0.2


@dataclass(frozen=True)
class NeuronParams:
    g_p: float
    g_h: float
    m: float
    o_h: float
    I: float = 1.0
    T_I: float = 1.0
    T_0: float = 1.0
    v_th: float | None = None
    v_R: float | None = None
    h_R: Mapping | float | None = None

    def __post_init__(self):
        for name in ("g_p", "g_h", "m", "o_h", "I", "T_I", "T_0"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive number, got {value!r}")

    def reset_rule(self) -> ResetRule | None:
        """Reset law when ``v_th``, ``v_R`` and ``h_R`` are all given."""
        if self.v_th is None or self.v_R is None or self.h_R is None:
            return None
        h_R = self.h_R
        if not isinstance(h_R, Mapping):
            h_R = {ON: float(h_R), OFF: float(h_R)}
        return ResetRule(self.v_th, self.v_R, dict(h_R))


@dataclass(frozen=True)
class Certificate:
    k: float
    v_I: float
    h_I: float
    k_bar: float
    tau_d: float
    v_bound: float
    dwell_ok: bool
    nonspiking_ok: bool | None
    x0_ok: bool = True

    @property
    def passed(self) -> bool:
        return self.dwell_ok and self.x0_ok and self.nonspiking_ok is not False

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "v_I": self.v_I,
            "h_I": self.h_I,
            "k_bar": self.k_bar,
            "tau_d": self.tau_d,
            "v_bound": self.v_bound,
            "dwell_ok": self.dwell_ok,
            "nonspiking_ok": self.nonspiking_ok,
            "x0_ok": self.x0_ok,
        }

    def to_json(self) -> str:
        return dumps17(self.to_dict())


def neuron_modes(p: NeuronParams) -> tuple[PlanarAffineMode, PlanarAffineMode]:
    """Return the validated ``(OFF, ON)`` mode pair."""
    kw = dict(a=-p.g_p, b=p.g_h, c=-p.m, d=-p.o_h)
    off = validate_mode(PlanarAffineMode(B=(0.0, 0.0), id=OFF, **kw))
    on = validate_mode(PlanarAffineMode(B=(p.I, 0.0), id=ON, **kw))
    return off, on


def on_equilibrium(p: NeuronParams) -> tuple[float, float]:
    scale = p.I / (p.g_p * p.o_h + p.m * p.g_h)
    return (scale * p.o_h, -scale * p.m)


def certify(p: NeuronParams, k: float = DEFAULT_K, x0=(0.0, 0.0)) -> Certificate:
    """Dwell-time and firing-threshold certificate for the periodically switched neuron.

    ``x0_ok`` reports whether ``x0`` lies in the level-``k`` set of the OFF mode,
    which the guarantee presupposes.
    """
    if not k > 0:
        raise InvalidLevels(f"level must be positive, got k={k}")
    v_I, h_I = on_equilibrium(p)
    k_bar = (math.sqrt(k) + math.sqrt(p.m * v_I * v_I + p.g_h * h_I * h_I)) ** 2
    tau_d = math.log(k_bar / k) / (2.0 * min(p.g_p, p.o_h))
    v_bound = v_I + math.sqrt(k_bar / p.m)
    dwell_ok = min(p.T_I, p.T_0) >= tau_d
    nonspiking_ok = None if p.v_th is None else bool(p.v_th > v_bound)
    x0_ok = p.m * x0[0] ** 2 + p.g_h * x0[1] ** 2 <= k
    return Certificate(k, v_I, h_I, k_bar, tau_d, v_bound, dwell_ok, nonspiking_ok, x0_ok)


def square_wave_signal(p: NeuronParams, periods: int) -> SwitchingSignal:
    """``ON`` on ``(jT, jT + T_I]``, ``OFF`` on ``(jT + T_I, (j + 1)T]`` with ``T = T_I + T_0``."""
    return periodic_signal(ON, OFF, p.T_I, p.T_0, periods)
