"""Dwell times for n-dimensional nonlinear subsystems with ball-sandwiched Lyapunov functions.

A subsystem carries a Lyapunov function ``V`` with comparison bounds
``alpha(|x - x_u|) <= V(x) <= beta(|x - x_u|)`` and decay ``grad V . f <= -eps V``.
The level set ``{V_old <= k}`` sits inside the ball of radius ``alpha_old^{-1}(k)``,
and that ball sits inside ``{V_new <= beta_new(|x_new - x_old| + alpha_old^{-1}(k))}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DecayViolated, InvalidLevels, NonFiniteState, SandwichViolated
from .planar_affine import PlanarAffineMode, dwell_time, lyapunov, validate_mode
from .sim import Event, SwitchingSignal, Trajectory, _lookup

FD_STEP = 1e-6


def _invert_increasing(f: Callable[[float], float], y: float, tol: float = 1e-13) -> float:
    """Solve ``f(r) = y`` for an increasing ``f`` with ``f(0) = 0``."""
    if y <= 0:
        return 0.0
    hi = 1.0
    while f(hi) < y:
        hi *= 2.0
        if hi > 1e300:
            raise ValueError(f"level {y} is not reached by the comparison function")
    lo = 0.0
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if f(mid) < y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class ComparisonPair:
    """Strictly increasing ``alpha <= beta`` vanishing at zero; ``alpha_inv`` optional."""

    alpha: Callable[[float], float]
    beta: Callable[[float], float]
    alpha_inv: Callable[[float], float] | None = None

    def inv_alpha(self, k: float) -> float:
        if self.alpha_inv is not None:
            return float(self.alpha_inv(k))
        return _invert_increasing(self.alpha, k)

    def check(self, radii=None, tol: float = 1e-9) -> None:
        """Raise ``SandwichViolated`` if ``alpha > beta`` or the inverse misses on ``radii``."""
        if radii is None:
            radii = np.linspace(0.0, 10.0, 101)
        for r in radii:
            a, b = self.alpha(r), self.beta(r)
            if a > b + tol * max(1.0, abs(b)):
                raise SandwichViolated(f"alpha({r}) = {a} exceeds beta({r}) = {b}")
            back = self.inv_alpha(a)
            if abs(back - r) > tol * max(1.0, r):
                raise SandwichViolated(f"alpha_inv(alpha({r})) = {back}")


@dataclass(frozen=True)
class NonlinearSubsystem:
    field: Callable
    equilibrium: np.ndarray
    V: Callable
    comparison: ComparisonPair
    eps: float
    grad_V: Callable | None = None

    def __post_init__(self):
        object.__setattr__(self, "equilibrium", np.asarray(self.equilibrium, dtype=float))
        if not self.eps > 0:
            raise ValueError(f"decay rate must be positive, got eps={self.eps}")

    @property
    def dim(self) -> int:
        return self.equilibrium.shape[0]

    def gradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.grad_V is not None:
            return np.asarray(self.grad_V(x), dtype=float)
        g = np.empty_like(x)
        for j in range(x.shape[0]):
            h = FD_STEP * max(1.0, abs(x[j]))
            e = np.zeros_like(x)
            e[j] = h
            g[j] = (self.V(x + e) - self.V(x - e)) / (2.0 * h)
        return g

    def validate(self, lo, hi, n: int = 1000, seed: int = 0, tol: float = 1e-9) -> None:
        """Sample ``n`` states uniformly in the box ``[lo, hi]`` and check the sandwich and decay bounds.

        Raises with the worst sampled state on violation. Passing only scopes the
        certificate to the box; it proves nothing outside it.
        """
        rng = np.random.default_rng(seed)
        lo = np.broadcast_to(np.asarray(lo, dtype=float), (self.dim,))
        hi = np.broadcast_to(np.asarray(hi, dtype=float), (self.dim,))
        pts = rng.uniform(lo, hi, size=(n, self.dim))
        worst_sandwich, worst_sandwich_x = -np.inf, None
        worst_decay, worst_decay_x = -np.inf, None
        for x in pts:
            v = float(self.V(x))
            r = float(np.linalg.norm(x - self.equilibrium))
            a, b = self.comparison.alpha(r), self.comparison.beta(r)
            excess = max(a - v, v - b) / max(1.0, abs(v))
            if excess > worst_sandwich:
                worst_sandwich, worst_sandwich_x = excess, x
            rate = float(self.gradient(x) @ np.asarray(self.field(x), dtype=float)) + self.eps * v
            rate /= max(1.0, abs(v))
            if rate > worst_decay:
                worst_decay, worst_decay_x = rate, x
        if worst_sandwich > tol:
            raise SandwichViolated(
                f"comparison bounds fail by {worst_sandwich:.3g} (relative) at x={worst_sandwich_x.tolist()}"
            )
        if worst_decay > tol:
            raise DecayViolated(
                f"decay bound fails by {worst_decay:.3g} (relative) at x={worst_decay_x.tolist()}"
            )


def nl_enclosing_level(s_old: NonlinearSubsystem, s_new: NonlinearSubsystem, k: float) -> float:
    """Level of ``V_new`` whose sublevel set covers the ball around ``x_old`` enclosing ``{V_old <= k}``."""
    if k < 0:
        raise InvalidLevels(f"level must be nonnegative, got k={k}")
    shift = float(np.linalg.norm(s_new.equilibrium - s_old.equilibrium))
    return float(s_new.comparison.beta(shift + s_old.comparison.inv_alpha(k)))


def nl_dwell_time(s_new: NonlinearSubsystem, k: float, k_i: float) -> float:
    return dwell_time(s_new.eps, k, k_i)


def affine_as_nonlinear(m: PlanarAffineMode) -> NonlinearSubsystem:
    """Embed a planar affine mode, using the extreme weights as ball bounds."""
    validate_mode(m)
    V = lyapunov(m)
    lo_w, hi_w = min(V.w1, V.w2), max(V.w1, V.w2)
    A = m.A
    B = np.asarray(m.B)
    pair = ComparisonPair(
        alpha=lambda r: lo_w * r * r,
        beta=lambda r: hi_w * r * r,
        alpha_inv=lambda k: math.sqrt(k / lo_w),
    )
    return NonlinearSubsystem(
        field=lambda x: A @ x + B,
        equilibrium=np.asarray(V.center),
        V=V,
        comparison=pair,
        eps=V.eps,
        grad_V=V.gradient,
    )


def _rk4_run(f, x0, t0: float, span: float, dt: float):
    n = max(1, math.ceil(span / dt - 1e-9)) if span > 0 else 0
    ts = np.empty(n + 1)
    xs = np.empty((n + 1, x0.shape[0]))
    ts[0], xs[0] = t0, x0
    x = x0
    for i in range(1, n + 1):
        h = min(dt, span - (i - 1) * dt) if i == n else dt
        k1 = f(x)
        k2 = f(x + 0.5 * h * k1)
        k3 = f(x + 0.5 * h * k2)
        k4 = f(x + h * k3)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(x)):
            raise NonFiniteState(f"state left the representable range at t={t0 + (i - 1) * dt + h}")
        ts[i] = t0 + span if i == n else t0 + i * dt
        xs[i] = x
    return ts, xs


def integrate(s: NonlinearSubsystem, x0, horizon: float, dt: float) -> Trajectory:
    """Classical fixed-step RK4 from ``x0`` over ``[0, horizon]``; the last step is shortened to land on ``horizon``."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    f = lambda x: np.asarray(s.field(x), dtype=float)  # noqa: E731
    ts, xs = _rk4_run(f, np.asarray(x0, dtype=float), 0.0, float(horizon), dt)
    V = np.array([s.V(x) for x in xs], dtype=float)
    return Trajectory(ts, xs, (None,) * len(ts), V, ())


def simulate_switched(systems, signal: SwitchingSignal, x0, dt: float) -> Trajectory:
    """RK4 through a switching signal; rows are laid out as in :func:`dwellcert.sim.simulate`."""
    ts, xs, ms, Vs, events = [], [], [], [], []
    x = np.asarray(x0, dtype=float)
    prev = None
    for t_start, t_end, mid in signal.segments():
        s = _lookup(systems, mid)
        events.append(Event(t_start, "switch", f"{'' if prev is None else prev}->{mid}"))
        f = lambda y, s=s: np.asarray(s.field(y), dtype=float)  # noqa: E731
        seg_t, seg_x = _rk4_run(f, x, t_start, t_end - t_start, dt)
        ts.append(seg_t)
        xs.append(seg_x)
        ms.extend([mid] * len(seg_t))
        Vs.append([s.V(y) for y in seg_x])
        x = seg_x[-1]
        prev = mid
    return Trajectory(np.concatenate(ts), np.concatenate(xs), tuple(ms),
                      np.concatenate(Vs).astype(float), tuple(events))
