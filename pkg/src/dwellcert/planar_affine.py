"""Planar affine modes, their diagonal quadratic Lyapunov functions and dwell-time bounds.

Every mode is ``x' = A x + B`` with ``A = [[a, b], [c, d]]``, ``abcd < 0`` and ``A``
Hurwitz. Under those conditions ``b`` and ``c`` have opposite signs and ``a, d < 0``,
so ``V(x) = |c| (x1 - x_u1)^2 + |b| (x2 - x_u2)^2`` has no cross term in its
derivative and decays at the rate ``2 min(|a|, |d|)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable, Mapping, Sequence

import numpy as np

from .errors import InvalidLevels, NotHurwitz, SignConditionViolated, WeightMismatch

WEIGHT_RTOL = 1e-12
SCAN_ANGLES = 1024
ANGLE_TOL = 1e-12
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class PlanarAffineMode:
    """One subsystem ``x' = [[a, b], [c, d]] x + B``."""

    a: float
    b: float
    c: float
    d: float
    B: tuple[float, float] = (0.0, 0.0)
    id: Hashable = None

    def __post_init__(self):
        object.__setattr__(self, "B", (float(self.B[0]), float(self.B[1])))

    @property
    def A(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=float)

    @property
    def trace(self) -> float:
        return self.a + self.d

    @property
    def det(self) -> float:
        return self.a * self.d - self.b * self.c

    def field(self, x):
        x = np.asarray(x, dtype=float)
        return x @ self.A.T + np.asarray(self.B)


@dataclass(frozen=True)
class QuadraticLyapunov:
    """``V(x) = w1 (x1 - c1)^2 + w2 (x2 - c2)^2`` with decay rate ``eps``."""

    w1: float
    w2: float
    center: tuple[float, float]
    eps: float = field(default=float("nan"))

    def __post_init__(self):
        if not (self.w1 > 0 and self.w2 > 0):
            raise ValueError(f"weights must be positive, got w1={self.w1}, w2={self.w2}")
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))

    @property
    def weights(self) -> tuple[float, float]:
        return (self.w1, self.w2)

    def __call__(self, x):
        return evaluate(self, x)

    def gradient(self, x):
        x = np.asarray(x, dtype=float)
        dx = x - np.asarray(self.center)
        return 2.0 * dx * np.array([self.w1, self.w2])


@dataclass(frozen=True)
class SublevelSet:
    """Closed sublevel set ``{x : V(x) <= k}``."""

    lyapunov: QuadraticLyapunov
    k: float

    def __post_init__(self):
        if self.k < 0:
            raise InvalidLevels(f"level must be nonnegative, got k={self.k}")

    def contains(self, x, tol: float = 0.0):
        return self.lyapunov(x) <= self.k + tol

    def boundary(self, n: int = 128) -> np.ndarray:
        """Return ``n`` equiangular points of the boundary ellipse, shape ``(n, 2)``."""
        phi = 2.0 * np.pi * np.arange(n) / n
        return ellipse_points(self.lyapunov, self.k, phi)


def validate_mode(m: PlanarAffineMode) -> PlanarAffineMode:
    """Return ``m`` unchanged if ``abcd < 0`` and ``A`` is Hurwitz, raise otherwise."""
    entries = {"a": m.a, "b": m.b, "c": m.c, "d": m.d}
    for name, value in entries.items():
        if not math.isfinite(value):
            raise SignConditionViolated(f"mode {m.id!r}: entry {name}={value} is not finite")
    zeros = [name for name, value in entries.items() if value == 0.0]
    if zeros:
        raise SignConditionViolated(
            f"mode {m.id!r}: abcd < 0 fails, entries {', '.join(zeros)} are zero"
        )
    prod = m.a * m.b * m.c * m.d
    if prod >= 0:
        raise SignConditionViolated(f"mode {m.id!r}: abcd < 0 fails (abcd = {prod:g})")
    if m.det <= 0:
        raise NotHurwitz(f"mode {m.id!r}: ad - bc > 0 fails (ad - bc = {m.det:g})")
    if m.trace >= 0:
        raise NotHurwitz(f"mode {m.id!r}: a + d < 0 fails (a + d = {m.trace:g})")
    return m


def equilibrium(m: PlanarAffineMode) -> tuple[float, float]:
    """Solve ``A x + B = 0`` by Cramer's rule."""
    b1, b2 = m.B
    det = m.det
    x1 = -(m.d * b1 - m.b * b2) / det
    x2 = -(-m.c * b1 + m.a * b2) / det
    return (x1 + 0.0, x2 + 0.0)


def decay_rate(m: PlanarAffineMode) -> float:
    return 2.0 * min(abs(m.a), abs(m.d))


def lyapunov(m: PlanarAffineMode) -> QuadraticLyapunov:
    """Build the diagonal quadratic Lyapunov function of a validated mode.

    Weights are ``(|c|, |b|)``, the center is the mode equilibrium and the
    decay rate is ``2 min(|a|, |d|)``.
    """
    validate_mode(m)
    return QuadraticLyapunov(abs(m.c), abs(m.b), equilibrium(m), decay_rate(m))


def lyapunov_matrix(m: PlanarAffineMode) -> np.ndarray:
    """``P = sign(ac) diag(-c, b)``, so that ``V(x) = (x - x_u)^T P (x - x_u)``."""
    s = math.copysign(1.0, m.a * m.c)
    return s * np.diag([-m.c, m.b])


def lyapunov_residual(m: PlanarAffineMode) -> np.ndarray:
    """``A^T P + P A - 2 sign(ac) diag(-ac, bd)``; zero for every valid mode."""
    A = m.A
    P = lyapunov_matrix(m)
    s = math.copysign(1.0, m.a * m.c)
    rhs = 2.0 * s * np.diag([-m.a * m.c, m.b * m.d])
    return A.T @ P + P @ A - rhs


def evaluate(V: QuadraticLyapunov, x):
    """Evaluate ``V`` at one point or a stack of points with trailing axis 2."""
    x = np.asarray(x, dtype=float)
    d1 = x[..., 0] - V.center[0]
    d2 = x[..., 1] - V.center[1]
    out = V.w1 * d1 * d1 + V.w2 * d2 * d2
    return float(out) if out.ndim == 0 else out


def ellipse_points(V: QuadraticLyapunov, k: float, phi) -> np.ndarray:
    """Points of ``{V = k}`` at parameter angles ``phi``."""
    phi = np.asarray(phi, dtype=float)
    r1 = math.sqrt(k / V.w1)
    r2 = math.sqrt(k / V.w2)
    return np.stack(
        [V.center[0] + r1 * np.cos(phi), V.center[1] + r2 * np.sin(phi)], axis=-1
    )


def same_weights(V_old: QuadraticLyapunov, V_new: QuadraticLyapunov, rtol: float = WEIGHT_RTOL) -> bool:
    return all(
        abs(p - q) <= rtol * max(abs(p), abs(q))
        for p, q in zip(V_old.weights, V_new.weights)
    )


def _center_shift(V_old: QuadraticLyapunov, V_new: QuadraticLyapunov) -> float:
    d1 = V_new.center[0] - V_old.center[0]
    d2 = V_new.center[1] - V_old.center[1]
    return math.sqrt(V_new.w1 * d1 * d1 + V_new.w2 * d2 * d2)


def _check_shared(V_old, V_new, k):
    if k < 0:
        raise InvalidLevels(f"level must be nonnegative, got k={k}")
    if not same_weights(V_old, V_new):
        raise WeightMismatch(
            f"weights differ: {V_old.weights} vs {V_new.weights}; use enclosing_level_general"
        )


def enclosing_level_shared(V_old: QuadraticLyapunov, V_new: QuadraticLyapunov, k: float) -> float:
    """Smallest level of ``V_new`` whose sublevel set contains ``{V_old <= k}``.

    Valid when both functions share weights; the two ellipses are then
    homothetic and touch at a single boundary point.
    """
    _check_shared(V_old, V_new, k)
    return (math.sqrt(k) + _center_shift(V_old, V_new)) ** 2


def touching_level_inner(V_old: QuadraticLyapunov, V_new: QuadraticLyapunov, k: float) -> float:
    """Level at which ``{V_new = level}`` first touches ``{V_old = k}`` from the inside.

    This is the smaller root ``(sqrt(k) - s)^2`` of the tangency condition,
    where ``s`` is the weighted center shift.
    """
    _check_shared(V_old, V_new, k)
    return (math.sqrt(k) - _center_shift(V_old, V_new)) ** 2


def _golden_max(f, lo: float, hi: float, tol: float) -> tuple[float, float]:
    c = hi - _INVPHI * (hi - lo)
    d = lo + _INVPHI * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > tol:
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - _INVPHI * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _INVPHI * (hi - lo)
            fd = f(d)
    x = 0.5 * (lo + hi)
    return x, f(x)


def golden_max(f, lo: float, hi: float, tol: float = 1e-12) -> tuple[float, float]:
    """Maximize a unimodal scalar function on ``[lo, hi]``; returns ``(argmax, max)``.

    Endpoints are compared too, so a monotone ``f`` yields the right boundary value.
    """
    x, fx = _golden_max(f, lo, hi, tol)
    for end in (lo, hi):
        fe = f(end)
        if fe > fx:
            x, fx = end, fe
    return x, fx


def enclosing_level_general(V_old: QuadraticLyapunov, V_new: QuadraticLyapunov, k: float) -> float:
    """Smallest level of ``V_new`` containing ``{V_old <= k}`` for arbitrary weights.

    ``V_new`` restricted to the boundary ellipse of ``V_old`` is maximized by a
    dense angular scan refined with golden-section search.
    """
    if k < 0:
        raise InvalidLevels(f"level must be nonnegative, got k={k}")
    if k == 0:
        return evaluate(V_new, V_old.center)

    def on_boundary(phi):
        return evaluate(V_new, ellipse_points(V_old, k, phi))

    phi = 2.0 * np.pi * np.arange(SCAN_ANGLES) / SCAN_ANGLES
    vals = on_boundary(phi)
    j = int(np.argmax(vals))
    step = 2.0 * np.pi / SCAN_ANGLES
    _, best = golden_max(on_boundary, phi[j] - step, phi[j] + step, ANGLE_TOL)
    return max(float(best), float(vals[j]))


def enclosing_level(V_old: QuadraticLyapunov, V_new: QuadraticLyapunov, k: float) -> float:
    """Closed form when weights match, scan-and-refine otherwise."""
    if same_weights(V_old, V_new):
        return enclosing_level_shared(V_old, V_new, k)
    return enclosing_level_general(V_old, V_new, k)


def dwell_time(eps_new: float, k: float, k_i: float) -> float:
    """Minimal time in the new mode that brings level ``k_i`` back down to ``k``."""
    if not eps_new > 0:
        raise InvalidLevels(f"decay rate must be positive, got eps={eps_new}")
    if not k > 0:
        raise InvalidLevels(f"level must be positive, got k={k}")
    if k_i < k:
        raise InvalidLevels(f"enclosing level k_i={k_i} is below k={k}")
    return math.log(k_i / k) / eps_new


def dwell_time_weak(m_new: PlanarAffineMode, center_old, center_new, k: float) -> float:
    """Coarser dwell bound using the largest weight and the Euclidean center distance."""
    validate_mode(m_new)
    if not k > 0:
        raise InvalidLevels(f"level must be positive, got k={k}")
    dist = math.dist(center_new, center_old)
    scale = max(math.sqrt(abs(m_new.c)), math.sqrt(abs(m_new.b)))
    return math.log1p(scale * dist / math.sqrt(k)) / decay_rate(m_new)


@dataclass(frozen=True)
class ScheduleEntry:
    source: Hashable
    target: Hashable
    k_i: float
    tau: float


def mode_table(modes) -> dict:
    """Normalize a mapping or sequence of modes into ``{id: mode}``."""
    if isinstance(modes, Mapping):
        return dict(modes)
    return {m.id: m for m in modes}


def min_dwell_schedule(modes, order: Sequence[Hashable], k: float) -> list[ScheduleEntry]:
    """Enclosing level and minimal dwell for each consecutive pair of an itinerary."""
    table = mode_table(modes)
    lyap = {}
    for mid in order:
        if mid not in lyap:
            lyap[mid] = lyapunov(table[mid])
    out = []
    for src, dst in zip(order[:-1], order[1:]):
        k_i = enclosing_level(lyap[src], lyap[dst], k)
        out.append(ScheduleEntry(src, dst, k_i, dwell_time(lyap[dst].eps, k, k_i)))
    return out
