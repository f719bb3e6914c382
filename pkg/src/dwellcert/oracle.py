"""Brute-force checkers for the closed-form quantities.

Nothing here calls the closed-form enclosing-level or flow code, so each
checker can serve as an independent reference for it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .planar_affine import (
    PlanarAffineMode,
    QuadraticLyapunov,
    SublevelSet,
    ellipse_points,
    evaluate,
    lyapunov,
    validate_mode,
)

ENTRY_RANGE = 5.0
ENTRY_GAP = 0.05
B_RANGE = 3.0


def random_mode(rng: np.random.Generator, id=None, A=None) -> PlanarAffineMode:
    """Draw a valid mode: entries uniform in ``[-5, 5]`` minus ``(-0.05, 0.05)``, ``B`` in ``[-3, 3]^2``.

    Matrix draws are rejected until ``abcd < 0`` and the matrix is Hurwitz.
    Pass ``A`` to keep a fixed matrix and only draw ``B``.
    """
    if A is None:
        while True:
            mag = rng.uniform(ENTRY_GAP, ENTRY_RANGE, size=4)
            a, b, c, d = mag * rng.choice([-1.0, 1.0], size=4)
            if a * b * c * d < 0 and a * d - b * c > 0 and a + d < 0:
                break
    else:
        (a, b), (c, d) = A
    B = rng.uniform(-B_RANGE, B_RANGE, size=2)
    return validate_mode(PlanarAffineMode(float(a), float(b), float(c), float(d), (B[0], B[1]), id))


def random_mode_pair(rng: np.random.Generator) -> tuple[PlanarAffineMode, PlanarAffineMode]:
    """Two modes sharing one matrix with independent offsets."""
    m0 = random_mode(rng, id="0")
    m1 = random_mode(rng, id="1", A=((m0.a, m0.b), (m0.c, m0.d)))
    return m0, m1


def repeated_eigenvalue_mode(rng: np.random.Generator, id=None) -> PlanarAffineMode:
    """Valid mode with a double eigenvalue ``lam < 0``: ``a - d = 2 gap``, ``bc = -gap^2``, ``gap < |lam|``."""
    lam = -float(rng.uniform(0.2, 3.0))
    gap = float(rng.uniform(0.1, 0.9)) * -lam
    a, d = lam + gap, lam - gap
    b = float(rng.uniform(0.2, 3.0)) * float(rng.choice([-1.0, 1.0]))
    c = -gap * gap / b
    B = rng.uniform(-B_RANGE, B_RANGE, size=2)
    return validate_mode(PlanarAffineMode(a, b, c, d, (B[0], B[1]), id))


def boundary_max(V_old: QuadraticLyapunov, k: float, V_new: QuadraticLyapunov, n_samples: int = 4096) -> float:
    """Max of ``V_new`` over ``n_samples`` equiangular points of ``{V_old = k}``."""
    if n_samples < 16:
        raise ValueError(f"n_samples must be at least 16, got {n_samples}")
    phi = 2.0 * np.pi * np.arange(n_samples) / n_samples
    return float(np.max(evaluate(V_new, ellipse_points(V_old, k, phi))))


@dataclass(frozen=True)
class DecayCheck:
    worst: float  # max of (grad V . f) / V + eps over the samples; <= 0 when the rate holds
    best: float
    witness: float  # same quantity on the slow axis; 0 when eps is tight


def _fd_gradient(V: QuadraticLyapunov, x: np.ndarray, h: np.ndarray) -> np.ndarray:
    # central differences are exact for quadratics, so h only trades off rounding
    g = np.empty_like(x)
    for j in range(2):
        e = np.zeros_like(x)
        e[..., j] = h
        g[..., j] = (evaluate(V, x + e) - evaluate(V, x - e)) / (2.0 * h)
    return g


def fd_decay_check(m: PlanarAffineMode, n_points: int = 1000, seed: int = 0) -> DecayCheck:
    """Finite-difference check that ``V`` decays at least at its claimed rate."""
    if n_points < 100:
        raise ValueError(f"n_points must be at least 100, got {n_points}")
    V = lyapunov(m)
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0.0, 2.0 * np.pi, size=n_points)
    r = rng.uniform(0.1, 10.0, size=n_points)
    c = np.asarray(V.center)
    u = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    x = c + r[:, None] * u
    ratio = _decay_ratio(m, V, x, r) + V.eps
    slow_axis = np.array([1.0, 0.0]) if abs(m.a) <= abs(m.d) else np.array([0.0, 1.0])
    rw = np.array([0.5, 1.0, 3.0])
    xw = c + rw[:, None] * slow_axis
    witness = _decay_ratio(m, V, xw, rw) + V.eps
    return DecayCheck(float(ratio.max()), float(ratio.min()), float(np.max(np.abs(witness))))


def _decay_ratio(m, V, x, r):
    g = _fd_gradient(V, x, 1e-2 * r)
    f = m.field(x)
    return np.sum(g * f, axis=-1) / evaluate(V, x)


def inclusion_check(inner: SublevelSet, outer: SublevelSet, n_samples: int = 4096,
                    seed: int = 0, tol: float = 1e-9) -> tuple[bool, float]:
    """Sample the boundary and interior of ``inner``; return ``(all inside outer, worst excess)``."""
    if n_samples < 16:
        raise ValueError(f"n_samples must be at least 16, got {n_samples}")
    rng = np.random.default_rng(seed)
    phi = 2.0 * np.pi * np.arange(n_samples) / n_samples
    edge = ellipse_points(inner.lyapunov, inner.k, phi)
    scale = np.sqrt(rng.uniform(0.0, 1.0, size=n_samples))
    c = np.asarray(inner.lyapunov.center)
    interior = c + scale[:, None] * (ellipse_points(inner.lyapunov, inner.k, rng.uniform(0, 2 * np.pi, n_samples)) - c)
    pts = np.concatenate([edge, interior])
    excess = float(np.max(evaluate(outer.lyapunov, pts) - outer.k))
    return excess <= tol * max(1.0, outer.k), excess


@numba.njit(cache=True)
def _rk4_affine(A, B, x0, dt, n_steps, stride):
    n_out = n_steps // stride + 1
    out = np.empty((n_out, 2))
    x1, x2 = x0[0], x0[1]
    c1 = 0.0
    c2 = 0.0
    out[0, 0], out[0, 1] = x1, x2
    a, b, c, d = A[0, 0], A[0, 1], A[1, 0], A[1, 1]
    B1, B2 = B[0], B[1]
    j = 1
    for i in range(1, n_steps + 1):
        k11 = a * x1 + b * x2 + B1
        k12 = c * x1 + d * x2 + B2
        y1 = x1 + 0.5 * dt * k11
        y2 = x2 + 0.5 * dt * k12
        k21 = a * y1 + b * y2 + B1
        k22 = c * y1 + d * y2 + B2
        y1 = x1 + 0.5 * dt * k21
        y2 = x2 + 0.5 * dt * k22
        k31 = a * y1 + b * y2 + B1
        k32 = c * y1 + d * y2 + B2
        y1 = x1 + dt * k31
        y2 = x2 + dt * k32
        k41 = a * y1 + b * y2 + B1
        k42 = c * y1 + d * y2 + B2
        # Kahan-compensated increments keep 1e6 steps free of drift
        inc1 = dt / 6.0 * (k11 + 2.0 * k21 + 2.0 * k31 + k41) - c1
        t1 = x1 + inc1
        c1 = (t1 - x1) - inc1
        x1 = t1
        inc2 = dt / 6.0 * (k12 + 2.0 * k22 + 2.0 * k32 + k42) - c2
        t2 = x2 + inc2
        c2 = (t2 - x2) - inc2
        x2 = t2
        if i % stride == 0:
            out[j, 0], out[j, 1] = x1, x2
            j += 1
    return out


def rk4_affine(A, B, x0, dt: float, t_end: float, stride: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Fixed-step RK4 for ``x' = A x + B``; returns ``(times, states)`` every ``stride`` steps."""
    n_steps = int(round(t_end / dt))
    if abs(n_steps * dt - t_end) > 1e-9 * max(1.0, t_end):
        raise ValueError("t_end must be an integer multiple of dt")
    out = _rk4_affine(np.asarray(A, dtype=float), np.asarray(B, dtype=float),
                      np.asarray(x0, dtype=float), float(dt), n_steps, int(stride))
    times = np.arange(out.shape[0]) * stride * dt
    return times, out


def rk4_matrix_exp(A, t: float, dt: float = 1e-5) -> np.ndarray:
    """``exp(A t)`` column by column from RK4 on ``x' = A x``."""
    cols = []
    for e in (np.array([1.0, 0.0]), np.array([0.0, 1.0])):
        _, xs = rk4_affine(A, np.zeros(2), e, dt, t, stride=max(1, int(round(t / dt))))
        cols.append(xs[-1])
    return np.stack(cols, axis=1)
