"""Exact simulation of planar switched affine systems.

Each mode's flow is evaluated in closed form, ``x(t) = x_u + exp(A t) (x0 - x_u)``,
so the sampling step only controls reporting resolution. Threshold crossings are
located by bisection on the exact flow.
"""

from __future__ import annotations

import io
import math
import os
from dataclasses import dataclass, field
from typing import Hashable, Mapping

import numpy as np

from .errors import UnknownModeId
from .planar_affine import (
    PlanarAffineMode,
    enclosing_level,
    equilibrium,
    golden_max,
    lyapunov,
    mode_table,
    validate_mode,
)

REPEATED_TOL = 1e-12
CROSSING_TOL = 1e-10
CROSSING_GRID = 1024
TRAP_TOL = 1e-6


# --------------------------------------------------------------------------
# data types
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SwitchingSignal:
    """Piecewise-constant mode schedule ``[(t_0 = 0, id_0), (t_1, id_1), ...]`` up to ``horizon``."""

    switches: tuple
    horizon: float

    def __post_init__(self):
        sw = tuple((float(t), mid) for t, mid in self.switches)
        if not sw:
            raise ValueError("switching signal needs at least one entry")
        if sw[0][0] != 0.0:
            raise ValueError(f"first switch must be at t=0, got t={sw[0][0]}")
        for (t0, m0), (t1, m1) in zip(sw[:-1], sw[1:]):
            if not t1 > t0:
                raise ValueError(f"switch times must increase strictly: {t0} then {t1}")
            if m1 == m0:
                raise ValueError(f"consecutive entries at t={t0} and t={t1} select the same mode {m0!r}")
        if not self.horizon >= sw[-1][0]:
            raise ValueError(f"horizon {self.horizon} precedes the last switch {sw[-1][0]}")
        object.__setattr__(self, "switches", sw)
        object.__setattr__(self, "horizon", float(self.horizon))

    def segments(self):
        """Yield ``(t_start, t_end, mode_id)`` for every piece, dropping a zero-length tail."""
        times = [t for t, _ in self.switches] + [self.horizon]
        for (t0, mid), t1 in zip(self.switches, times[1:]):
            if t1 > t0 or len(self.switches) == 1:
                yield t0, t1, mid

    def min_gap(self) -> float:
        gaps = [t1 - t0 for t0, t1, _ in self.segments() if t1 > t0]
        return min(gaps) if gaps else 0.0


def periodic_signal(on, off, T_on: float, T_off: float, periods: int) -> SwitchingSignal:
    """``on`` for ``T_on`` then ``off`` for ``T_off``, repeated ``periods`` times from ``t = 0``."""
    if periods < 1:
        raise ValueError(f"periods must be at least 1, got {periods}")
    period = T_on + T_off
    switches = []
    for j in range(periods):
        switches += [(j * period, on), (j * period + T_on, off)]
    return SwitchingSignal(tuple(switches), periods * period)


@dataclass(frozen=True)
class Event:
    t: float
    kind: str  # "switch" or "reset"
    detail: str = ""


@dataclass(frozen=True)
class ResetRule:
    """Firing threshold ``v_th`` and the jump ``(v, h) <- (v_R, h_R[mode])``."""

    v_th: float
    v_R: float
    h_R: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if not self.v_R < self.v_th:
            raise ValueError(f"reset potential v_R={self.v_R} must lie below v_th={self.v_th}")

    def h_reset(self, mode_id) -> float:
        try:
            return float(self.h_R[mode_id])
        except KeyError:
            raise UnknownModeId(f"reset rule has no h_R entry for mode {mode_id!r}") from None


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Samples ``(t, x, mode, V)`` plus the switch/reset event log."""

    t: np.ndarray
    x: np.ndarray
    mode: tuple
    V: np.ndarray
    events: tuple = ()

    def __len__(self):
        return len(self.t)

    @property
    def resets(self) -> list[Event]:
        return [e for e in self.events if e.kind == "reset"]

    @property
    def switches(self) -> list[Event]:
        return [e for e in self.events if e.kind == "switch"]

    def to_csv(self, fh=None) -> str | None:
        """Write ``t,x1,x2,mode,V`` rows then ``#event,`` comment lines.

        Returns the text when ``fh`` is None.
        """
        buf = io.StringIO() if fh is None else fh
        n = self.x.shape[1]
        buf.write(",".join(["t"] + [f"x{j + 1}" for j in range(n)] + ["mode", "V"]) + "\n")
        for i in range(len(self.t)):
            row = [_fmt(self.t[i])] + [_fmt(v) for v in self.x[i]]
            row += ["" if self.mode[i] is None else str(self.mode[i]), _fmt(self.V[i])]
            buf.write(",".join(row) + "\n")
        for e in self.events:
            buf.write(f"#event,{_fmt(e.t)},{e.kind},{e.detail}\n")
        if fh is None:
            return buf.getvalue()
        return None

    @classmethod
    def from_csv(cls, fh) -> "Trajectory":
        """Parse the format written by :meth:`to_csv`; raises ``ValueError`` on malformed input."""
        if isinstance(fh, str):
            fh = io.StringIO(fh)
        header = None
        rows, events = [], []
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if line.startswith("#event,"):
                    parts = line.split(",", 3)
                    if len(parts) < 3:
                        raise ValueError(f"line {lineno}: malformed event line")
                    try:
                        t_ev = float(parts[1])
                    except ValueError:
                        raise ValueError(f"line {lineno}: bad event time {parts[1]!r}") from None
                    events.append(Event(t_ev, parts[2], parts[3] if len(parts) > 3 else ""))
                continue
            cells = line.split(",")
            if header is None:
                if cells[0] != "t" or cells[-2:] != ["mode", "V"] or len(cells) < 4:
                    raise ValueError(f"line {lineno}: expected header t,x1,...,mode,V, got {line!r}")
                header = cells
                continue
            if len(cells) != len(header):
                raise ValueError(f"line {lineno}: expected {len(header)} fields, got {len(cells)}")
            try:
                nums = [float(c) for c in cells[:-2]] + [float(cells[-1])]
            except ValueError as exc:
                raise ValueError(f"line {lineno}: {exc}") from None
            rows.append((nums, cells[-2] or None))
        if header is None:
            raise ValueError("missing header line")
        if not rows:
            raise ValueError("trajectory has no samples")
        data = np.array([r[0] for r in rows], dtype=float)
        t = data[:, 0]
        if np.any(np.diff(t) < 0):
            raise ValueError("sample times are not nondecreasing")
        return cls(t, data[:, 1:-1], tuple(r[1] for r in rows), data[:, -1], tuple(events))


def _fmt(v) -> str:
    return format(float(v), ".17g")


# --------------------------------------------------------------------------
# exact flows
# --------------------------------------------------------------------------


def _entries(m):
    if isinstance(m, PlanarAffineMode):
        return m.a, m.b, m.c, m.d
    A = np.asarray(m, dtype=float)
    return A[0, 0], A[0, 1], A[1, 0], A[1, 1]


def matrix_exp_2x2(m, t):
    """``exp(A t)`` for a mode or 2x2 array, by the sign of ``(a - d)^2 + 4bc``.

    ``t`` may be a scalar (result ``(2, 2)``) or an array (result ``t.shape + (2, 2)``).
    """
    a, b, c, d = _entries(m)
    t = np.asarray(t, dtype=float)
    mu = 0.5 * (a + d)
    disc = (a - d) ** 2 + 4.0 * b * c
    # A = mu I + M with M^2 = (disc / 4) I
    with np.errstate(over="ignore", invalid="ignore"):
        if abs(disc) < REPEATED_TOL:
            em = np.exp(mu * t)
            f0, f1 = em, em * t
        elif disc > 0:
            q = 0.5 * math.sqrt(disc)
            qt = q * t
            small = np.abs(qt) < 1.0
            em = np.exp(mu * t)
            f0_small = em * np.cosh(qt)
            f1_small = em * np.sinh(qt) / q
            ep = np.exp((mu + q) * t)
            en = np.exp((mu - q) * t)
            f0 = np.where(small, f0_small, 0.5 * (ep + en))
            f1 = np.where(small, f1_small, (ep - en) / (2.0 * q))
        else:
            w = 0.5 * math.sqrt(-disc)
            em = np.exp(mu * t)
            f0 = em * np.cos(w * t)
            f1 = em * np.sin(w * t) / w
    out = np.empty(t.shape + (2, 2))
    out[..., 0, 0] = f0 + f1 * (a - mu)
    out[..., 0, 1] = f1 * b
    out[..., 1, 0] = f1 * c
    out[..., 1, 1] = f0 + f1 * (d - mu)
    return out


def affine_flow(m: PlanarAffineMode, x0, t):
    """State reached from ``x0`` after time ``t`` (scalar or array) in mode ``m``."""
    xu = np.asarray(equilibrium(m))
    dx = np.asarray(x0, dtype=float) - xu
    E = matrix_exp_2x2(m, t)
    out = xu + E @ dx
    # zero elapsed time returns x0 itself, so switch and reset rows match bit for bit
    out[np.asarray(t) == 0] = x0
    return out


def detect_crossing(m: PlanarAffineMode, x0, t_lo: float, t_hi: float, v_th: float):
    """First elapsed time in ``(t_lo, t_hi]`` at which ``v`` reaches ``v_th``, or None.

    The flow starts from ``x0`` at elapsed time zero; ``v`` is the first coordinate.
    A grid scan plus golden-section refinement of local maxima catches crossings
    that peak between grid points; the crossing itself is bisected to ``1e-10``.
    """
    if not t_hi > t_lo:
        return None

    def v_at(s):
        return affine_flow(m, x0, s)[..., 0]

    grid = np.linspace(t_lo, t_hi, CROSSING_GRID + 1)
    v = v_at(grid)
    hit = np.flatnonzero(v[1:] >= v_th)
    first = int(hit[0]) + 1 if hit.size else None
    bracket = None
    stop = first if first is not None else len(grid) - 1
    for i in range(1, stop):
        if v[i] >= v[i - 1] and v[i] >= v[i + 1]:
            s_max, v_max = golden_max(lambda s: float(v_at(s)), grid[i - 1], grid[i + 1], 1e-12)
            if v_max >= v_th:
                bracket = (grid[i - 1], s_max)
                break
    if bracket is None:
        if first is None:
            return None
        bracket = (grid[first - 1], grid[first])
    lo, hi = bracket
    while hi - lo > CROSSING_TOL:
        mid = 0.5 * (lo + hi)
        if v_at(mid) >= v_th:
            hi = mid
        else:
            lo = mid
    return float(hi)


# --------------------------------------------------------------------------
# switched simulation
# --------------------------------------------------------------------------


def _lookup(table, mid):
    try:
        return table[mid]
    except KeyError:
        raise UnknownModeId(f"signal references unknown mode {mid!r}") from None


def default_dt(signal: SwitchingSignal) -> float:
    gap = signal.min_gap()
    return gap / 1000.0 if gap > 0 else 1.0


def simulate(modes, signal: SwitchingSignal, x0, dt: float | None = None,
             reset: ResetRule | None = None) -> Trajectory:
    """Sample the switched trajectory from ``x0`` under ``signal``.

    Each piece is sampled on a uniform grid no coarser than ``dt`` that includes
    both ends, so every switch instant appears twice: last row of the old mode,
    first row of the new one. A reset adds the pre- and post-jump rows at the
    crossing time and continues in the same mode.
    """
    table = mode_table(modes)
    for seg_mode in {mid for _, mid in signal.switches}:
        validate_mode(_lookup(table, seg_mode))
    if dt is None:
        dt = default_dt(signal)
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    lyap = {mid: lyapunov(table[mid]) for _, mid in signal.switches}

    x = np.asarray(x0, dtype=float).copy()
    if reset is not None and x[0] >= reset.v_th:
        raise ValueError(f"initial v={x[0]} is not below the threshold {reset.v_th}")

    ts, xs, ms = [], [], []
    events = []
    prev = None
    for t_start, t_end, mid in signal.segments():
        m = table[mid]
        events.append(Event(t_start, "switch", f"{'' if prev is None else prev}->{mid}"))
        anchor_t, anchor_x = t_start, x
        while True:
            span = t_end - anchor_t
            t_hit = None
            if reset is not None and span > 0:
                t_hit = detect_crossing(m, anchor_x, 0.0, span, reset.v_th)
            stop = span if t_hit is None else t_hit
            n = max(1, math.ceil(stop / dt - 1e-9)) if stop > 0 else 0
            offs = np.linspace(0.0, stop, n + 1)
            pts = affine_flow(m, anchor_x, offs)
            ts.append(anchor_t + offs)
            xs.append(pts)
            ms.extend([mid] * len(offs))
            if t_hit is None:
                x = pts[-1]
                break
            t_abs = anchor_t + t_hit
            post = np.array([reset.v_R, reset.h_reset(mid)])
            events.append(Event(t_abs, "reset", f"{mid}:v={_fmt(pts[-1][0])}"))
            anchor_t, anchor_x = t_abs, post
        prev = mid

    t_all = np.concatenate(ts)
    x_all = np.concatenate(xs, axis=0)
    V_all = np.empty(len(t_all))
    mode_arr = np.array(ms, dtype=object)
    for mid, V in lyap.items():
        sel = mode_arr == mid
        V_all[sel] = V(x_all[sel])
    return Trajectory(t_all, x_all, tuple(ms), V_all, tuple(events))


# --------------------------------------------------------------------------
# trapping verification
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SwitchCheck:
    t: float
    mode: Hashable
    V: float
    k: float
    ok: bool


@dataclass(frozen=True)
class TubeCheck:
    t_start: float
    t_end: float
    mode: Hashable
    V_max: float
    k_i: float
    ok: bool


@dataclass(frozen=True)
class TrapReport:
    switch_checks: tuple
    tube_checks: tuple

    @property
    def overall(self) -> bool:
        return all(c.ok for c in self.switch_checks) and all(c.ok for c in self.tube_checks)

    @property
    def switch_failures(self) -> list[SwitchCheck]:
        return [c for c in self.switch_checks if not c.ok]

    def to_dict(self) -> dict:
        def sc(c):
            return {"t": c.t, "mode": c.mode, "V": c.V, "k": c.k, "pass": c.ok}

        def tc(c):
            return {"t_start": c.t_start, "t_end": c.t_end, "mode": c.mode,
                    "V_max": c.V_max, "k_i": c.k_i, "pass": c.ok}

        return {
            "overall": self.overall,
            "switch_failures": len(self.switch_failures),
            "tube_failures": sum(not c.ok for c in self.tube_checks),
            "switch_checks": [sc(c) for c in self.switch_checks],
            "tube_checks": [tc(c) for c in self.tube_checks],
        }


def split_segments(traj: Trajectory) -> list[tuple[Hashable, int, int]]:
    """``(mode, first_row, last_row)`` for each maximal run of rows sharing a mode."""
    out = []
    start = 0
    for i in range(1, len(traj.mode) + 1):
        if i == len(traj.mode) or traj.mode[i] != traj.mode[start]:
            out.append((traj.mode[start], start, i - 1))
            start = i
    return out


def verify_trapping(traj: Trajectory, modes, k: float, initial_mode=None,
                    tol: float = TRAP_TOL) -> TrapReport:
    """Check the switched trajectory against the level-``k`` trapping tube.

    ``initial_mode`` names the mode whose level-``k`` set holds the initial
    state (default: the first mode of the trajectory). For each piece with mode
    ``u_i`` entered from ``u_{i-1}``, the maximum of ``V_{u_i}`` over the piece
    must stay below the enclosing level ``k_i`` and ``V_{u_i}`` at the piece's end
    must be back below ``k``. The end of the record counts as a switch instant.
    """
    if traj.resets:
        raise ValueError("trapping verification needs a trajectory without resets")
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    table = mode_table(modes)
    segs = split_segments(traj)
    prev = segs[0][0] if initial_mode is None else initial_mode
    lyap = {}

    def V_of(mid):
        if mid not in lyap:
            lyap[mid] = lyapunov(_lookup(table, mid))
        return lyap[mid]

    v0 = float(V_of(prev)(traj.x[0]))
    switch_checks = [SwitchCheck(float(traj.t[0]), prev, v0, k, v0 <= k + tol)]
    tube_checks = []
    for mid, i0, i1 in segs:
        V = V_of(mid)
        m = table[mid]
        k_i = enclosing_level(V_of(prev), V, k)
        vals = V(traj.x[i0:i1 + 1])
        vals = np.atleast_1d(vals)
        j = int(np.argmax(vals))
        v_max = float(vals[j])
        if i1 > i0:
            lo = traj.t[i0 + max(j - 1, 0)]
            hi = traj.t[i0 + min(j + 1, i1 - i0)]
            t0, x_start = traj.t[i0], traj.x[i0]
            if hi > lo:
                _, refined = golden_max(
                    lambda s: float(V(affine_flow(m, x_start, s - t0))), lo, hi, 1e-12
                )
                v_max = max(v_max, refined)
        tube_checks.append(
            TubeCheck(float(traj.t[i0]), float(traj.t[i1]), mid, v_max, k_i, v_max <= k_i + tol)
        )
        v_end = float(vals[-1])
        switch_checks.append(SwitchCheck(float(traj.t[i1]), mid, v_end, k, v_end <= k + tol))
        prev = mid
    return TrapReport(tuple(switch_checks), tuple(tube_checks))


def write_atomic(path, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary sibling file."""
    path = os.fspath(path)
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)
