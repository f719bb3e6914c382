"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest -v tests/test_acceptance.py``; the verdict lines are printed
even when pytest captures output.
"""

import math
import time

import numpy as np
import pytest

from dwellcert import (
    NeuronParams,
    PlanarAffineMode,
    SwitchingSignal,
    affine_flow,
    certify,
    dwell_time,
    enclosing_level,
    enclosing_level_general,
    enclosing_level_shared,
    lyapunov,
    neuron_modes,
    simulate,
    square_wave_signal,
    verify_trapping,
)
from dwellcert.neuron import OFF
from dwellcert.nonlinear import affine_as_nonlinear, nl_dwell_time, nl_enclosing_level
from dwellcert.oracle import (
    boundary_max,
    fd_decay_check,
    random_mode,
    random_mode_pair,
    repeated_eigenvalue_mode,
    rk4_affine,
)
from dwellcert.planar_affine import ellipse_points, lyapunov_residual

from conftest import SET1, SET2

SEED = 20240611


@pytest.fixture
def verdict(capsys):
    def _report(n, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {n:2d}] {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail

    return _report


def _best_of(fn, repeat=20):
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return out, best


def test_criterion_01_set1_dwell(verdict):
    p = NeuronParams(**SET1)
    cert, secs = _best_of(lambda: certify(p, 0.2))
    ok = abs(cert.tau_d - 3.836) <= 1e-3 and secs < 1e-3
    verdict(1, ok, f"tau_d={cert.tau_d:.6f} (3.836 +/- 0.001), runtime {secs * 1e3:.3f} ms (< 1 ms)")


def test_criterion_02_set1_threshold_bound(verdict):
    cert = certify(NeuronParams(**SET1), 0.2)
    ok = abs(cert.v_bound - 2.561) <= 5e-3
    verdict(2, ok, f"v_bound={cert.v_bound:.6f} (2.561 +/- 0.005)")


def test_criterion_03_set2_dwell(verdict):
    cert = certify(NeuronParams(**SET2), 0.2)
    ok = abs(cert.tau_d - 35.621) <= 1e-3
    verdict(3, ok, f"tau_d={cert.tau_d:.6f} (35.621 +/- 0.001)")


def test_criterion_04_set1_trapping(verdict):
    p = NeuronParams(**SET1, T_I=3.84, T_0=3.84)
    modes = neuron_modes(p)
    simulate(modes, square_wave_signal(p, 1), (0.0, 0.0))  # warm-up outside the timed run
    t0 = time.perf_counter()
    traj = simulate(modes, square_wave_signal(p, 20), (0.0, 0.0))
    rep = verify_trapping(traj, modes, 0.2, initial_mode=OFF, tol=1e-6)
    secs = time.perf_counter() - t0
    v_max = float(traj.x[:, 0].max())
    ok = rep.overall and v_max <= 2.561 + 1e-6 and secs < 1.0
    verdict(4, ok, f"trapping={rep.overall} over {len(rep.switch_checks)} switch checks, "
                   f"max v={v_max:.6f} (<= 2.561), runtime {secs:.3f} s (< 1 s)")


def test_criterion_05_set2_sharpness(verdict):
    results = {}
    for T in (32.0, 35.7):
        p = NeuronParams(**SET2, T_I=T, T_0=T)
        modes = neuron_modes(p)
        traj = simulate(modes, square_wave_signal(p, 40), (0.0, 0.0))
        results[T] = verify_trapping(traj, modes, 0.2, initial_mode=OFF, tol=1e-6)
    bad = results[32.0].switch_failures
    ok = len(bad) >= 1 and results[35.7].overall
    worst = max((c.V for c in bad), default=float("nan"))
    verdict(5, ok, f"T=32: {len(bad)} switch states with V > 0.2 (worst V={worst:.4f}); "
                   f"T=35.7: trapping={results[35.7].overall}")


def test_criterion_06_oracle_equivalence(verdict):
    rng = np.random.default_rng(SEED)
    t0 = time.perf_counter()
    worst_rel = worst_gen = 0.0
    for _ in range(1000):
        m0, m1 = random_mode_pair(rng)
        V0, V1 = lyapunov(m0), lyapunov(m1)
        k = 10.0 * (1.0 - rng.uniform())  # (0, 10]
        shared = enclosing_level_shared(V0, V1, k)
        worst_rel = max(worst_rel, abs(shared - boundary_max(V0, k, V1, 4096)) / shared)
        worst_gen = max(worst_gen, abs(enclosing_level_general(V0, V1, k) - shared) / shared)
    secs = time.perf_counter() - t0
    ok = worst_rel <= 1e-5 and worst_gen <= 1e-9 and secs < 10.0
    verdict(6, ok, f"seed {SEED}: worst oracle gap {worst_rel:.2e} (<= 1e-5), "
                   f"general vs shared {worst_gen:.2e} (<= 1e-9), runtime {secs:.2f} s (< 10 s)")


def test_criterion_07_lyapunov_contract(verdict):
    rng = np.random.default_rng(SEED + 7)
    worst_res = worst_ratio = worst_witness = 0.0
    worst_ratio = -math.inf
    for i in range(1000):
        m = random_mode(rng)
        worst_res = max(worst_res, float(np.abs(lyapunov_residual(m)).max()))
        dc = fd_decay_check(m, 1000, seed=i)
        worst_ratio = max(worst_ratio, dc.worst)
        worst_witness = max(worst_witness, dc.witness)
    ok = worst_res <= 1e-12 and worst_ratio <= 1e-9 and worst_witness <= 1e-6
    verdict(7, ok, f"seed {SEED + 7}: residual {worst_res:.2e} (<= 1e-12), "
                   f"max decay ratio + eps {worst_ratio:.2e} (<= 1e-9), witness {worst_witness:.2e} (<= 1e-6)")


def test_criterion_08_exact_flow(verdict):
    rng = np.random.default_rng(SEED + 8)
    modes = [random_mode(rng) for _ in range(95)] + [repeated_eigenvalue_mode(rng) for _ in range(5)]
    worst = 0.0
    for m in modes:
        x0 = rng.uniform(-3.0, 3.0, size=2)
        times, ref = rk4_affine(m.A, np.asarray(m.B), x0, 1e-5, 10.0, stride=1000)
        worst = max(worst, float(np.abs(affine_flow(m, x0, times) - ref).max()))
    ok = worst <= 1e-8
    verdict(8, ok, f"seed {SEED + 8}: 100 modes (5 repeated-eigenvalue), max |exact - RK4| = {worst:.2e} (<= 1e-8)")


def _inside_level(rng, V, k):
    phi = rng.uniform(0.0, 2.0 * np.pi)
    edge = ellipse_points(V, k, np.array([phi]))[0]
    c = np.asarray(V.center)
    return c + math.sqrt(rng.uniform()) * (edge - c)


def test_criterion_09_trapping_soundness(verdict):
    rng = np.random.default_rng(SEED + 9)
    failures = 0
    for _ in range(200):
        m0, m1 = random_mode_pair(rng)
        modes = {"0": m0, "1": m1}
        V = {mid: lyapunov(m) for mid, m in modes.items()}
        k = float(rng.uniform(0.05, 5.0))
        tau = {}
        for a, b in (("0", "1"), ("1", "0")):
            tau[b] = dwell_time(V[b].eps, k, enclosing_level(V[a], V[b], k))
        current = str(rng.integers(2))
        t, switches = 0.0, [(0.0, current)]
        for _ in range(50):
            t += max(tau[current], 1e-3) * rng.uniform(1.0, 1.5)
            current = "1" if current == "0" else "0"
            switches.append((t, current))
        horizon = t + max(tau[current], 1e-3) * rng.uniform(1.0, 1.5)
        x0 = _inside_level(rng, V[switches[0][1]], k)
        traj = simulate(modes, SwitchingSignal(tuple(switches), horizon), x0, dt=None)
        # the first dwell is unconstrained; x0 lies in the level-k set of its own mode
        if not verify_trapping(traj, modes, k, initial_mode=switches[0][1], tol=1e-6).overall:
            failures += 1
    verdict(9, failures == 0, f"seed {SEED + 9}: {200 - failures}/200 dwell-compliant runs of 50 switches trapped")


def _isotropic_mode(rng, id):
    a, d = -rng.uniform(0.05, 5.0, size=2)
    b = rng.uniform(0.05, 5.0) * rng.choice([-1.0, 1.0])
    B = rng.uniform(-3.0, 3.0, size=2)
    return PlanarAffineMode(float(a), float(b), float(-b), float(d), (B[0], B[1]), id)


def test_criterion_10_ring_conservativeness(verdict):
    rng = np.random.default_rng(SEED + 10)
    bad_order = bad_equality = 0
    n_iso = 0
    for i in range(1000):
        if i % 5 == 0:
            m0 = _isotropic_mode(rng, "0")
            m1 = PlanarAffineMode(m0.a, m0.b, m0.c, m0.d, tuple(rng.uniform(-3.0, 3.0, size=2)), "1")
        else:
            m0, m1 = random_mode_pair(rng)
        iso = abs(m0.b) == abs(m0.c)
        n_iso += iso
        V0, V1 = lyapunov(m0), lyapunov(m1)
        k = float(rng.uniform(0.05, 10.0))
        tau = dwell_time(V1.eps, k, enclosing_level(V0, V1, k))
        s0, s1 = affine_as_nonlinear(m0), affine_as_nonlinear(m1)
        nl_tau = nl_dwell_time(s1, k, nl_enclosing_level(s0, s1, k))
        bad_order += nl_tau < tau - 1e-9
        bad_equality += (abs(nl_tau - tau) <= 1e-9) != iso
    ok = bad_order == 0 and bad_equality == 0
    verdict(10, ok, f"seed {SEED + 10}: 1000 embeddings ({n_iso} isotropic), "
                    f"{bad_order} with ring bound below ellipse bound, {bad_equality} equality mismatches")
