import math

import numpy as np
import pytest

from dwellcert import (
    InvalidLevels,
    PlanarAffineMode,
    SwitchingSignal,
    affine_flow,
    certify,
    dwell_time,
    enclosing_level_shared,
    lyapunov,
    neuron_modes,
)
from dwellcert.errors import DecayViolated, NonFiniteState, SandwichViolated
from dwellcert.nonlinear import (
    ComparisonPair,
    NonlinearSubsystem,
    affine_as_nonlinear,
    integrate,
    nl_dwell_time,
    nl_enclosing_level,
    simulate_switched,
)
from dwellcert.oracle import inclusion_check, random_mode
from dwellcert.planar_affine import SublevelSet


def ball(center, eps=2.0, dim=2):
    c = np.asarray(center, dtype=float)
    return NonlinearSubsystem(
        field=lambda x: -(np.asarray(x) - c),
        equilibrium=c,
        V=lambda x: float(np.sum((np.asarray(x) - c) ** 2)),
        comparison=ComparisonPair(lambda r: r * r, lambda r: r * r),
        eps=eps,
    )


class TestComparisonPair:
    def test_numeric_inverse(self):
        pair = ComparisonPair(lambda r: r ** 3 + r, lambda r: 2 * r ** 3 + 2 * r)
        for r in (0.0, 0.3, 1.0, 7.5):
            assert pair.inv_alpha(r ** 3 + r) == pytest.approx(r, abs=1e-9)
        pair.check()

    def test_large_level_expands_bracket(self):
        pair = ComparisonPair(lambda r: r * r, lambda r: r * r)
        assert pair.inv_alpha(1e12) == pytest.approx(1e6, rel=1e-12)

    def test_sandwich_violated(self):
        with pytest.raises(SandwichViolated):
            ComparisonPair(lambda r: 2 * r * r, lambda r: r * r).check()

    def test_bad_inverse(self):
        with pytest.raises(SandwichViolated, match="alpha_inv"):
            ComparisonPair(lambda r: r * r, lambda r: r * r, alpha_inv=lambda k: k).check()


class TestEnclosingLevel:
    def test_unit_shift(self):
        assert nl_enclosing_level(ball((0, 0)), ball((1, 0)), 1.0) == pytest.approx(4.0, rel=1e-12)

    def test_no_shift(self):
        assert nl_enclosing_level(ball((0.3, 0.3)), ball((0.3, 0.3)), 0.7) == pytest.approx(0.7, rel=1e-12)

    def test_negative_level(self):
        with pytest.raises(InvalidLevels):
            nl_enclosing_level(ball((0, 0)), ball((1, 0)), -1.0)

    def test_dwell(self):
        assert nl_dwell_time(ball((1, 0)), 1.0, 4.0) == pytest.approx(math.log(4) / 2, abs=1e-6)
        assert nl_dwell_time(ball((1, 0)), 1.0, 1.0) == 0.0

    def test_neuron_more_conservative(self, set1):
        off, on = neuron_modes(set1)
        s_off, s_on = affine_as_nonlinear(off), affine_as_nonlinear(on)
        cert = certify(set1, 0.2)
        k_ring = nl_enclosing_level(s_off, s_on, 0.2)
        assert k_ring >= cert.k_bar
        assert nl_dwell_time(s_on, 0.2, k_ring) >= 3.836

    def test_ring_contains_new_level_set(self, rng):
        for _ in range(50):
            m0 = random_mode(rng)
            m1 = random_mode(rng, A=m0.A)
            s0, s1 = affine_as_nonlinear(m0), affine_as_nonlinear(m1)
            k = float(rng.uniform(0.01, 5.0))
            k_ring = nl_enclosing_level(s0, s1, k)
            ok, _ = inclusion_check(SublevelSet(lyapunov(m0), k), SublevelSet(lyapunov(m1), k_ring), 1000)
            assert ok


class TestEmbedding:
    def test_set1_bounds(self, set1):
        s = affine_as_nonlinear(neuron_modes(set1)[1])
        assert s.comparison.alpha(2.0) == pytest.approx(0.15 * 4)
        assert s.comparison.beta(2.0) == pytest.approx(4.0)
        assert s.eps == pytest.approx(0.7)

    def test_isotropic_matches_shared(self):
        m0 = PlanarAffineMode(-1.0, 2.0, -2.0, -3.0, (0.0, 0.0))
        m1 = PlanarAffineMode(-1.0, 2.0, -2.0, -3.0, (1.5, -0.5))
        s0, s1 = affine_as_nonlinear(m0), affine_as_nonlinear(m1)
        shared = enclosing_level_shared(lyapunov(m0), lyapunov(m1), 0.4)
        assert nl_enclosing_level(s0, s1, 0.4) == pytest.approx(shared, rel=1e-12)

    def test_validates(self, rng):
        for _ in range(20):
            s = affine_as_nonlinear(random_mode(rng))
            c = s.equilibrium
            s.validate(c - 5, c + 5, n=1000, seed=1)

    def test_finite_difference_gradient(self, set1):
        s = affine_as_nonlinear(neuron_modes(set1)[1])
        bare = NonlinearSubsystem(s.field, s.equilibrium, s.V, s.comparison, s.eps)
        x = np.array([0.3, -1.2])
        assert bare.gradient(x) == pytest.approx(s.gradient(x), rel=1e-7)


class TestValidateFailures:
    def test_decay_too_fast_claimed(self):
        s = ball((0, 0), eps=3.0)
        with pytest.raises(DecayViolated, match="x="):
            s.validate(-1, 1)

    def test_bounds_wrong(self):
        s = NonlinearSubsystem(
            field=lambda x: -np.asarray(x),
            equilibrium=(0.0, 0.0),
            V=lambda x: float(np.sum(np.asarray(x) ** 2)),
            comparison=ComparisonPair(lambda r: 2 * r * r, lambda r: 3 * r * r),
            eps=1.0,
        )
        with pytest.raises(SandwichViolated, match="x="):
            s.validate(-1, 1)

    def test_nonpositive_rate(self):
        with pytest.raises(ValueError):
            ball((0, 0), eps=0.0)


class TestIntegrate:
    def test_scalar_decay(self):
        traj = integrate(ball((0, 0)), (1.0, 0.0), 1.0, 1e-3)
        assert traj.t[-1] == 1.0
        assert traj.x[-1] == pytest.approx([math.exp(-1), 0.0], abs=1e-9)

    def test_against_exact_flow(self, set1):
        on = neuron_modes(set1)[1]
        traj = integrate(affine_as_nonlinear(on), (0.0, 0.0), 5.0, 1e-4)
        exact = affine_flow(on, (0.0, 0.0), traj.t)
        assert np.abs(traj.x - exact).max() <= 1e-8

    def test_equilibrium_constant(self, set1):
        s = affine_as_nonlinear(neuron_modes(set1)[1])
        traj = integrate(s, s.equilibrium, 3.0, 1e-2)
        assert np.abs(traj.x - s.equilibrium).max() <= 1e-14

    def test_short_last_step(self):
        traj = integrate(ball((0, 0)), (1.0, 0.0), 0.25, 0.1)
        assert traj.t.tolist() == pytest.approx([0.0, 0.1, 0.2, 0.25])

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_blow_up(self):
        s = NonlinearSubsystem(lambda x: np.asarray(x) ** 2, (0.0,), lambda x: float(x[0] ** 2),
                               ComparisonPair(lambda r: r * r, lambda r: r * r), 1.0)
        with pytest.raises(NonFiniteState):
            integrate(s, (10.0,), 1.0, 0.01)

    def test_three_dimensional(self):
        traj = integrate(ball((0, 0, 0), dim=3), (1.0, 2.0, -1.0), 1.0, 1e-3)
        assert traj.x[-1] == pytest.approx(np.array([1.0, 2.0, -1.0]) * math.exp(-1), abs=1e-9)

    def test_bad_step(self):
        with pytest.raises(ValueError):
            integrate(ball((0, 0)), (1, 0), 1.0, 0.0)


def test_switched_dwell_compliant_stays_in_levels():
    s0, s1 = ball((0.0, 0.0)), ball((1.0, 0.0))
    k = 1.0
    k_i = nl_enclosing_level(s0, s1, k)
    tau = nl_dwell_time(s1, k, k_i) * 1.05
    sig = SwitchingSignal(((0.0, "a"), (tau, "b"), (2 * tau, "a"), (3 * tau, "b")), 4 * tau)
    traj = simulate_switched({"a": s0, "b": s1}, sig, (0.5, 0.5), 1e-3)
    systems = {"a": s0, "b": s1}
    for ev in traj.switches[1:]:
        i = int(np.flatnonzero(traj.t == ev.t)[0])
        assert traj.V[i] <= k + 1e-9
    assert traj.V.max() <= k_i + 1e-9
    assert len(traj.switches) == 4 and set(traj.mode) == set(systems)


def test_dwell_matches_planar_for_isotropic():
    m0 = PlanarAffineMode(-1.0, 2.0, -2.0, -3.0, (0.0, 0.0))
    m1 = PlanarAffineMode(-1.0, 2.0, -2.0, -3.0, (0.5, 0.5))
    V1 = lyapunov(m1)
    k_i = enclosing_level_shared(lyapunov(m0), V1, 0.3)
    s1 = affine_as_nonlinear(m1)
    nl = nl_dwell_time(s1, 0.3, nl_enclosing_level(affine_as_nonlinear(m0), s1, 0.3))
    assert nl == pytest.approx(dwell_time(V1.eps, 0.3, k_i), abs=1e-9)
