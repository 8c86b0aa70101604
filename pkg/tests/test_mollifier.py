import logging
import math

import numpy as np
import pytest

import impl.lipan.exc
import impl.lipan.mollifier
import impl.lipan.space_net

log = logging.getLogger(__name__)


@pytest.fixture(scope='module')
def spec():
    return impl.lipan.mollifier.BumpSpec(0.0375, 81.0)


@pytest.fixture(scope='module')
def fam(spec):
    return impl.lipan.mollifier.MollifierFamily(spec, 0.45, 6, mc_samples=20000, seed=3)


class TestBump:
    def test_1000(self):
        """Quintic smoothstep end points and peak slope 15/8."""
        assert impl.lipan.mollifier.smoothstep(0.0) == 0.0
        assert impl.lipan.mollifier.smoothstep(1.0) == 1.0
        assert impl.lipan.mollifier.smoothstep(0.5) == pytest.approx(0.5)
        assert impl.lipan.mollifier.smoothstep_deriv(0.5) == pytest.approx(15.0 / 8.0)
        assert impl.lipan.mollifier.smoothstep_deriv(0.0) == 0.0

    def test_1010(self, spec):
        """b is 1 outside (2 g1, M + 2), 0 on [3 g1, M + 1], and in between on the
        transitions.
        """
        t = np.array([0.0, 0.05, 0.075, 0.09375, 0.1125, 1.0, 82.0, 82.5, 83.0, 100.0])
        assert spec(t) == pytest.approx([1, 1, 1, 0.5, 0, 0, 0, 0.5, 1, 1])
        assert spec(-1.0) == 1.0
        assert spec.L_b == pytest.approx(50.0)

    def test_1020(self, spec):
        """level_interval by bisection agrees with the closed form layer endpoints."""
        for u in (0.1, 0.37, 0.5, 0.9):
            s = 1.0 - float(impl.lipan.mollifier.smoothstep(u))
            lo, hi = spec.level_interval(s)
            lo_c, hi_c = spec.layer_endpoints(u)
            assert lo == pytest.approx(float(lo_c), abs=1e-9)
            assert hi == pytest.approx(float(hi_c), abs=1e-9)
        assert spec.level_interval(-0.1) is None
        assert spec.level_interval(0.0) == (spec.lower_hi, spec.upper_lo)
        assert spec.level_interval(1.0) == (-np.inf, np.inf)

    def test_1030(self, spec):
        """b_n = 1 - max_j b(y_j)."""
        bn = impl.lipan.mollifier.bump_bn(spec, np.array([[0.5, 0.5], [0.5, 0.0]]))
        assert bn.tolist() == [1.0, 0.0]
        assert impl.lipan.mollifier.bump_b(spec, 0.5) == 0.0

    def test_1040(self):
        """Overlapping transitions are rejected."""
        with pytest.raises(impl.lipan.exc.ConfigError):
            impl.lipan.mollifier.BumpSpec(1.0, 1.0)
        with pytest.raises(impl.lipan.exc.ConfigError):
            impl.lipan.mollifier.BumpSpec(0.0, 1.0)


class TestSchedule:
    def test_1000(self, fam):
        """kappa_n is nondecreasing and meets the factorial bound and the tail target
        at every n.
        """
        assert np.all(np.diff(fam.log_kappa) >= 0.0)
        for n in range(1, fam.N + 1):
            assert fam.factorial_margin(n) >= -1e-9
            assert fam.tail(n) <= impl.lipan.mollifier.TAIL_TARGET
        d = fam.as_dict()
        assert d['kappa_monotone']
        assert len(d['log_kappa']) == fam.N
        assert fam.log_vol(3) == pytest.approx(impl.lipan.mollifier.log_vol(fam.spec, 3))
        assert fam.factorial_margin(3) == pytest.approx(
            -fam.log_T(3) - 2.0 * math.lgamma(4) + fam.log_vol(3)
        )

    def test_1010(self, fam):
        """The schedule is read-only."""
        with pytest.raises(ValueError):
            fam.log_kappa[0] = 0.0

    def test_1020(self, spec):
        """Invalid family options raise ConfigError."""
        for kwargs in ({'backend': 'simpson'}, {'mc_samples': 1}, {'seed': -1}):
            with pytest.raises(impl.lipan.exc.ConfigError):
                impl.lipan.mollifier.MollifierFamily(spec, 0.45, 2, **kwargs)


class TestNu:
    def test_1000(self, fam):
        """nu of the empty vector is 1; coordinates deep inside the flat part of b
        give exactly 1, far outside the support exactly 0.
        """
        assert fam.nu([]).value == 1.0
        assert fam.nu([5.0, 40.0]).value == 1.0
        assert fam.nu([5.0, 1e4]).value == 0.0

    def test_1010(self, fam):
        """Values on the transition lie strictly between 0 and 1, and the two
        backends agree.
        """
        y = np.array([0.09, 5.0, 0.08])
        lc = fam.nu(y, 'layercake')
        assert 0.0 < lc.value < 1.0
        assert lc.active_count >= 1
        check = fam.cross_check(y)
        assert check.deviation <= check.tolerance

    def test_1020(self, fam):
        """The Monte Carlo stream depends on (seed, n, point_index) only."""
        y = np.array([0.09, 0.085])
        a = fam.nu(y, 'mc', point_index=4)
        fam.nu(np.array([0.08]), 'mc', point_index=9)
        b = fam.nu(y, 'mc', point_index=4)
        c = fam.nu(y, 'mc', point_index=5)
        assert a.value == b.value
        assert a.value != c.value
        assert a.error > 0.0

    def test_1030(self, fam):
        """nu beyond the schedule raises."""
        with pytest.raises(ValueError):
            fam.nu(np.full(fam.N + 1, 5.0))


class TestPhi:
    def test_1000(self, flat_ap):
        """The sweep matches phi_n evaluated one n at a time, with phi_0 = 1."""
        ap = flat_ap
        for x in (np.array([0.05]), np.array([-0.5]), np.array([0.9])):
            y = ap.net.q_values(ap.q, x)
            sweep = ap.fam.phi_sweep(y)
            assert sweep.phi[0] == 1.0
            assert np.all((sweep.phi >= 0.0) & (sweep.phi <= 1.0))
            for n in range(ap.N + 1):
                single = ap.fam.phi(ap.q, ap.net, x, n)
                assert sweep.phi[n] == pytest.approx(single.value, abs=1e-6)

    def test_1010(self, linear_ap):
        """Emergence: phi_(j0 - 1) > 1/2 at the first j0 with q(x - x_j0) < gamma2."""
        ap = linear_ap
        for i, x in enumerate(ap.dom.sample(40, 2)):
            y = ap.net.q_values(ap.q, x)
            j0 = impl.lipan.space_net.first_cover_index(y, ap.net.gammas.g2)
            sweep = ap.fam.phi_sweep(y, point_index=i)
            assert sweep.phi[j0 - 1] > 0.5

    def test_1020(self, linear_ap):
        """Localization: beyond n0, phi_n stays below eta on the localization radius."""
        ap = linear_ap
        eta = 0.01
        rng = np.random.default_rng(1)
        for x in ap.dom.sample(10, 3):
            loc = ap.fam.localization(ap.q, ap.net, x, eta)
            assert loc.j0 >= 1
            if loc.n0 is None:
                continue
            for z in rng.uniform(-0.99, 0.99, 3) * loc.radius:
                x_z = x + z
                if not ap.dom.contains(x_z)[0]:
                    continue
                sweep = ap.fam.phi_sweep(ap.net.q_values(ap.q, x_z))
                assert sweep.phi[loc.n0 :].max() < eta

    def test_1030(self, flat_ap):
        """Localization needs a covered point and eta in (0, 1)."""
        ap = flat_ap
        with pytest.raises(ValueError):
            ap.fam.localization(ap.q, ap.net, np.array([0.1]), 1.5)
        with pytest.raises(IndexError):
            ap.fam.phi(ap.q, ap.net, np.array([0.1]), ap.N + 1)
