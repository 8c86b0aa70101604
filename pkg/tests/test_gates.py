import logging

import numpy as np
import pytest

import impl.lipan.exc
import impl.lipan.gates
import tests.util.sample

log = logging.getLogger(__name__)

FLAT_GAMMAS = (0.0375, 0.45, 0.9)


@pytest.fixture(scope='module')
def gate_set():
    return impl.lipan.gates.build_gate_set(FLAT_GAMMAS, 81.0, 0.249)


def _step_spec(**kwargs):
    """A unit step over a gap of 1e-4: beyond reach of any low degree polynomial."""
    return impl.lipan.gates.GateSpec(
        'step', [(0.0, 0.5, '>=', 1.0), (0.5001, 1.0, '<=', 0.0)], 0.0, 1.0, **kwargs
    )


class TestGateSpec:
    def test_1000(self):
        """The three gate specs split into left flat, right flat and global parts."""
        left, right, global_list = impl.lipan.gates.zeta2_spec().split()
        assert left.as_list() == [0.0, 0.25, '>=', 2.0]
        assert str(left) == "g(t) >= 2.0 on [0.0, 0.25]"
        assert right.as_list() == [0.5, impl.lipan.gates.ZETA2_HI, '<', 0.25]
        assert [c.threshold for c in global_list] == [0.125]
        left, right, global_list = impl.lipan.gates.h_spec(0.2, 3.0).split()
        assert right.threshold == pytest.approx(0.05)
        assert len(global_list) == 2

    def test_1010(self):
        """Specs that no gate can meet raise GateUnsatisfiableError."""
        with pytest.raises(impl.lipan.exc.GateUnsatisfiableError):
            impl.lipan.gates.GateSpec('empty', [], 1.0, 1.0)
        with pytest.raises(impl.lipan.exc.GateUnsatisfiableError):
            impl.lipan.gates.GateSpec('outside', [(0.0, 2.0, '<', 1.0)], 0.0, 1.0)
        with pytest.raises(impl.lipan.exc.GateUnsatisfiableError):
            impl.lipan.gates.fit_sigmoid(
                impl.lipan.gates.GateSpec(
                    'band',
                    [(0.0, 0.2, '>=', 1.0), (0.5, 1.0, '<', 0.1), (0.0, 1.0, '<', 0.5)],
                    0.0,
                    1.0,
                )
            )
        with pytest.raises(impl.lipan.exc.GateUnsatisfiableError):
            impl.lipan.gates.GateSpec(
                'nogap', [(0.0, 0.6, '>=', 1.0), (0.5, 1.0, '<', 0.1)], 0.0, 1.0
            ).split()
        with pytest.raises(impl.lipan.exc.GateUnsatisfiableError):
            impl.lipan.gates.h_spec(0.2, 0.5)

    def test_1020(self):
        """Invalid options raise ConfigError."""
        with pytest.raises(impl.lipan.exc.ConfigError):
            impl.lipan.gates.zeta2_spec(mode='spline')
        with pytest.raises(impl.lipan.exc.ConfigError):
            impl.lipan.gates.zeta2_spec(sharpness=0.5)
        with pytest.raises(impl.lipan.exc.ConfigError):
            impl.lipan.gates.h_spec(0.4, 3.0)
        with pytest.raises(impl.lipan.exc.ConfigError):
            impl.lipan.gates.GateSpec('op', [(0.0, 1.0, '!=', 0.0)], 0.0, 1.0)

    def test_1030(self):
        """Spec serialization is stable."""
        tests.util.sample.assert_match(
            impl.lipan.gates.zeta1_spec(0.45, 0.9, 81.0).as_dict(), 'zeta1_spec'
        )


class TestSigmoid:
    def test_1000(self):
        """zeta2 certifies with positive margins on every constraint."""
        gate = impl.lipan.gates.fit_gate(impl.lipan.gates.zeta2_spec())
        report = gate.report
        assert report.ok
        assert report.failure is None
        assert len(report.margin_list) == 3
        assert all(m.margin > 0.0 for m in report.margin_list)
        assert gate(0.0) >= 2.0
        assert gate(0.25) >= 2.0
        assert gate(0.5) < 0.25
        assert gate(impl.lipan.gates.ZETA2_HI) >= 0.125
        assert gate.sup >= gate(0.0)

    def test_1010(self):
        """The derivative bound is exact at the center and decays away from it."""
        g = impl.lipan.gates.SigmoidGate(0.0, 2.0, 0.5, 10.0)
        assert g.lipschitz == pytest.approx(10.0)
        b = g.derivative_bound(np.array([0.4, 0.7]), np.array([0.6, 0.8]))
        assert b[0] == pytest.approx(10.0)
        assert b[1] == pytest.approx(10.0 / np.cosh(2.0) ** 2)
        t = np.linspace(0.7, 0.8, 101)
        slope = np.abs(np.diff(g(t)) / np.diff(t))
        assert slope.max() <= b[1] * (1.0 + 1e-6)

    def test_1020(self):
        """Negative control: zeta2 against a left threshold above its plateau fails,
        and require_certified raises with the failing constraint.
        """
        gate = impl.lipan.gates.fit_gate(impl.lipan.gates.zeta2_spec())
        broken = gate.spec.with_constraint(0, (0.0, 0.25, '>=', 3.0))
        report = impl.lipan.gates.certify_gate(gate.gate, broken)
        assert not report.ok
        assert report.failure.reason == 'violated'
        assert report.failure.margin < 0.0
        assert report.failure.constraint.threshold == 3.0
        with pytest.raises(impl.lipan.exc.GateCertificationError) as e:
            impl.lipan.gates.require_certified(report)
        assert e.value.gate_name == 'zeta2'
        assert impl.lipan.gates.report_as_dict(report)['failure']['reason'] == 'violated'

    def test_1030(self):
        """A very sharp zeta1 (tiny gammas) still certifies."""
        gate = impl.lipan.gates.fit_gate(impl.lipan.gates.zeta1_spec(5e-8, 1e-7, 81.0))
        assert gate.report.ok
        assert gate(5e-8) < 0.25
        assert gate(1e-7) >= 1.0
        assert gate.lipschitz > 1e6


class TestPolynomial:
    def test_1000(self):
        """Polynomial mode finds a certified Chebyshev gate for zeta2."""
        gate = impl.lipan.gates.fit_gate(
            impl.lipan.gates.zeta2_spec(mode='polynomial', sharpness=1.0)
        )
        assert gate.gate.kind == 'polynomial'
        assert gate.report.ok
        assert gate.gate.degree <= impl.lipan.gates.DEFAULT_MAX_DEGREE
        t = np.linspace(0.0, impl.lipan.gates.ZETA2_HI, 2001)
        assert np.all(gate(t) >= 0.125)
        d = gate.as_dict()
        assert d['gate']['kind'] == 'polynomial'
        assert d['certificate']['ok']

    def test_1010(self):
        """A step too sharp for the degree budget raises DegreeBudgetError, while the
        sigmoid mode still certifies it.
        """
        with pytest.raises(impl.lipan.exc.DegreeBudgetError):
            impl.lipan.gates.fit_gate(_step_spec(mode='polynomial', max_degree=16))
        assert impl.lipan.gates.fit_gate(_step_spec()).report.ok


class TestGateSet:
    def test_1000(self, gate_set):
        """T = sup|zeta1| + sup|zeta2| and the Lipschitz constants are at least 1."""
        gs = gate_set
        assert gs.T == pytest.approx(gs.zeta1.sup + gs.zeta2.sup)
        assert gs.L2 >= 1.0
        assert gs.L_h >= 1.0
        assert gs.psi_constant(2.0, 3.0) == pytest.approx(
            gs.L_zeta1 * 2.0 + gs.L2 * 3.0 * 2.0
        )
        assert gs.u_constant(2.0, 3.0) == pytest.approx(gs.L_h * gs.psi_constant(2.0, 3.0))

    def test_1010(self, gate_set):
        """h maps [0, 1/2] above 4/5 and [3/4, T] below eps / 4, inside (0, 1]."""
        gs = gate_set
        assert np.all(gs.u_of(np.linspace(0.0, 0.5, 101)) >= 0.8)
        u = gs.u_of(np.linspace(0.75, gs.T, 101))
        assert np.all(u < 0.249 / 4.0)
        assert np.all(u > 0.0)

    def test_1020(self, gate_set):
        """Arguments outside a certified domain raise GateDomainError."""
        with pytest.raises(impl.lipan.exc.GateDomainError):
            gate_set.f(np.array([-0.1]))
        with pytest.raises(impl.lipan.exc.GateDomainError):
            gate_set.f(np.array([81.0 * 1.02]))
        with pytest.raises(impl.lipan.exc.GateDomainError):
            gate_set.g(np.array([1.1]))
        with pytest.raises(impl.lipan.exc.GateDomainError):
            gate_set.u_of(gate_set.T + 1.0)

    def test_1030(self, flat_ap):
        """u_vector agrees with the per index psi_j and u_j."""
        ap = flat_ap
        x = np.array([0.2])
        uv = impl.lipan.gates.u_vector(ap.gates, ap.q, ap.net, ap.fam, x)
        assert uv.u.shape == (ap.N,)
        for j in range(1, ap.N + 1):
            psi = impl.lipan.gates.psi_j(ap.gates, ap.q, ap.net, ap.fam, x, j)
            assert uv.psi[j - 1] == pytest.approx(psi, abs=1e-6)
            u = impl.lipan.gates.u_j(ap.gates, ap.q, ap.net, ap.fam, x, j)
            assert uv.u[j - 1] == pytest.approx(u, abs=1e-6 * ap.gates.L_h)
        with pytest.raises(IndexError):
            impl.lipan.gates.psi_j(ap.gates, ap.q, ap.net, ap.fam, x, 0)

    def test_1040(self, linear_ap):
        """psi_j and u_j clauses: psi >= 1 off the gamma3 cells, psi <= 1/2 at the
        first gamma2 cell, u in (0, 1] with max u >= 4/5.
        """
        ap = linear_ap
        g2, g3 = ap.net.gammas.g2, ap.net.gammas.g3
        for i, x in enumerate(ap.dom.sample(30, 8)):
            uv = impl.lipan.gates.u_vector(ap.gates, ap.q, ap.net, ap.fam, x, i)
            outside = uv.y >= g3
            assert np.all(uv.psi[outside] >= 1.0)
            assert np.all(uv.u[outside] < ap.eps / 4.0)
            j0 = int(np.flatnonzero(uv.y < g2)[0]) + 1
            assert uv.psi[j0 - 1] < 0.5
            assert uv.u[j0 - 1] >= 0.8
            assert np.all(uv.psi >= 0.25)
            assert np.all((uv.u > 0.0) & (uv.u <= 1.0))

    def test_1050(self, linear_ap):
        """Past j_min, psi_j > 1 and moves less than 1 / (10 L_h) on the stability
        radius.
        """
        ap = linear_ap
        gs = ap.gates
        rng = np.random.default_rng(5)
        for x in ap.dom.sample(8, 9):
            st = impl.lipan.gates.stability_radius(gs, ap.q, ap.net, ap.fam, x)
            assert st.radius > 0.0
            assert st.bound == pytest.approx(1.0 / (10.0 * gs.L_h))
            if st.j_min is None:
                continue
            uv = impl.lipan.gates.u_vector(gs, ap.q, ap.net, ap.fam, x)
            assert np.all(uv.psi[st.j_min - 1 :] > 1.0)
            for w in rng.uniform(-0.99, 0.99, 3) * st.radius:
                x_w = x + w
                if not ap.dom.contains(x_w)[0]:
                    continue
                uv_w = impl.lipan.gates.u_vector(gs, ap.q, ap.net, ap.fam, x_w)
                move = np.abs(uv_w.psi[st.j_min - 1 :] - uv.psi[st.j_min - 1 :])
                assert move.max() < st.bound
