import numpy as np
import pytest

from trispin.encoding import effective_h1, logical_basis, two_lq_basis
from trispin.gates import (
    PulseSchedule,
    Segment,
    axis120_gate,
    constant_segment,
    cphase_gate,
    decompose_su2,
    empty_schedule,
    gate_report,
    propagate,
    propagation_error_estimate,
    rx_gate,
    rz_gate,
    single_lq_report,
    synthesize_axis120,
    synthesize_cphase,
    synthesize_rx,
    synthesize_rz,
    two_lq_report,
    zxz_angles,
)
from trispin.hamiltonian import build_hamiltonian, single_lq_graph, two_lq_graph
from trispin.linalg import expm_minus_i_h_t, max_abs


def random_su2(rng) -> np.ndarray:
    q = rng.normal(size=4)
    w, x, y, z = q / np.linalg.norm(q)
    return np.array([[w - 1j * z, -y - 1j * x],
                     [y - 1j * x, w + 1j * z]])


def phase_aligned_distance(a: np.ndarray, b: np.ndarray) -> float:
    tr = np.trace(b.conj().T @ a)
    phase = tr / abs(tr)
    return max_abs(a - phase * b)


class TestPropagate:
    def test_idle_schedule_phases_logical_states(self):
        t = 2.3
        idle = single_lq_graph(h=0.75)
        sched = PulseSchedule((constant_segment(t, idle),), 3, idle=idle)
        u = propagate(sched, 50)
        h = build_hamiltonian(idle)
        assert max_abs(u @ h - h @ u) <= 1e-10
        basis = logical_basis((0, 1, 2), 3)
        amp = np.vdot(basis.zero_l, u @ basis.zero_l)
        assert abs(amp - np.exp(1j * 9 / 8 * t)) < 1e-12

    @pytest.mark.parametrize("n_steps", [1, 7])
    def test_constant_segment_equals_expm(self, n_steps):
        g = single_lq_graph(j23=1.3, h=0.75)
        sched = PulseSchedule((constant_segment(0.9, g),), 3, idle=single_lq_graph(h=0.75))
        u = propagate(sched, n_steps)
        assert max_abs(u - expm_minus_i_h_t(build_hamiltonian(g), 0.9)) <= 1e-10

    def test_degenerate_ramp_equals_idle_hold(self):
        # Ramping every coupling from idle to idle is no modulation at all.
        idle = two_lq_graph(h=0.75)
        ramp = PulseSchedule((Segment(1.5, idle, idle, "linear"),), 6, idle=idle)
        hold = PulseSchedule((constant_segment(1.5, idle),), 6, idle=idle)
        assert max_abs(propagate(ramp, 40) - propagate(hold, 1)) <= 1e-12

    def test_empty_schedule_is_identity(self):
        assert np.array_equal(propagate(empty_schedule(3)), np.eye(8))

    def test_midpoint_second_order_convergence(self):
        idle = two_lq_graph(h=0.75)
        peak = idle.with_couplings({(0, 3): 0.5})
        sched = PulseSchedule((Segment(3.0, idle, peak, "linear"),
                               Segment(3.0, peak, idle, "linear")), 6, idle=idle)
        e1 = propagation_error_estimate(sched, 20)
        e2 = propagation_error_estimate(sched, 40)
        assert 2.0 < e1 / e2 < 8.0  # ratio ~4 within a factor of 2


class TestScheduleValidation:
    def test_rejects_nonpositive_duration(self):
        g = single_lq_graph()
        with pytest.raises(ValueError):
            Segment(0.0, g, g, "constant")

    def test_rejects_constant_with_moving_endpoints(self):
        with pytest.raises(ValueError):
            Segment(1.0, single_lq_graph(), single_lq_graph(j23=1.2), "constant")

    def test_rejects_discontinuous_ramp_junction(self):
        idle = two_lq_graph()
        peak = idle.with_couplings({(0, 3): 0.5})
        other = idle.with_couplings({(0, 3): 0.3})
        with pytest.raises(ValueError, match="join continuously"):
            PulseSchedule((Segment(1.0, idle, peak, "linear"),
                           Segment(1.0, other, idle, "linear")), 6, idle=idle)

    def test_rejects_ramp_not_anchored_at_idle(self):
        idle = two_lq_graph()
        peak = idle.with_couplings({(0, 3): 0.5})
        with pytest.raises(ValueError, match="start from idle"):
            PulseSchedule((Segment(1.0, peak, idle, "linear"),), 6, idle=idle)

    def test_rejects_non_idle_reference(self):
        g = single_lq_graph(j23=1.2)
        with pytest.raises(ValueError, match="idle couplings"):
            PulseSchedule((constant_segment(1.0, g),), 3, idle=g)


class TestRz:
    def test_quarter_turn(self):
        sched = synthesize_rz(np.pi / 2, 0.5)
        assert sched.total_duration == pytest.approx(np.pi)
        rep = single_lq_report(sched, rz_gate(np.pi / 2))
        assert rep.fidelity >= 1 - 1e-10
        assert rep.max_leakage <= 1e-12

    def test_zero_angle_is_empty(self):
        assert synthesize_rz(0.0, 0.5).segments == ()

    def test_inverse_composition(self):
        fwd = synthesize_rz(np.pi / 2, 0.5)
        bwd = synthesize_rz(-np.pi / 2, -0.5)
        assert bwd.total_duration == pytest.approx(fwd.total_duration)
        u = propagate(fwd.then(bwd), 10)
        basis = logical_basis((0, 1, 2), 3).columns
        m = basis.conj().T @ u @ basis
        assert phase_aligned_distance(m, np.eye(2)) <= 1e-10

    def test_window_violation(self):
        with pytest.raises(ValueError, match="window"):
            synthesize_rz(np.pi / 2, 0.8)


class TestAxis120:
    def test_generator_eigenvectors(self):
        # The split eigenstates of the J12 excursion generator, from the exact
        # logical projection: (sqrt(3)/2)|0> + (1/2)|1> and (1/2)|0> - (sqrt(3)/2)|1>.
        eff = effective_h1(1.3, 1.0, 1.0)
        vals, vecs = np.linalg.eigh(eff.matrix)
        expected_low = np.array([0.5, -np.sqrt(3) / 2])
        expected_high = np.array([np.sqrt(3) / 2, 0.5])
        assert min(max_abs(vecs[:, 0] - expected_low), max_abs(vecs[:, 0] + expected_low)) < 1e-12
        assert min(max_abs(vecs[:, 1] - expected_high), max_abs(vecs[:, 1] + expected_high)) < 1e-12

    def test_full_turn_is_identity(self):
        rep = single_lq_report(synthesize_axis120(2 * np.pi, 0.5), np.eye(2))
        assert rep.fidelity >= 1 - 1e-10
        assert rep.max_leakage <= 1e-12

    def test_j13_is_sigma_z_conjugate_of_j12(self):
        theta = 0.8
        u12 = single_lq_report(synthesize_axis120(theta, 0.4, "j12"),
                               axis120_gate(theta, "j12")).logical_unitary
        u13 = single_lq_report(synthesize_axis120(theta, 0.4, "j13"),
                               axis120_gate(theta, "j13")).logical_unitary
        sz = np.diag([1.0, -1.0])
        assert phase_aligned_distance(u13, sz @ u12 @ sz) <= 1e-10

    def test_target_match(self):
        rep = single_lq_report(synthesize_axis120(np.pi / 2, 0.5), axis120_gate(np.pi / 2))
        assert rep.fidelity >= 1 - 1e-10


class TestRx:
    def test_generator_is_purely_off_diagonal(self):
        d = 0.2
        eff = effective_h1(1 + 2 * d, 1.0, 1 + d)
        assert abs(eff.matrix[0, 0]) == 0.0
        assert abs(eff.matrix[0, 1] - np.sqrt(3) * d / 2) < 1e-15

    def test_pi_flip(self):
        sched = synthesize_rx(np.pi, 0.25)
        u = propagate(sched, 10)
        basis = logical_basis((0, 1, 2), 3)
        # |0_L> maps to -i |1_L> up to the idle global phase
        amp = np.vdot(basis.one_l, u @ basis.zero_l)
        assert abs(abs(amp) - 1) < 1e-10
        rep = single_lq_report(sched, rx_gate(np.pi))
        assert rep.fidelity >= 1 - 1e-10
        assert rep.max_leakage <= 1e-12

    def test_zero_angle(self):
        assert synthesize_rx(0.0, 0.25).segments == ()

    def test_window_violation(self):
        with pytest.raises(ValueError, match="window"):
            synthesize_rx(1.0, 0.4)  # J12 excursion 2*delta = 0.8


class TestDecomposeSu2:
    def test_z_rotation_is_single_segment(self):
        sched = decompose_su2(rz_gate(0.7))
        assert len(sched.segments) == 1

    def test_identity_is_empty(self):
        assert decompose_su2(np.eye(2)).segments == ()

    def test_hadamard_like_target(self):
        axis = np.array([1.0, 0.0, 1.0]) / np.sqrt(2)
        gen = axis[0] * np.array([[0, 1], [1, 0]]) + axis[2] * np.diag([1, -1])
        target = np.cos(np.pi / 2) * np.eye(2) - 1j * np.sin(np.pi / 2) * gen
        sched = decompose_su2(target)
        assert len(sched.segments) == 3
        rep = single_lq_report(sched, target)
        assert rep.fidelity >= 1 - 1e-9

    def test_zxz_angles_round_trip(self):
        rng = np.random.default_rng(47)
        for _ in range(25):
            u = random_su2(rng)
            a, b, g = zxz_angles(u)
            rebuilt = rz_gate(a) @ rx_gate(b) @ rz_gate(g)
            assert phase_aligned_distance(rebuilt, u) < 1e-10

    def test_random_targets(self):
        rng = np.random.default_rng(53)
        for _ in range(5):
            target = random_su2(rng)
            rep = single_lq_report(decompose_su2(target), target)
            assert rep.fidelity >= 1 - 1e-8
            assert rep.max_leakage <= 1e-10


class TestCphase:
    def test_zero_phase_is_empty(self):
        assert synthesize_cphase(0.0, 0.5, 10.0).segments == ()

    def test_pulse_structure(self):
        sched = synthesize_cphase(np.pi, 0.5, 5.0, n_calibration_steps=60)
        kinds = [s.ramp for s in sched.segments]
        assert kinds in (["smooth", "constant", "smooth"], ["smooth", "smooth"])
        peak = sched.segments[0].end
        assert peak.coupling(0, 3) == 0.5
        assert peak.coupling(1, 2) == peak.coupling(4, 5)

    def test_linear_shape_available(self):
        sched = synthesize_cphase(np.pi, 0.5, 5.0, n_calibration_steps=60,
                                  ramp_shape="linear")
        assert sched.segments[0].ramp == "linear"
        rep = two_lq_report(sched, cphase_gate(np.pi), n_steps_per_segment=600)
        assert rep.fidelity >= 0.999

    def test_gate_quality_and_phase(self):
        sched = synthesize_cphase(np.pi, 0.5, 15.0, n_calibration_steps=120)
        rep = two_lq_report(sched, cphase_gate(np.pi), n_steps_per_segment=1500)
        assert rep.fidelity >= 0.999
        assert rep.max_leakage < 1e-3
        assert abs(abs(rep.conditional_phase) - np.pi) < 0.01

    def test_sequential_mode_matches(self):
        sched = synthesize_cphase(np.pi, 0.5, 10.0, n_calibration_steps=80,
                                  mode="sequential")
        assert sched.segments[-1].ramp == "constant"
        rep = two_lq_report(sched, cphase_gate(np.pi), n_steps_per_segment=1000)
        assert rep.fidelity >= 0.998

    def test_quench_leaks_more_than_ramp(self):
        slow = synthesize_cphase(np.pi, 0.5, 10.0, n_calibration_steps=80)
        quench = synthesize_cphase(np.pi, 0.5, 1e-3, n_calibration_steps=20)
        rep_slow = two_lq_report(slow, cphase_gate(np.pi), n_steps_per_segment=1000)
        rep_quench = two_lq_report(quench, cphase_gate(np.pi), n_steps_per_segment=50)
        assert rep_quench.max_leakage > rep_slow.max_leakage

    def test_window_violation(self):
        with pytest.raises(ValueError, match="gapped window"):
            synthesize_cphase(np.pi, 0.9, 10.0)
        with pytest.raises(ValueError, match="gapped window"):
            synthesize_cphase(np.pi, 0.0, 10.0)

    def test_unreachable_phase(self):
        with pytest.raises(ValueError, match="unreachable"):
            synthesize_cphase(np.pi, 0.05, 1.0, n_calibration_steps=20,
                              max_duration=30.0)


class TestGateReport:
    def test_identity(self):
        basis = logical_basis((0, 1, 2), 3)
        rep = gate_report(np.eye(8), np.eye(2), basis)
        assert rep.fidelity == pytest.approx(1.0, abs=1e-12)
        assert rep.max_leakage <= 1e-15
        assert rep.conditional_phase is None

    def test_rz_schedule_is_leakage_free(self):
        rep = single_lq_report(synthesize_rz(np.pi / 2, 0.5), rz_gate(np.pi / 2))
        assert rep.max_leakage <= 1e-12

    def test_conditional_phase_of_diagonal_gate(self):
        basis = two_lq_basis()
        u = np.eye(64, dtype=complex)
        phases = {0: 0.3, 1: -0.2, 2: 0.5, 3: 1.9}
        proj = basis @ basis.conj().T
        u = u - proj
        for k, ph in phases.items():
            col = basis[:, k]
            u = u + np.exp(1j * ph) * np.outer(col, col.conj())
        rep = gate_report(u, cphase_gate(0.9), basis)
        expected = phases[0] + phases[3] - phases[1] - phases[2]
        assert rep.conditional_phase == pytest.approx(expected, abs=1e-12)

    def test_short_time_generator_matches_closed_form(self):
        # i log(M)/t of the logical block of a t = 1e-3 hold recovers the
        # effective generator up to an identity part
        rng = np.random.default_rng(59)
        t = 1e-3
        for _ in range(5):
            j12, j13, j23 = rng.uniform(0.25, 1.75, 3)
            graph = single_lq_graph(j12, j13, j23, h=0.75)
            sched = PulseSchedule((constant_segment(t, graph),), 3,
                                  idle=single_lq_graph(h=0.75))
            basis = logical_basis((0, 1, 2), 3).columns
            m = basis.conj().T @ propagate(sched, 1) @ basis
            vals, vecs = np.linalg.eig(m)
            gen = 1j * (vecs @ np.diag(np.log(vals)) @ np.linalg.inv(vecs)) / t
            gen = gen - np.trace(gen) / 2 * np.eye(2)
            expected = effective_h1(j12, j13, j23).matrix
            assert max_abs(gen - expected) < 1e-6

    def test_schedule_composition_is_product_of_blocks(self):
        a = synthesize_rz(0.9, 0.5)
        b = synthesize_rx(0.7, 0.25)
        basis = logical_basis((0, 1, 2), 3).columns
        ua = propagate(a, 10)
        ub = propagate(b, 10)
        uc = propagate(a.then(b), 10)
        ma = basis.conj().T @ ua @ basis
        mb = basis.conj().T @ ub @ basis
        mc = basis.conj().T @ uc @ basis
        assert max_abs(mc - mb @ ma) <= 1e-8
