import numpy as np
import pytest

from squidphase.core import (
    ContractViolation,
    KET_UP,
    KET_Y_MINUS,
    KET_Y_PLUS,
    Trajectory,
    evolve_schedule,
    field_hamiltonian,
)
from squidphase.phases import (
    ORIENTATION_SIGN,
    NonCyclicTrajectory,
    bloch_loop,
    dynamic_phase,
    geodesic_deviation,
    geometric_phase,
    phase_consistency,
    solid_angle,
    total_phase,
    wrap_angle,
)

E_CH, E_J0 = 50.0, 1.0


def loop_segments(delta):
    """The two-hold loop schedule: fields (2 E_J0, 0, +-E_ch delta), pi turns each."""
    b1 = np.array([2 * E_J0, 0.0, E_CH * delta])
    b2 = np.array([2 * E_J0, 0.0, -E_CH * delta])
    tau = np.pi / np.linalg.norm(b1)
    return [(field_hamiltonian(b1), tau), (field_hamiltonian(b2), tau)]


def loop_gamma(delta):
    return 2 * np.arctan(E_CH * delta / (2 * E_J0))


def meridian(phi, start_pole, n=400):
    """Half great circle at azimuth phi from start_pole to its antipode."""
    th = np.linspace(0, np.pi, n)
    if start_pole < 0:
        th = th[::-1]
    return np.stack([np.sin(th) * np.cos(phi), np.sin(th) * np.sin(phi),
                     np.cos(th)], axis=1)


def lune_loop(eta, n=400):
    """Boundary of the lune between azimuths 0 and 2*eta (dihedral angle 2*eta)."""
    down = meridian(0.0, +1, n)
    up = meridian(2 * eta, -1, n)
    return np.vstack([down[:-1], up])


def great_arc(p, q, n=200):
    p, q = np.asarray(p, float), np.asarray(q, float)
    axis = np.cross(p, q)
    axis /= np.linalg.norm(axis)
    ang = np.arccos(np.clip(p @ q, -1, 1))
    ts = np.linspace(0, ang, n)
    ortho = np.cross(axis, p)
    return np.array([p * np.cos(t) + ortho * np.sin(t) for t in ts])


class TestWrap:
    def test_values(self):
        assert wrap_angle(0.0) == 0.0
        assert wrap_angle(np.pi) == pytest.approx(np.pi)
        assert wrap_angle(-np.pi) == pytest.approx(np.pi)
        assert wrap_angle(3 * np.pi) == pytest.approx(np.pi)
        assert wrap_angle(-0.5) == pytest.approx(-0.5)
        assert wrap_angle(2 * np.pi + 0.25) == pytest.approx(0.25)


class TestDynamicPhase:
    def test_stationary_eigenstate(self):
        # |up> under H = -omega sz / 2 has energy -omega/2: dynamic = omega T / 2.
        omega, big_t = 1.7, 3.0
        traj = evolve_schedule([(field_hamiltonian([0, 0, omega]), big_t)], KET_UP, 101)
        assert dynamic_phase(traj) == pytest.approx(0.5 * omega * big_t, abs=1e-12)

    def test_perpendicular_precession_is_free(self):
        # |up> precessing about an x field stays perpendicular to it: <H> = 0.
        traj = evolve_schedule([(field_hamiltonian([2.0, 0, 0]), 1.0)], KET_UP, 501)
        assert abs(dynamic_phase(traj)) < 1e-10

    def test_loop_eigenstates_accumulate_none(self):
        segs = loop_segments(0.04)
        for ket in (KET_Y_PLUS, KET_Y_MINUS):
            for method in ("closed_form", "rk4"):
                traj = evolve_schedule(segs, ket, 1001, method)
                assert abs(dynamic_phase(traj)) < 1e-8

    def test_rejects_sparse_sampling(self):
        traj = evolve_schedule(loop_segments(0.04), KET_Y_PLUS, 2)
        with pytest.raises(ContractViolation, match="overlap"):
            dynamic_phase(traj)


class TestTotalPhase:
    def test_zero_hamiltonian(self):
        traj = evolve_schedule([(np.zeros((2, 2)), 2.0)], KET_UP, 11)
        assert total_phase(traj) == pytest.approx(0.0, abs=1e-14)

    def test_eigenstate_pure_dynamic_with_wrap(self):
        omega, big_t = 3.0, 4.0  # -E T = omega T / 2 = 6 rad: exercises the wrap
        traj = evolve_schedule([(field_hamiltonian([0, 0, omega]), big_t)], KET_UP, 51)
        assert total_phase(traj) == pytest.approx(wrap_angle(0.5 * omega * big_t), abs=1e-12)

    def test_loop_eigenstate_matches_propagator_oracle(self):
        delta = 0.04
        segs = loop_segments(delta)
        u = np.eye(2, dtype=complex)
        for h, tau in segs:
            w, v = np.linalg.eigh(h)
            u = (v @ np.diag(np.exp(-1j * w * tau)) @ v.conj().T) @ u
        oracle = np.angle(np.vdot(KET_Y_PLUS, u @ KET_Y_PLUS))
        traj = evolve_schedule(segs, KET_Y_PLUS, 1001)
        assert total_phase(traj) == pytest.approx(oracle, abs=1e-12)
        # The oracle itself sits at pi - gamma: the spinor sign of the closed
        # double turn shifts the naive loop phase by pi.
        assert oracle == pytest.approx(np.pi - loop_gamma(delta), abs=1e-12)

    def test_non_cyclic_raises_with_defect(self):
        traj = evolve_schedule([(field_hamiltonian([1.5, 0, 0]), 1.0)], KET_UP, 101)
        with pytest.raises(NonCyclicTrajectory) as err:
            total_phase(traj)
        assert 0 < err.value.defect <= 1


class TestGeometricPhase:
    def test_constant_eigenstate_loop_is_dynamic_only(self):
        omega, big_t = 3.0, 4.0
        traj = evolve_schedule([(field_hamiltonian([0, 0, omega]), big_t)], KET_UP, 101)
        report = geometric_phase(traj)
        assert abs(wrap_angle(report.geometric_phase_wrapped)) < 1e-8
        assert report.dynamic_phase == pytest.approx(6.0, abs=1e-10)

    def test_loop_eigenstates_antisymmetric_with_area_oracle(self):
        delta = 0.04
        gamma = loop_gamma(delta)
        segs = loop_segments(delta)
        for ket, sign in ((KET_Y_PLUS, +1.0), (KET_Y_MINUS, -1.0)):
            traj = evolve_schedule(segs, ket, 1001)
            report = geometric_phase(traj)
            # Independent oracle: half the signed loop area, orientation pinned.
            omega_loop = solid_angle(bloch_loop(traj))
            oracle = wrap_angle(-ORIENTATION_SIGN * omega_loop / 2.0)
            assert report.geometric_phase_wrapped == pytest.approx(oracle, abs=1e-8)
            assert report.geometric_phase_wrapped == pytest.approx(
                sign * (np.pi - gamma), abs=1e-8)

    def test_degenerate_bias_full_great_circle(self):
        # delta = 0: both holds share one axis, the loop is a full great circle
        # enclosing a hemisphere, and the spinor sign makes the phase pi.
        traj = evolve_schedule(loop_segments(0.0), KET_Y_PLUS, 1001)
        report = geometric_phase(traj)
        assert abs(report.dynamic_phase) < 1e-8
        assert abs(report.geometric_phase_wrapped) == pytest.approx(np.pi, abs=1e-8)
        omega_loop = solid_angle(bloch_loop(traj))
        assert abs(omega_loop) == pytest.approx(2 * np.pi, abs=1e-6)

    def test_wrap_consistency_invariant(self):
        rng = np.random.default_rng(31)
        for delta in (0.0, 0.02, 0.1):
            traj = evolve_schedule(loop_segments(delta), KET_Y_PLUS, 1001)
            r = geometric_phase(traj)
            lhs = wrap_angle(r.total_phase)
            rhs = wrap_angle(r.dynamic_phase + r.geometric_phase)
            assert abs(wrap_angle(lhs - rhs)) < 1e-6
        # also on a trajectory with heavy dynamic phase
        omega = rng.uniform(2, 5)
        traj = evolve_schedule([(field_hamiltonian([0, 0, omega]), 5.0)], KET_UP, 101)
        r = geometric_phase(traj)
        assert abs(wrap_angle(wrap_angle(r.total_phase)
                              - wrap_angle(r.dynamic_phase + r.geometric_phase))) < 1e-6

    def test_gauge_phase_on_states_leaves_geometric_unchanged(self):
        rng = np.random.default_rng(37)
        segs = loop_segments(0.05)
        traj = evolve_schedule(segs, KET_Y_PLUS, 801)
        base = geometric_phase(traj).geometric_phase_wrapped
        big_t = traj.duration
        for _ in range(5):
            coef = rng.uniform(-0.3, 0.3, size=3)
            phase_off = rng.uniform(0, 2 * np.pi, size=3)

            def phi(t):
                # full-period modes keep phi(0) = phi(T)
                return sum(c * np.sin(2 * (k + 1) * np.pi * t / big_t + o) - c * np.sin(o)
                           for k, (c, o) in enumerate(zip(coef, phase_off)))

            new_states = tuple(
                st * np.exp(1j * phi(ts))[:, None]
                for ts, st in zip(traj.segment_times, traj.segment_states)
            )
            gauged = Trajectory(traj.segment_times, new_states, traj.segment_hamiltonians)
            assert geometric_phase(gauged).geometric_phase_wrapped == pytest.approx(
                base, abs=1e-8)


class TestSolidAngle:
    def test_octant(self):
        ex, ey, ez = np.eye(3)
        loop = np.vstack([great_arc(ex, ey, 150)[:-1],
                          great_arc(ey, ez, 150)[:-1],
                          great_arc(ez, ex, 150)])
        assert solid_angle(loop) == pytest.approx(np.pi / 2, abs=1e-6)

    def test_full_equator_hemisphere(self):
        ts = np.linspace(0, 2 * np.pi, 1501)
        loop = np.stack([np.cos(ts), np.sin(ts), np.zeros_like(ts)], axis=1)
        assert solid_angle(loop) == pytest.approx(2 * np.pi, abs=1e-6)

    @pytest.mark.parametrize("eta", [0.15, np.pi / 8, 0.6])
    def test_lune_area_twice_dihedral(self, eta):
        assert abs(solid_angle(lune_loop(eta))) == pytest.approx(4 * eta, abs=1e-6)

    def test_reversal_antisymmetry(self):
        loop = lune_loop(0.35)
        assert solid_angle(loop[::-1]) == pytest.approx(-solid_angle(loop), abs=1e-12)

    def test_refinement_stability(self):
        coarse = solid_angle(lune_loop(0.4, n=600))
        fine = solid_angle(lune_loop(0.4, n=1200))
        assert abs(coarse - fine) < 1e-8
        traj_a = evolve_schedule(loop_segments(0.04), KET_Y_PLUS, 601)
        traj_b = evolve_schedule(loop_segments(0.04), KET_Y_PLUS, 1201)
        assert abs(solid_angle(bloch_loop(traj_a))
                   - solid_angle(bloch_loop(traj_b))) < 1e-8

    def test_rejects_antipodal_neighbors(self):
        loop = np.array([[0, 0, 1.0], [0, 0, -1.0], [1.0, 0, 0], [0, 1.0, 0], [0, 0, 1.0]])
        with pytest.raises(ContractViolation, match="ambiguous geodesic"):
            solid_angle(loop)

    def test_rejects_bad_loops(self):
        with pytest.raises(ContractViolation):
            solid_angle(np.array([[1, 0, 0], [0, 1, 0], [1, 0, 0]], dtype=float))
        open_path = great_arc([1, 0, 0], [0, 1, 0], 50)
        with pytest.raises(ContractViolation, match="not closed"):
            solid_angle(open_path)
        with pytest.raises(ContractViolation, match="unit sphere"):
            solid_angle(2.0 * lune_loop(0.3))


class TestGeodesicDeviation:
    def test_equator_points(self):
        ts = np.linspace(0, 2 * np.pi, 100)
        pts = np.stack([np.cos(ts), np.sin(ts), np.zeros_like(ts)], axis=1)
        assert geodesic_deviation(pts) < 1e-10

    def test_latitude_circle(self):
        # At 45 degrees the vertical and horizontal fit planes tie; dense
        # sampling keeps the sampled maximum at the analytic offset either way.
        lat = np.pi / 4
        ts = np.linspace(0, 2 * np.pi, 4001)
        pts = np.stack([np.cos(lat) * np.cos(ts), np.cos(lat) * np.sin(ts),
                        np.full_like(ts, np.sin(lat))], axis=1)
        assert geodesic_deviation(pts) == pytest.approx(np.sin(lat), abs=1e-6)

    def test_loop_holds_travel_on_great_circles(self):
        traj = evolve_schedule(loop_segments(0.04), KET_Y_PLUS, 501, "rk4")
        loop = bloch_loop(traj)
        half = len(loop) // 2
        assert geodesic_deviation(loop[: half + 1]) < 1e-6
        assert geodesic_deviation(loop[half:]) < 1e-6


class TestPhaseConsistency:
    def test_flip_point_loop(self):
        # eta = pi/4 tilt: both routes land at pi - gamma = pi/2.
        traj = evolve_schedule(loop_segments(0.04), KET_Y_PLUS, 1001)
        out = phase_consistency(traj)
        assert out["mismatch"] < 1e-6
        assert out["geo_from_phase"] == pytest.approx(np.pi / 2, abs=1e-8)
        assert abs(wrap_angle(out["geo_from_area"] - np.pi / 2)) < 1e-6

    def test_quarter_turn_tilt(self):
        # eta = pi/8: gamma = pi/4 and the loop phase is 3 pi / 4.
        delta = (2 * E_J0 / E_CH) * np.tan(np.pi / 8)
        traj = evolve_schedule(loop_segments(delta), KET_Y_PLUS, 1001)
        out = phase_consistency(traj)
        assert out["mismatch"] < 1e-6
        assert out["geo_from_phase"] == pytest.approx(np.pi - np.pi / 4, abs=1e-8)

    def test_orientation_sign_pinned_by_precession(self):
        # A perpendicular state driven through one full precession period:
        # total phase pi (spinor sign), zero dynamic phase, equatorial loop.
        omega = 2.0
        psi = np.array([1.0, 1.0]) / np.sqrt(2)
        traj = evolve_schedule([(field_hamiltonian([0, 0, omega]), 2 * np.pi / omega)],
                               psi, 1501)
        out = phase_consistency(traj)
        assert abs(out["geo_from_phase"]) == pytest.approx(np.pi, abs=1e-9)
        assert abs(out["solid_angle"]) == pytest.approx(2 * np.pi, abs=1e-6)
        assert out["mismatch"] < 1e-6
        assert ORIENTATION_SIGN == 1.0

    def test_degenerate_bias_consistent(self):
        traj = evolve_schedule(loop_segments(0.0), KET_Y_PLUS, 1001)
        out = phase_consistency(traj)
        assert out["mismatch"] < 1e-6
