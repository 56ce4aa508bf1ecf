"""Loop phases on the sphere, slow-sweep corrections, field momentum."""

import math

import numpy as np
import pytest

from phaselab import berry, qcore
from phaselab.errors import RegimeError, ResolutionError

LATITUDES = (math.pi / 6.0, math.pi / 3.0, math.pi / 2.0, 2.0 * math.pi / 3.0)


class TestLatitudeDirections:
    def test_shape_and_cone_angle(self):
        d = berry.latitude_directions(math.pi / 3.0, 64)
        assert d.shape == (64, 3)
        assert np.allclose(np.linalg.norm(d, axis=1), 1.0)
        assert np.allclose(d[:, 2], 0.5)

    def test_rejects_degenerate_sampling(self):
        with pytest.raises(ValueError):
            berry.latitude_directions(math.pi / 3.0, 2)


class TestWilsonLoop:
    def test_latitude_law(self):
        # half the enclosed solid angle, 2 pi (1 - cos theta)
        for theta in LATITUDES:
            loop = berry.latitude_directions(theta, 400)
            phase = berry.wilson_loop_phase(loop)
            target = math.pi * (1.0 - math.cos(theta))
            assert qcore.circle_distance(phase, target) < 2.5e-5

    def test_equator_is_pi(self):
        loop = berry.latitude_directions(math.pi / 2.0, 800)
        assert qcore.circle_distance(berry.wilson_loop_phase(loop),
                                     math.pi) < 1e-3

    def test_excited_band_opposite_sign(self):
        loop = berry.latitude_directions(math.pi / 3.0, 400)
        g = berry.wilson_loop_phase(loop, band="ground")
        e = berry.wilson_loop_phase(loop, band="excited")
        assert qcore.circle_distance(g, -e) < 1e-10

    def test_scale_blind(self):
        loop = berry.latitude_directions(math.pi / 3.0, 400)
        assert abs(berry.wilson_loop_phase(loop)
                   - berry.wilson_loop_phase(5.0 * loop)) < 1e-12

    def test_orientation_reversal_flips_sign(self):
        loop = berry.latitude_directions(math.pi / 3.0, 400)
        fwd = berry.wilson_loop_phase(loop)
        rev = berry.wilson_loop_phase(loop[::-1])
        assert qcore.circle_distance(fwd, -rev) < 1e-10

    def test_bargmann_identity_with_solid_angle(self):
        # the discrete loop phase equals half the geodesic-polygon solid
        # angle exactly, not only in the refinement limit
        for theta in LATITUDES:
            loop = berry.latitude_directions(theta, 24)
            phase = berry.wilson_loop_phase(loop)
            omega = berry.solid_angle(loop)
            assert qcore.circle_distance(phase, 0.5 * omega) < 1e-12

    def test_coarse_loop_rejected(self):
        # antipodal-ish neighbours make the band overlap collapse
        coarse = np.array([[0.0, 0.0, 1.0], [0.0, 0.05, -1.0],
                           [0.05, 0.0, 1.0]])
        with pytest.raises(ResolutionError):
            berry.wilson_loop_phase(coarse)

    def test_band_name_validated(self):
        loop = berry.latitude_directions(math.pi / 3.0, 64)
        with pytest.raises(ValueError):
            berry.wilson_loop_phase(loop, band="middle")


class TestSolidAngle:
    def test_latitude_caps(self):
        for theta in LATITUDES:
            loop = berry.latitude_directions(theta, 400)
            target = 2.0 * math.pi * (1.0 - math.cos(theta))
            assert abs(berry.solid_angle(loop) - target) < 5e-5

    def test_octant(self):
        octant = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0],
                           [0.0, 0.0, 1.0]])
        assert berry.solid_angle(octant) == pytest.approx(math.pi / 2.0,
                                                          abs=1e-12)

    def test_tiny_cap_no_cancellation(self):
        loop = berry.latitude_directions(1e-4, 400)
        target = 2.0 * math.pi * (1.0 - math.cos(1e-4))
        assert abs(berry.solid_angle(loop) - target) / target < 1e-4

    def test_retraced_path_encloses_nothing(self):
        seg = np.array([[math.sin(0.3 + 0.01 * k), 0.0,
                         math.cos(0.3 + 0.01 * k)] for k in range(20)])
        retraced = np.vstack([seg, seg[-2:0:-1]])
        assert abs(berry.solid_angle(retraced)) < 1e-12

    def test_anchor_cascade_near_north_pole(self):
        # a loop running over the default anchor forces re-anchoring
        loop = berry.latitude_directions(0.02, 600)
        target = 2.0 * math.pi * (1.0 - math.cos(0.02))
        assert abs(berry.solid_angle(loop) - target) / target < 1e-4

    def test_orientation_sign(self):
        loop = berry.latitude_directions(math.pi / 3.0, 256)
        assert berry.solid_angle(loop) > 0.0
        assert berry.solid_angle(loop[::-1]) == pytest.approx(
            -berry.solid_angle(loop), abs=1e-12)


class TestCyclicDecomposition:
    def test_equatorial_geometric_phase(self, equatorial_decomposition):
        dec = equatorial_decomposition
        dev = qcore.circle_distance(dec.geometric, math.pi)
        assert dev < 0.05
        # the leading slow-sweep deviation (3/4) pi w/A, not a numerics bug
        assert dev == pytest.approx(0.75 * math.pi * 0.005, rel=0.02)
        assert dec.overlap_modulus > 0.999

    def test_faster_field_tightens_the_phase(self, equatorial_decomposition):
        period = 2.0 * math.pi / 0.005
        dec5 = berry.cyclic_phase_decomposition(5.0, math.pi / 2.0, period,
                                                0.02)
        dev1 = qcore.circle_distance(equatorial_decomposition.geometric,
                                     math.pi)
        dev5 = qcore.circle_distance(dec5.geometric, math.pi)
        assert dev5 < dev1
        assert qcore.circle_distance(equatorial_decomposition.geometric,
                                     dec5.geometric) < 2.0 * 0.005 / 1.0

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            berry.spin_rotation_schedule(0.0, math.pi / 2.0, 10.0)
        with pytest.raises(ValueError):
            berry.spin_rotation_schedule(1.0, math.pi / 2.0, -1.0)


class TestRotatingFrame:
    def test_exact_tilt(self):
        rf = berry.rotating_frame_analysis(1.0, 0.02)
        assert rf.sigma3_expectation == 0.01
        assert rf.cone_deficit == 0.02
        assert rf.accumulated_phase == math.pi

    def test_numeric_long_time_average(self):
        # evolved <sigma3> averages to w/2A within O((w/A)^2)
        amplitude, wobble = 1.0, 0.02
        sched = berry.spin_rotation_schedule(amplitude, math.pi / 2.0,
                                             2.0 * math.pi / wobble)
        psi0 = qcore.ground_state(sched.operator(0.0))
        _, states = qcore.evolve_trajectory(sched, psi0, 0.02,
                                            sample_every=10)
        s3 = np.einsum("ij,ij->i", states.conj(),
                       states @ qcore.SIGMA_3.T).real
        avg = float(s3.mean())
        assert abs(avg - wobble / (2.0 * amplitude)) < 2.0 * (wobble / amplitude) ** 2

    def test_regime_guard(self):
        with pytest.raises(RegimeError):
            berry.rotating_frame_analysis(1.0, 0.5)
        with pytest.raises(ValueError):
            berry.rotating_frame_analysis(-1.0, 0.01)


class TestFieldAngularMomentum:
    def test_one_unit_for_any_separation(self):
        for separation in (0.7, 1.0, 2.5):
            fam = berry.field_angular_momentum(1.0, 1.0, separation)
            assert abs(fam.coefficient - 1.0) < 1e-6
            assert abs(fam.refinement_difference) < 1e-3

    def test_scales_with_charge_and_pole(self):
        fam = berry.field_angular_momentum(2.0, 0.5, 1.0)
        assert fam.component == pytest.approx(1.0, abs=1e-6)

    def test_minimal_pole(self):
        # half-unit pole carries half a unit of field angular momentum
        fam = berry.field_angular_momentum(1.0, 0.5, 1.3)
        assert fam.component == pytest.approx(0.5, abs=1e-6)

    def test_validation(self):
        with pytest.raises(ValueError):
            berry.field_angular_momentum(1.0, 1.0, 0.0)
        with pytest.raises(ValueError):
            berry.field_angular_momentum(1.0, 1.0, 1.0, excision_scale=0.5)
