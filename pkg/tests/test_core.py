import numpy as np
import pytest

from polarshape.core import (
    CANONICAL_ANGLES,
    DegenerateAngles,
    NormalMap,
    PolarizationStack,
    angles_to_normal,
    azimuth_candidates,
    compute_priors,
    dop_from_fit,
    fit_sinusoid,
    normal_to_angles,
)
from polarshape.simulate import SceneSpec, render_stack, synth_sphere


def synth_planes(angles, mean, rho, phase):
    """Direct evaluation of the polarizer sinusoid (the fit oracle)."""
    angles = np.asarray(angles, dtype=float)
    mean = np.asarray(mean, dtype=float)
    return mean * (1.0 + rho * np.cos(2.0 * (angles[:, None, None] - phase)))


def make_stack(angles, mean, rho, phase, shape=(4, 5)):
    mean = np.full(shape, mean)
    images = synth_planes(angles, mean, rho, phase)
    return PolarizationStack(angles=angles, images=images,
                             mask=np.ones(shape, dtype=bool))


class TestFitSinusoid:
    def test_constant_planes_flag_low_confidence(self):
        images = np.full((4, 3, 3), 0.5)
        stack = PolarizationStack(angles=CANONICAL_ANGLES, images=images,
                                  mask=np.ones((3, 3), dtype=bool))
        fit = fit_sinusoid(stack)
        assert np.allclose(fit.mean, 0.5, atol=1e-15)
        assert np.allclose(fit.amplitude, 0.0, atol=1e-15)
        assert fit.low_confidence.all()
        assert np.all(fit.phase == 0.0)

    def test_canonical_four_angle_recovery(self):
        # Oracle: Eq. evaluation at the four angles, then the closed-form
        # Stokes reduction. mean 0.5 and rho 0.4 give amplitude 0.2.
        stack = make_stack(CANONICAL_ANGLES, 0.5, 0.4, np.deg2rad(30.0))
        fit = fit_sinusoid(stack)
        assert np.allclose(fit.mean, 0.5, atol=1e-12)
        assert np.allclose(fit.amplitude, 0.2, atol=1e-12)
        assert np.allclose(fit.phase, np.deg2rad(30.0), atol=1e-12)
        assert not fit.low_confidence.any()

    def test_seven_nonuniform_angles_exact(self):
        angles = np.deg2rad([5.0, 30.0, 47.0, 80.0, 110.0, 133.0, 160.0])
        stack = make_stack(angles, 0.7, 0.3, 1.1)
        fit = fit_sinusoid(stack)
        assert np.allclose(fit.mean, 0.7, atol=1e-9)
        assert np.allclose(fit.amplitude, 0.21, atol=1e-9)
        assert np.allclose(fit.phase, 1.1, atol=1e-9)

    def test_stokes_equivalence(self):
        rng = np.random.default_rng(3)
        shape = (1, 1000)
        mean = rng.uniform(0.2, 1.0, shape)
        # Stay above the low-confidence floor, where the fit zeroes the
        # (noise-level) amplitude and phase on purpose.
        rho = rng.uniform(0.01, 0.8, shape)
        phase = rng.uniform(0.0, np.pi, shape)
        images = synth_planes(CANONICAL_ANGLES, mean, rho, phase)
        stack = PolarizationStack(angles=CANONICAL_ANGLES, images=images,
                                  mask=np.ones(shape, dtype=bool))
        fit = fit_sinusoid(stack)
        i0, i45, i90, i135 = images
        a = (i0 + i45 + i90 + i135) / 4.0
        b = (i0 - i90) / 2.0
        c = (i45 - i135) / 2.0
        assert np.max(np.abs(fit.mean - a)) <= 1e-12
        assert np.max(np.abs(fit.amplitude - np.hypot(b, c))) <= 1e-12
        folded = np.mod(0.5 * np.arctan2(c, b), np.pi)
        assert np.max(np.abs(fit.phase - folded)) <= 1e-12

    def test_phase_pi_ambiguity_folds_identically(self):
        phase = 0.8
        a = fit_sinusoid(make_stack(CANONICAL_ANGLES, 0.5, 0.4, phase))
        b = fit_sinusoid(make_stack(CANONICAL_ANGLES, 0.5, 0.4, phase + np.pi))
        assert np.allclose(a.phase, b.phase, atol=1e-9)
        assert np.allclose(a.amplitude, b.amplitude, atol=1e-12)
        assert np.allclose(a.mean, b.mean, atol=1e-12)

    def test_too_few_angles(self):
        images = np.full((2, 2, 2), 0.5)
        with pytest.raises(DegenerateAngles):
            PolarizationStack(angles=[0.0, np.pi / 2], images=images,
                              mask=np.ones((2, 2), dtype=bool))

    def test_duplicate_angles_mod_pi(self):
        images = np.full((3, 2, 2), 0.5)
        with pytest.raises(ValueError):
            PolarizationStack(angles=[0.0, np.pi / 2, np.pi], images=images,
                              mask=np.ones((2, 2), dtype=bool))

    def test_degenerate_angles_guard_in_fit(self):
        stack = make_stack(CANONICAL_ANGLES, 0.5, 0.2, 0.3)
        stack.angles = np.array([0.0, np.pi, 2.0 * np.pi, 3.0 * np.pi])
        with pytest.raises(DegenerateAngles):
            fit_sinusoid(stack)

    def test_mismatched_plane_shapes(self):
        with pytest.raises(ValueError):
            PolarizationStack(
                angles=CANONICAL_ANGLES,
                images=np.zeros((4, 3, 3)),
                mask=np.ones((2, 2), dtype=bool))

    def test_negative_intensity_rejected(self):
        images = np.full((4, 2, 2), 0.5)
        images[1, 0, 0] = -0.1
        with pytest.raises(ValueError):
            PolarizationStack(angles=CANONICAL_ANGLES, images=images,
                              mask=np.ones((2, 2), dtype=bool))


class TestDop:
    def test_unpolarized(self):
        stack = make_stack(CANONICAL_ANGLES, 0.5, 0.0, 0.0)
        rho = dop_from_fit(fit_sinusoid(stack))
        assert np.all(rho == 0.0)

    def test_eq3_value(self):
        # Oracle: I_max = 0.6, I_min = 0.4 -> rho = 0.2.
        stack = make_stack(CANONICAL_ANGLES, 0.5, 0.2, 0.4)
        rho = dop_from_fit(fit_sinusoid(stack))
        assert np.allclose(rho, 0.2, atol=1e-12)

    def test_dark_pixel(self):
        stack = make_stack(CANONICAL_ANGLES, 0.0, 0.0, 0.0)
        fit = fit_sinusoid(stack)
        rho = dop_from_fit(fit)
        assert np.all(rho == 0.0)
        assert fit.low_confidence.all()


class TestAzimuthCandidates:
    def test_diffuse_zero_phase(self):
        first, second = azimuth_candidates(0.0, "diffuse")
        assert (first, second) == (0.0, np.pi)

    def test_specular_zero_phase(self):
        first, second = azimuth_candidates(0.0, "specular")
        assert first == pytest.approx(np.pi / 2)
        assert second == pytest.approx(3 * np.pi / 2)

    def test_diffuse_pi_third(self):
        first, second = azimuth_candidates(np.pi / 3, "diffuse")
        assert first == pytest.approx(np.pi / 3)
        assert second == pytest.approx(4 * np.pi / 3)

    def test_bad_model(self):
        with pytest.raises(ValueError):
            azimuth_candidates(0.0, "mixed")


class TestAngleNormalConversion:
    def test_pole(self):
        assert np.allclose(angles_to_normal(1.234, 0.0), [0.0, 0.0, 1.0])

    def test_equator(self):
        assert np.allclose(angles_to_normal(0.0, np.pi / 2), [1.0, 0.0, 0.0],
                           atol=1e-15)

    def test_pi4_pi3(self):
        expected = [np.sqrt(6) / 4, np.sqrt(6) / 4, 0.5]
        assert np.allclose(angles_to_normal(np.pi / 4, np.pi / 3), expected,
                           atol=1e-15)

    def test_unit_norm_property(self):
        rng = np.random.default_rng(5)
        az = rng.uniform(0.0, 2 * np.pi, 10_000)
        zen = rng.uniform(0.0, np.pi / 2, 10_000)
        norms = np.linalg.norm(angles_to_normal(az, zen), axis=-1)
        assert np.max(np.abs(norms - 1.0)) <= 1e-12

    def test_round_trip(self):
        rng = np.random.default_rng(6)
        az = rng.uniform(0.0, 2 * np.pi, 1000)
        zen = rng.uniform(1e-3, np.pi / 2, 1000)
        back_az, back_zen = normal_to_angles(angles_to_normal(az, zen))
        assert np.max(np.abs(back_az - az)) <= 1e-9
        assert np.max(np.abs(back_zen - zen)) <= 1e-9

    def test_pole_azimuth_convention(self):
        az, zen = normal_to_angles(np.array([0.0, 0.0, 1.0]))
        assert az == 0.0
        assert zen == 0.0

    def test_rejects_non_unit(self):
        with pytest.raises(ValueError):
            normal_to_angles(np.array([0.0, 0.0, 2.0]))

    def test_rejects_back_facing(self):
        with pytest.raises(ValueError):
            normal_to_angles(np.array([0.0, 0.0, -1.0]))


class TestComputePriors:
    def test_unpolarized_stack(self):
        images = np.full((4, 5, 5), 0.5)
        stack = PolarizationStack(angles=CANONICAL_ANGLES, images=images,
                                  mask=np.ones((5, 5), dtype=bool))
        priors = compute_priors(stack)
        for m in (priors.n_diff, priors.n_spec1, priors.n_spec2):
            assert np.allclose(m.normals, [0.0, 0.0, 1.0])
            assert not m.mask.any()

    @staticmethod
    def _sphere_scene(specular):
        sphere = synth_sphere(24)
        dominance = np.full(sphere.mask.shape, specular, dtype=bool)
        return SceneSpec(normals=sphere,
                         dominance=dominance,
                         unpolarized_intensity=np.full(sphere.mask.shape, 0.5)), sphere

    def test_diffuse_sphere(self):
        scene, sphere = self._sphere_scene(specular=False)
        stack = render_stack(scene, CANONICAL_ANGLES)
        priors = compute_priors(stack)
        m = priors.n_diff.mask
        assert m.any()

        true_az, true_zen = normal_to_angles(sphere.normals)
        got_az, got_zen = normal_to_angles(priors.n_diff.normals)
        assert np.max(np.abs(got_zen[m] - true_zen[m])) < np.deg2rad(0.01)
        lower = m & (true_az < np.pi)
        upper = m & (true_az >= np.pi)
        assert np.allclose(got_az[lower], true_az[lower], atol=1e-6)
        assert np.allclose(got_az[upper], true_az[upper] - np.pi, atol=1e-6)

    def test_specular_sphere(self):
        scene, sphere = self._sphere_scene(specular=True)
        stack = render_stack(scene, CANONICAL_ANGLES)
        priors = compute_priors(stack)
        m = priors.n_spec1.mask
        assert m.any()
        _, true_zen = normal_to_angles(sphere.normals)
        _, zen1 = normal_to_angles(priors.n_spec1.normals)
        _, zen2 = normal_to_angles(priors.n_spec2.normals)
        best = np.minimum(np.abs(zen1 - true_zen), np.abs(zen2 - true_zen))
        assert np.max(best[m]) < np.deg2rad(0.01)

    def test_thread_tiling_matches_serial(self):
        scene, _ = self._sphere_scene(specular=False)
        stack = render_stack(scene, CANONICAL_ANGLES)
        serial = compute_priors(stack, threads=1)
        tiled = compute_priors(stack, threads=4)
        assert np.array_equal(serial.n_diff.normals, tiled.n_diff.normals)
        assert np.array_equal(serial.n_spec2.normals, tiled.n_spec2.normals)


class TestNormalMapValidate:
    def test_accepts_unit(self):
        sphere = synth_sphere(8)
        sphere.validate()

    def test_rejects_non_unit(self):
        bad = np.full((2, 2, 3), 0.5)
        with pytest.raises(ValueError):
            NormalMap(normals=bad, mask=np.ones((2, 2), dtype=bool)).validate()
