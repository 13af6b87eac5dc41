import math

import numpy as np
import pytest

from aodesign import bragg, optics


def dense_scan_oracle(frame, wavelength_nm, f_lo, f_hi, a_lo_deg, a_hi_deg,
                      df=0.01, da_deg=0.001):
    """Brute-force |mismatch| minimizer over a (frequency, angle) window."""
    best = (math.inf, None, None)
    f = np.arange(f_lo, f_hi, df)
    for a_deg in np.arange(a_lo_deg, a_hi_deg, da_deg):
        m = np.abs(frame.mismatch(wavelength_nm, math.radians(a_deg), f))
        i = int(np.argmin(m))
        if m[i] < best[0]:
            best = (float(m[i]), float(f[i]), float(a_deg))
    return best


class TestTangentialMatch:
    def test_108_mhz_at_780(self, tangential_solutions):
        assert tangential_solutions[780.0].f_tangential == pytest.approx(
            108.0, rel=0.05)

    def test_191_mhz_at_480(self, tangential_solutions):
        assert tangential_solutions[480.0].f_tangential == pytest.approx(
            191.0, rel=0.05)

    def test_diffracted_beam_at_acoustic_rotation_angle(self,
                                                        tangential_solutions):
        for sol in tangential_solutions.values():
            assert sol.diffraction_angle_internal == pytest.approx(3.0,
                                                                   abs=0.05)

    def test_matches_dense_scan_oracle(self, teo2, design_geometry,
                                       tangential_solutions):
        sol = tangential_solutions[780.0]
        frame = bragg.PlaneFrame(design_geometry, teo2)
        _, f_best, a_best = dense_scan_oracle(
            frame, 780.0, sol.f_tangential - 1.5, sol.f_tangential + 1.5,
            sol.incidence_angle_internal - 0.02,
            sol.incidence_angle_internal + 0.02)
        assert sol.f_tangential == pytest.approx(f_best, abs=0.02)
        assert sol.incidence_angle_internal == pytest.approx(a_best, abs=0.002)

    def test_closure_residual_below_tolerance(self, teo2, design_geometry,
                                              tangential_solutions):
        for lam, sol in tangential_solutions.items():
            resid = bragg.closure_residual(design_geometry, teo2, lam,
                                           sol.incidence_angle_internal,
                                           sol.f_tangential)
            k_mag = 2e6 * math.pi * 2.2 / lam
            assert abs(resid) <= 1e-6 * k_mag

    def test_monotone_in_rotations(self, teo2):
        f_by_phi_o = []
        for phi_o in (6.0, 10.0, 14.0):
            geo = bragg.DeviceGeometry(optical_rotation=phi_o,
                                       acoustic_rotation=3.0)
            f_by_phi_o.append(
                bragg.tangential_match(geo, teo2, 780.0).f_tangential)
        assert f_by_phi_o == sorted(f_by_phi_o)
        assert f_by_phi_o[0] < f_by_phi_o[-1]
        # acoustic rotation: the design branch frequency is stationary near
        # the Bragg-angle scale (~3.3 deg here) and rises monotonically
        # beyond it; below it the incidence slides back toward the axis.
        f_by_phi_a = []
        for phi_a in (3.5, 4.0, 5.0):
            geo = bragg.DeviceGeometry(optical_rotation=10.0,
                                       acoustic_rotation=phi_a)
            f_by_phi_a.append(
                bragg.tangential_match(geo, teo2, 780.0).f_tangential)
        assert f_by_phi_a == sorted(f_by_phi_a)
        assert f_by_phi_a[0] < f_by_phi_a[-1]

    def test_doppler_twin_same_frequency(self, teo2, tangential_solutions):
        down = bragg.DeviceGeometry(optical_rotation=10.0,
                                    acoustic_rotation=3.0, doppler_sign=-1)
        sol = bragg.tangential_match(down, teo2, 780.0)
        assert sol.f_tangential == pytest.approx(
            tangential_solutions[780.0].f_tangential, rel=1e-9)

    def test_geometry_bounds_enforced(self):
        with pytest.raises(ValueError):
            bragg.DeviceGeometry(optical_rotation=25.0, acoustic_rotation=0.0)
        with pytest.raises(ValueError):
            bragg.DeviceGeometry(optical_rotation=0.0, acoustic_rotation=11.0)
        with pytest.raises(ValueError):
            bragg.DeviceGeometry(optical_rotation=0.0, acoustic_rotation=0.0,
                                 doppler_sign=0)


class TestBraggFrequencyAtAngle:
    def test_single_root_at_tangency(self, teo2, design_geometry,
                                     tangential_solutions):
        sol = tangential_solutions[780.0]
        roots = bragg.bragg_frequency_at_angle(
            design_geometry, teo2, 780.0, sol.incidence_angle_internal,
            sol.f_tangential - 40, sol.f_tangential + 40)
        assert len(roots) == 1
        assert roots[0] == pytest.approx(sol.f_tangential, abs=0.3)

    def test_no_roots_when_detuned_out(self, teo2, design_geometry,
                                       tangential_solutions):
        sol = tangential_solutions[780.0]
        away = sol.incidence_angle_internal + 1.5
        roots = bragg.bragg_frequency_at_angle(
            design_geometry, teo2, 780.0, away,
            sol.f_tangential - 50, sol.f_tangential + 50)
        assert roots == []

    def test_two_roots_straddle_tangency(self, teo2, design_geometry,
                                         tangential_solutions):
        sol = tangential_solutions[780.0]
        frame = bragg.PlaneFrame(design_geometry, teo2)
        detuned = sol.incidence_angle_internal - 0.01
        roots = bragg.bragg_frequency_at_angle(
            design_geometry, teo2, 780.0, detuned,
            sol.f_tangential - 50, sol.f_tangential + 50)
        assert len(roots) == 2
        assert roots[0] < sol.f_tangential < roots[1]
        # dense-scan oracle near each root
        for root in roots:
            m = np.abs(frame.mismatch(780.0, math.radians(detuned),
                                      np.arange(root - 0.5, root + 0.5, 0.01)))
            assert m.min() < 1e-4
            f_at_min = np.arange(root - 0.5, root + 0.5, 0.01)[int(np.argmin(m))]
            assert f_at_min == pytest.approx(root, abs=0.011)


class TestDegeneracies:
    def test_symmetric_geometry_midband_at_tangency(self, teo2):
        geo = bragg.DeviceGeometry(optical_rotation=10.0,
                                   acoustic_rotation=0.0)
        sol = bragg.tangential_match(geo, teo2, 780.0)
        degs = bragg.find_degeneracies(
            geo, teo2, 780.0, sol.incidence_angle_internal,
            (sol.f_tangential - 30, sol.f_tangential + 30),
            f_tangential=sol.f_tangential)
        mid = [d for d in degs if d.kind == "midband"]
        assert len(mid) == 1
        assert mid[0].frequency == pytest.approx(sol.f_tangential, abs=0.2)

    def test_rediffraction_inside_band_at_2deg(self, teo2, design_transducer):
        from aodesign import bandshape as bs
        geo = bragg.DeviceGeometry(optical_rotation=10.0,
                                   acoustic_rotation=2.0)
        shape = bs.designed_bandshape(geo, teo2, 780.0, design_transducer, 0.5)
        degs = bragg.find_degeneracies(
            geo, teo2, 780.0, shape.incidence_angle_deg,
            (shape.f_mhz[0], shape.f_mhz[-1]), usable_band=shape.band_edges,
            f_tangential=shape.f_tangential)
        assert any(d.in_band and d.kind == "rediffraction" for d in degs)

    def test_rediffraction_outside_band_at_3deg(self, designed_bandshapes):
        shape = designed_bandshapes["red"]
        assert shape.degeneracy_markers
        assert all(not (shape.band_edges[0] <= f <= shape.band_edges[1])
                   for f in shape.degeneracy_markers)

    def test_matches_brute_force_two_step_scan(self, teo2, design_geometry,
                                               designed_bandshapes):
        shape = designed_bandshapes["red"]
        frame = bragg.PlaneFrame(design_geometry, teo2)
        degs = bragg.find_degeneracies(
            design_geometry, teo2, 780.0, shape.incidence_angle_deg,
            (shape.f_tangential - 40, shape.f_tangential + 40),
            f_tangential=shape.f_tangential)
        # oracle: sign-change scan of the second-closure residual on 0.1 MHz
        f = np.arange(shape.f_tangential - 40, shape.f_tangential + 40, 0.1)
        alpha = math.radians(shape.incidence_angle_deg)
        tips = (frame.incident_k(780.0, alpha)[None, :]
                + frame.acoustic_k(f)[:, None] * frame.k_hat[None, :])
        delta = frame.surface_intersection(780.0, tips, optics.INNER)
        k_d = tips + delta[:, None] * frame.u3[None, :]
        second = k_d + frame.acoustic_k(f)[:, None] * frame.k_hat[None, :]
        resid = (np.linalg.norm(second, axis=-1)
                 - frame.branch_k(780.0, second, optics.OUTER))
        crossings = f[np.where(np.diff(np.sign(resid)) != 0)[0]]
        assert len(crossings) == len(degs)
        for d, f_ref in zip(sorted(x.frequency for x in degs),
                            sorted(crossings)):
            assert d == pytest.approx(f_ref, abs=0.1)


class TestPrismCut:
    def test_front_wedge_6p14(self, teo2, design_geometry):
        cut = bragg.prism_cut(design_geometry, teo2, 780.0, 480.0)
        assert cut.front_wedge == pytest.approx(6.14, abs=0.5)

    def test_snell_round_trip_reproduces_bragg_angles(self, teo2,
                                                      design_geometry,
                                                      tangential_solutions):
        cut = bragg.prism_cut(design_geometry, teo2, 780.0, 480.0)
        frame = bragg.PlaneFrame(design_geometry, teo2)
        w = math.radians(cut.front_face_tilt)
        eps = math.radians(cut.external_input_angle)
        for lam in (780.0, 480.0):
            sol = tangential_solutions[lam]
            alpha = math.radians(sol.incidence_angle_internal)
            d = frame.direction(alpha)
            n = float(frame.branch_k(lam, d, optics.OUTER)
                      * lam / (2e6 * math.pi))
            alpha_traced = math.asin(math.sin(eps + w) / n) - w
            assert alpha_traced == pytest.approx(alpha, abs=1e-6)

    def test_identical_wavelengths_collapse(self, teo2, design_geometry):
        cut = bragg.prism_cut(design_geometry, teo2, 780.0, 780.0)
        # degenerate two-color case: the single refracted ray must hit the
        # common Bragg angle and leave parallel to the exit direction
        sol = bragg.tangential_match(design_geometry, teo2, 780.0)
        frame = bragg.PlaneFrame(design_geometry, teo2)
        w = math.radians(cut.front_face_tilt)
        eps = math.radians(cut.external_input_angle)
        d = frame.direction(math.radians(sol.incidence_angle_internal))
        n = float(frame.branch_k(780.0, d, optics.OUTER)
                  * 780.0 / (2e6 * math.pi))
        alpha_traced = math.asin(math.sin(eps + w) / n) - w
        assert alpha_traced == pytest.approx(
            math.radians(sol.incidence_angle_internal), abs=1e-9)
        assert cut.external_input_angle == pytest.approx(
            sol.diffraction_angle_internal, abs=0.05)

    def test_outputs_nearly_parallel(self, teo2, design_geometry):
        cut = bragg.prism_cut(design_geometry, teo2, 780.0, 480.0)
        out_r, out_b = cut.external_output_angles
        assert out_r == pytest.approx(out_b, abs=0.05)


class TestTwoColorOverlap:
    def test_midband_overlap_small_residual(self, teo2, design_geometry,
                                            tangential_solutions):
        sol_red = tangential_solutions[780.0]
        out = bragg.two_color_overlap_residual(design_geometry, teo2,
                                               sol_red.f_tangential,
                                               780.0, 480.0)
        # the design makes both colors tangential at the same output angle,
        # but the proportional-rule blue tone is not the blue tangential tone
        assert out["f_blue_mhz"] == pytest.approx(
            sol_red.f_tangential * 780.0 / 480.0, rel=1e-12)
        assert out["angle_red_deg"] == pytest.approx(3.0, abs=0.1)
        # the isotropic proportional rule misses the anisotropic matching
        # point by a finite, geometry-dependent angle; the toolkit reports it
        assert 0.05 < abs(out["residual_deg"]) < 1.0

    def test_diffracted_angle_tracks_frequency(self, teo2, design_geometry,
                                               tangential_solutions):
        sol = tangential_solutions[780.0]
        frame = bragg.PlaneFrame(design_geometry, teo2)
        angles = [bragg.diffracted_angle_at(
            design_geometry, teo2, 780.0, sol.incidence_angle_internal, f)
            for f in (sol.f_tangential - 8, sol.f_tangential,
                      sol.f_tangential + 8)]
        assert angles == sorted(angles)
        # tip slides along the inner surface at dK/df per unit frequency
        k_inner = float(frame.branch_k(
            780.0, frame.direction(math.radians(3.0)), "inner"))
        expected = math.degrees(16.0 * 2 * math.pi / frame.velocity / k_inner)
        assert angles[-1] - angles[0] == pytest.approx(expected, rel=0.1)


class TestMatchingCurveExport:
    def test_rows_schema(self, teo2, design_geometry):
        rows = bragg.matching_curve_rows(design_geometry, teo2, 780.0,
                                         np.array([-0.46]),
                                         np.array([100.0, 108.0]))
        assert list(rows[0]) == ["f_MHz", "theta_in_deg", "mismatch_rad_per_mm"]
        assert len(rows) == 2
