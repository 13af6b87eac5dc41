"""Acceptance suite: one test per design target, each printing a pass line.

Run with ``pytest tests/test_acceptance.py -v`` (one PASSED line per
criterion) or ``-s`` to see the numeric pass lines.  The slowest entry is the
full figure-of-merit grid scan (criterion 7), budgeted at ten minutes on
four workers.
"""

import math
import time

import numpy as np
import pytest

from aodesign import bandshape as bs
from aodesign import bragg, cascade, fom, materials as mats, optics
from aodesign import transducer as xd


def report(criterion: str, detail: str):
    print(f"ACCEPTANCE {criterion}: PASS ({detail})")


def timed(budget_s: float):
    class Timer:
        def __enter__(self):
            self.start = time.perf_counter()
            return self

        def __exit__(self, *exc):
            self.elapsed = time.perf_counter() - self.start
            assert self.elapsed < budget_s, (
                f"runtime {self.elapsed:.1f}s exceeds {budget_s}s budget")
            return False
    return Timer()


def test_criterion_01_slow_shear_velocity(teo2):
    with timed(1.0):
        velocity = mats.solve_christoffel(teo2, mats.AXIS_110)[0].velocity
    assert velocity == pytest.approx(0.62, rel=0.02)
    report("1 slow-shear velocity", f"{velocity:.4f} mm/us vs 0.62 +- 2%")


def test_criterion_02_curvatures_and_walkoff(teo2):
    with timed(1.0):
        _, b_in, b_out = mats.walkoff_and_curvature(teo2, mats.AXIS_110)
        tilt = (math.cos(math.radians(3)) * mats.AXIS_110
                + math.sin(math.radians(3)) * mats.Z_AXIS)
        walkoff = mats.walkoff_from_axis(teo2, tilt)
    assert b_in == pytest.approx(11.0, rel=0.10)
    assert b_out == pytest.approx(52.0, rel=0.10)
    assert walkoff == pytest.approx(32.0, abs=2.0)
    report("2 curvatures/walk-off",
           f"b_z={b_in:.2f} b_t={b_out:.2f} walk-off={walkoff:.2f} deg")


def test_criterion_03_ellipticity(teo2):
    with timed(1.0):
        xi0 = float(optics.ellipticity(teo2, 780.0, 0.0))
        modes = optics.eigen_polarizations(teo2, 780.0, [0, 0, 1])
        xi10 = float(optics.ellipticity(teo2, 780.0, math.radians(10)))
    assert xi0 == 1.0
    assert {modes[0].ellipticity, modes[1].ellipticity} == {1.0, -1.0}
    assert xi10 == pytest.approx(0.027, abs=0.005)
    report("3 ellipticity", f"xi(0)={xi0:.1f} exactly, xi(10 deg)={xi10:.4f}")


def test_criterion_04_tangential_frequencies(tangential_solutions):
    with timed(10.0):
        f_red = tangential_solutions[780.0].f_tangential
        f_blue = tangential_solutions[480.0].f_tangential
    assert f_red == pytest.approx(108.0, rel=0.05)
    assert f_blue == pytest.approx(191.0, rel=0.05)
    report("4 tangential frequencies",
           f"{f_red:.2f} / {f_blue:.2f} MHz vs 108 / 191 +- 5%")


def test_criterion_05_bandshapes(designed_bandshapes):
    with timed(60.0):
        red = designed_bandshapes["red"]
        blue = designed_bandshapes["blue"]
        octave = bs.dual_band_report(red.band_edges, blue.band_edges)
    assert red.band_edges[0] == pytest.approx(97.0, rel=0.05)
    assert red.band_edges[1] == pytest.approx(119.0, rel=0.05)
    assert blue.band_edges[0] == pytest.approx(174.0, rel=0.05)
    assert blue.band_edges[1] == pytest.approx(208.0, rel=0.05)
    assert red.bandwidth == pytest.approx(21.0, rel=0.15)
    assert blue.bandwidth == pytest.approx(34.0, rel=0.15)
    assert octave.bw_over_octave_mhz == pytest.approx(14.0, abs=5.0)
    report("5 bandshapes",
           f"red {red.band_edges[0]:.1f}-{red.band_edges[1]:.1f} "
           f"(bw {red.bandwidth:.1f}), blue {blue.band_edges[0]:.1f}-"
           f"{blue.band_edges[1]:.1f} (bw {blue.bandwidth:.1f}), "
           f"over-octave {octave.bw_over_octave_mhz:.1f} MHz")


def test_criterion_06_degeneracy_gating(teo2, design_transducer,
                                        designed_bandshapes):
    with timed(10.0):
        cell_2deg = fom.evaluate_cell(10.0, 2.0, teo2, design_transducer)
        red = designed_bandshapes["red"]
        blue = designed_bandshapes["blue"]
    assert cell_2deg.fom == 0.0
    assert not cell_2deg.degeneracy_ok
    for shape in (red, blue):
        assert all(not (shape.band_edges[0] <= f <= shape.band_edges[1])
                   for f in shape.degeneracy_markers)
    report("6 degeneracy gating",
           f"(10,2) gated (fom=0); (10,3) markers "
           f"red={[f'{x:.1f}' for x in red.degeneracy_markers]} "
           f"blue={[f'{x:.1f}' for x in blue.degeneracy_markers]} out of band")


def test_criterion_07_fom_argmax(teo2, design_transducer):
    with timed(600.0):
        result = fom.scan(fom.GridSpec(), teo2, design_transducer, jobs=4)
    best = result.argmax
    assert abs(best.phi_o_deg - 10.0) <= 1.0
    assert abs(best.phi_a_deg - 3.0) <= 0.5
    report("7 fom argmax",
           f"argmax ({best.phi_o_deg:.1f}, {best.phi_a_deg:.1f}) within one "
           f"grid step of (10, 3)")


def test_criterion_08_prism_cut(teo2, design_geometry):
    with timed(5.0):
        cut = bragg.prism_cut(design_geometry, teo2, 780.0, 480.0)
    assert cut.front_wedge == pytest.approx(6.14, abs=0.5)
    report("8 prism cut", f"front wedge {cut.front_wedge:.3f} deg vs "
           f"6.14 +- 0.5")


def test_criterion_09_transducer_sidelobes():
    with timed(30.0):
        rect = xd.TransducerSpec(shape="rectangle", length=5.0, height=3.0)
        diamond = xd.TransducerSpec(shape="diamond", length=8.0, height=4.0)
        rect_lobe = xd.first_sidelobe_db(rect)
        diamond_lobe = xd.first_sidelobe_db(diamond)
        # Parseval on the sampled aperture
        u = np.linspace(-8, 8, 256, endpoint=False)
        ap = diamond.aperture(u, u)
        spectrum = np.fft.fft2(ap) / math.sqrt(ap.size)
        parseval_err = abs(np.sum(np.abs(ap) ** 2)
                           - np.sum(np.abs(spectrum) ** 2))
        # far-field oracle: propagated profile vs aperture transform
        velocity, f_mhz, b = 0.62, 150.0, 52.0
        z0, _ = xd.rayleigh_range(diamond, velocity, f_mhz, b)
        field = xd.propagate(diamond, velocity, f_mhz, 15.0 * z0, steps=8,
                             b_curvature=b, margin=40.0,
                             min_samples_per_wavelength=2.2,
                             max_points=1 << 19)
        k_carrier = 2 * math.pi * f_mhz / velocity
        kt = field.transverse_mm * k_carrier / (b * 15.0 * z0)
        expected = np.abs(xd.aperture_spectrum(diamond, np.array([0.0]),
                                               kt))[0]
        far = np.abs(field.projection)
        sel = np.abs(field.transverse_mm) < 0.7 * field.transverse_mm.max()
        corr = (np.sum(far[sel] * expected[sel])
                / math.sqrt(np.sum(far[sel] ** 2)
                            * np.sum(expected[sel] ** 2)))
    assert rect_lobe == pytest.approx(-13.3, abs=0.3)
    assert diamond_lobe == pytest.approx(-26.5, abs=0.5)
    assert parseval_err <= 1e-9 * np.sum(np.abs(ap) ** 2)
    assert corr > 0.99
    report("9 transducer sidelobes",
           f"rect {rect_lobe:.2f} dB, diamond {diamond_lobe:.2f} dB, "
           f"far-field correlation {corr:.4f}")


def test_criterion_10_scan_metrics(slow_shear_velocity_110):
    with timed(1.0):
        velocity = slow_shear_velocity_110
        t_full = cascade.access_time_us(10.0, velocity)
        n_red = cascade.resolvable_spots(t_full, 21.0)
        n_blue = cascade.resolvable_spots(t_full, 34.0)
        t_small = cascade.access_time_us(1.2, velocity)
        n_small = cascade.resolvable_spots(t_small, 15.0)
    assert t_full == pytest.approx(16.0, rel=0.02)
    assert n_red == pytest.approx(336, rel=0.05)
    assert n_blue == pytest.approx(560, rel=0.05)
    assert abs(n_small - 30) <= 1
    report("10 scan metrics",
           f"T={t_full:.2f} us, N={n_red}/{n_blue}, cascaded N={n_small}")


def test_criterion_11_spot_chain():
    with timed(1.0):
        up = bragg.DeviceGeometry(optical_rotation=10.0,
                                  acoustic_rotation=3.0, doppler_sign=+1)
        down = bragg.DeviceGeometry(optical_rotation=10.0,
                                    acoustic_rotation=3.0, doppler_sign=-1)
        config = cascade.CascadeConfig(stage1=up, stage2=down,
                                       beam_diameter_mm=3.0,
                                       fourier_focal_mm=42.0,
                                       collimator_focal_mm=400.0,
                                       objective_focal_mm=110.0)
        red = cascade.spot_chain(config, 780.0)
        blue = cascade.spot_chain(config, 480.0)
    assert red.fourier_spot_um == pytest.approx(13.9, rel=0.02)
    assert blue.fourier_spot_um == pytest.approx(8.6, rel=0.02)
    assert red.trap_spot_um == pytest.approx(3.8, rel=0.02)
    assert blue.trap_spot_um == pytest.approx(2.4, rel=0.02)
    report("11 spot chain",
           f"fourier {red.fourier_spot_um:.2f}/{blue.fourier_spot_um:.2f} um,"
           f" trap {red.trap_spot_um:.2f}/{blue.trap_spot_um:.2f} um")


def test_criterion_12_doppler_ledger(slow_shear_velocity_110):
    with timed(1.0):
        ledger = cascade.doppler_ledger({"red": [(108.0, +1), (108.0, -1)],
                                         "blue": [(190.0, +1), (190.0, -1)]})
        up = bragg.DeviceGeometry(optical_rotation=10.0,
                                  acoustic_rotation=3.0, doppler_sign=+1)
        down = bragg.DeviceGeometry(optical_rotation=10.0,
                                    acoustic_rotation=3.0, doppler_sign=-1)
        config = cascade.CascadeConfig(stage1=up, stage2=down,
                                       beam_diameter_mm=1.2)
        rows = cascade.addressing_table(
            config, 10, 10, velocity_mm_us=slow_shear_velocity_110,
            bandwidth_mhz=15.0)
    assert ledger["red"].net_mhz == 0.0
    assert ledger["blue"].net_mhz == 0.0
    assert len(rows) == 100
    assert all(r.net_doppler_mhz == 0.0 for r in rows)
    report("12 doppler ledger",
           "matched pairs cancel exactly; 10x10 table rows all net zero")


def test_criterion_13_property_suites(teo2, design_geometry,
                                      tangential_solutions):
    with timed(300.0):
        # eigensolver residuals
        for d in ([1, 1, 0], [0.3, 0.8, 0.5], [0, 0, 1]):
            n = np.asarray(d, float)
            n = n / np.linalg.norm(n)
            gamma = mats.christoffel_matrix(teo2, n)
            for mode in mats.solve_christoffel(teo2, n):
                resid = (gamma @ mode.polarization
                         - (mode.velocity * 1e3) ** 2 * mode.polarization)
                assert np.linalg.norm(resid) <= 1e-9 * np.linalg.norm(gamma)
        # momentum-closure residuals
        for lam, sol in tangential_solutions.items():
            resid = bragg.closure_residual(design_geometry, teo2, lam,
                                           sol.incidence_angle_internal,
                                           sol.f_tangential)
            assert abs(resid) <= 1e-6 * 2e6 * math.pi * 2.2 / lam
        # monotone tangential frequency vs rotations (acoustic rotation on
        # the rising side of its Bragg-angle-scale stationary point)
        f_o = [bragg.tangential_match(
            bragg.DeviceGeometry(optical_rotation=po, acoustic_rotation=3.0),
            teo2, 780.0).f_tangential for po in (8.0, 10.0, 12.0)]
        f_a = [bragg.tangential_match(
            bragg.DeviceGeometry(optical_rotation=10.0, acoustic_rotation=pa),
            teo2, 780.0).f_tangential for pa in (3.5, 4.0, 5.0)]
        assert f_o == sorted(f_o) and f_o[0] < f_o[-1]
        assert f_a == sorted(f_a) and f_a[0] < f_a[-1]
        # bandwidth 1/sqrt(L) scaling
        bw = {}
        for length in (5.0, 20.0):
            spec = xd.TransducerSpec(shape="rectangle", length=length,
                                     height=3.0)
            bw[length] = bs.designed_bandshape(design_geometry, teo2, 780.0,
                                               spec, 0.5).bandwidth
        assert bw[5.0] / bw[20.0] == pytest.approx(2.0, rel=0.15)
        # propagation unitarity
        spec = xd.TransducerSpec(shape="diamond", length=8.0, height=4.0)
        field = xd.propagate(spec, 0.62, 150.0, 8.0, steps=32,
                             b_curvature=52.0)
        power = field.power_per_step()
        assert np.max(np.abs(power - power[0])) <= 1e-6 * power[0]
        # proportional-pair round trip
        for f in (50.0, 108.0, 190.0):
            back = cascade.proportional_pair(
                cascade.proportional_pair(f, 780.0, 480.0), 480.0, 780.0)
            assert back == pytest.approx(f, rel=1e-12)
    report("13 property suites",
           "residuals, monotonicity, scaling, unitarity, round trips green")
