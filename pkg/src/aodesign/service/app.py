"""FastAPI service wrapping the design toolkit.

Every endpoint is a pure computation: JSON in, JSON out.  Infeasible physics
(no tangency, empty band, unaddressable array) maps to 422; config errors to
400.  The CLI is a thin client of this app.
"""

from __future__ import annotations

import math

import numpy as np
from fastapi import FastAPI, HTTPException

from .. import __version__
from .. import bandshape as bs
from .. import bragg, cascade, fom, materials as mats, optics
from ..config import ConfigError, material_from_pairs
from ..transducer import TransducerSpec
from . import schemas as sc

app = FastAPI(title="aodesign service", version=__version__)


def _material(model: sc.MaterialSpecModel) -> mats.MaterialConstants:
    pairs = {"material.name": model.name}
    pairs.update({k: repr(v) for k, v in model.overrides.items()})
    try:
        return material_from_pairs(pairs, "<request>")
    except ConfigError as err:
        raise HTTPException(status_code=400, detail=str(err))


def _geometry(model: sc.GeometryModel) -> bragg.DeviceGeometry:
    try:
        return bragg.DeviceGeometry(
            optical_rotation=model.optical_rotation_deg,
            acoustic_rotation=model.acoustic_rotation_deg,
            doppler_sign=model.doppler_sign,
            aperture_length=model.aperture_mm)
    except ValueError as err:
        raise HTTPException(status_code=400, detail=str(err))


def _transducer(model: sc.TransducerModel) -> TransducerSpec:
    try:
        return TransducerSpec(shape=model.shape, length=model.length_mm,
                              height=model.height_mm,
                              truncation=model.truncation)
    except ValueError as err:
        raise HTTPException(status_code=400, detail=str(err))


def _infeasible(err: Exception) -> HTTPException:
    return HTTPException(status_code=422, detail=str(err))


@app.get("/health", response_model=sc.HealthResponse)
def health() -> sc.HealthResponse:
    return sc.HealthResponse(status="ok", version=__version__)


@app.post("/material/modes", response_model=sc.ModesResponse)
def material_modes(req: sc.ModesRequest) -> sc.ModesResponse:
    material = _material(req.material)
    try:
        modes = mats.solve_christoffel(material, np.array(req.direction),
                                       with_curvature=req.with_curvature)
    except (ValueError, mats.InvalidMaterialError) as err:
        raise HTTPException(status_code=400, detail=str(err))
    return sc.ModesResponse(modes=[
        sc.ModeModel(branch=m.branch, velocity_mm_per_us=m.velocity,
                     polarization=tuple(float(x) for x in m.polarization),
                     walkoff_deg=m.walkoff_angle,
                     curvature_in_plane=_nan_none(m.curvature_in_plane),
                     curvature_out_of_plane=_nan_none(m.curvature_out_of_plane))
        for m in modes])


def _nan_none(x: float | None) -> float | None:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return None
    return x


@app.post("/material/sweep", response_model=sc.SweepResponse)
def material_sweep(req: sc.SweepRequest) -> sc.SweepResponse:
    if not req.theta_deg or not req.phi_deg:
        raise HTTPException(status_code=400, detail="empty sweep grid")
    material = _material(req.material)
    rows = mats.slowness_sweep(material, np.array(req.theta_deg),
                               np.array(req.phi_deg))
    return sc.SweepResponse(rows=[sc.SweepRow(**r) for r in rows])


@app.post("/optics/curves", response_model=sc.OpticsCurvesResponse)
def optics_curves(req: sc.OpticsCurvesRequest) -> sc.OpticsCurvesResponse:
    material = _material(req.material)
    try:
        rows = optics.activity_curve_rows(material, req.wavelength_nm,
                                          np.array(req.theta_deg))
    except optics.WavelengthRangeError as err:
        raise HTTPException(status_code=400, detail=str(err))
    return sc.OpticsCurvesResponse(rows=[sc.OpticsCurveRow(**r) for r in rows])


@app.post("/bragg/tangential", response_model=sc.MatchSolutionModel)
def bragg_tangential(req: sc.TangentialRequest) -> sc.MatchSolutionModel:
    material = _material(req.material)
    geometry = _geometry(req.geometry)
    try:
        sol = bragg.tangential_match(geometry, material, req.wavelength_nm)
    except bragg.NoTangencyError as err:
        raise _infeasible(err)
    return sc.MatchSolutionModel(
        f_tangential_mhz=sol.f_tangential,
        incidence_angle_internal_deg=sol.incidence_angle_internal,
        diffraction_angle_internal_deg=sol.diffraction_angle_internal,
        k_a_rad_per_mm=sol.K_a)


def _bandshape_model(shape: bs.Bandshape) -> sc.BandshapeModel:
    return sc.BandshapeModel(
        wavelength_nm=shape.wavelength_nm,
        f_mhz=[float(x) for x in shape.f_mhz],
        eff_db=[float(x) for x in shape.eff_db],
        band_lo_mhz=shape.band_edges[0], band_hi_mhz=shape.band_edges[1],
        bandwidth_mhz=shape.bandwidth, center_mhz=shape.center,
        f_tangential_mhz=shape.f_tangential,
        incidence_angle_deg=shape.incidence_angle_deg,
        degeneracy_markers_mhz=list(shape.degeneracy_markers))


@app.post("/bandshape/compute", response_model=sc.BandshapeModel)
def bandshape_compute(req: sc.BandshapeRequest) -> sc.BandshapeModel:
    material = _material(req.material)
    geometry = _geometry(req.geometry)
    spec = _transducer(req.transducer)
    try:
        if req.incidence_angle_deg is None:
            shape = bs.designed_bandshape(
                geometry, material, req.wavelength_nm, spec, req.ripple_db,
                band_criterion=req.band_criterion,
                include_attenuation=req.include_attenuation)
        else:
            shape = bs.bandshape(
                geometry, material, req.wavelength_nm, req.incidence_angle_deg,
                spec, ripple_db=req.ripple_db,
                band_criterion=req.band_criterion,
                include_attenuation=req.include_attenuation)
    except (bragg.NoTangencyError, bs.EmptyBandshapeError,
            bs.RippleUnachievableError) as err:
        raise _infeasible(err)
    return _bandshape_model(shape)


@app.post("/bragg/prism", response_model=sc.PrismResponse)
def bragg_prism(req: sc.PrismRequest) -> sc.PrismResponse:
    material = _material(req.material)
    geometry = _geometry(req.geometry)
    try:
        cut = bragg.prism_cut(geometry, material, req.wavelength_red_nm,
                              req.wavelength_blue_nm)
    except (bragg.NoTangencyError, bragg.InfeasiblePrismError) as err:
        raise _infeasible(err)
    return sc.PrismResponse(
        front_wedge_deg=cut.front_wedge, exit_wedge_deg=cut.exit_wedge,
        front_face_tilt_deg=cut.front_face_tilt,
        external_input_angle_deg=cut.external_input_angle,
        external_output_angles_deg=cut.external_output_angles)


@app.post("/bragg/degeneracies", response_model=sc.DegeneracyResponse)
def bragg_degeneracies(req: sc.DegeneracyRequest) -> sc.DegeneracyResponse:
    material = _material(req.material)
    geometry = _geometry(req.geometry)
    degs = bragg.find_degeneracies(
        geometry, material, req.wavelength_nm, req.incidence_angle_deg,
        (req.f_lo_mhz, req.f_hi_mhz), usable_band=req.usable_band_mhz)
    return sc.DegeneracyResponse(degeneracies=[
        sc.DegeneracyModel(frequency_mhz=d.frequency, kind=d.kind,
                           in_band=d.in_band) for d in degs])


@app.post("/bandshape/efficiency", response_model=sc.EfficiencyResponse)
def bandshape_efficiency(req: sc.EfficiencyRequest) -> sc.EfficiencyResponse:
    material = _material(req.material)
    spec = _transducer(req.transducer)
    try:
        eta = bs.efficiency(material, req.wavelength_nm, spec,
                            req.acoustic_power_w)
    except ValueError as err:
        raise HTTPException(status_code=400, detail=str(err))
    return sc.EfficiencyResponse(
        eta=eta, m2_s3_per_kg=bs.material_figure_of_merit(material,
                                                          req.wavelength_nm))


def _cell_model(cell: fom.FomCell) -> sc.FomCellModel:
    return sc.FomCellModel(
        phi_o_deg=cell.phi_o_deg, phi_a_deg=cell.phi_a_deg,
        bw_red=cell.bw_red, bw_blue=cell.bw_blue,
        bw_over_octave=cell.bw_over_octave,
        volume_mm3=cell.crystal_volume_mm3, hf_ok=cell.hf_ok,
        degeneracy_ok=cell.degeneracy_ok, fom=cell.fom, reason=cell.reason,
        band_red_mhz=cell.band_red, band_blue_mhz=cell.band_blue)


@app.post("/fom/scan", response_model=sc.FomScanResponse)
def fom_scan(req: sc.FomScanRequest) -> sc.FomScanResponse:
    if not req.phi_o_deg or not req.phi_a_deg:
        raise HTTPException(status_code=400, detail="empty scan grid")
    material = _material(req.material)
    spec = _transducer(req.transducer)
    limits = fom.DesignLimits(hf_limit_mhz=req.hf_limit_mhz,
                              ripple_red_db=req.ripple_red_db,
                              ripple_blue_db=req.ripple_blue_db)
    result = fom.scan(fom.GridSpec(phi_o_deg=tuple(req.phi_o_deg),
                                   phi_a_deg=tuple(req.phi_a_deg)),
                      material, spec, req.wavelength_red_nm,
                      req.wavelength_blue_nm, limits, req.aperture_mm,
                      jobs=max(req.jobs, 1))
    return sc.FomScanResponse(cells=[_cell_model(c) for c in result.cells],
                              argmax=_cell_model(result.argmax))


def _cascade_config(optics_model: sc.CascadeOpticsModel,
                    band_red, band_blue,
                    beam_diameter_mm: float | None = None) -> cascade.CascadeConfig:
    up = bragg.DeviceGeometry(optical_rotation=10.0, acoustic_rotation=3.0,
                              doppler_sign=+1)
    down = bragg.DeviceGeometry(optical_rotation=10.0, acoustic_rotation=3.0,
                                doppler_sign=-1)
    return cascade.CascadeConfig(
        stage1=up, stage2=down,
        beam_diameter_mm=beam_diameter_mm or optics_model.beam_diameter_mm,
        fourier_focal_mm=optics_model.fourier_focal_mm,
        collimator_focal_mm=optics_model.collimator_focal_mm,
        objective_focal_mm=optics_model.objective_focal_mm,
        trap_pitch_um=optics_model.trap_pitch_um,
        band_red_mhz=tuple(band_red), band_blue_mhz=tuple(band_blue))


@app.post("/cascade/address", response_model=sc.AddressTableResponse)
def cascade_address(req: sc.AddressTableRequest) -> sc.AddressTableResponse:
    material = _material(req.material)
    velocity = req.velocity_mm_us
    if velocity is None:
        velocity = mats.slow_shear_mode(material, mats.AXIS_110).velocity
    config = _cascade_config(req.optics, req.band_red_mhz, req.band_blue_mhz,
                             beam_diameter_mm=req.beam_diameter_mm)
    try:
        rows = cascade.addressing_table(
            config, req.sites_x, req.sites_y, req.wavelength_red_nm,
            req.wavelength_blue_nm, velocity_mm_us=velocity,
            bandwidth_mhz=req.bandwidth_mhz)
    except cascade.AddressingError as err:
        raise _infeasible(err)
    return sc.AddressTableResponse(rows=[
        sc.AddressRowModel(
            site_i=r.site_i, site_j=r.site_j,
            f_red_x_mhz=r.f_red_x_mhz, f_red_y_mhz=r.f_red_y_mhz,
            f_blue_x_mhz=r.f_blue_x_mhz, f_blue_y_mhz=r.f_blue_y_mhz,
            precomp_red_mhz=r.precomp_red_mhz,
            precomp_blue_mhz=r.precomp_blue_mhz,
            net_doppler_mhz=r.net_doppler_mhz)
        for r in rows])


def _design_report_text(resp: sc.DesignRunResponse) -> str:
    r = resp
    lines = [
        "two-color deflector design report",
        "=================================",
        f"optimum geometry: optical rotation {r.optimum_phi_o_deg:.2f} deg, "
        f"acoustic rotation {r.optimum_phi_a_deg:.2f} deg",
        f"slow-shear velocity (device direction): {r.velocity_mm_us:.6f} mm/us",
        f"tangential frequencies: {r.tangential_red_mhz:.3f} / "
        f"{r.tangential_blue_mhz:.3f} MHz",
        f"red band:  {r.bandshape_red.band_lo_mhz:.3f} - "
        f"{r.bandshape_red.band_hi_mhz:.3f} MHz "
        f"(bw {r.bandshape_red.bandwidth_mhz:.3f})",
        f"blue band: {r.bandshape_blue.band_lo_mhz:.3f} - "
        f"{r.bandshape_blue.band_hi_mhz:.3f} MHz "
        f"(bw {r.bandshape_blue.bandwidth_mhz:.3f})",
        f"gap_MHz = {r.dual_band.gap_mhz:.3f}",
        f"octave_lo = {r.dual_band.octave_lo:.3f}",
        f"octave_hi = {r.dual_band.octave_hi:.3f}",
        f"bw_over_octave_MHz = {r.dual_band.bw_over_octave_mhz:.3f}",
        f"prism front wedge: {r.prism.front_wedge_deg:.3f} deg "
        f"(entrance tilt {r.prism.front_face_tilt_deg:.3f}, "
        f"exit tilt {r.prism.exit_wedge_deg:.3f})",
        f"access time: {r.cascade.access_time_us:.3f} us",
        f"resolvable spots: red {r.cascade.resolvable_spots['red']}, "
        f"blue {r.cascade.resolvable_spots['blue']}",
        f"fourier spots: red {r.cascade.fourier_spots_um['red']:.2f} um, "
        f"blue {r.cascade.fourier_spots_um['blue']:.2f} um",
        f"trap spots: red {r.cascade.trap_spots_um['red']:.2f} um, "
        f"blue {r.cascade.trap_spots_um['blue']:.2f} um",
        f"net Doppler: red {r.cascade.net_doppler_mhz['red']:.3f} MHz, "
        f"blue {r.cascade.net_doppler_mhz['blue']:.3f} MHz",
        f"two-color midband overlap residual: "
        f"{r.cascade.angular_overlap_residual_deg:+.5f} deg "
        f"(proportional-rule blue tone vs exact matching)",
        f"degeneracy markers red (MHz): "
        f"{', '.join(f'{d:.2f}' for d in r.bandshape_red.degeneracy_markers_mhz) or 'none'}",
        f"degeneracy markers blue (MHz): "
        f"{', '.join(f'{d:.2f}' for d in r.bandshape_blue.degeneracy_markers_mhz) or 'none'}",
    ]
    return "\n".join(lines) + "\n"


@app.post("/design/run", response_model=sc.DesignRunResponse)
def design_run(req: sc.DesignRunRequest) -> sc.DesignRunResponse:
    material = _material(req.material)
    spec = _transducer(req.transducer)
    limits = fom.DesignLimits(hf_limit_mhz=req.hf_limit_mhz,
                              ripple_red_db=req.ripple_red_db,
                              ripple_blue_db=req.ripple_blue_db)
    base_geometry = _geometry(req.geometry)
    cells: list[sc.FomCellModel] = []
    if req.skip_scan:
        best_cell = fom.evaluate_cell(
            base_geometry.optical_rotation, base_geometry.acoustic_rotation,
            material, spec, req.wavelength_red_nm, req.wavelength_blue_nm,
            limits, base_geometry.aperture_length)
        cells = [_cell_model(best_cell)]
    else:
        grid = fom.GridSpec(
            phi_o_deg=tuple(req.phi_o_deg) if req.phi_o_deg
            else fom.GridSpec.phi_o_deg,
            phi_a_deg=tuple(req.phi_a_deg) if req.phi_a_deg
            else fom.GridSpec.phi_a_deg)
        result = fom.scan(grid, material, spec, req.wavelength_red_nm,
                          req.wavelength_blue_nm, limits,
                          base_geometry.aperture_length, jobs=max(req.jobs, 1))
        cells = [_cell_model(c) for c in result.cells]
        best_cell = result.argmax
    if best_cell.reason != fom.REASON_OK:
        raise HTTPException(
            status_code=422,
            detail=f"design stage failed: best cell infeasible "
                   f"({best_cell.reason})")
    geometry = bragg.DeviceGeometry(
        optical_rotation=best_cell.phi_o_deg,
        acoustic_rotation=best_cell.phi_a_deg,
        doppler_sign=base_geometry.doppler_sign,
        aperture_length=base_geometry.aperture_length)
    try:
        frame = bragg.PlaneFrame(geometry, material)
        sol_red = bragg.tangential_match(geometry, material,
                                         req.wavelength_red_nm, frame)
        sol_blue = bragg.tangential_match(geometry, material,
                                          req.wavelength_blue_nm, frame)
        shape_red = bs.designed_bandshape(
            geometry, material, req.wavelength_red_nm, spec,
            req.ripple_red_db, band_criterion=req.band_criterion, frame=frame)
        shape_blue = bs.designed_bandshape(
            geometry, material, req.wavelength_blue_nm, spec,
            req.ripple_blue_db, band_criterion=req.band_criterion, frame=frame)
        cut = bragg.prism_cut(geometry, material, req.wavelength_red_nm,
                              req.wavelength_blue_nm,
                              incidence_red_deg=shape_red.incidence_angle_deg,
                              incidence_blue_deg=shape_blue.incidence_angle_deg)
    except (bragg.NoTangencyError, bs.EmptyBandshapeError,
            bs.RippleUnachievableError, bragg.InfeasiblePrismError) as err:
        raise _infeasible(err)
    report = bs.dual_band_report(shape_red.band_edges, shape_blue.band_edges)
    config = _cascade_config(req.optics, shape_red.band_edges,
                             shape_blue.band_edges)
    velocity = frame.velocity
    summary = cascade.cascade_report(config, velocity,
                                     req.wavelength_red_nm,
                                     req.wavelength_blue_nm)
    overlap = bragg.two_color_overlap_residual(
        geometry, material, shape_red.center, req.wavelength_red_nm,
        req.wavelength_blue_nm,
        incidence_red_deg=shape_red.incidence_angle_deg,
        incidence_blue_deg=shape_blue.incidence_angle_deg)
    resp = sc.DesignRunResponse(
        optimum_phi_o_deg=best_cell.phi_o_deg,
        optimum_phi_a_deg=best_cell.phi_a_deg,
        tangential_red_mhz=sol_red.f_tangential,
        tangential_blue_mhz=sol_blue.f_tangential,
        bandshape_red=_bandshape_model(shape_red),
        bandshape_blue=_bandshape_model(shape_blue),
        dual_band=sc.DualBandModel(
            gap_mhz=report.gap_mhz, octave_lo=report.octave_lo,
            octave_hi=report.octave_hi,
            bw_over_octave_mhz=report.bw_over_octave_mhz,
            overlap_mhz=report.overlap),
        prism=sc.PrismResponse(
            front_wedge_deg=cut.front_wedge, exit_wedge_deg=cut.exit_wedge,
            front_face_tilt_deg=cut.front_face_tilt,
            external_input_angle_deg=cut.external_input_angle,
            external_output_angles_deg=cut.external_output_angles),
        cascade=sc.CascadeSummaryModel(
            access_time_us=summary.access_time_us,
            resolvable_spots=summary.resolvable_spots,
            fourier_spots_um=summary.fourier_spots_um,
            trap_spots_um=summary.trap_spots_um,
            net_doppler_mhz=summary.net_doppler_mhz,
            crosstalk_margin=summary.crosstalk_margin,
            angular_overlap_residual_deg=overlap["residual_deg"]),
        fom_cells=cells,
        velocity_mm_us=velocity,
        report_text="")
    return resp.model_copy(update={"report_text": _design_report_text(resp)})
