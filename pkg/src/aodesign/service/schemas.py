"""Pydantic request/response models for the design service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class MaterialSpecModel(BaseModel):
    """Material selection: a named default plus optional key overrides.

    ``overrides`` uses the same dotted keys as the material config files
    (``stiffness.c11``, ``index.780.no``, ...).
    """

    name: str = "TeO2"
    overrides: dict[str, float] = Field(default_factory=dict)


class GeometryModel(BaseModel):
    optical_rotation_deg: float = 10.0
    acoustic_rotation_deg: float = 3.0
    doppler_sign: int = 1
    aperture_mm: float = 10.0


class TransducerModel(BaseModel):
    shape: str = "diamond"
    length_mm: float = 8.0
    height_mm: float = 4.0
    truncation: float = 0.75


class ModesRequest(BaseModel):
    material: MaterialSpecModel = MaterialSpecModel()
    direction: tuple[float, float, float]
    with_curvature: bool = False


class ModeModel(BaseModel):
    branch: str
    velocity_mm_per_us: float
    polarization: tuple[float, float, float]
    walkoff_deg: float
    curvature_in_plane: float | None = None
    curvature_out_of_plane: float | None = None


class ModesResponse(BaseModel):
    modes: list[ModeModel]


class SweepRequest(BaseModel):
    material: MaterialSpecModel = MaterialSpecModel()
    theta_deg: list[float]
    phi_deg: list[float]


class SweepRow(BaseModel):
    theta_deg: float
    phi_deg: float
    branch: str
    velocity_mm_per_us: float
    walkoff_deg: float


class SweepResponse(BaseModel):
    rows: list[SweepRow]


class OpticsCurvesRequest(BaseModel):
    material: MaterialSpecModel = MaterialSpecModel()
    wavelength_nm: float = 780.0
    theta_deg: list[float]


class OpticsCurveRow(BaseModel):
    theta_deg: float
    xi: float
    dn_l: float
    dn_c: float
    n_o_act_minus_n_o: float
    n_e_act_minus_n_e: float


class OpticsCurvesResponse(BaseModel):
    rows: list[OpticsCurveRow]


class TangentialRequest(BaseModel):
    material: MaterialSpecModel = MaterialSpecModel()
    geometry: GeometryModel = GeometryModel()
    wavelength_nm: float


class MatchSolutionModel(BaseModel):
    f_tangential_mhz: float
    incidence_angle_internal_deg: float
    diffraction_angle_internal_deg: float
    k_a_rad_per_mm: float


class BandshapeRequest(BaseModel):
    material: MaterialSpecModel = MaterialSpecModel()
    geometry: GeometryModel = GeometryModel()
    transducer: TransducerModel = TransducerModel()
    wavelength_nm: float
    ripple_db: float = 0.5
    incidence_angle_deg: float | None = None  # None -> ripple design
    band_criterion: str = "ripple"
    include_attenuation: bool = False


class BandshapeModel(BaseModel):
    wavelength_nm: float
    f_mhz: list[float]
    eff_db: list[float]
    band_lo_mhz: float
    band_hi_mhz: float
    bandwidth_mhz: float
    center_mhz: float
    f_tangential_mhz: float
    incidence_angle_deg: float
    degeneracy_markers_mhz: list[float]


class PrismRequest(BaseModel):
    material: MaterialSpecModel = MaterialSpecModel()
    geometry: GeometryModel = GeometryModel()
    wavelength_red_nm: float = 780.0
    wavelength_blue_nm: float = 480.0


class PrismResponse(BaseModel):
    front_wedge_deg: float
    exit_wedge_deg: float
    front_face_tilt_deg: float
    external_input_angle_deg: float
    external_output_angles_deg: tuple[float, float]


class DegeneracyRequest(BaseModel):
    material: MaterialSpecModel = MaterialSpecModel()
    geometry: GeometryModel = GeometryModel()
    wavelength_nm: float
    incidence_angle_deg: float
    f_lo_mhz: float
    f_hi_mhz: float
    usable_band_mhz: tuple[float, float] | None = None


class DegeneracyModel(BaseModel):
    frequency_mhz: float
    kind: str
    in_band: bool


class DegeneracyResponse(BaseModel):
    degeneracies: list[DegeneracyModel]


class EfficiencyRequest(BaseModel):
    material: MaterialSpecModel = MaterialSpecModel()
    transducer: TransducerModel = TransducerModel()
    wavelength_nm: float = 780.0
    acoustic_power_w: float


class EfficiencyResponse(BaseModel):
    eta: float
    m2_s3_per_kg: float


class FomScanRequest(BaseModel):
    material: MaterialSpecModel = MaterialSpecModel()
    transducer: TransducerModel = TransducerModel()
    wavelength_red_nm: float = 780.0
    wavelength_blue_nm: float = 480.0
    ripple_red_db: float = 0.5
    ripple_blue_db: float = 1.0
    hf_limit_mhz: float = 230.0
    aperture_mm: float = 10.0
    phi_o_deg: list[float]
    phi_a_deg: list[float]
    jobs: int = 1


class FomCellModel(BaseModel):
    phi_o_deg: float
    phi_a_deg: float
    bw_red: float
    bw_blue: float
    bw_over_octave: float
    volume_mm3: float
    hf_ok: bool
    degeneracy_ok: bool
    fom: float
    reason: str
    band_red_mhz: tuple[float, float]
    band_blue_mhz: tuple[float, float]


class FomScanResponse(BaseModel):
    cells: list[FomCellModel]
    argmax: FomCellModel


class CascadeOpticsModel(BaseModel):
    beam_diameter_mm: float = 3.0
    fourier_focal_mm: float = 42.0
    collimator_focal_mm: float = 400.0
    objective_focal_mm: float = 110.0
    trap_pitch_um: float = 8.0


class AddressTableRequest(BaseModel):
    material: MaterialSpecModel = MaterialSpecModel()
    optics: CascadeOpticsModel = CascadeOpticsModel()
    sites_x: int
    sites_y: int
    wavelength_red_nm: float = 780.0
    wavelength_blue_nm: float = 480.0
    band_red_mhz: tuple[float, float] = (97.0, 119.0)
    band_blue_mhz: tuple[float, float] = (174.0, 208.0)
    beam_diameter_mm: float = 1.2
    bandwidth_mhz: float | None = None
    velocity_mm_us: float | None = None  # None -> slow shear along [110]


class AddressRowModel(BaseModel):
    site_i: int
    site_j: int
    f_red_x_mhz: float
    f_red_y_mhz: float
    f_blue_x_mhz: float
    f_blue_y_mhz: float
    precomp_red_mhz: float
    precomp_blue_mhz: float
    net_doppler_mhz: float


class AddressTableResponse(BaseModel):
    rows: list[AddressRowModel]


class DesignRunRequest(BaseModel):
    material: MaterialSpecModel = MaterialSpecModel()
    geometry: GeometryModel = GeometryModel()
    transducer: TransducerModel = TransducerModel()
    optics: CascadeOpticsModel = CascadeOpticsModel()
    wavelength_red_nm: float = 780.0
    wavelength_blue_nm: float = 480.0
    ripple_red_db: float = 0.5
    ripple_blue_db: float = 1.0
    hf_limit_mhz: float = 230.0
    band_criterion: str = "ripple"
    phi_o_deg: list[float] | None = None   # None -> default grid
    phi_a_deg: list[float] | None = None
    skip_scan: bool = False
    jobs: int = 1


class DualBandModel(BaseModel):
    gap_mhz: float
    octave_lo: float
    octave_hi: float
    bw_over_octave_mhz: float
    overlap_mhz: tuple[float, float] | None


class CascadeSummaryModel(BaseModel):
    access_time_us: float
    resolvable_spots: dict[str, int]
    fourier_spots_um: dict[str, float]
    trap_spots_um: dict[str, float]
    net_doppler_mhz: dict[str, float]
    crosstalk_margin: dict[str, float]
    # exact two-color angular mismatch at midband under the proportional rule
    angular_overlap_residual_deg: float | None = None


class DesignRunResponse(BaseModel):
    optimum_phi_o_deg: float
    optimum_phi_a_deg: float
    tangential_red_mhz: float
    tangential_blue_mhz: float
    bandshape_red: BandshapeModel
    bandshape_blue: BandshapeModel
    dual_band: DualBandModel
    prism: PrismResponse
    cascade: CascadeSummaryModel
    fom_cells: list[FomCellModel]
    velocity_mm_us: float
    report_text: str


class HealthResponse(BaseModel):
    status: str
    version: str
