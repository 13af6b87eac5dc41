"""Design and simulation toolkit for anisotropic acousto-optic deflectors."""

__version__ = "0.1.0"

from .materials import (AcousticMode, MaterialConstants, acoustic_attenuation,
                        solve_christoffel, teo2, walkoff_and_curvature,
                        walkoff_from_axis)
from .bragg import (DeviceGeometry, MatchSolution, bragg_frequency_at_angle,
                    find_degeneracies, prism_cut, tangential_match,
                    two_color_overlap_residual)
from .bandshape import (Bandshape, design_ripple_incidence,
                        designed_bandshape, dual_band_report, efficiency)
from .transducer import (AcousticField, TransducerSpec, aperture_spectrum,
                         propagate, rayleigh_range)
from .fom import FomCell, GridSpec, evaluate_cell, scan
from .cascade import (CascadeConfig, addressing_table, doppler_ledger,
                      proportional_pair, scan_metrics, spot_chain)

__all__ = [
    "AcousticMode", "MaterialConstants", "acoustic_attenuation",
    "solve_christoffel", "teo2", "walkoff_and_curvature", "walkoff_from_axis",
    "DeviceGeometry", "MatchSolution", "bragg_frequency_at_angle",
    "find_degeneracies", "prism_cut", "tangential_match",
    "two_color_overlap_residual",
    "Bandshape", "design_ripple_incidence", "designed_bandshape",
    "dual_band_report", "efficiency",
    "AcousticField", "TransducerSpec", "aperture_spectrum", "propagate",
    "rayleigh_range",
    "FomCell", "GridSpec", "evaluate_cell", "scan",
    "CascadeConfig", "addressing_table", "doppler_ledger",
    "proportional_pair", "scan_metrics", "spot_chain",
]
