"""Numerical laboratory for the geometry-dependent non-Hermitian skin effect."""
from .model import ModelParams, Momentum, build_bloch, closed_form_bands, exceptional_lines
from .lattice import assemble_obc, build_geometry, classify_boundary
from .spectra import gdse_report, obc_spectrum, pbc_cloud, spectral_area, w_distribution
from .greens import afunc_grid, dds_metric, extract_efc, scattering_channels, spectral_function

__all__ = [
    "ModelParams", "Momentum", "build_bloch", "closed_form_bands", "exceptional_lines",
    "assemble_obc", "build_geometry", "classify_boundary",
    "gdse_report", "obc_spectrum", "pbc_cloud", "spectral_area", "w_distribution",
    "afunc_grid", "dds_metric", "extract_efc", "scattering_channels", "spectral_function",
]
