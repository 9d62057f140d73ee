"""Eta and rho invariants of Dirac-type operators on spaces with fibered edges.

The package combines a structural layer (index sets of heat-trace
expansions and a regularity classification) with a numerical layer
(model spectra, heat traces, expansion fits, eta and rho values).
"""

__version__ = "0.1.0"

from .classification import EtaStatus, Verdict, classify_boundary_case, classify_eta, classify_rho
from .eta_rho import EtaResult, RhoResult, eta_lattice, eta_numeric, rho_aps, rho_cheeger_gromov_model
from .geometry import EdgeDescriptor, EdgeStratum, LinkSpectrum, OperatorDescriptor, cone_over, witt_check
from .heat_trace import ExpansionModel, TraceSample, aps_K, fit_expansion, heat_trace, mellin_check, odd_heat_trace
from .index_families import IndexSet, extended_union, heat_trace_family
from .model_spectra import Spectrum, circle_dirac_spectrum, sphere_dirac_spectrum, unit_disk_spectrum

__all__ = [
    "EdgeDescriptor", "EdgeStratum", "EtaResult", "EtaStatus", "ExpansionModel", "IndexSet", "LinkSpectrum",
    "OperatorDescriptor", "RhoResult", "Spectrum", "TraceSample", "Verdict", "aps_K", "circle_dirac_spectrum",
    "classify_boundary_case", "classify_eta", "classify_rho", "cone_over", "eta_lattice", "eta_numeric",
    "extended_union", "fit_expansion", "heat_trace", "heat_trace_family", "mellin_check", "odd_heat_trace",
    "rho_aps", "rho_cheeger_gromov_model", "sphere_dirac_spectrum", "unit_disk_spectrum", "witt_check",
]
