"""Third-order exceptional points of complex symmetric pencils ``H0 + lam * H1``."""
from .chirality import ChiralityReport, classify, phase_coefficients
from .cmatrix import EigenSet, char_poly, cubic_roots, eigensystem, t_product
from .continuation import LambdaPath, monodromy, track
from .epsearch import EPLocation, locate_ep2, locate_ep3
from .errors import EPError
from .model import Family, build_generic, build_special, ep3_couplings, ep_vector, special_family
from .puiseux import fit_power, verify_energy_expansion, verify_overlap_scaling

__all__ = [
    "ChiralityReport", "classify", "phase_coefficients",
    "EigenSet", "char_poly", "cubic_roots", "eigensystem", "t_product",
    "LambdaPath", "monodromy", "track",
    "EPLocation", "locate_ep2", "locate_ep3",
    "EPError",
    "Family", "build_generic", "build_special", "ep3_couplings", "ep_vector", "special_family",
    "fit_power", "verify_energy_expansion", "verify_overlap_scaling",
]
