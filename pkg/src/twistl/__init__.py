"""Twisted L-values L(s, f x chi) of level-one cusp forms by Hecke-orbit
summation, with O(q) reference engines for checking."""
from .assembly import LValue, PrecisionConfig, Route, assemble_L, suggest_split
from .dirichlet import DirichletCharacter, char_from_label, gauss_sum, parse_char_spec, split_character
from .forms import CuspForm, delta_form, lift_derivative, lift_eval, load_maass
from .oracle import direct_integral_L, scaling_report, truncation_check
from .orbit_sum import SumRequest, fast_orbit_sum, fast_orbit_sums, naive_orbit_sum, naive_orbit_sums

__version__ = "0.1.0"

__all__ = [
    "CuspForm", "DirichletCharacter", "LValue", "PrecisionConfig", "Route", "SumRequest",
    "assemble_L", "char_from_label", "delta_form", "direct_integral_L", "fast_orbit_sum",
    "fast_orbit_sums", "gauss_sum", "lift_derivative", "lift_eval", "load_maass",
    "naive_orbit_sum", "naive_orbit_sums", "parse_char_spec", "scaling_report",
    "split_character", "suggest_split", "truncation_check",
]
