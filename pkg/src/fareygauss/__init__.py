"""Transfer operators, Bessel-kernel spectra and zeta functions of the Farey and Gauss maps."""

from . import cf_dynamics, measures, series, specfun, transfer_ops, zeta
from ._backend import backend_name
from .cf_dynamics import (CFWord, PeriodicOrbit, cf_expand, cf_value, farey_level, farey_map,
                          gauss_map, periodic_cf_value, preimages_of_zero)
from .measures import birkhoff_log_tau, density_e, density_h, khinchin_constant
from .series import PowerSeries
from .specfun import QuadratureRule, bessel_kernel, build_rule, hankel_transform
from .transfer_ops import build_Kzq, build_M, build_T, spectrum
from .zeta import fredholm_det, grand_Xi, trace_Kzq, trace_power, zeta2

__version__ = "0.1.0"
