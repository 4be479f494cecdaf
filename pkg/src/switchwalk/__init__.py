"""Exact invariant measures and simulation of switching random walks on a lattice."""

from .kernels import (CrossingKernels, DualKernel, KernelImage, WalkSpec, apply_P, apply_PH,
                      crossing_kernels, dual_kernel_Q, overshoot_residuals)
from .ladder import (AssumptionError, LadderLaw, LadderSystem, entrance_kernel, ladder_law,
                     ladder_system, wiener_hopf_residual)
from .laws import Degenerate, ExpMixture, Normal, Uniform, law_from_dict
from .measures import (Distance, FiniteMeasure, FinitePmf, SignRestriction, Tail, WindowDensity,
                       convolve, distance, minus, plus, pmf, point_mass, restrict)
from .renewal import RenewalMeasure, renewal_deconvolve, renewal_measure, supremum_law
from .stationary import (NormalizedMu, OvershootDensity, StationaryBundle, lift, lift_parts, normalize_mu,
                         nu, pi, pi_rw, stationary_bundle)

__version__ = "0.1.0"

__all__ = [
    "AssumptionError", "CrossingKernels", "Degenerate", "Distance", "DualKernel", "ExpMixture",
    "FiniteMeasure", "FinitePmf", "KernelImage", "LadderLaw", "LadderSystem", "Normal",
    "NormalizedMu", "OvershootDensity", "RenewalMeasure", "SignRestriction", "StationaryBundle",
    "Tail", "Uniform", "WalkSpec", "WindowDensity", "apply_P", "apply_PH", "convolve",
    "crossing_kernels", "distance", "dual_kernel_Q", "entrance_kernel", "ladder_law",
    "ladder_system", "law_from_dict", "lift", "lift_parts", "minus", "normalize_mu", "nu",
    "overshoot_residuals", "pi", "pi_rw", "plus", "pmf", "point_mass", "renewal_deconvolve",
    "renewal_measure", "restrict", "stationary_bundle", "supremum_law", "wiener_hopf_residual",
]
