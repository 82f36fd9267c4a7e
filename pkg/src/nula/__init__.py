"""
Non-uniform linear antenna arrays for line-of-sight MIMO.

Tools to build the normalized LoS channel of two linear arrays, compute its
eigenvalue spectrum and effective multiplexing gain, and design array
layouts (Fekete points, PAT points, groupwise deployments) that reach a
target multiplexing gain at the smallest aperture-distance product.
"""

__version__ = "0.1.0"

from .capacity import (CapacityPoint, capacity_equal_power, capacity_sweep,
                       capacity_waterfilling, normalize_spectrum)
from .channel import ChannelMatrix, build_full_channel, build_hhat, ula_gram, ula_layout
from .eig import (RatioEvaluator, SearchConfig, Spectrum, TauMinResult, emg,
                  eigenvalues_desc, jacobi_eigh, max_achievable_emg, ratio_sweep,
                  spectrum, tau_min_search)
from .errors import *  # noqa: F401,F403
from .fekete import FeketeSolution, fekete_certificate, fekete_points, lagrange_basis
from .geometry import (ArrayLayout, LinkGeometry, compute_tau, distance_to_tau,
                       rayleigh_distance, tau_to_distance)
from .pat import (GroupwiseDeployment, fit_theta, groupwise_deploy, groupwise_fekete_deploy,
                  groupwise_pat_deploy, optimize_theta_for_taumin, pat_points)
from .vandermonde import (asymptotic_eigenvalue, f_MK, qr_full, r_diagonals_closed_form,
                          vandermonde_matrix)
