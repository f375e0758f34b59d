"""Eigenangles, invariant norms and convexity along unitary geodesic segments
``t -> exp(itx) exp(iy)``."""

__version__ = "0.1.0"

from .config import DEFAULT_TOL, Tolerances
from .convexity import (
    ConvexityCertificate,
    certify,
    detect_commutation,
    double_spectrum,
    partial_angle_sums,
    partial_singular_sums,
    perturb_to_distinct,
    radius_scan,
)
from .distance import DistanceProfile, distance_profile, distance_to_identity
from .flow import (
    EigenFrame,
    GeodesicPath,
    direct_rotation,
    first_variation,
    partial_sum_second_variation,
    second_variation,
    spectral_projector,
    track_frame,
)
from .linalg import (
    commutator_norm,
    dist_to_identity,
    eig_unitary,
    expm_i,
    principal_log_unitary,
)
from .norms import (
    Alpha,
    CartanVector,
    KyFan,
    Orbit,
    Schatten,
    SupFamily,
    alpha_norm,
    kostant_membership,
    ky_fan,
    orbit_norm,
    parse_norm,
    polar_dual_boundary,
    rearrangement_sup,
    schatten,
    singular_values,
    sup_family_norm,
)
