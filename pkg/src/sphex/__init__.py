"""sphex: volumes and variational identities of hypersphere arrangements.

The package models an arrangement of n+1 spheres in R^n, classifies the
sign chambers cut out by the spheres, and computes chamber and face
volumes both by closed forms (where the planar theory provides them) and
by Monte Carlo.  On top of that sit numeric verifiers for the algebraic
identities tying those volumes to bordered determinants of the squared
distances, and finite-difference checks of the associated volume
differentials, in the Euclidean model and in the unit-sphere model.
"""

from .arrangement import (
    Arrangement,
    Chamber,
    HypothesisReport,
    ParamVector,
    RigidTransform,
    SubsetSigns,
    arrangement_from_json,
    arrangement_to_json,
    chamber_contains,
    check_hypotheses,
    evaluate_f,
    from_centers_radii,
    from_params,
    load_arrangement,
    normalize,
    params_from_json,
    params_of,
    params_to_json,
    restrict_to_unit_sphere,
)
from .cayley_menger import (
    CMKey,
    CMTable,
    ConfigMatrix,
    cm,
    cm_chain,
    config_matrix,
    config_minor,
    config_minor_pair,
    hadamard_scale,
)
from .errors import (
    DegenerateConfigError,
    EmptyIntersectionError,
    FdNoiseError,
    HypothesisError,
    IndeterminateSignError,
    NonRealizableError,
    SphexError,
    TangencyError,
)
from .identities import (
    IdentityReport,
    check_decomposition,
    check_gauss_bonnet_n3,
    check_lemma5_pointwise,
    check_prop4_residue,
    check_prop6_values,
    check_theorem_I_i,
    check_theorem_II_i,
    volume_identity_coefficients,
)
from .intersect import (
    SubSphere,
    VertexPair,
    angles_pair,
    intersection_sphere,
    sphere_angle,
    sphere_circle,
    triangle_angles,
    vertices,
)
from .variation import (
    OneForm,
    VariationReport,
    config_basis,
    dA_volume_form_n3,
    dA_volume_form_theorem_III,
    dB_volume_form,
    dpsi_form,
    lens_variation_form,
    param_basis,
    theta,
    theta_prime,
    verify_variation_fd,
)
from .volume import (
    Rng,
    VolumeEstimate,
    cap_integral,
    chamber_arc_angles,
    chamber_volume,
    chamber_volume_mc,
    decomposition_cell_coefficient,
    decomposition_cell_volume,
    face_volume,
    face_volume_mc,
    lens_volume_closed,
    pseudo_triangle_area_closed,
    simplex_volume,
    sin_power_integral,
    sphere_arc_lengths,
    sphere_region_area_mc,
    sphere_vertex_counts,
    unit_sphere_area,
)

__version__ = "0.1.0"

__all__ = [
    "Arrangement",
    "Chamber",
    "HypothesisReport",
    "ParamVector",
    "RigidTransform",
    "SubsetSigns",
    "arrangement_from_json",
    "arrangement_to_json",
    "chamber_contains",
    "check_hypotheses",
    "evaluate_f",
    "from_centers_radii",
    "from_params",
    "load_arrangement",
    "normalize",
    "params_from_json",
    "params_of",
    "params_to_json",
    "restrict_to_unit_sphere",
    "CMKey",
    "CMTable",
    "ConfigMatrix",
    "cm",
    "cm_chain",
    "config_matrix",
    "config_minor",
    "config_minor_pair",
    "hadamard_scale",
    "SphexError",
    "NonRealizableError",
    "DegenerateConfigError",
    "TangencyError",
    "EmptyIntersectionError",
    "HypothesisError",
    "IndeterminateSignError",
    "FdNoiseError",
    "IdentityReport",
    "check_decomposition",
    "check_gauss_bonnet_n3",
    "check_lemma5_pointwise",
    "check_prop4_residue",
    "check_prop6_values",
    "check_theorem_I_i",
    "check_theorem_II_i",
    "volume_identity_coefficients",
    "SubSphere",
    "VertexPair",
    "angles_pair",
    "intersection_sphere",
    "sphere_angle",
    "sphere_circle",
    "triangle_angles",
    "vertices",
    "OneForm",
    "VariationReport",
    "config_basis",
    "dA_volume_form_n3",
    "dA_volume_form_theorem_III",
    "dB_volume_form",
    "dpsi_form",
    "lens_variation_form",
    "param_basis",
    "theta",
    "theta_prime",
    "verify_variation_fd",
    "Rng",
    "VolumeEstimate",
    "cap_integral",
    "chamber_arc_angles",
    "chamber_volume",
    "chamber_volume_mc",
    "decomposition_cell_coefficient",
    "decomposition_cell_volume",
    "face_volume",
    "face_volume_mc",
    "lens_volume_closed",
    "pseudo_triangle_area_closed",
    "simplex_volume",
    "sin_power_integral",
    "sphere_arc_lengths",
    "sphere_region_area_mc",
    "sphere_vertex_counts",
    "unit_sphere_area",
]
