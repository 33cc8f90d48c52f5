from app.cone.level_set import level_point, level_points, sample_far_level_set, theta_R
from app.cone.tangent_cone import omega_estimate, tangent_cone_matrix_test, tangent_cone_plus_test

__all__ = [
    "level_point",
    "level_points",
    "sample_far_level_set",
    "theta_R",
    "omega_estimate",
    "tangent_cone_plus_test",
    "tangent_cone_matrix_test",
]
