from app.verify.conditions import (
    delta_psi_f,
    verify_concave,
    verify_delta,
    verify_gradient_hypotheses,
    verify_growth,
    verify_matrix_concave,
    verify_monotone,
    verify_operator,
    verify_R40,
    verify_sum_fi_lambdai,
)
from app.verify.fields import SubsolutionMode, verify_admissible_field, verify_subsolution
from app.verify.inequalities import verify_cor28_scale, verify_lemma27, verify_prop26

__all__ = [
    "delta_psi_f",
    "verify_concave",
    "verify_delta",
    "verify_gradient_hypotheses",
    "verify_growth",
    "verify_matrix_concave",
    "verify_monotone",
    "verify_operator",
    "verify_R40",
    "verify_sum_fi_lambdai",
    "SubsolutionMode",
    "verify_admissible_field",
    "verify_subsolution",
    "verify_cor28_scale",
    "verify_lemma27",
    "verify_prop26",
]
