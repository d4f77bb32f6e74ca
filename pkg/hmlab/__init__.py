__version__ = "0.4.0"
__title__ = "Hermitian Lab"

import logging

from .utils import env_log_level

# Setup logging
logger = logging.getLogger("HermitianLab")
logger.propagate = False

if not logger.handlers:
    handler = logging.StreamHandler()
    formatter = logging.Formatter("[HermitianLab] %(message)s")
    handler.setFormatter(formatter)
    logger.addHandler(handler)
    logger.setLevel(env_log_level() or logging.INFO)

from .bundle import (  # noqa: E402
    MetricField,
    SectionField,
    conformal_rescale,
    connection_form,
    covariant_derivative,
    curvature_operator,
    curvature_spectrum,
    eq23_residual,
    inner_product,
    polarized_identity_residual,
    validate_metric,
)
from .engine import falsify, run_scenario, write_map  # noqa: E402
from .errors import LabError, ScenarioError, UnknownGalleryEntryError  # noqa: E402
from .fields import GridDomain, MatrixPolyField, ScalarSampleField, exp_surrogate  # noqa: E402
from .gallery import gallery, gallery_names  # noqa: E402
from .homomorphism import (  # noqa: E402
    HomomorphismField,
    bound32_check,
    conclusion_check,
    curvature_ordering_check,
    griffiths_curvature,
    hypothesis_check,
    inequality33_check,
    operator_norm_field,
    proof_section,
)
from .psh import lambda_estimate, max_principle_check, psh_verdict, xi_xi_bar_estimate  # noqa: E402
from .reports import PshReport, VerificationReport  # noqa: E402
from .scenario import Scenario, Tolerances, load_scenario, save_scenario  # noqa: E402

__all__ = [
    "GridDomain",
    "MatrixPolyField",
    "ScalarSampleField",
    "exp_surrogate",
    "MetricField",
    "SectionField",
    "validate_metric",
    "inner_product",
    "connection_form",
    "covariant_derivative",
    "curvature_operator",
    "curvature_spectrum",
    "eq23_residual",
    "polarized_identity_residual",
    "conformal_rescale",
    "HomomorphismField",
    "griffiths_curvature",
    "operator_norm_field",
    "hypothesis_check",
    "conclusion_check",
    "curvature_ordering_check",
    "proof_section",
    "bound32_check",
    "inequality33_check",
    "lambda_estimate",
    "xi_xi_bar_estimate",
    "psh_verdict",
    "max_principle_check",
    "PshReport",
    "VerificationReport",
    "Scenario",
    "Tolerances",
    "load_scenario",
    "save_scenario",
    "gallery",
    "gallery_names",
    "run_scenario",
    "falsify",
    "write_map",
    "LabError",
    "ScenarioError",
    "UnknownGalleryEntryError",
]
