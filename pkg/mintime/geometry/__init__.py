from .certify import (
    AttainableOptions,
    AttainableReport,
    ConstructiveRecord,
    HypographOptions,
    certify_attainable_inner_ball,
    certify_hypograph_exterior_sphere,
    check_sublevel_normal,
    hypograph_points,
    verification_slack,
)
from .formulas import R_of_T, lipschitz_terms, rho_T_of
from .proximal import (
    InnerBallReport,
    LipschitzReport,
    SemiconcavityReport,
    SphereCertificate,
    ball_inside,
    boundary_points,
    check_inner_ball,
    check_realized_by_ball,
    proximal_normal,
    test_lipschitz_sampling,
    test_semiconcavity,
)
from .schemas import (
    CheckSummary,
    PointCheckRecord,
    SphereCertificateRecord,
    certificate_records,
    write_certificates,
)

__all__ = [
    "AttainableOptions",
    "AttainableReport",
    "CheckSummary",
    "ConstructiveRecord",
    "HypographOptions",
    "InnerBallReport",
    "LipschitzReport",
    "PointCheckRecord",
    "R_of_T",
    "SemiconcavityReport",
    "SphereCertificate",
    "SphereCertificateRecord",
    "ball_inside",
    "boundary_points",
    "certificate_records",
    "certify_attainable_inner_ball",
    "certify_hypograph_exterior_sphere",
    "check_inner_ball",
    "check_realized_by_ball",
    "check_sublevel_normal",
    "hypograph_points",
    "lipschitz_terms",
    "proximal_normal",
    "rho_T_of",
    "test_lipschitz_sampling",
    "test_semiconcavity",
    "verification_slack",
    "write_certificates",
]
