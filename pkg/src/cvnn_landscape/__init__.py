"""Optimization landscape of shallow complex-valued networks.

Quadratic-activation networks with Wirtinger gradients and Hessians, a
global-optimality certificate with a least-squares oracle, negative-curvature
directions at rank-deficient critical points, a CReLU local-minimum construction,
and a gallery of analytic functions for minimum-modulus spot checks.
"""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .linalg_core import (  # noqa: F401
    eig_hermitian,
    eig_sym_real,
    lstsq,
    null_space,
    numerical_rank,
    takagi_factor,
    unvec,
    vec,
)
from .wirtinger import check_calculus_rules, check_cre, fd_wirtinger, taylor2_check  # noqa: F401
from .quadratic_net import (  # noqa: F401
    Dataset,
    QuadNet,
    WirtingerHessian,
    grad_v,
    grad_w,
    hessian_complex_embedding,
    hessian_real_embedding,
    hessian_w,
    loss,
    quad_form,
    residual,
)
from .landscape import (  # noqa: F401
    DescentConfig,
    ExperimentConfig,
    certify,
    descend,
    global_min_oracle,
    lemma24_point,
    no_spurious_experiment,
    optimality_residual,
    saddle_direction,
    trap_fixture,
)
from .crelu_net import (  # noqa: F401
    CReluNet,
    PiecewiseActivation,
    apply_h,
    construct_local_min,
    crelu_loss,
    linear_baseline,
    verify_local_min,
    verify_spurious,
)
from .gallery import FUNCTIONS, emit_grid, mmp_spot_check, sample_surface  # noqa: F401
