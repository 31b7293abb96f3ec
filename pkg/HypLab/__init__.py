# HypLab/__init__.py

from .dependencies import *
from .errors import (HypLabError, ModelMismatchError, ModelSpecError, EnumerationCapError,
                     DegenerateInputError, ResolutionError, DivergenceError, PreconditionError,
                     EstimateViolationError, UnsupportedApproachError)
from .group_model import (GroupModel, FreeGroup, CyclicFreeProduct, GroupElement, parse_model,
                          distance, gromov_product, words_of_length, enumerate_annulus, enumerate_ball,
                          estimate_critical_exponent, certify_delta, random_element)
from .boundary_measure import (Cylinder, BoundaryPoint, VisualMetricParams, ConformalDensity,
                               ExactFreeDensity, TabulatedDensity, exact_free_group_density,
                               patterson_density, busemann, visual_distance,
                               certify_ahlfors_regularity, save_density, load_density)
from .step_function import StepFunction, exact_sum
from .poisson_kernel import (p_lambda_transform, harish_chandra, normalized_poisson,
                             fit_harish_chandra_estimates, certify_dirac_weierstrass)
from .boundary_rep import act, matrix_coefficient, check_cs_poisson, intertwiner, check_weak_inequality
from .fatou_lab import (ApproachDomain, PointMass, maximal_function, check_weak_11,
                        nontangential_maximal, fatou_experiment, fatou_counterexample_probe)
from .decay_suite import annulus_average, dual_l1_check, rd_sum, roblin_experiment
from .schwartz_algebra import (SchwartzElement, schwartz_norm, convolve, trick2_sum,
                               check_algebra_closure, check_l2_boundedness)
from .event_bus import EventBus
from .check_records_manager import CheckRecordsManager
from .executor import SerialExecutor, ParallelExecutor, make_executor
from .config import RunConfig, load_config
