# boundary_rep.py

from HypLab.dependencies import *
from dataclasses import dataclass

from HypLab.boundary_measure import refine
from HypLab.step_function import StepFunction, exact_sum
from HypLab.poisson_kernel import log_kernel, harish_chandra, normalized_poisson
from HypLab.strata import sphere_terms
from HypLab.errors import PreconditionError, EstimateViolationError

CS_TOLERANCE = 1e-10


def act(density, gamma, f):
    """
    (pi_x(gamma) f)(v) = P(x, gamma x, v)^(alpha/2) f(gamma^-1 v).

    The result lives on the common refinement of the translated atoms of f and the atoms on
    which the kernel is constant, so no resolution is lost.
    """
    if not gamma.word:
        return f
    x = density.basepoint
    y = gamma * x
    moved = f.translate(gamma)
    atoms = refine(density.model, [x.word, y.word] + moved.atoms())
    half = density.alpha / 2
    return StepFunction(density, {a: math.exp(half * log_kernel(density, x, y, a)) * moved.value_at(a)
                                  for a in atoms})


def matrix_coefficient(density, gamma, f, g):
    """
    <pi_x(gamma) f, g> in L^2(mu_x).
    """
    return act(density, gamma, f).inner(g)


@dataclass
class CauchySchwarzReport:
    left: float
    right: float
    slack: float

    @property
    def holds(self):
        return self.slack >= -CS_TOLERANCE * max(1.0, abs(self.right))


def check_cs_poisson(density, gamma, xi, eta):
    """
    Compares <pi_x(gamma) xi, eta>^2 / phi_x(gamma)^2 with
    (P0 xi^2)(gamma^-1 x) * (P0 eta^2)(gamma x).

    Parameters:
    - xi, eta: Non-negative StepFunctions.
    """
    for name, h in (("xi", xi), ("eta", eta)):
        if not h.is_nonnegative():
            raise PreconditionError(f"{name} must be non-negative.")
    x = density.basepoint
    phi = harish_chandra(density, gamma)
    coefficient = matrix_coefficient(density, gamma, xi, eta)
    coefficient = coefficient.real if isinstance(coefficient, complex) else coefficient
    left = (coefficient / phi) ** 2
    right = (normalized_poisson(density, xi * xi, (~gamma) * x) *
             normalized_poisson(density, eta * eta, gamma * x))
    report = CauchySchwarzReport(left, right, right - left)
    if not report.holds:
        raise EstimateViolationError(f"Cauchy-Schwarz Poisson bound violated at {gamma}: "
                                     f"{left:.12g} > {right:.12g}")
    return report


def intertwiner(density, x, x_prime, f):
    """
    Multiplication operator L^2(mu_x) -> L^2(mu_x'), v -> e^{(alpha/2) beta_v(x', x)} f(v).

    It intertwines pi_x and pi_x'. The returned function carries the density at x'.
    """
    if x == x_prime:
        return f.with_density(density.at(x_prime))
    source = density.at(x)
    atoms = refine(density.model, [x.word, x_prime.word] + f.atoms())
    half = density.alpha / 2
    values = {a: math.exp(half * log_kernel(source, x_prime, x, a)) * f.value_at(a) for a in atoms}
    return StepFunction(density.at(x_prime), values)


def intertwiner_distortion(density, x, x_prime, f):
    """
    ||M f||_{2,x'} / ||f||_{2,x}; equal to 1 on exact backends, within C_q on tabulated ones.
    """
    source = f.with_density(density.at(x))
    return intertwiner(density, x, x_prime, source).norm_l2() / source.norm_l2()


@dataclass
class WeakInequalityReport:
    radius: int
    checked: int
    worst_ratio: float
    worst_gamma: str

    @property
    def holds(self):
        return self.worst_ratio <= 1 + 1e-12


def check_weak_inequality(density, f, g, n, executor=None):
    """
    Scans the ball of radius n for the degree-0 weak inequality
    |<pi_x(gamma) f, g>| <= ||f||_inf ||g||_inf phi_x(gamma); the report carries the worst
    ratio of the two sides.
    """
    depth = max(f.depth, g.depth)
    scale = f.norm_sup() * g.norm_sup()
    candidates = [gamma for length in range(n + 1)
                  for gamma, _ in sphere_terms(density, length, depth)]

    def _ratio(gamma):
        if scale == 0:
            return 0.0
        return abs(matrix_coefficient(density, gamma, f, g)) / (scale * harish_chandra(density, gamma))

    ratios = executor.map(_ratio, candidates) if executor else [_ratio(c) for c in candidates]
    worst = int(np.argmax(ratios))
    return WeakInequalityReport(n, len(candidates), ratios[worst], str(candidates[worst]))


__all__ = ["StepFunction", "exact_sum", "act", "matrix_coefficient", "check_cs_poisson",
           "CauchySchwarzReport", "intertwiner", "intertwiner_distortion",
           "check_weak_inequality", "WeakInequalityReport"]
