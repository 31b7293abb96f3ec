# poisson_kernel.py

from HypLab.dependencies import *
from dataclasses import dataclass, field
from scipy.optimize import linprog

from HypLab.boundary_measure import (BoundaryPoint, Cylinder, refine, busemann,
                                     boundary_gromov_product)
from HypLab.step_function import StepFunction, exact_sum
from HypLab.group_model import GroupElement, words_of_length
from HypLab.executor import SerialExecutor
from HypLab.errors import (ResolutionError, EstimateViolationError, PreconditionError,
                           UnsupportedApproachError)

FIT_TOLERANCE = 1e-9


def free_group_harish_chandra(rank, n):
    """
    Closed form phi(n) = ((k-1) n + k)/k * (2k-1)^(-n/2) on the free group F_k.
    """
    return ((rank - 1) * n + rank) / rank * (2 * rank - 1) ** (-n / 2)


def log_kernel(density, x, y, atom):
    """
    log P(x, y, v) on a cylinder where beta_v(x, y) is constant.

    Exact backends use beta directly; tabulated densities use (1/alpha) log(d mu_y/d mu_x)
    read off the cylinder masses.
    """
    if density.is_exact:
        return float(busemann(atom, x, y))
    mx = density.at(x).mass(atom)
    my = density.at(y).mass(atom)
    if mx <= 0 or my <= 0:
        raise ResolutionError(f"Kernel undefined on null cylinder {density.model.format_word(atom)}")
    return (math.log(my) - math.log(mx)) / density.alpha


def poisson_kernel_power(density, x, y, v, s):
    """
    P(x, y, v)^s evaluated in the log domain.

    Parameters:
    - v: BoundaryPoint or Cylinder; a cylinder must not be a proper prefix of x or y.
    """
    if x == y:
        return 1.0
    required = max(x.length, y.length) + 1
    if isinstance(v, BoundaryPoint):
        atom = v.word(required)
    else:
        atom = v.word if isinstance(v, Cylinder) else tuple(v)
        for g in (x, y):
            if len(atom) < g.length and g.word[:len(atom)] == atom:
                raise ResolutionError("Cylinder too coarse for the kernel", required)
    return math.exp(s * log_kernel(density, x, y, atom))


def _as_step(density, f):
    if isinstance(f, StepFunction):
        return f
    return StepFunction.constant(density, f)


def _kernel_terms(density, f, y, s, atoms=None):
    x = density.basepoint
    f = _as_step(density, f)
    if atoms is None:
        atoms = refine(density.model, [x.word, y.word] + f.atoms())
    for a in atoms:
        m = density.mass(a)
        if m <= 0:
            continue
        yield a, f.value_at(a), math.exp(s * log_kernel(density, x, y, a) + math.log(m))


def p_lambda_transform(density, f, y, lam=0.0):
    """
    P_lambda f(y) = integral of P(x, y, v)^(alpha(lambda + 1/2)) f(v) d mu_x(v).

    The sum runs over the common refinement of the kernel atoms and the atoms of f, so it
    is exact; a density that cannot resolve those atoms raises ResolutionError.
    """
    s = density.alpha * (lam + 0.5)
    return exact_sum(value * weight for _, value, weight in _kernel_terms(density, f, y, s))


def phi_extension(density, y):
    """
    The continuous extension y -> P_0 1(y) of the Harish-Chandra function.
    """
    return p_lambda_transform(density, 1.0, y, 0.0)


def harish_chandra(density, gamma):
    """
    phi_x(gamma) = <pi_x(gamma) 1, 1> = P_0 1(gamma x).
    """
    return phi_extension(density, gamma * density.basepoint)


def normalized_poisson(density, f, y, lam=0.0):
    """
    Normalized transform P_lambda f(y) / P_lambda 1(y).
    """
    return p_lambda_transform(density, f, y, lam) / p_lambda_transform(density, 1.0, y, lam)


def radial_limit_trace(density, f, v, depths):
    """
    Values of the normalized square-root transform of f at the prefixes of v.
    """
    model = density.model
    return [normalized_poisson(density, f, GroupElement(model, v.word(n))) for n in depths]


@dataclass
class HarishChandraEstimateFit:
    q1: tuple
    q2: tuple
    R: int
    N: int
    alpha: float
    witnesses: int
    psi_min: dict = field(default_factory=dict)
    psi_max: dict = field(default_factory=dict)

    def Q1(self, n):
        return self.q1[0] * n + self.q1[1]

    def Q2(self, n):
        return self.q2[0] * n + self.q2[1]

    def lower(self, n):
        return self.Q1(n) * math.exp(-self.alpha * n / 2)

    def upper(self, n):
        return self.Q2(n) * math.exp(-self.alpha * n / 2)


def sphere_representatives(model, n, limit, rng):
    """
    All elements of the sphere of radius n when it has at most `limit` elements, otherwise
    `limit` random ones.
    """
    if model.sphere_size(n) <= limit:
        return [GroupElement(model, w) for w in words_of_length(model, n)]
    from HypLab.group_model import random_element
    return [random_element(model, n, rng) for _ in range(limit)]


def fit_harish_chandra_estimates(density, R, N, representatives=64, seed=0, executor=None):
    """
    Degree-1 polynomials Q1 <= Q2 with positive coefficients such that
    Q1(n) exp(-alpha n/2) <= phi(g) <= Q2(n) exp(-alpha n/2) for every witness g, R <= |g| = n <= N.

    Parameters:
    - density: ConformalDensity.
    - R, N: Exterior radius and largest sphere radius.
    - representatives: Witnesses per sphere (isotropic densities need one).
    - executor: Execution context for the sphere scans.
    """
    if R < 0 or N <= R:
        raise PreconditionError(f"Need N > R >= 0, got R={R}, N={N}.")
    executor = executor or SerialExecutor()
    rng = np.random.default_rng(seed)
    model = density.model
    limit = 1 if density.is_isotropic else representatives
    spheres = list(range(R, N + 1))
    witness_sets = [sphere_representatives(model, n, limit, rng) for n in spheres]

    def _scan(pair):
        n, witnesses = pair
        return [harish_chandra(density, g) * math.exp(density.alpha * n / 2) for g in witnesses]

    scaled = executor.map(_scan, list(zip(spheres, witness_sets)))
    psi_min = {n: min(vals) for n, vals in zip(spheres, scaled)}
    psi_max = {n: max(vals) for n, vals in zip(spheres, scaled)}
    count = sum(len(w) for w in witness_sets)

    q = _collinear_fit(psi_min, psi_max)
    if q is not None:
        return HarishChandraEstimateFit(q, q, R, N, density.alpha, count, psi_min, psi_max)

    # variables (a1, b1, a2, b2); minimize the total gap sum_n Q2(n) - Q1(n)
    n_sum, n_cnt = float(sum(spheres)), float(len(spheres))
    cost = [-n_sum, -n_cnt, n_sum, n_cnt]
    rows, rhs = [], []
    for n in spheres:
        rows.append([n, 1, 0, 0])
        rhs.append(psi_min[n])
        rows.append([0, 0, -n, -1])
        rhs.append(-psi_max[n])
    rows.append([1, 0, -1, 0])
    rhs.append(0.0)
    result = linprog(cost, A_ub=rows, b_ub=rhs, bounds=[(FIT_TOLERANCE, None)] * 4, method="highs")
    if not result.success:
        raise EstimateViolationError(f"No positive degree-1 Harish-Chandra estimates on "
                                     f"{R} <= n <= {N}: {result.message}")
    a1, b1, a2, b2 = result.x
    # project onto the constraints, then pull strictly inside
    b1 = min(b1, min(psi_min[n] - a1 * n for n in spheres))
    if b1 <= 0:
        b1 = FIT_TOLERANCE * min(psi_min.values())
        a1 = min([a1] + [(psi_min[n] - b1) / n for n in spheres if n > 0])
    b2 = max(b2, max(psi_max[n] - a2 * n for n in spheres))
    a1, b1 = a1 * (1 - 1e-12), b1 * (1 - 1e-12)
    a2, b2 = a2 * (1 + 1e-12), b2 * (1 + 1e-12)
    if a1 <= 0:
        raise EstimateViolationError(f"No positive lower estimate on {R} <= n <= {N}.")
    fit = HarishChandraEstimateFit((a1, b1), (a2, b2), R, N, density.alpha, count, psi_min, psi_max)
    for n in spheres:
        if fit.Q1(n) > psi_min[n] or fit.Q2(n) < psi_max[n]:
            raise EstimateViolationError(f"Harish-Chandra estimate violated at n={n}.")
    return fit


def _collinear_fit(psi_min, psi_max):
    """
    When every scaled witness lies on one line with positive coefficients, that line is the
    tightest fit.
    """
    spheres = sorted(psi_min)
    n0, n1 = spheres[0], spheres[-1]
    if any(abs(psi_max[n] - psi_min[n]) > 1e-12 * psi_max[n] for n in spheres):
        return None
    slope = (psi_min[n1] - psi_min[n0]) / (n1 - n0)
    intercept = psi_min[n0] - slope * n0
    if slope <= 0 or intercept <= 0:
        return None
    for n in spheres:
        if abs(slope * n + intercept - psi_min[n]) > 1e-12 * psi_min[n]:
            return None
    return (slope, intercept)


@dataclass
class DiracWeierstrassReport:
    radius: float
    tails: list
    totals: list
    positive: bool
    unit_defect: float
    monotone: bool
    threshold: float
    below_threshold: bool

    @property
    def certified(self):
        return self.positive and self.unit_defect <= 1e-12 and self.monotone


def certify_dirac_weierstrass(density, v0, r, approach, threshold=1e-3, epsilon=1.0):
    """
    Tail integrals t_j of the kernel K(y_j, v) = P(x, y_j, v)^(alpha/2) / phi(y_j) outside the
    visual ball B(v0, r), along a radial sequence y_j -> v0.

    Also checks positivity of K and that each K(y_j, .) integrates to one.
    """
    model = density.model
    x = density.basepoint
    for y in approach:
        if y.word != v0.word(y.length):
            raise UnsupportedApproachError(f"{y} is not a prefix of {v0}; only radial approach is supported.")
    s = density.alpha / 2
    # (v, v0)_x >= J inside the ball
    J = -math.log(r) / epsilon if r < 1 else 0.0
    reach = math.ceil(J) + 1
    tails, totals = [], []
    positive = True
    for y in approach:
        atoms = refine(model, [x.word, y.word, v0.word(reach + x.length)])
        norm = phi_extension(density, y)
        tail_terms, all_terms = [], []
        for a, _, weight in _kernel_terms(density, 1.0, y, s, atoms):
            k = weight / norm
            positive = positive and k > 0
            all_terms.append(k)
            product = boundary_gromov_product(BoundaryPoint(model, a), v0, x)
            # atoms along v0 have depth >= reach and lie inside the ball
            if product < len(a) and float(product) < J:
                tail_terms.append(k)
        tails.append(math.fsum(tail_terms))
        totals.append(math.fsum(all_terms))
    monotone = all(tails[i] <= tails[i - 1] + 1e-15 for i in range(1, len(tails)))
    unit = max((abs(t - 1.0) for t in totals), default=0.0)
    return DiracWeierstrassReport(r, tails, totals, positive, unit, monotone, threshold,
                                  bool(tails) and tails[-1] <= threshold)
