# decay_suite.py

from HypLab.dependencies import *
from dataclasses import dataclass
import warnings

from HypLab.boundary_measure import refine, shadow_direction
from HypLab.group_model import (GroupElement, annulus_bounds, enumerate_annulus,
                                DEFAULT_ENUMERATION_CAP)
from HypLab.step_function import StepFunction, exact_sum
from HypLab.poisson_kernel import (log_kernel, harish_chandra, normalized_poisson,
                                   fit_harish_chandra_estimates)
from HypLab.boundary_rep import matrix_coefficient
from HypLab.strata import stratified_sum, sphere_classes
from HypLab.errors import PreconditionError

ARITHMETIC_SPECTRUM_CAVEAT = ("word-metric lengths are integers, so the length spectrum is "
                              "arithmetic; equidistribution along integer radii is reported, "
                              "not asserted")


@dataclass
class AnnulusAverage:
    n: float
    rho: float
    count: int
    function: StepFunction
    sup: float
    route: str

    @property
    def empty(self):
        return self.count == 0

    def integral(self):
        return self.function.integral() if self.function is not None else 0.0


def _isotropic_average(density, n, rho):
    """
    F_{n,rho} for a tree density invariant under the automorphisms fixing x: the value at
    any boundary point, from common-prefix counts.
    """
    model = density.model
    half = density.alpha / 2
    v = model.canonical_extension((), int(n + rho) + 2)
    lo, hi = annulus_bounds(n, rho)
    terms = []
    for length in range(lo, hi + 1):
        phi = harish_chandra(density, GroupElement(model, v[:length]))
        for j in range(length):
            last = v[j - 1] if j else None
            count = sum(model.continuations(c, length - j - 1)
                        for c in model.allowed_after(last) if c != v[j])
            terms.append(count * math.exp(half * (2 * j - length)) / phi)
        terms.append(math.exp(half * length) / phi)
    return math.fsum(terms) / model.annulus_size(n, rho)


def annulus_average(density, n, rho=1, cap=DEFAULT_ENUMERATION_CAP, executor=None):
    """
    F_{n,rho} = (1/|C_{n,rho}|) sum over the annulus of pi_x(gamma) 1 / phi_x(gamma).

    Parameters:
    - density: ConformalDensity.
    - n, rho: Annulus center and half width.
    - cap: Enumeration cap for densities without the isotropic shortcut.
    - executor: Execution context for the per-element columns.
    """
    model = density.model
    count = model.annulus_size(n, rho)
    if count == 0:
        warnings.warn(f"Annulus C_({n},{rho}) is empty.", RuntimeWarning)
        return AnnulusAverage(n, rho, 0, None, 0.0, "empty")
    if density.is_isotropic:
        value = _isotropic_average(density, n, rho)
        return AnnulusAverage(n, rho, count, StepFunction.constant(density, value), value, "isotropic")

    x = density.basepoint
    elements = list(enumerate_annulus(model, n, rho, cap=cap))
    targets = [g * x for g in elements]
    atoms = refine(model, [x.word] + [y.word for y in targets])
    half = density.alpha / 2

    def _column(pair):
        gamma, y = pair
        phi = harish_chandra(density, gamma)
        return [math.exp(half * log_kernel(density, x, y, a)) / phi for a in atoms]

    pairs = list(zip(elements, targets))
    columns = executor.map(_column, pairs) if executor else [_column(p) for p in pairs]
    values = {a: math.fsum(col[i] for col in columns) / count for i, a in enumerate(atoms)}
    function = StepFunction(density, values)
    return AnnulusAverage(n, rho, count, function, function.norm_sup(), "enumerated")


def uniform_bound(density, ns, rho=1, executor=None):
    """
    Sup-norms of F_{n,rho} over the given centers.
    """
    return {n: annulus_average(density, n, rho, executor=executor).sup for n in ns}


def _annulus_sum(density, n, rho, func, depth, suffix_depth=None, executor=None):
    lo, hi = annulus_bounds(n, rho)
    return exact_sum(stratified_sum(density, length, func, depth, executor=executor,
                                    suffix_depth=suffix_depth)
                     for length in range(lo, hi + 1))


@dataclass
class DualReport:
    n: float
    rho: float
    averaged: float
    pairing: float
    bound: float
    constant: float

    @property
    def gap(self):
        return abs(self.averaged - self.pairing)

    @property
    def holds(self):
        return abs(self.averaged) <= self.bound * (1 + 1e-10)


def dual_l1_check(density, f, n, rho=1, average=None, executor=None):
    """
    (1/|C_{n,rho}|) |sum P0 f(gamma x)| against M ||f||_1, with the pairing <f, F_{n,rho}>
    computed independently.
    """
    average = average or annulus_average(density, n, rho, executor=executor)
    if average.empty:
        return DualReport(n, rho, 0.0, 0.0, 0.0, 0.0)
    x = density.basepoint
    total = _annulus_sum(density, n, rho, lambda g: normalized_poisson(density, f, g * x),
                         f.depth, suffix_depth=0, executor=executor)
    averaged = total / average.count
    pairing = (f * average.function).integral()
    return DualReport(n, rho, averaged, pairing, average.sup * f.norm_l1(), average.sup)


@dataclass
class RDReport:
    radii: list
    sums: list
    bounds: list
    constant_m: float
    constant_c: float

    @property
    def certified(self):
        return all(s <= q * (1 + 1e-9) for s, q in zip(self.sums, self.bounds))

    @property
    def monotone(self):
        return all(b >= a for a, b in zip(self.sums, self.sums[1:]))

    def cubic_ratios(self):
        return [s / (1 + n) ** 3 for n, s in zip(self.radii, self.sums)]

    def measured_exponent(self):
        """
        log-log slope of S between n/2 and n.
        """
        n = self.radii[-1]
        half = n // 2
        if half < 1 or self.sums[half] <= 0:
            return math.nan
        return math.log(self.sums[n] / self.sums[half]) / math.log((1 + n) / (1 + half))


def rd_sum(density, xi, n, fit=None, executor=None, printlog=False):
    """
    S(k) = sum over |gamma| <= k of |<pi_x(gamma) 1, xi>|^2 for k <= n, against the cubic
    Q(k) = sum_j C' M Q2(j)^2 assembled sphere by sphere (spheres inside the exterior radius
    of the fit use phi <= 1).

    Parameters:
    - xi: Unit-norm StepFunction.
    - fit: HarishChandraEstimateFit (fitted on 1 <= n <= max(n, 2) when None).
    """
    if abs(xi.norm_l2() - 1.0) > 1e-10:
        raise PreconditionError(f"rd_sum needs a unit vector, got ||xi||_2 = {xi.norm_l2():.12g}.")
    model = density.model
    fit = fit or fit_harish_chandra_estimates(density, 1, max(n, 2), executor=executor)
    m_const = max(annulus_average(density, k, 0, executor=executor).sup for k in range(n + 1))
    c_const = max(model.sphere_size(k) * math.exp(-density.alpha * k) for k in range(n + 1))
    one = StepFunction.constant(density)
    sums, bounds = [], []
    running_s, running_q = [], []
    for k in range(n + 1):
        sphere = stratified_sum(density, k, lambda g: abs(matrix_coefficient(density, g, one, xi)) ** 2,
                                xi.depth, executor=executor, suffix_depth=0)
        if k < fit.R:
            term = model.sphere_size(k) * m_const
        else:
            term = fit.Q2(k) ** 2 * c_const * m_const
        running_s.append(sphere)
        running_q.append(term)
        sums.append(math.fsum(running_s))
        bounds.append(math.fsum(running_q))
        if printlog:
            print(f"rd-sum n={k}: S={sums[-1]:.6g} Q={bounds[-1]:.6g} "
                  f"{'ok' if sums[-1] <= bounds[-1] * (1 + 1e-9) else 'VIOLATED'}")
    return RDReport(list(range(n + 1)), sums, bounds, m_const, c_const)


@dataclass
class RoblinReport:
    window: tuple
    rho: float
    constant: float
    rows: list
    slack: float
    caveat: str = ARITHMETIC_SPECTRUM_CAVEAT

    @property
    def max_ratio(self):
        return max(row["ratio"] for row in self.rows)

    @property
    def certified(self):
        return self.max_ratio <= 1 + self.slack


def _coefficient_square_sum(density, f, g, n, rho, executor=None):
    depth = max(f.depth, g.depth)
    return _annulus_sum(density, n, rho, lambda gamma: abs(matrix_coefficient(density, gamma, f, g)) ** 2,
                        depth, executor=executor)


def roblin_experiment(density, f, g, rho=1, window=(4, 10), constant=None, slack=0.05, fit=None,
                      executor=None):
    """
    r(n) = (1/Q(n)) sum_{C_{n,rho}} |<pi_x(gamma) f, g>|^2 / (||f||^2 ||g||^2) over the window,
    with Q(n) = Q2(n)^2 e^{-alpha(n+rho)} |C_{n,rho}| / K.

    The constant K is fitted on f = g = 1 (max of the calibration trace equal to one) unless
    given, and then frozen.
    """
    if rho < 1:
        raise PreconditionError(f"roblin_experiment needs rho >= 1, got {rho}.")
    nf, ng = f.norm_l2() ** 2, g.norm_l2() ** 2
    if nf <= 0 or ng <= 0:
        raise PreconditionError("Test functions must have positive L^2 norm.")
    model = density.model
    lo, hi = window
    fit = fit or fit_harish_chandra_estimates(density, 1, int(hi + rho) + 1, executor=executor)

    def _base(n):
        return fit.Q2(n) ** 2 * math.exp(-density.alpha * (n + rho)) * model.annulus_size(n, rho)

    ns = list(range(lo, hi + 1))
    if constant is None:
        one = StepFunction.constant(density)
        constant = 1.0 / max(_coefficient_square_sum(density, one, one, n, rho, executor) / _base(n)
                             for n in ns)
    rows = []
    for n in ns:
        total = _coefficient_square_sum(density, f, g, n, rho, executor)
        q = _base(n) / constant
        rows.append({"n": n, "sum": total, "Q": q, "ratio": total / (q * nf * ng)})
    return RoblinReport(window, rho, constant, rows, slack)


def equidistribution_trace(density, u, w, window=(1, 10)):
    """
    e^{-alpha n} #{gamma in the ball of radius n : w^{gamma^-1} in cyl(u), w^{gamma} in cyl(w)}
    against mu(u) mu(w), with shadows seen from the identity.
    """
    model = density.model
    u, w = tuple(u), tuple(w)
    target = density.at(model.identity()).mass(u) * density.at(model.identity()).mass(w)
    counts = {}
    for length in range(1, window[1] + 1):
        hits = 0
        for gamma, mult in sphere_classes(model, length, len(w), len(u)):
            forward = shadow_direction(model.identity(), gamma).word(len(w))
            backward = shadow_direction(model.identity(), ~gamma).word(len(u))
            if forward == w and backward == u:
                hits += mult
        counts[length] = hits
    rows = []
    running = 0
    for n in range(window[1] + 1):
        running += counts.get(n, 0)
        if n >= window[0]:
            value = math.exp(-density.alpha * n) * running
            rows.append({"n": n, "value": value, "target": target,
                         "ratio": value / target if target > 0 else math.nan})
    return rows
