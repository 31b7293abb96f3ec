# fatou_lab.py

from HypLab.dependencies import *
from dataclasses import dataclass, field

from HypLab.boundary_measure import (BoundaryPoint, VisualMetricParams, shadow_direction,
                                     boundary_gromov_product)
from HypLab.group_model import GroupElement, distance, words_of_length
from HypLab.step_function import StepFunction
from HypLab.poisson_kernel import normalized_poisson, harish_chandra
from HypLab.boundary_rep import matrix_coefficient
from HypLab.errors import DegenerateInputError, PreconditionError


@dataclass(frozen=True)
class ApproachDomain:
    """
    Weak nontangential approach domain: y is a member iff
    d_x^eps(w_x^y, v) <= C d(x, y)^(eps/alpha) e^(-eps d(x, y)).

    Parameters:
    - v: Target BoundaryPoint.
    - aperture: C > 0.
    - basepoint: x (identity when None).
    - params: VisualMetricParams (epsilon, c_m).
    - alpha: Critical exponent of the model.
    - exterior: R; members closer than R to x are excluded by nontangential_maximal.
    """
    v: BoundaryPoint
    aperture: float = 1.0
    basepoint: GroupElement = None
    params: VisualMetricParams = field(default_factory=VisualMetricParams)
    alpha: float = None
    exterior: int = 0

    @classmethod
    def build(cls, model, v, aperture=1.0, epsilon=1.0, basepoint=None, exterior=0):
        if aperture <= 0:
            raise ValueError(f"Invalid aperture: {aperture}. Choose C > 0.")
        return cls(v, aperture, basepoint if basepoint is not None else model.identity(),
                   VisualMetricParams.for_model(model, epsilon), model.alpha, exterior)

    @property
    def x(self):
        return self.basepoint if self.basepoint is not None else self.v.model.identity()

    def log_radius(self, n):
        """
        log of the right-hand side C n^(eps/alpha) e^(-eps n).
        """
        eps = self.params.epsilon
        return math.log(self.aperture) + (eps / self.alpha) * math.log(n) - eps * n

    def product_threshold(self, n):
        """
        Members at distance n satisfy (w_x^y, v)_x >= this value.
        """
        return -self.log_radius(n) / self.params.epsilon


def in_domain(dom, y):
    x = dom.x
    if y == x:
        raise DegenerateInputError(f"Approach domain membership undefined at the basepoint {x}.")
    n = distance(x, y)
    product = boundary_gromov_product(shadow_direction(x, y), dom.v, x)
    if product == math.inf:
        return True
    return -dom.params.epsilon * float(product) <= dom.log_radius(n)


def domain_members(dom, n):
    """
    Members of the domain at distance n from x, in shortlex order.

    Candidates share their first letters with x^-1 v up to the Gromov-product threshold and
    are then filtered with the exact predicate.
    """
    if n < 1:
        return []
    model = dom.v.model
    x = dom.x
    lead = max(0, min(n, math.ceil(dom.product_threshold(n)) - 1))
    target = model.reduce(model.invert_word(x.word) + dom.v.word(lead + 2 * x.length))[:lead]
    candidates = [x * GroupElement(model, w) for w in words_of_length(model, n, prefix=target)]
    return [y for y in candidates if in_domain(dom, y)]


# -- maximal functions ---------------------------------------------------------

class PointMass:
    """
    The measure weight * delta_v on the boundary.
    """

    def __init__(self, point, weight=1.0):
        self.point = point
        self.weight = weight

    def mass(self, word):
        word = tuple(word)
        return self.weight if self.point.word(len(word)) == word else 0.0

    def total_mass(self):
        return self.weight

    def __repr__(self):
        return f"PointMass({self.point}, {self.weight})"


def _node_integrals(density, source, depth):
    """
    Integral of |f| (or nu mass) over every cylinder of depth <= `depth`.
    """
    model = density.model
    integrals = {}
    if isinstance(source, StepFunction):
        fine = source.refined(max(depth, source.depth))
        for w, value in fine.values.items():
            integrals[w] = abs(value) * density.mass(w)
        for level in range(fine.depth - 1, -1, -1):
            for w in words_of_length(model, level):
                last = w[-1] if w else None
                integrals[w] = math.fsum(integrals[w + (c,)] for c in model.allowed_after(last))
    else:
        for level in range(depth + 1):
            for w in words_of_length(model, level):
                integrals[w] = source.mass(w)
    return integrals


def _source_norm(source):
    if isinstance(source, StepFunction):
        return source.norm_l1()
    return source.total_mass()


def maximal_profile(density, source, depth):
    """
    The maximal function on every depth-`depth` atom: the largest average over the ancestor
    cylinders, which are the visual balls around points of the atom.
    """
    integrals = _node_integrals(density, source, depth)
    profile = {}
    for w in words_of_length(density.model, depth):
        best = 0.0
        for j in range(depth + 1):
            node = w[:j]
            m = density.mass(node)
            if m > 0:
                best = max(best, integrals[node] / m)
        profile[w] = best
    return profile


def maximal_function(density, source, v, depth):
    """
    M f(v) (or M nu(v)) resolved at the given depth.

    Parameters:
    - source: StepFunction, ConformalDensity or PointMass.
    - v: BoundaryPoint.
    """
    if isinstance(source, StepFunction) and source.depth > depth:
        raise PreconditionError(f"Depth {depth} is coarser than the function ({source.depth}).")
    word = v.word(depth)
    fine = source.refined(depth) if isinstance(source, StepFunction) else None
    best = 0.0
    for j in range(depth + 1):
        node = word[:j]
        m = density.mass(node)
        if m <= 0:
            continue
        if isinstance(source, StepFunction):
            total = math.fsum(abs(val) * density.mass(w) for w, val in fine.values.items()
                              if w[:j] == node)
        else:
            total = source.mass(node)
        best = max(best, total / m)
    return best


@dataclass
class MaximalReport:
    label: str
    levels: list
    superlevel: list
    vitali_bound: list
    dyadic_bound: list
    norm: float
    dimension: float

    @property
    def monotone(self):
        return all(a >= b - 1e-15 for a, b in zip(self.superlevel, self.superlevel[1:]))

    @property
    def passed(self):
        return all(s <= b * (1 + 1e-12) for s, b in zip(self.superlevel, self.vitali_bound))

    @property
    def dyadic_passed(self):
        return all(s <= b * (1 + 1e-12) for s, b in zip(self.superlevel, self.dyadic_bound))

    def rows(self):
        return [{"input": self.label, "t": t, "superlevel": s, "bound_3D": b, "bound_dyadic": d}
                for t, s, b, d in zip(self.levels, self.superlevel, self.vitali_bound, self.dyadic_bound)]


def check_weak_11(density, inputs, levels, depth, epsilon=1.0):
    """
    Superlevel masses mu{M nu > t} against 3^D ||nu|| / t (D = alpha/epsilon) and the
    nested-cylinder bound ||nu|| / t.

    Parameters:
    - inputs: Iterable of (label, source) pairs.
    - levels: Positive levels t, sorted ascending.
    - depth: Common resolution.
    """
    dimension = density.alpha / epsilon
    levels = sorted(levels)
    reports = []
    for label, source in inputs:
        profile = maximal_profile(density, source, depth)
        norm = _source_norm(source)
        superlevel = [math.fsum(density.mass(w) for w, value in profile.items() if value > t)
                      for t in levels]
        reports.append(MaximalReport(label, levels, superlevel,
                                     [3 ** dimension * norm / t for t in levels],
                                     [norm / t for t in levels], norm, dimension))
    return reports


# -- nontangential behaviour ---------------------------------------------------

@dataclass
class NontangentialReport:
    value: float
    maximal: float
    members: int
    empty: bool

    @property
    def constant(self):
        """
        Empirical C0 = N f(v) / M f(v).
        """
        if self.maximal <= 0:
            return 0.0 if self.value <= 0 else math.inf
        return self.value / self.maximal


def nontangential_maximal(density, f, dom, R, N, executor=None):
    """
    sup |P0 f(y)| over domain members with R <= d(x, y) <= N, paired with M f(v).
    """
    if N < R:
        raise PreconditionError(f"Search radius N={N} is smaller than R={R}.")
    members = [y for n in range(max(R, 1), N + 1) for y in domain_members(dom, n)]
    _eval = lambda y: abs(normalized_poisson(density, f, y))
    values = executor.map(_eval, members) if executor else [_eval(y) for y in members]
    maximal = maximal_function(density, f, dom.v, max(f.depth, 1))
    return NontangentialReport(max(values, default=0.0), maximal, len(members), not members)


@dataclass
class FatouTrace:
    limit: float
    rows: list
    envelope: dict

    @property
    def final_error(self):
        if not self.envelope:
            return math.inf
        return self.envelope[max(self.envelope)]

    def converged(self, tolerance):
        return self.final_error <= tolerance

    def frame(self):
        return pd.DataFrame(self.rows, columns=["n", "y_word", "in_domain", "P0f", "error"])


def fatou_experiment(density, f, dom, max_n, min_n=1, executor=None):
    """
    |P0 f(y) - f(v)| along every domain member y, sorted by length.

    The envelope maps n to the largest error over members of length >= n, so it is
    non-increasing by construction.
    """
    model = density.model
    limit = f.value_at(dom.v)
    members = [(n, y) for n in range(min_n, max_n + 1) for y in domain_members(dom, n)]
    _eval = lambda pair: normalized_poisson(density, f, pair[1])
    values = executor.map(_eval, members) if executor else [_eval(p) for p in members]
    rows = []
    worst = {}
    for (n, y), value in zip(members, values):
        error = abs(value - limit)
        rows.append({"n": n, "y_word": model.format_word(y.word), "in_domain": True,
                     "P0f": value, "error": error})
        worst[n] = max(worst.get(n, 0.0), error)
    envelope, running = {}, 0.0
    for n in sorted(worst, reverse=True):
        running = max(running, worst[n])
        envelope[n] = running
    return FatouTrace(limit, rows, dict(sorted(envelope.items())))


# -- failure of the weak inequality for unbounded functions --------------------

def shell_family(density, v, coefficients, depth):
    """
    Step function sum_{j < depth} c_j 1_{A_j} with A_j = cyl(v_j) minus cyl(v_{j+1}),
    zero on cyl(v_depth).
    """
    model = density.model
    word = v.word(depth)
    values = {word: 0.0}
    for j in range(depth):
        last = word[j - 1] if j else None
        for c in model.allowed_after(last):
            if c != word[j]:
                values[word[:j] + (c,)] = coefficients(j)
    return StepFunction(density, values)


def structured_unbounded_family(density, v):
    """
    Truncations xi_M of xi = sum_j e^{alpha j/2}/(1+j) 1_{A_j}: square integrable, unbounded.
    """
    alpha = density.alpha
    return lambda depth: shell_family(density, v, lambda j: math.exp(alpha * j / 2) / (1 + j), depth)


@dataclass
class ProbeReport:
    trace: list
    truncation: int
    inconclusive: bool

    def ratios(self):
        return [r for _, r in self.trace]

    def exceeds(self, threshold):
        return bool(self.trace) and self.trace[-1][1] > threshold

    @property
    def monotone(self):
        r = self.ratios()
        return all(b >= a for a, b in zip(r, r[1:]))


def fatou_counterexample_probe(density, xi, v, N, min_n=1):
    """
    r_n = <pi_x(gamma_n) 1, xi_M> / phi_x(gamma_n) along gamma_n = v_n, n <= N, with xi_M
    truncated at depth M = N + 2 (the ratio stops growing at n = M).

    Parameters:
    - xi: A StepFunction (bounded, hence inconclusive) or a callable depth -> StepFunction
      giving the truncations of an unbounded family.
    """
    model = density.model
    bounded = isinstance(xi, StepFunction)
    truncation = N + 2
    truncated = xi if bounded else xi(truncation)
    one = StepFunction.constant(density)
    trace = []
    for n in range(min_n, N + 1):
        gamma = GroupElement(model, v.word(n))
        value = matrix_coefficient(density, gamma, one, truncated)
        value = value.real if isinstance(value, complex) else value
        trace.append((n, value / harish_chandra(density, gamma)))
    return ProbeReport(trace, truncated.depth, bounded)


def radial_error_bound(density, f, n):
    """
    Bound on |P0 f(y) - f(v)| for |y| = n >= depth(f) when y and v share their first depth(f)
    letters, on the isotropic free-group density: the oscillation of f times the normalized
    kernel mass of the first depth(f) levels,
    ((2k-1)/2 + (d-1)(k-1)) / ((k-1) n + k). Other densities get math.inf.
    """
    model = density.model
    if not density.is_isotropic or not hasattr(model, "rank"):
        return math.inf
    k, d = model.rank, max(f.depth, 1)
    values = list(f.values.values())
    if any(isinstance(v, complex) for v in values):
        oscillation = 2 * max(abs(v) for v in values)
    else:
        oscillation = max(values) - min(values)
    return oscillation * ((2 * k - 1) / 2 + (d - 1) * (k - 1)) / ((k - 1) * n + k)
