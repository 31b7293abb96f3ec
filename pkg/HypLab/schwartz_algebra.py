# schwartz_algebra.py

from HypLab.dependencies import *
from dataclasses import dataclass
from functools import cached_property
import warnings

from HypLab.group_model import (GroupElement, FreeGroup, words_of_length, random_element,
                                estimate_critical_exponent, DEFAULT_ENUMERATION_CAP)
from HypLab.poisson_kernel import harish_chandra, fit_harish_chandra_estimates
from HypLab.step_function import exact_sum
from HypLab.errors import EnumerationCapError, ModelMismatchError, ResolutionError

# degree of the polynomials in the Harish-Chandra estimates
ESTIMATE_DEGREE = 1
GROWTH_RADIUS = 12
DEGREE_FIT_RADIUS = 6


def estimate_degree(density, fit=None):
    """
    Polynomial degree d of phi(gamma) e^{alpha|gamma|/2}. The isotropic free-group density has
    the closed form ((k-1)n + k)/k, hence d = 1; other densities read d off the slope of the
    fitted upper estimate Q2 (1 when positive, 0 when flat).

    Parameters:
    - fit: HarishChandraEstimateFit; fitted over 1 <= n <= min(max_depth - 1, 6) when omitted.
    """
    if isinstance(density.model, FreeGroup) and density.is_isotropic:
        return ESTIMATE_DEGREE
    if fit is None:
        top = min(density.max_depth - 1, DEGREE_FIT_RADIUS)
        if top < 2:
            raise ResolutionError(f"Depth {density.max_depth} too shallow to fit the Harish-Chandra degree", 3)
        fit = fit_harish_chandra_estimates(density, 1, top)
    a2, b2 = fit.q2
    return ESTIMATE_DEGREE if a2 > 1e-9 * max(1.0, abs(b2)) else 0


def critical_degree(density, fit=None, radius=GROWTH_RADIUS):
    """
    t0 such that sum_gamma phi(gamma)^2 (1+|gamma|)^-t converges for t > t0 under the
    comparison |C_n| <= c' e^{alpha n}, phi^2 <= Q2^2 e^{-alpha n}: t0 = 2d + 1.
    Spheres growing faster than e^{alpha n} (measured growth above the density's alpha)
    make the series diverge for every t and give math.inf.
    """
    growth = estimate_critical_exponent(density.model, radius)
    if growth - density.alpha > 1e-9 * max(1.0, density.alpha):
        return math.inf
    return 2 * estimate_degree(density, fit) + 1


class HarishChandraTable:
    """
    Memoized phi_x; isotropic densities are keyed by word length.
    """

    def __init__(self, density):
        self.density = density
        self._values = {}

    @cached_property
    def critical_degree(self):
        return critical_degree(self.density)

    def __call__(self, gamma):
        key = gamma.length if self.density.is_isotropic else gamma.word
        value = self._values.get(key)
        if value is None:
            value = harish_chandra(self.density, gamma)
            self._values[key] = value
        return value

    def by_length(self, length):
        model = self.density.model
        return self(GroupElement(model, model.canonical_extension((), length)))


class SchwartzElement:
    """
    A finitely supported function on the group, normed in the Harish-Chandra-Schwartz
    space of decay degree t.
    """

    def __init__(self, phi, coefficients, t):
        self.phi = phi
        self.model = phi.density.model
        self.t = t
        self.coefficients = {g: c for g, c in sorted(coefficients.items(), key=lambda kv: kv[0])
                             if c != 0}

    @classmethod
    def delta(cls, phi, gamma, t, value=1.0):
        return cls(phi, {gamma: value}, t)

    @classmethod
    def zero(cls, phi, t):
        return cls(phi, {}, t)

    @classmethod
    def sphere_indicator(cls, phi, n, t, normalized=True):
        model = phi.density.model
        words = list(words_of_length(model, n))
        value = 1.0 / len(words) if normalized else 1.0
        return cls(phi, {GroupElement(model, w): value for w in words}, t)

    @classmethod
    def random(cls, phi, radius, t, rng, size=16):
        """
        `size` random elements of the ball of the given radius with standard normal
        coefficients.
        """
        model = phi.density.model
        coefficients = {}
        for _ in range(size):
            gamma = random_element(model, int(rng.integers(radius + 1)), rng)
            coefficients[gamma] = float(rng.standard_normal())
        return cls(phi, coefficients, t)

    def support(self):
        return list(self.coefficients)

    def __getitem__(self, gamma):
        return self.coefficients.get(gamma, 0.0)

    def weight(self, gamma):
        return (1 + gamma.length) ** self.t / self.phi(gamma)

    def star(self):
        """
        f*(gamma) = conj f(gamma^-1).
        """
        return SchwartzElement(self.phi, {~g: (c.conjugate() if isinstance(c, complex) else c)
                                          for g, c in self.coefficients.items()}, self.t)

    def l2_norm(self):
        return math.sqrt(math.fsum(abs(c) ** 2 for c in self.coefficients.values()))

    def __add__(self, other):
        keys = set(self.coefficients) | set(other.coefficients)
        return SchwartzElement(self.phi, {g: self[g] + other[g] for g in keys}, self.t)

    def __mul__(self, scalar):
        return SchwartzElement(self.phi, {g: c * scalar for g, c in self.coefficients.items()}, self.t)

    __rmul__ = __mul__

    def __repr__(self):
        return f"SchwartzElement(support={len(self.coefficients)}, t={self.t})"


def schwartz_norm(f):
    """
    max over the support of |f(gamma)| (1+|gamma|)^t / phi(gamma).
    """
    return max((abs(c) * f.weight(g) for g, c in f.coefficients.items()), default=0.0)


def convolve(f1, f2, cap=DEFAULT_ENUMERATION_CAP):
    """
    (f1 * f2)(g) = sum_gamma f1(gamma) f2(gamma^-1 g), exactly rounded per output element.
    """
    if f1.model != f2.model:
        raise ModelMismatchError(f"Cannot convolve over {f1.model} and {f2.model}.")
    if f1.t != f2.t:
        raise ValueError(f"Decay degrees differ: {f1.t} and {f2.t}.")
    predicted = len(f1.coefficients) * len(f2.coefficients)
    if cap is not None and predicted > cap:
        raise EnumerationCapError(predicted, cap)
    terms = {}
    for a, ca in f1.coefficients.items():
        for b, cb in f2.coefficients.items():
            terms.setdefault(a * b, []).append(ca * cb)
    return SchwartzElement(f1.phi, {g: exact_sum(values) for g, values in terms.items()}, f1.t)


# -- the key kernel inequality -------------------------------------------------

@dataclass
class Trick2Report:
    g: str
    t: float
    radius: int
    partial: float
    tail: float
    phi_g: float
    convergent: bool

    @property
    def ratio(self):
        return self.partial / self.phi_g

    @property
    def ratio_upper(self):
        return (self.partial + self.tail) / self.phi_g


def tail_bound(density, g, t, radius, fit=None, phi=None, t0=None):
    """
    Bound on the terms |gamma| > radius of the kernel sum:
    c' e^{alpha|g|/2} (1+|g|)^d max(a2, b2)^2 (1+N)^{t0-t} / (t-t0) with t0 = 2d + 1, from
    phi(h) <= Q2(|h|) e^{-alpha|h|/2} and |C_l| <= c' e^{alpha l}.
    """
    model = density.model
    if isinstance(model, FreeGroup) and density.is_isotropic:
        a2, b2 = (model.rank - 1) / model.rank, 1.0
    else:
        fit = fit or fit_harish_chandra_estimates(density, 1, radius + g.length + 1)
        a2, b2 = fit.q2
    if t0 is None:
        t0 = critical_degree(density, fit)
    if t <= t0:
        return math.inf
    d = (t0 - 1) / 2
    c_prime = max(model.sphere_size(j) * math.exp(-density.alpha * j) for j in range(radius + 2))
    return (c_prime * math.exp(density.alpha * g.length / 2) * (1 + g.length) ** d * max(a2, b2) ** 2 *
            (1 + radius) ** (t0 - t) / (t - t0))


def _isotropic_kernel_sum(density, g, t, radius, phi):
    """
    sum over |gamma| <= N grouped by sphere and by the length k of the common suffix of
    gamma and g, where |g gamma^-1| = |g| + |gamma| - 2k.
    """
    model = density.model
    inv = model.invert_word(g.word)

    def _ending_with(length, k):
        # words of this length ending with the last k letters of g
        if k == 0:
            return model.sphere_size(length)
        return model.continuations(inv[k - 1], length - k)

    terms = []
    for length in range(radius + 1):
        weight = phi.by_length(length) * (1 + length) ** (-t)
        top = min(length, g.length)
        for k in range(top + 1):
            count = _ending_with(length, k) - (_ending_with(length, k + 1) if k < top else 0)
            if count:
                terms.append(count * phi.by_length(g.length + length - 2 * k) * weight)
    return math.fsum(terms)


def trick2_sum(density, g, t, radius, phi=None, fit=None, cap=DEFAULT_ENUMERATION_CAP):
    """
    S_N(g, t) = sum_{|gamma| <= N} phi(g gamma^-1) phi(gamma) (1+|gamma|)^-t with its tail
    bound. For t at or below the critical degree the sum is still computed but flagged
    divergent.
    """
    phi = phi or HarishChandraTable(density)
    t0 = critical_degree(density, fit) if fit is not None else phi.critical_degree
    convergent = t > t0
    if not convergent:
        warnings.warn(f"t = {t} <= {t0}: the kernel series diverges.",
                      RuntimeWarning)
    model = density.model
    if density.is_isotropic and isinstance(model, FreeGroup):
        partial = _isotropic_kernel_sum(density, g, t, radius, phi)
    else:
        predicted = model.ball_size(radius)
        if cap is not None and predicted > cap:
            raise EnumerationCapError(predicted, cap)
        partial = math.fsum(phi(g * ~gamma) * phi(gamma) * (1 + gamma.length) ** (-t)
                            for length in range(radius + 1)
                            for gamma in (GroupElement(model, w) for w in words_of_length(model, length)))
    tail = tail_bound(density, g, t, radius, fit, t0=t0) if convergent else math.inf
    return Trick2Report(str(g), t, radius, partial, tail, phi(g), convergent)


def trick2_constant(density, t, radius, max_length, phi=None, fit=None):
    """
    C_t = max over |g| <= max_length of (S_N(g, t) + tail) / phi(g). Isotropic densities need
    one g per length.
    """
    phi = phi or HarishChandraTable(density)
    model = density.model
    if density.is_isotropic:
        witnesses = [GroupElement(model, model.canonical_extension((), n)) for n in range(max_length + 1)]
    else:
        witnesses = [GroupElement(model, w) for n in range(max_length + 1) for w in words_of_length(model, n)]
    reports = [trick2_sum(density, g, t, radius, phi, fit) for g in witnesses]
    return max(r.ratio_upper for r in reports), reports


# -- closure and boundedness ---------------------------------------------------

@dataclass
class ClosureReport:
    norm_product: float
    norm_left: float
    norm_right: float
    constant: float
    assembled: float

    @property
    def measured(self):
        denominator = self.norm_left * self.norm_right
        return self.norm_product / denominator if denominator > 0 else 0.0

    @property
    def certified(self):
        return self.norm_product <= self.assembled * self.norm_left * self.norm_right * (1 + 1e-12)


def check_algebra_closure(f1, f2, t, constant):
    """
    ||f1 * f2||_S <= B_t ||f1||_S ||f2||_S with B_t = 2^{t+1} C_t.

    Parameters:
    - constant: C_t from trick2_constant over lengths up to the largest product length.
    """
    product = convolve(f1, f2)
    return ClosureReport(schwartz_norm(product), schwartz_norm(f1), schwartz_norm(f2), constant,
                         2 ** (t + 1) * constant)


@dataclass
class L2Report:
    norm_image: float
    norm_f: float
    norm_h: float
    constant: float

    @property
    def constant_squared(self):
        return self.constant ** 2

    @property
    def measured(self):
        denominator = self.norm_f * self.norm_h
        return self.norm_image / denominator if denominator > 0 else 0.0

    @property
    def certified(self):
        return self.norm_image <= self.constant * self.norm_f * self.norm_h * (1 + 1e-12)


def check_l2_boundedness(f, h, t, constant):
    """
    ||f * h||_2 <= C_t ||f||_S ||h||_2 (Schur test with the test function phi).

    Parameters:
    - h: SchwartzElement used as a finitely supported l^2 vector.
    """
    image = convolve(f, h)
    return L2Report(image.l2_norm(), schwartz_norm(f), h.l2_norm(), constant)
