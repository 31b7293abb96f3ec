# boundary_measure.py

from HypLab.dependencies import *
from abc import ABC, abstractmethod
from dataclasses import dataclass
import copy
import re

from HypLab.group_model import (GroupElement, words_of_length, distance, parse_model,
                                random_element)
from HypLab.errors import (ResolutionError, DivergenceError, DegenerateInputError,
                           PreconditionError, HypLabError)

POINT_DEPTH_LIMIT = 256


@dataclass(frozen=True)
class Cylinder:
    """
    The clopen set of infinite normal-form words starting with `word`.
    """
    model: object
    word: tuple = ()

    @property
    def depth(self):
        return len(self.word)

    def children(self):
        last = self.word[-1] if self.word else None
        return [Cylinder(self.model, self.word + (c,)) for c in self.model.allowed_after(last)]

    def parent(self):
        if not self.word:
            raise DegenerateInputError("The whole boundary has no parent cylinder.")
        return Cylinder(self.model, self.word[:-1])

    def contains(self, other):
        return other.word[:len(self.word)] == self.word

    def __str__(self):
        return f"[{self.model.format_word(self.word)}]"


@dataclass(frozen=True)
class BoundaryPoint:
    """
    An eventually periodic infinite normal-form word: a finite prefix followed either by
    repetitions of `period` or, when `period` is None, by the canonical smallest-letter
    extension.
    """
    model: object
    prefix: tuple = ()
    period: tuple = None

    def __post_init__(self):
        if not self.model.is_normal(self.prefix):
            raise ValueError(f"Prefix {self.prefix} is not in normal form.")
        if self.period is not None:
            if not self.period or not self.model.is_normal(self.prefix + self.period * 3):
                raise ValueError(f"Period {self.period} does not repeat in normal form.")

    def word(self, depth):
        if depth <= len(self.prefix):
            return self.prefix[:depth]
        if self.period is None:
            return self.model.canonical_extension(self.prefix, depth)
        reps = (depth - len(self.prefix)) // len(self.period) + 1
        return (self.prefix + self.period * reps)[:depth]

    def cylinder(self, depth):
        return Cylinder(self.model, self.word(depth))

    def __str__(self):
        fmt = self.model.format_word
        if self.period is None:
            return f"{fmt(self.prefix)}..."
        head = fmt(self.prefix) if self.prefix else ""
        return f"{head}({fmt(self.period)})^inf"

    @classmethod
    def parse(cls, model, text):
        """
        Parses "a^inf", "(ab)^inf", "b(a)^inf" or a plain word (canonically extended).
        """
        text = text.replace(" ", "")
        match = re.fullmatch(r"(?P<prefix>[^()^]*)\((?P<period>[^()]+)\)\^inf", text)
        if match:
            return cls(model, model.parse_word(match.group("prefix")),
                       model.parse_word(match.group("period")))
        if text.endswith("^inf"):
            return cls(model, (), model.parse_word(text[:-4]))
        return cls(model, model.parse_word(text))


@dataclass(frozen=True)
class VisualMetricParams:
    epsilon: float = 1.0
    c_m: float = 1.0

    @classmethod
    def for_model(cls, model, epsilon=1.0):
        """
        Visual parameters d_x(v, w) ~ exp(-epsilon (v,w)_x) for the model, with the
        comparison constant c_m of the visual metric.
        """
        if not 0 < epsilon <= 1:
            raise ValueError(f"Invalid visual parameter epsilon={epsilon}. Choose 0 < epsilon <= 1.")
        delta = float(model.delta)
        if delta > 0:
            if epsilon > math.log(2) / (4 * delta):
                raise ValueError(f"epsilon={epsilon} exceeds log 2/(4 delta) = {math.log(2) / (4 * delta):.6f}.")
            return cls(epsilon, 1.0 / (3.0 - 2.0 * math.exp(epsilon * delta)))
        return cls(epsilon, 1.0)


# -- partitions --------------------------------------------------------------

def refine(model, words):
    """
    Coarsest cylinder partition of the boundary in which every word of `words` is a union
    of atoms: a node is split exactly when it is a proper prefix of one of the words.
    """
    needed = set()
    for w in words:
        for j in range(len(w)):
            needed.add(tuple(w[:j]))
    leaves = []
    stack = [()]
    while stack:
        node = stack.pop()
        if node in needed:
            last = node[-1] if node else None
            stack.extend(node + (c,) for c in model.allowed_after(last))
        else:
            leaves.append(node)
    leaves.sort(key=lambda w: (len(w), w))
    return leaves


def translate_partition(model, g_word, items):
    """
    Image of a list of (cylinder word, value) pairs under left multiplication by g.

    Atoms whose last letter would cancel against g are split into children until every
    piece maps onto a single cylinder.
    """
    items = list(items)
    if not g_word:
        return items
    out = []
    stack = items[::-1]
    while stack:
        word, value = stack.pop()
        image, survived = model.translate_word(g_word, word)
        if survived:
            out.append((image, value))
        else:
            last = word[-1] if word else None
            stack.extend((word + (c,), value) for c in reversed(model.allowed_after(last)))
    out.sort(key=lambda item: (len(item[0]), item[0]))
    return out


def kernel_partition(x, y):
    """
    Atoms on which the Busemann function v -> beta_v(x, y) is constant.
    """
    return refine(x.model, [x.word, y.word])


# -- geometry ----------------------------------------------------------------

def _as_word(v, depth):
    if isinstance(v, BoundaryPoint):
        return v.word(depth), True
    if isinstance(v, Cylinder):
        return v.word, False
    return tuple(v), False


def boundary_gromov_product(v, w, x=None, depth=POINT_DEPTH_LIMIT):
    """
    (v, w)_x for boundary points. Returns an exact Fraction, or math.inf when the points
    agree to `depth` letters.
    """
    model = v.model
    if x is not None and x.word:
        inv = model.invert_word(x.word)
        vw = model.reduce(inv + v.word(depth + x.length))
        ww = model.reduce(inv + w.word(depth + x.length))
    else:
        vw, ww = v.word(depth), w.word(depth)
    j = 0
    limit = min(len(vw), len(ww))
    while j < limit and vw[j] == ww[j]:
        j += 1
    if j == limit:
        return math.inf
    a = GroupElement(model, vw[:j + 1])
    b = GroupElement(model, ww[:j + 1])
    return Fraction(a.length + b.length - distance(a, b), 2)


def visual_distance(v, w, params, x=None):
    product = boundary_gromov_product(v, w, x)
    if product == math.inf:
        return 0.0
    return math.exp(-params.epsilon * float(product))


def point_gromov_product(x, y, v):
    """
    (y, v)_x for a group element y and a boundary point v.
    """
    depth = max(x.length, y.length) + 1
    u = GroupElement(x.model, v.word(depth))
    return Fraction(distance(x, y) + distance(x, u) - distance(y, u), 2)


def busemann(v, x, y):
    """
    beta_v(x, y) = 2(v, y)_x - d(x, y), exact.

    Parameters:
    - v: BoundaryPoint, Cylinder or word. A cylinder qualifies when beta is constant on
      it, i.e. its word is not a proper prefix of x or y.
    - x, y: GroupElements.
    """
    if x == y:
        return Fraction(0)
    required = max(x.length, y.length) + 1
    word, is_point = _as_word(v, required)
    if not is_point:
        for g in (x, y):
            if len(word) < g.length and g.word[:len(word)] == word:
                raise ResolutionError(f"Busemann function not constant on cylinder "
                                      f"{x.model.format_word(word)}", required)
        word = x.model.canonical_extension(word, max(required, len(word)))
    u = GroupElement(x.model, word)
    return Fraction(distance(x, u) - distance(y, u))


def shadow_direction(x, y):
    """
    Canonical boundary direction w_x^y of the geodesic from x through y: x times the
    canonical extension of x^-1 y.
    """
    if x == y:
        raise DegenerateInputError(f"Shadow direction undefined for y = x = {x}.")
    model = x.model
    u = model.reduce(model.invert_word(x.word) + y.word)
    ray = model.canonical_extension(u, len(u) + x.length + 2)
    return BoundaryPoint(model, model.reduce(x.word + ray))


def radial_defect(v, depth, x=None):
    """
    max over n <= depth of d(g_n, x) - (g_n, v)_x along the prefixes g_n of v.
    """
    model = v.model
    x = x if x is not None else model.identity()
    worst = Fraction(0)
    for n in range(1, depth + 1):
        g = GroupElement(model, v.word(n))
        worst = max(worst, distance(g, x) - point_gromov_product(x, g, v))
    return worst


# -- densities ---------------------------------------------------------------

class ConformalDensity(ABC):
    """
    A Gamma-invariant family {mu_x} of boundary measures, stored through its masses at the
    identity; mu_x(A) = mu_e(x^-1 A).
    """

    def __init__(self, model, basepoint=None, alpha=None, max_depth=64, c_q=1.0):
        self.model = model
        self.basepoint = basepoint if basepoint is not None else model.identity()
        self.alpha = model.alpha if alpha is None else alpha
        self.max_depth = max_depth
        self.c_q = c_q
        self._cache = {}

    @property
    @abstractmethod
    def is_exact(self):
        pass

    @abstractmethod
    def base_mass(self, word):
        pass

    @property
    def is_isotropic(self):
        """
        True when masses depend only on cylinder depth (exact free density at e).
        """
        return False

    def at(self, x):
        """
        The member mu_x of the same family.
        """
        other = copy.copy(self)
        other.basepoint = x
        other._cache = {}
        return other

    def mass(self, word):
        if isinstance(word, Cylinder):
            word = word.word
        word = tuple(word)
        if len(word) > self.max_depth:
            raise ResolutionError(f"Cylinder deeper than the resolved depth {self.max_depth}",
                                  len(word))
        if not self.basepoint.word:
            return self.base_mass(word)
        cached = self._cache.get(word)
        if cached is None:
            inv = self.model.invert_word(self.basepoint.word)
            cached = math.fsum(self.base_mass(img) for img, _ in
                               translate_partition(self.model, inv, [(word, None)]))
            self._cache[word] = cached
        return cached

    def pushforward_mass(self, g, word):
        """
        (g_* mu_x)(cyl) = mu_x(g^-1 cyl).
        """
        inv = self.model.invert_word(g.word)
        return math.fsum(self.mass(img) for img, _ in
                         translate_partition(self.model, inv, [(tuple(word), None)]))

    def total_mass(self):
        return self.mass(())

    def masses(self, depth):
        return {w: self.mass(w) for w in words_of_length(self.model, depth)}

    def describe(self):
        return {"model": self.model.name, "alpha": self.alpha, "delta": float(self.model.delta),
                "C_q": self.c_q, "depth": self.max_depth, "basepoint": str(self.basepoint)}

    def __repr__(self):
        return (f"{type(self).__name__}({self.model.name}, x={self.basepoint}, "
                f"alpha={self.alpha:.6f}, C_q={self.c_q:.4f}, depth={self.max_depth})")


class ExactFreeDensity(ConformalDensity):
    """
    mu_e(cyl w) = (2k)^-1 (2k-1)^-(|w|-1): the unique Gamma-invariant conformal density of
    dimension log(2k-1) on the ends of F_k.
    """

    @property
    def is_exact(self):
        return True

    @property
    def is_isotropic(self):
        return not self.basepoint.word

    def base_mass(self, word):
        if not word:
            return 1.0
        k = self.model.rank
        return math.exp(-math.log(2 * k) - (len(word) - 1) * math.log(2 * k - 1))

    def base_mass_exact(self, word):
        if not word:
            return Fraction(1)
        k = self.model.rank
        return Fraction(1, 2 * k) / Fraction(2 * k - 1) ** (len(word) - 1)


class TabulatedDensity(ConformalDensity):
    """
    Density given by a table of masses at the identity up to depth `max_depth`.
    """

    def __init__(self, model, table, basepoint=None, alpha=None, max_depth=None, c_q=1.0):
        depth = max((len(w) for w in table), default=0) if max_depth is None else max_depth
        super().__init__(model, basepoint, alpha, depth, c_q)
        self.table = dict(table)

    @property
    def is_exact(self):
        return False

    def base_mass(self, word):
        if len(word) > self.max_depth:
            raise ResolutionError("Cylinder deeper than the tabulated depth", len(word))
        return self.table.get(tuple(word), 0.0)


def exact_free_group_density(model, x=None, depth=64):
    if not hasattr(model, "rank"):
        raise ValueError(f"Exact density needs a free group, got {model.name}.")
    return ExactFreeDensity(model, x, max_depth=depth)


def patterson_density(model, x=None, s=None, radius=16, depth=3, short_orbit="split"):
    """
    Normalized orbit sum sum_{|g| <= radius} exp(-s |g|) delta_{g x} pushed to the depth-M
    cylinders of the boundary.

    Parameters:
    - model: The GroupModel.
    - x: Basepoint (identity by default).
    - s: Exponent, must exceed the critical exponent.
    - radius: Ball radius N, at least depth + 5.
    - depth: Resolution M.
    - short_orbit: 'split' spreads the weight of orbit points shorter than M over the
      depth-M cylinders below them in proportion to the weight those cylinders receive
      from longer orbit points; 'direction' pushes it to the cylinder of the canonical
      shadow direction.
    """
    if s is None or s <= model.alpha:
        raise DivergenceError(f"Orbit sum diverges for s={s} <= alpha={model.alpha:.6f}.")
    if radius < depth + 5:
        raise ResolutionError(f"Ball radius {radius} too small for depth {depth}", depth + 5)
    if depth < 1:
        raise ResolutionError("Patterson construction needs depth >= 1", 1)
    modes = {"split": True, "direction": False}
    if short_orbit not in modes:
        raise ValueError(f"Invalid short-orbit mode: {short_orbit}. Choose from {list(modes.keys())}.")

    # weight of all orbit points extending a depth-M word depends only on its last letter
    tail = {}
    for letter in range(model.num_letters):
        tail[letter] = math.fsum(math.exp(-s * ell) * model.continuations(letter, ell - depth)
                                 for ell in range(depth, radius + 1))
    leaves = list(words_of_length(model, depth))
    terms = {w: [tail[w[-1]]] if w else [1.0] for w in leaves}
    main = {w: terms[w][0] for w in leaves}

    for ell in range(depth):
        weight = math.exp(-s * ell)
        for g in words_of_length(model, ell):
            if modes[short_orbit]:
                below = list(words_of_length(model, depth, prefix=g))
                share = math.fsum(main[w] for w in below)
                for w in below:
                    terms[w].append(weight * main[w] / share)
            else:
                terms[model.canonical_extension(g, depth)].append(weight)

    total = math.fsum(v for ts in terms.values() for v in ts)
    table = {w: math.fsum(ts) / total for w, ts in terms.items()}
    for d in range(depth - 1, -1, -1):
        for w in words_of_length(model, d):
            last = w[-1] if w else None
            table[w] = math.fsum(table[w + (c,)] for c in model.allowed_after(last))
    density = TabulatedDensity(model, table, x, model.alpha, depth)
    density.c_q = measure_quasi_conformality(density.at(model.identity()))
    return density


def measure_quasi_conformality(density, max_depth=None):
    """
    Largest ratio defect max(r, 1/r), r = (mu_s(c)/mu_e(c)) / exp(alpha beta_c(e, s)), over
    generators s and cylinders c with both masses resolved. Returns at least 1.
    """
    model = density.model
    e = model.identity()
    family = density.at(e)
    top = (max_depth if max_depth is not None else density.max_depth) - 1
    worst = 1.0
    for gen in model.generators():
        moved = density.at(gen)
        for d in range(1, top + 1):
            for w in words_of_length(model, d):
                if w == gen.word[:d] and d < gen.length:
                    continue
                base = family.mass(w)
                if base <= 0:
                    continue
                target = moved.mass(w)
                if target <= 0:
                    return math.inf
                ratio = target / base / math.exp(density.alpha * float(busemann(w, e, gen)))
                worst = max(worst, ratio, 1.0 / ratio)
    return worst


@dataclass
class AhlforsReport:
    D: float
    k: float
    depth: int
    certified: bool
    worst_word: tuple = ()


def certify_ahlfors_regularity(density, params, depth):
    """
    Smallest k with k^-1 r^D <= mu(B(v, r)) <= k r^D over resolved centers and radii
    r = exp(-epsilon j), j <= depth, where D = alpha/epsilon.

    Visual balls of radius exp(-epsilon j) around a boundary point are the depth-j
    cylinders containing it on both backends; by invariance the scan runs at the identity.
    """
    if depth > density.max_depth:
        raise ResolutionError("Density not resolved for the Ahlfors scan", depth)
    base = density.at(density.model.identity())
    if base.total_mass() <= 0:
        raise DegenerateInputError("Density has empty support.")
    D = density.alpha / params.epsilon
    k, worst = 1.0, ()
    for j in range(depth + 1):
        scale = math.exp(-density.alpha * j)
        for w in words_of_length(density.model, j):
            m = base.mass(w)
            ratio = m / scale
            bound = math.inf if m <= 0 else max(ratio, 1.0 / ratio)
            if bound > k:
                k, worst = bound, w
    return AhlforsReport(D, k, depth, math.isfinite(k), worst)


def check_conformality(density, samples=200, depth=6, seed=0, radius=3):
    """
    Worst relative defect of d mu_y / d mu_x (c) = exp(alpha beta_c(x, y)) on random
    triples (x, y, c) with c a stable cylinder of depth <= depth.
    """
    rng = np.random.default_rng(seed)
    model = density.model
    worst = 0.0
    done = 0
    while done < samples:
        x = random_element(model, int(rng.integers(radius + 1)), rng)
        y = random_element(model, int(rng.integers(radius + 1)), rng)
        c = random_element(model, int(rng.integers(1, depth + 1)), rng).word
        if any(len(c) < g.length and g.word[:len(c)] == c for g in (x, y)):
            continue
        mx = density.at(x).mass(c)
        if mx <= 0:
            continue
        my = density.at(y).mass(c)
        expected = math.exp(density.alpha * float(busemann(c, x, y)))
        worst = max(worst, abs(my / mx - expected) / expected)
        done += 1
    return worst


def free_group_visual_mass(model, y, word):
    """
    mu_y(cyl(word)) on F_k without translating from the identity. A cylinder not containing y
    is the shadow seen from y of the vertex `word`; one containing y is the complement of the
    shadow of its parent.
    """
    if not word:
        return 1.0
    q = 2 * model.rank - 1

    def shadow(d):
        return Fraction(1, q + 1) / Fraction(q) ** (d - 1)

    y = y.word
    k = 0
    while k < min(len(y), len(word)) and y[k] == word[k]:
        k += 1
    if k < len(word):
        return float(shadow(len(y) + len(word) - 2 * k))
    return float(1 - shadow(len(y) - len(word) + 1))


def check_invariance(density, samples=50, depth=6, seed=0, radius=4, reference=None):
    """
    Worst relative defect of g_* mu_x = mu_{g x} on random (g, cylinder) pairs.

    With the default reference mu_{g x} is itself obtained by translation and the defect is 0 by
    construction. reference(y, word) -> mu_y(cyl(word)) supplies an independent mu_y, e.g.
    free_group_visual_mass on F_k.
    """
    rng = np.random.default_rng(seed)
    model = density.model
    x = density.basepoint
    worst = 0.0
    for _ in range(samples):
        g = random_element(model, int(rng.integers(radius + 1)), rng)
        c = random_element(model, int(rng.integers(1, depth + 1)), rng).word
        pushed = density.pushforward_mass(g, c)
        if reference is None:
            direct = density.at(g * x).mass(c)
        else:
            direct = reference(g * x, c)
        worst = max(worst, abs(pushed - direct) / max(direct, 1e-300))
    return worst


# -- serialization -----------------------------------------------------------

def _word_token(model, word):
    # "e" is a generator name on free groups of rank >= 5
    return model.format_word(word) if word else "1"


def save_density(density, path, params=None, depth=None):
    """
    Writes header lines '# key: value' then one 'prefix-word mass' row per cylinder of
    depth <= depth, masses at 17 significant digits.
    """
    depth = density.max_depth if depth is None else depth
    params = params if params is not None else VisualMetricParams.for_model(density.model)
    header = {"model": density.model.name, "alpha": repr(density.alpha),
              "epsilon": repr(params.epsilon), "C_q": repr(density.c_q), "depth": depth,
              "basepoint": _word_token(density.model, density.basepoint.word)}
    with open(path, 'w') as handle:
        for key, value in header.items():
            handle.write(f"# {key}: {value}\n")
        for d in range(depth + 1):
            for w in words_of_length(density.model, d):
                handle.write(f"{_word_token(density.model, w)} {density.mass(w):.17g}\n")


def load_density(path):
    header = {}
    rows = []
    with open(path, 'r') as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].partition(":")
                header[key.strip()] = value.strip()
            else:
                word, mass = line.split()
                rows.append((word, float(mass)))
    missing = {"model", "alpha", "depth"} - header.keys()
    if missing:
        raise HypLabError(f"Density file {path} lacks header fields {sorted(missing)}.")
    model = parse_model(header["model"])
    if model.element(header.get("basepoint", "1")).word:
        raise PreconditionError("Only densities saved at the identity basepoint can be loaded.")
    table = {model.parse_word(w): m for w, m in rows}
    density = TabulatedDensity(model, table, alpha=float(header["alpha"]),
                               max_depth=int(header["depth"]), c_q=float(header.get("C_q", 1.0)))
    return density
