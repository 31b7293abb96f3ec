# step_function.py

from HypLab.dependencies import *

from HypLab.boundary_measure import BoundaryPoint, Cylinder, refine, translate_partition
from HypLab.group_model import words_of_length
from HypLab.errors import ResolutionError


def exact_sum(values):
    """
    Correctly rounded sum (math.fsum) that keeps complex values complex.
    """
    values = list(values)
    if any(isinstance(v, complex) for v in values):
        return complex(math.fsum(v.real for v in values), math.fsum(v.imag for v in values))
    return math.fsum(values)


class StepFunction:
    """
    A boundary function constant on the atoms of a finite cylinder partition.

    `values` maps the words of a prefix-free set of cylinders covering the boundary to
    numbers; norms are taken with respect to mu_x, x the basepoint of `density`.
    """

    def __init__(self, density, values):
        self.density = density
        self.model = density.model
        self.values = dict(sorted(values.items(), key=lambda item: (len(item[0]), item[0])))

    # -- constructors ----------------------------------------------------------

    @classmethod
    def constant(cls, density, value=1.0):
        return cls(density, {(): value})

    @classmethod
    def indicator(cls, density, word, value=1.0):
        if isinstance(word, str):
            word = density.model.parse_word(word)
        word = tuple(word)
        atoms = refine(density.model, [word])
        return cls(density, {a: (value if a[:len(word)] == word else 0.0) for a in atoms})

    @classmethod
    def from_function(cls, density, depth, func):
        """
        Step function on the uniform depth-`depth` partition with value func(word).
        """
        return cls(density, {w: func(w) for w in words_of_length(density.model, depth)})

    @classmethod
    def random(cls, density, depth, rng, nonnegative=True, complex_values=False):
        """
        Random values on the depth-`depth` atoms.

        Parameters:
        - rng: numpy Generator; the values depend only on its state.
        """
        words = list(words_of_length(density.model, depth))
        if nonnegative:
            vals = rng.random(len(words))
        else:
            vals = rng.standard_normal(len(words))
        if complex_values:
            vals = vals + 1j * rng.standard_normal(len(words))
            return cls(density, {w: complex(v) for w, v in zip(words, vals)})
        return cls(density, {w: float(v) for w, v in zip(words, vals)})

    def with_density(self, density):
        return StepFunction(density, self.values)

    # -- evaluation ------------------------------------------------------------

    @property
    def depth(self):
        return max(len(w) for w in self.values)

    def atoms(self):
        return list(self.values)

    def value_at(self, v):
        """
        Value at a BoundaryPoint, or on a cylinder word lying inside a single atom.
        """
        if isinstance(v, BoundaryPoint):
            word = v.word(self.depth)
        elif isinstance(v, Cylinder):
            word = v.word
        else:
            word = tuple(v)
        for j in range(len(word) + 1):
            value = self.values.get(word[:j])
            if value is not None:
                return value
        raise ResolutionError(f"Cylinder {self.model.format_word(word)} is not inside one atom",
                              self.depth)

    def on(self, atoms):
        return [self.value_at(a) for a in atoms]

    def refined(self, depth):
        """
        Same function on the uniform partition of the given depth (depth >= self.depth).
        """
        if depth < self.depth:
            raise ResolutionError("Refinement cannot coarsen a step function", self.depth)
        return StepFunction(self.density, {w: self.value_at(w)
                                           for w in words_of_length(self.model, depth)})

    def common_atoms(self, *others):
        words = list(self.values)
        for other in others:
            words.extend(other.values)
        return refine(self.model, words)

    # -- algebra ---------------------------------------------------------------

    def combine(self, other, op):
        if not isinstance(other, StepFunction):
            return StepFunction(self.density, {w: op(v, other) for w, v in self.values.items()})
        atoms = self.common_atoms(other)
        return StepFunction(self.density, {a: op(self.value_at(a), other.value_at(a)) for a in atoms})

    def map(self, func):
        return StepFunction(self.density, {w: func(v) for w, v in self.values.items()})

    def __add__(self, other):
        return self.combine(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self.combine(other, lambda a, b: a - b)

    def __mul__(self, other):
        return self.combine(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self.map(lambda v: v / c)

    def conjugate(self):
        return self.map(lambda v: v.conjugate() if isinstance(v, complex) else v)

    def translate(self, g):
        """
        The function v -> f(g^-1 v).
        """
        return StepFunction(self.density, dict(translate_partition(self.model, g.word,
                                                                   self.values.items())))

    def is_nonnegative(self):
        return all((v.real if isinstance(v, complex) else v) >= 0 and
                   (not isinstance(v, complex) or v.imag == 0) for v in self.values.values())

    # -- norms -------------------------------------------------------------------

    def integral(self):
        return exact_sum(v * self.density.mass(w) for w, v in self.values.items())

    def norm_l1(self):
        return math.fsum(abs(v) * self.density.mass(w) for w, v in self.values.items())

    def norm_l2(self):
        return math.sqrt(math.fsum(abs(v) ** 2 * self.density.mass(w)
                                   for w, v in self.values.items()))

    def norm_sup(self):
        return max(abs(v) for w, v in self.values.items() if self.density.mass(w) > 0)

    def inner(self, other):
        """
        <f, g> = integral of f conj(g) d mu_x.
        """
        atoms = self.common_atoms(other)
        terms = []
        for a in atoms:
            g = other.value_at(a)
            g = g.conjugate() if isinstance(g, complex) else g
            terms.append(self.value_at(a) * g * self.density.mass(a))
        return exact_sum(terms)

    def __repr__(self):
        return f"StepFunction(atoms={len(self.values)}, depth={self.depth})"
