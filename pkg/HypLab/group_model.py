# group_model.py

from HypLab.dependencies import *
from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import cached_property, lru_cache
import re

from HypLab.errors import (ModelMismatchError, ModelSpecError, EnumerationCapError,
                           DegenerateInputError)

DEFAULT_ENUMERATION_CAP = 10**7
DELTA_BALL_LIMIT = 600

_PUSH, _CANCEL, _MERGE = "push", "cancel", "merge"


class GroupModel(ABC):
    """
    Base class for exact normal-form models of tree-like hyperbolic groups.

    Letters are small integers; the shortlex order of words is the order induced by the
    letter indices. A normal-form word is a path in the automaton whose transitions are
    given by `allowed_after`.
    """

    @property
    @abstractmethod
    def name(self):
        pass

    @property
    @abstractmethod
    def num_letters(self):
        pass

    @abstractmethod
    def inverse_letter(self, letter):
        pass

    @abstractmethod
    def allowed_after(self, last):
        """
        Letters that may follow `last` in a normal-form word (`last=None` at the start),
        in increasing index order.
        """
        pass

    @abstractmethod
    def combine(self, top, letter):
        """
        Returns (action, letter) for appending `letter` after `top`; action is one of
        'push', 'cancel' or 'merge' (the merged letter replaces `top`).
        """
        pass

    @abstractmethod
    def letter_name(self, letter):
        pass

    @abstractmethod
    def parse_word(self, text):
        pass

    @property
    @abstractmethod
    def alpha(self):
        pass

    @property
    @abstractmethod
    def delta(self):
        pass

    @property
    def upper_gromov_c(self):
        return 0

    # -- words ---------------------------------------------------------------

    def reduce(self, letters):
        """
        Normal form of an arbitrary sequence of letters.
        """
        stack = []
        for letter in letters:
            self._append(stack, letter)
        return tuple(stack)

    def _append(self, stack, letter):
        if not stack:
            stack.append(letter)
            return _PUSH
        action, merged = self.combine(stack[-1], letter)
        if action == _CANCEL:
            stack.pop()
        elif action == _MERGE:
            stack[-1] = merged
        else:
            stack.append(letter)
        return action

    def translate_word(self, g_word, w_word):
        """
        Reduces g·w and reports whether the last letter of w survives the reduction.

        When it survives, left multiplication by g maps the boundary cylinder of w onto the
        cylinder of the returned word.
        """
        stack = list(g_word)
        action = _CANCEL
        for letter in w_word:
            action = self._append(stack, letter)
        return tuple(stack), bool(w_word) and action != _CANCEL

    def invert_word(self, word):
        return tuple(self.inverse_letter(letter) for letter in reversed(word))

    def is_normal(self, word):
        last = None
        for letter in word:
            if letter not in self.allowed_after(last):
                return False
            last = letter
        return True

    def format_word(self, word):
        if not word:
            return "e"
        return "".join(self.letter_name(letter) for letter in word)

    def canonical_extension(self, word, depth):
        """
        Extends `word` to `depth` letters by repeatedly appending the smallest letter that
        keeps the word in normal form.
        """
        out = list(word)
        last = out[-1] if out else None
        while len(out) < depth:
            last = self.allowed_after(last)[0]
            out.append(last)
        return tuple(out)

    # -- elements ------------------------------------------------------------

    def identity(self):
        return GroupElement(self, ())

    def element(self, word):
        if isinstance(word, str):
            word = self.parse_word(word)
        return GroupElement(self, self.reduce(word))

    def generators(self):
        return [GroupElement(self, (letter,)) for letter in self.allowed_after(None)]

    # -- counting ------------------------------------------------------------

    @lru_cache(maxsize=None)
    def continuations(self, last, steps):
        """
        Number of normal-form words of length `steps` that may follow `last`.
        """
        if steps == 0:
            return 1
        return sum(self.continuations(c, steps - 1) for c in self.allowed_after(last))

    @lru_cache(maxsize=None)
    def bridge_count(self, after, before, steps):
        """
        Number of words m of length `steps` such that after·m·before is in normal form.
        """
        if steps == 0:
            return 1 if before in self.allowed_after(after) else 0
        return sum(self.bridge_count(c, before, steps - 1) for c in self.allowed_after(after))

    def sphere_size(self, n):
        return self.continuations(None, n)

    def ball_size(self, n):
        return sum(self.sphere_size(j) for j in range(n + 1))

    def annulus_size(self, n, rho):
        lo, hi = annulus_bounds(n, rho)
        return sum(self.sphere_size(j) for j in range(lo, hi + 1))

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class FreeGroup(GroupModel):
    """
    Free group of rank k on a, b, c, ... with inverses A, B, C, ...

    Letter i < k is a generator and letter i + k its inverse.
    """
    rank: int

    def __post_init__(self):
        if self.rank < 2 or self.rank > 26:
            raise ModelSpecError(f"Invalid free group rank: {self.rank}. Choose 2 <= k <= 26.")

    @property
    def name(self):
        return f"free:{self.rank}"

    @property
    def num_letters(self):
        return 2 * self.rank

    def inverse_letter(self, letter):
        return (letter + self.rank) % (2 * self.rank)

    @lru_cache(maxsize=None)
    def allowed_after(self, last):
        if last is None:
            return tuple(range(2 * self.rank))
        forbidden = self.inverse_letter(last)
        return tuple(c for c in range(2 * self.rank) if c != forbidden)

    def combine(self, top, letter):
        if letter == self.inverse_letter(top):
            return _CANCEL, None
        return _PUSH, letter

    def letter_name(self, letter):
        base = chr(ord('a') + letter % self.rank)
        return base if letter < self.rank else base.upper()

    def parse_word(self, text):
        text = text.replace(" ", "")
        if text in ("", "1") or (text == "e" and self.rank < 5):
            return ()
        if not re.fullmatch(r"([a-zA-Z](\^-?\d+)?)+", text):
            raise ModelSpecError(f"Cannot parse word '{text}' in {self.name}")
        letters = []
        for name, _, power in re.findall(r"([a-zA-Z])(\^(-?\d+))?", text):
            index = ord(name.lower()) - ord('a')
            if index >= self.rank:
                raise ModelSpecError(f"Generator {name} not in {self.name}")
            letter = index if name.islower() else index + self.rank
            power = int(power) if power else 1
            if power < 0:
                letter, power = self.inverse_letter(letter), -power
            letters.extend([letter] * power)
        return self.reduce(letters)

    @property
    def alpha(self):
        return math.log(2 * self.rank - 1)

    @property
    def delta(self):
        return 0


@dataclass(frozen=True)
class CyclicFreeProduct(GroupModel):
    """
    Free product Z_p * Z_q generated by all nontrivial elements of both factors, so that the
    word length of an element is its number of syllables.

    Letters 0..p-2 are x^1..x^(p-1); letters p-1..p+q-3 are y^1..y^(q-1).
    """
    p: int
    q: int

    def __post_init__(self):
        if self.p < 2 or self.q < 2 or (self.p, self.q) == (2, 2):
            raise ModelSpecError(f"Invalid cyclic orders: ({self.p}, {self.q}). "
                                 f"Choose p, q >= 2 with (p, q) != (2, 2).")

    @property
    def name(self):
        return f"zfp:{self.p},{self.q}"

    @property
    def num_letters(self):
        return self.p + self.q - 2

    def factor(self, letter):
        return 0 if letter < self.p - 1 else 1

    def exponent(self, letter):
        return letter + 1 if letter < self.p - 1 else letter - self.p + 2

    def _letter(self, factor, exponent):
        return exponent - 1 if factor == 0 else self.p - 2 + exponent

    def _order(self, factor):
        return self.p if factor == 0 else self.q

    def inverse_letter(self, letter):
        f = self.factor(letter)
        return self._letter(f, self._order(f) - self.exponent(letter))

    @lru_cache(maxsize=None)
    def allowed_after(self, last):
        if last is None:
            return tuple(range(self.num_letters))
        if self.factor(last) == 0:
            return tuple(range(self.p - 1, self.num_letters))
        return tuple(range(self.p - 1))

    def combine(self, top, letter):
        f = self.factor(top)
        if f != self.factor(letter):
            return _PUSH, letter
        total = (self.exponent(top) + self.exponent(letter)) % self._order(f)
        if total == 0:
            return _CANCEL, None
        return _MERGE, self._letter(f, total)

    def letter_name(self, letter):
        base = "x" if self.factor(letter) == 0 else "y"
        e = self.exponent(letter)
        return base if e == 1 else f"{base}{e}"

    def parse_word(self, text):
        text = text.replace(" ", "")
        if text in ("", "1", "e"):
            return ()
        if not re.fullmatch(r"([xy]\d*)+", text):
            raise ModelSpecError(f"Cannot parse word '{text}' in {self.name}")
        letters = []
        for base, e in re.findall(r"([xy])(\d*)", text):
            f = 0 if base == "x" else 1
            e = int(e) if e else 1
            e %= self._order(f)
            if e:
                letters.append(self._letter(f, e))
        return self.reduce(letters)

    @property
    def alpha(self):
        return 0.5 * math.log((self.p - 1) * (self.q - 1))

    @cached_property
    def delta_certificate(self):
        """
        (delta, radius): the largest four-point slack at the identity over the biggest ball
        of radius <= 12 with at most DELTA_BALL_LIMIT elements. Gromov products only see
        which letters coincide and which factor they lie in, so the computation runs on
        Z_min(p,4) * Z_min(q,4).
        """
        pattern = CyclicFreeProduct(min(self.p, 4), min(self.q, 4))
        radius = 1
        while radius < 12 and pattern.ball_size(radius + 1) <= DELTA_BALL_LIMIT:
            radius += 1
        return certify_delta(pattern, radius), radius

    @property
    def delta(self):
        return self.delta_certificate[0]


@dataclass(frozen=True)
class GroupElement:
    model: GroupModel
    word: tuple = ()

    def __post_init__(self):
        if not self.model.is_normal(self.word):
            raise ValueError(f"Word {self.word} is not in normal form for {self.model.name}.")

    @property
    def length(self):
        return len(self.word)

    def __len__(self):
        return len(self.word)

    def __mul__(self, other):
        return multiply(self, other)

    def __invert__(self):
        return GroupElement(self.model, self.model.invert_word(self.word))

    def __pow__(self, n):
        result = self.model.identity()
        base = self if n >= 0 else ~self
        for _ in range(abs(n)):
            result = result * base
        return result

    def __lt__(self, other):
        return (len(self.word), self.word) < (len(other.word), other.word)

    def __str__(self):
        return self.model.format_word(self.word)

    def __repr__(self):
        return f"GroupElement({self.model.name}, {self})"


def parse_model(text):
    """
    Parses a group model string such as "free:2", "free:3" or "zfp:2,3".
    """
    text = text.strip().lower()
    kind, _, params = text.partition(":")
    try:
        if kind == "free":
            return FreeGroup(int(params))
        if kind == "zfp":
            p, q = (int(v) for v in params.split(","))
            return CyclicFreeProduct(p, q)
    except ValueError as exc:
        if isinstance(exc, ModelSpecError):
            raise
        raise ModelSpecError(f"Invalid model parameters in '{text}'.") from exc
    raise ModelSpecError(f"Invalid group model: '{text}'. Choose from ['free:<k>', 'zfp:<p>,<q>'].")


def _same_model(*elements):
    model = elements[0].model
    for g in elements[1:]:
        if g.model != model:
            raise ModelMismatchError(f"Elements belong to different models: {model.name} and {g.model.name}.")
    return model


def multiply(a, b):
    model = _same_model(a, b)
    return GroupElement(model, model.reduce(a.word + b.word))


def distance(a, b):
    model = _same_model(a, b)
    return len(model.reduce(model.invert_word(a.word) + b.word))


def gromov_product(base, y, z):
    """
    (y, z)_base = (d(base, y) + d(base, z) - d(y, z)) / 2 as an exact Fraction.
    """
    _same_model(base, y, z)
    return Fraction(distance(base, y) + distance(base, z) - distance(y, z), 2)


def annulus_bounds(n, rho):
    lo = max(0, math.ceil(n - rho))
    hi = math.floor(n + rho)
    return lo, hi


def words_of_length(model, length, prefix=()):
    """
    Yields every normal-form word of the given length extending `prefix`, in lexicographic
    order.
    """
    if len(prefix) > length:
        return
    stack = [(prefix, 0)]
    while stack:
        word, next_index = stack.pop()
        if len(word) == length:
            yield word
            continue
        options = model.allowed_after(word[-1] if word else None)
        if next_index < len(options):
            stack.append((word, next_index + 1))
            stack.append((word + (options[next_index],), 0))


def enumerate_annulus(model, n, rho=0, cap=DEFAULT_ENUMERATION_CAP, part=None):
    """
    Returns a generator over C_{n,rho} = {g : n - rho <= |g| <= n + rho} in shortlex order.

    Parameters:
    - model: The GroupModel.
    - n, rho: Annulus center and half width.
    - cap: Refuse when more than `cap` elements are predicted.
    - part: Optional (index, parts); yields only the elements whose shortlex rank is
      congruent to index mod parts, so disjoint parts cover the annulus exactly once.
    """
    if n < 0 or rho < 0:
        raise DegenerateInputError(f"Invalid annulus: n={n}, rho={rho}.")
    predicted = model.annulus_size(n, rho)
    if cap is not None and predicted > cap:
        raise EnumerationCapError(predicted, cap)
    lo, hi = annulus_bounds(n, rho)
    index, parts = part if part is not None else (0, 1)

    def _stream():
        rank = 0
        for length in range(lo, hi + 1):
            for word in words_of_length(model, length):
                if rank % parts == index:
                    yield GroupElement(model, word)
                rank += 1

    return _stream()


def enumerate_ball(model, radius, cap=DEFAULT_ENUMERATION_CAP):
    return enumerate_annulus(model, radius / 2, radius / 2, cap=cap)


def estimate_critical_exponent(model, radius):
    """
    Growth-rate estimate of the sphere counts.

    The raw estimate log|C_r|/r converges slowly; the returned value is the two-step ratio
    log(|C_r|/|C_{r-2}|)/2, which is exact for both backends.
    """
    if radius < 5:
        raise DegenerateInputError(f"Radius {radius} too small for a growth estimate; use radius >= 5.")
    return 0.5 * math.log(model.sphere_size(radius) / model.sphere_size(radius - 2))


def raw_growth_estimate(model, radius):
    if radius < 1:
        raise DegenerateInputError(f"Radius {radius} too small for a growth estimate.")
    return math.log(model.sphere_size(radius)) / radius


def certify_delta(model, radius):
    """
    Largest slack min((y,u)_e, (u,z)_e) - (y,z)_e over all y, z, u in the ball of the given
    radius. By left invariance the identity is the only base point needed.
    """
    ball = [GroupElement(model, w) for length in range(radius + 1)
            for w in words_of_length(model, length)]
    e = model.identity()
    # twice the Gromov product, kept integral
    products = np.array([[distance(e, y) + distance(e, z) - distance(y, z) for z in ball]
                         for y in ball], dtype=np.int64)
    worst = 0
    for row in products:
        best_via_u = np.minimum(row[:, None], products).max(axis=0)
        worst = max(worst, int((best_via_u - row).max()))
    return Fraction(worst, 2)


def random_element(model, length, rng):
    """
    Uniformly random element of the sphere of radius `length`. Each letter is drawn with
    weight equal to the number of normal-form words completing it.

    Parameters:
    - rng: numpy Generator (np.random.default_rng(seed)).
    """
    word = []
    last = None
    for remaining in range(length, 0, -1):
        options = model.allowed_after(last)
        counts = np.cumsum([model.continuations(c, remaining - 1) for c in options])
        draw = int(rng.integers(int(counts[-1])))
        last = options[int(np.searchsorted(counts, draw, side="right"))]
        word.append(last)
    return GroupElement(model, tuple(word))
