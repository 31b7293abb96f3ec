# strata.py

from HypLab.dependencies import *

from HypLab.group_model import GroupElement, words_of_length, DEFAULT_ENUMERATION_CAP
from HypLab.step_function import exact_sum
from HypLab.errors import EnumerationCapError


def bridge_word(model, after, before, steps):
    """
    Lexicographically first word m of length `steps` such that after·m·before is in normal
    form, or None when there is none.
    """
    if model.bridge_count(after, before, steps) == 0:
        return None
    word, current = [], after
    for remaining in range(steps, 0, -1):
        for c in model.allowed_after(current):
            if model.bridge_count(c, before, remaining - 1) > 0:
                word.append(c)
                current = c
                break
    return tuple(word)


def sphere_classes(model, length, prefix_depth, suffix_depth):
    """
    Yields (representative, multiplicity) pairs covering the sphere of the given radius.

    Elements sharing their first `prefix_depth` and last `suffix_depth` letters form one
    class; the multiplicities sum to the sphere size. Short spheres are listed element by
    element.
    """
    if length <= prefix_depth + suffix_depth:
        for w in words_of_length(model, length):
            yield GroupElement(model, w), 1
        return
    steps = length - prefix_depth - suffix_depth
    suffixes = list(words_of_length(model, suffix_depth))
    for prefix in words_of_length(model, prefix_depth):
        last = prefix[-1] if prefix else None
        if not suffix_depth:
            middle = model.canonical_extension(prefix, length)[prefix_depth:]
            yield GroupElement(model, prefix + tuple(middle)), model.continuations(last, steps)
            continue
        for suffix in suffixes:
            middle = bridge_word(model, last, suffix[0], steps)
            if middle is None:
                continue
            yield GroupElement(model, prefix + middle + suffix), model.bridge_count(last, suffix[0], steps)


def sphere_terms(density, length, depth=0, cap=DEFAULT_ENUMERATION_CAP, suffix_depth=None):
    """
    (element, multiplicity) pairs for sums over the sphere of a quantity that depends on the
    element only through its first `depth` and last `suffix_depth` (default `depth`) letters.
    Isotropic densities use the class representatives; other densities enumerate the sphere
    subject to `cap`.
    """
    model = density.model
    if density.is_isotropic:
        tail = depth if suffix_depth is None else suffix_depth
        return list(sphere_classes(model, length, depth, tail))
    predicted = model.sphere_size(length)
    if cap is not None and predicted > cap:
        raise EnumerationCapError(predicted, cap)
    return [(GroupElement(model, w), 1) for w in words_of_length(model, length)]


def stratified_sum(density, length, func, depth=0, cap=DEFAULT_ENUMERATION_CAP, executor=None,
                   suffix_depth=None):
    """
    Sum of func(gamma) over the sphere, exactly rounded; complex values stay complex.
    """
    terms = sphere_terms(density, length, depth, cap, suffix_depth)
    values = executor.map(func, [g for g, _ in terms]) if executor else [func(g) for g, _ in terms]
    return exact_sum(m * v for (_, m), v in zip(terms, values))
