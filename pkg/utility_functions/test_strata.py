import sys
import os

# Add the repository root to sys.path
module_path = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
sys.path.append(module_path)

import unittest
import math

from HypLab.group_model import FreeGroup, CyclicFreeProduct, GroupElement, words_of_length
from HypLab.boundary_measure import exact_free_group_density
from HypLab.step_function import StepFunction
from HypLab.boundary_rep import matrix_coefficient
from HypLab.strata import bridge_word, sphere_classes, sphere_terms, stratified_sum
from HypLab.errors import EnumerationCapError


class TestSphereClasses(unittest.TestCase):

    def test_multiplicities_cover_the_sphere(self):
        for model in (FreeGroup(2), FreeGroup(3), CyclicFreeProduct(2, 3)):
            for length in range(9):
                for p, s in ((0, 0), (1, 0), (2, 1), (2, 2)):
                    total = sum(m for _, m in sphere_classes(model, length, p, s))
                    self.assertEqual(total, model.sphere_size(length), (model.name, length, p, s))

    def test_representatives_have_the_right_length(self):
        model = FreeGroup(2)
        for gamma, _ in sphere_classes(model, 7, 2, 2):
            self.assertEqual(gamma.length, 7)

    def test_bridge_word(self):
        model = FreeGroup(2)
        a, big_a = 0, 2
        middle = bridge_word(model, a, a, 3)
        self.assertEqual(len(middle), 3)
        self.assertTrue(model.is_normal((a,) + middle + (a,)))
        self.assertIsNone(bridge_word(model, a, big_a, 0))

    def test_class_sum_matches_enumeration(self):
        """A function of the first two and last two letters summed both ways."""
        model = FreeGroup(2)

        def func(gamma):
            w = gamma.word
            return (1 + w[0]) * 10 + (1 + w[1]) + 0.01 * (w[-1] + 3 * w[-2])

        for length in (5, 6):
            classes = math.fsum(m * func(g) for g, m in sphere_classes(model, length, 2, 2))
            direct = math.fsum(func(GroupElement(model, w)) for w in words_of_length(model, length))
            self.assertAlmostEqual(classes, direct, places=8)


class TestStratifiedSum(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.model = FreeGroup(2)
        cls.density = exact_free_group_density(cls.model)

    def test_matrix_coefficients_both_routes(self):
        f = StepFunction.indicator(self.density, "a")
        g = StepFunction.indicator(self.density, "Bb")
        term = lambda gamma: matrix_coefficient(self.density, gamma, f, g) ** 2
        for length in (4, 5):
            fast = stratified_sum(self.density, length, term, depth=2)
            slow = math.fsum(term(GroupElement(self.model, w)) for w in words_of_length(self.model, length))
            self.assertAlmostEqual(fast, slow, places=14)

    def test_cap_on_enumeration_route(self):
        moved = self.density.at(self.model.element("a"))
        with self.assertRaises(EnumerationCapError):
            sphere_terms(moved, 6, depth=1, cap=100)


if __name__ == '__main__':
    unittest.main()
