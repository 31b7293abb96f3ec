import sys
import os

# Add the repository root to sys.path
module_path = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
sys.path.append(module_path)

import unittest

import numpy as np

from HypLab.group_model import FreeGroup
from HypLab.boundary_measure import BoundaryPoint, exact_free_group_density
from HypLab.step_function import StepFunction, exact_sum
from HypLab.errors import ResolutionError


class TestStepFunction(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.model = FreeGroup(2)
        cls.density = exact_free_group_density(cls.model)
        cls.rng = np.random.default_rng(3)

    def test_indicator(self):
        f = StepFunction.indicator(self.density, "ab")
        self.assertAlmostEqual(f.integral(), 1.0 / 12, places=15)
        self.assertEqual(f.value_at(BoundaryPoint.parse(self.model, "ab(a)^inf")), 1.0)
        self.assertEqual(f.value_at(BoundaryPoint.parse(self.model, "b^inf")), 0.0)
        self.assertEqual(f.depth, 2)

    def test_norms_of_constant(self):
        one = StepFunction.constant(self.density)
        self.assertEqual(one.integral(), 1.0)
        self.assertEqual(one.norm_l1(), 1.0)
        self.assertEqual(one.norm_l2(), 1.0)
        self.assertEqual(one.norm_sup(), 1.0)

    def test_inner_product_matches_norm(self):
        f = StepFunction.random(self.density, 3, self.rng, nonnegative=False)
        self.assertAlmostEqual(f.inner(f), f.norm_l2() ** 2, places=14)

    def test_complex_inner_product(self):
        f = StepFunction.random(self.density, 2, self.rng, complex_values=True)
        value = f.inner(f)
        self.assertIsInstance(value, complex)
        self.assertAlmostEqual(value.imag, 0.0, places=14)
        self.assertAlmostEqual(value.real, f.norm_l2() ** 2, places=14)

    def test_algebra_on_common_refinement(self):
        f = StepFunction.indicator(self.density, "a")
        g = StepFunction.indicator(self.density, "aa")
        self.assertAlmostEqual((f * g).integral(), 1.0 / 12, places=15)
        self.assertAlmostEqual((f - g).integral(), 0.25 - 1.0 / 12, places=15)
        self.assertAlmostEqual((f + g).norm_sup(), 2.0, places=15)
        self.assertAlmostEqual((f / 4).integral(), 1.0 / 16, places=15)

    def test_translation_is_measure_preserving(self):
        f = StepFunction.random(self.density, 3, self.rng)
        g = self.model.element("aB")
        moved = f.translate(g).with_density(self.density.at(g))
        self.assertAlmostEqual(moved.integral(), f.integral(), places=14)

    def test_refinement(self):
        f = StepFunction.indicator(self.density, "a")
        fine = f.refined(3)
        self.assertEqual(len(fine.atoms()), self.model.sphere_size(3))
        self.assertAlmostEqual(fine.integral(), f.integral(), places=15)
        with self.assertRaises(ResolutionError):
            fine.refined(2)

    def test_nonnegativity(self):
        self.assertTrue(StepFunction.random(self.density, 2, self.rng).is_nonnegative())
        self.assertFalse((StepFunction.constant(self.density) * -1.0).is_nonnegative())

    def test_exact_sum(self):
        self.assertEqual(exact_sum([1e16, 1.0, -1e16]), 1.0)
        self.assertEqual(exact_sum([1j, 2.0]), complex(2.0, 1.0))


if __name__ == '__main__':
    unittest.main()
