import sys
import os

# Add the repository root to sys.path
module_path = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
sys.path.append(module_path)

import unittest

import numpy as np

from HypLab.group_model import FreeGroup, CyclicFreeProduct, random_element
from HypLab.boundary_measure import exact_free_group_density, patterson_density
from HypLab.step_function import StepFunction
from HypLab.poisson_kernel import harish_chandra
from HypLab.boundary_rep import (act, matrix_coefficient, check_cs_poisson, intertwiner,
                                 intertwiner_distortion, check_weak_inequality)
from HypLab.executor import make_executor
from HypLab.errors import PreconditionError


class TestRepresentation(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.model = FreeGroup(2)
        cls.density = exact_free_group_density(cls.model)
        cls.rng = np.random.default_rng(11)

    def test_unitary(self):
        for _ in range(20):
            gamma = random_element(self.model, int(self.rng.integers(1, 6)), self.rng)
            f = StepFunction.random(self.density, 3, self.rng, nonnegative=False)
            self.assertAlmostEqual(act(self.density, gamma, f).norm_l2(), f.norm_l2(), places=12)

    def test_homomorphism(self):
        f = StepFunction.random(self.density, 2, self.rng)
        g = self.model.element("ab")
        h = self.model.element("Ba")
        twice = act(self.density, g, act(self.density, h, f))
        once = act(self.density, g * h, f)
        self.assertLess((twice - once).norm_l2(), 1e-12)

    def test_identity_acts_trivially(self):
        f = StepFunction.random(self.density, 2, self.rng)
        self.assertIs(act(self.density, self.model.identity(), f), f)

    def test_positivity(self):
        f = StepFunction.random(self.density, 3, self.rng)
        gamma = self.model.element("abAb")
        self.assertTrue(act(self.density, gamma, f).is_nonnegative())

    def test_coefficient_symmetry(self):
        one = StepFunction.constant(self.density)
        for text in ("a", "abb", "aBAb"):
            gamma = self.model.element(text)
            left = matrix_coefficient(self.density, gamma, one, one)
            right = matrix_coefficient(self.density, ~gamma, one, one)
            self.assertAlmostEqual(left, right, places=14)
            self.assertAlmostEqual(left, harish_chandra(self.density, gamma), places=14)


class TestCauchySchwarz(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.model = FreeGroup(2)
        cls.density = exact_free_group_density(cls.model)

    def test_random_triples(self):
        rng = np.random.default_rng(0)
        for _ in range(500):
            gamma = random_element(self.model, int(rng.integers(7)), rng)
            xi = StepFunction.random(self.density, 4, rng)
            eta = StepFunction.random(self.density, 4, rng)
            report = check_cs_poisson(self.density, gamma, xi, eta)
            self.assertTrue(report.holds)

    def test_equality_for_constants(self):
        one = StepFunction.constant(self.density)
        report = check_cs_poisson(self.density, self.model.element("abA"), one, one)
        self.assertAlmostEqual(report.left, 1.0, places=12)
        self.assertAlmostEqual(report.right, 1.0, places=12)

    def test_rejects_signed_input(self):
        one = StepFunction.constant(self.density)
        with self.assertRaises(PreconditionError):
            check_cs_poisson(self.density, self.model.element("a"), one * -1.0, one)


class TestIntertwiner(unittest.TestCase):

    def test_isometry_on_exact_backend(self):
        model = FreeGroup(2)
        density = exact_free_group_density(model)
        f = StepFunction.random(density, 3, np.random.default_rng(5))
        for x_prime in ("a", "bA", "aab"):
            ratio = intertwiner_distortion(density, model.identity(), model.element(x_prime), f)
            self.assertAlmostEqual(ratio, 1.0, places=12)

    def test_same_basepoint(self):
        model = FreeGroup(2)
        density = exact_free_group_density(model)
        f = StepFunction.indicator(density, "a")
        moved = intertwiner(density, model.identity(), model.identity(), f)
        self.assertEqual(moved.values, f.values)

    def test_intertwining_relation(self):
        model = FreeGroup(2)
        density = exact_free_group_density(model)
        e = model.identity()
        f = StepFunction.random(density, 2, np.random.default_rng(11), nonnegative=False)
        for x_prime in (model.element("a"), model.element("bA")):
            moved = density.at(x_prime)
            for text in ("b", "ab", "Ba", "abAb"):
                gamma = model.element(text)
                left = act(moved, gamma, intertwiner(density, e, x_prime, f))
                right = intertwiner(density, e, x_prime, act(density, gamma, f))
                difference = left - right
                scale = max(1.0, left.norm_sup())
                self.assertLess(max(abs(v) for v in difference.values.values()), 1e-12 * scale)

    def test_distortion_on_patterson_backend(self):
        model = CyclicFreeProduct(2, 3)
        density = patterson_density(model, s=model.alpha + 0.05, radius=16, depth=6)
        f = StepFunction.random(density, 2, np.random.default_rng(5))
        ratio = intertwiner_distortion(density, model.identity(), model.element("x"), f)
        self.assertAlmostEqual(ratio, 1.0, places=12)


class TestWeakInequality(unittest.TestCase):

    def test_ball_scan(self):
        model = FreeGroup(2)
        density = exact_free_group_density(model)
        f = StepFunction.indicator(density, "a")
        g = StepFunction.random(density, 2, np.random.default_rng(9))
        report = check_weak_inequality(density, f, g, 6)
        self.assertTrue(report.holds)
        self.assertLess(report.checked, model.ball_size(6))

    def test_parallel_scan_matches_serial(self):
        model = FreeGroup(2)
        density = exact_free_group_density(model)
        f = StepFunction.indicator(density, "ab")
        g = StepFunction.indicator(density, "B")
        serial = check_weak_inequality(density, f, g, 5)
        with make_executor(4) as executor:
            parallel = check_weak_inequality(density, f, g, 5, executor)
        self.assertEqual(serial, parallel)


if __name__ == '__main__':
    unittest.main()
