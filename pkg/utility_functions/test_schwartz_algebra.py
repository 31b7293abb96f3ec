import sys
import os

# Add the repository root to sys.path
module_path = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
sys.path.append(module_path)

import unittest
import math
import warnings

import numpy as np

from HypLab.group_model import FreeGroup, CyclicFreeProduct, GroupElement, words_of_length
from HypLab.boundary_measure import exact_free_group_density, patterson_density, TabulatedDensity
from HypLab.poisson_kernel import fit_harish_chandra_estimates
from HypLab.schwartz_algebra import (critical_degree, HarishChandraTable, SchwartzElement, schwartz_norm,
                                     convolve, trick2_sum, trick2_constant, check_algebra_closure,
                                     check_l2_boundedness)
from HypLab.errors import EnumerationCapError, ModelMismatchError, ResolutionError


class TestKernelSum(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.model = FreeGroup(2)
        cls.density = exact_free_group_density(cls.model)
        cls.phi = HarishChandraTable(cls.density)

    def test_critical_degree(self):
        self.assertEqual(critical_degree(self.density), 3)
        self.assertEqual(critical_degree(exact_free_group_density(FreeGroup(3))), 3)
        self.assertEqual(self.phi.critical_degree, 3)

    def test_critical_degree_follows_the_density(self):
        table = {w: self.density.mass(w) for d in range(7) for w in words_of_length(self.model, d)}
        fit = fit_harish_chandra_estimates(self.density, 1, 4)
        matched = TabulatedDensity(self.model, table, alpha=self.density.alpha, max_depth=6)
        self.assertEqual(critical_degree(matched, fit), 3)
        self.assertEqual(critical_degree(matched), 3)
        slow = TabulatedDensity(self.model, table, alpha=self.density.alpha - 0.1, max_depth=6)
        self.assertEqual(critical_degree(slow, fit), math.inf)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            report = trick2_sum(slow, self.model.element("a"), 4, 2, fit=fit)
        self.assertFalse(report.convergent)
        self.assertTrue(any(issubclass(w.category, RuntimeWarning) for w in caught))

    def test_critical_degree_on_free_products(self):
        model = CyclicFreeProduct(2, 3)
        density = patterson_density(model, s=model.alpha + 0.05, radius=16, depth=6)
        self.assertEqual(critical_degree(density), 3)
        shallow = patterson_density(model, s=model.alpha + 0.05, radius=16, depth=2)
        with self.assertRaises(ResolutionError):
            critical_degree(shallow)

    def test_ratios_are_stable(self):
        elements = [GroupElement(self.model, self.model.canonical_extension((), n)) for n in range(7)]
        first = [trick2_sum(self.density, g, 4, 12, self.phi).ratio for g in elements]
        second = [trick2_sum(self.density, g, 4, 14, self.phi).ratio for g in elements]
        self.assertLessEqual(max(second) / min(second), 3.0)
        self.assertLess(abs(max(second) - max(first)) / max(first), 0.01)

    def test_ratio_does_not_depend_on_the_element(self):
        """The spherical mean of phi around g is phi(g) phi(n) on a homogeneous tree."""
        ratios = [trick2_sum(self.density, self.model.element(text), 4, 10, self.phi).ratio
                  for text in ("a", "aB", "abAb", "bbbbbb")]
        for r in ratios:
            self.assertAlmostEqual(r / ratios[0], 1.0, places=10)

    def test_divergent_degree(self):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            report = trick2_sum(self.density, self.model.element("ab"), 2, 8, self.phi)
        self.assertFalse(report.convergent)
        self.assertEqual(report.tail, float("inf"))
        self.assertTrue(any(issubclass(w.category, RuntimeWarning) for w in caught))

    def test_enumerated_route_agrees(self):
        table = {w: self.density.mass(w) for d in range(9) for w in words_of_length(self.model, d)}
        tabulated = TabulatedDensity(self.model, table, alpha=self.density.alpha, max_depth=8)
        fit = fit_harish_chandra_estimates(self.density, 1, 4)
        for text in ("a", "B"):
            g = self.model.element(text)
            fast = trick2_sum(self.density, g, 4, 2, self.phi)
            slow = trick2_sum(tabulated, g, 4, 2, fit=fit)
            self.assertAlmostEqual(slow.partial, fast.partial, places=10)

    def test_constant_bounds_every_ratio(self):
        constant, reports = trick2_constant(self.density, 4, 12, 10, self.phi)
        self.assertEqual(len(reports), 11)
        self.assertTrue(all(r.ratio <= constant for r in reports))


class TestSchwartzAlgebra(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.model = FreeGroup(2)
        cls.density = exact_free_group_density(cls.model)
        cls.phi = HarishChandraTable(cls.density)
        cls.t = 4
        cls.constant, _ = trick2_constant(cls.density, cls.t, 12, 10, cls.phi)

    def test_closure(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            f1 = SchwartzElement.random(self.phi, 5, self.t, rng)
            f2 = SchwartzElement.random(self.phi, 5, self.t, rng)
            report = check_algebra_closure(f1, f2, self.t, self.constant)
            self.assertTrue(report.certified)
            self.assertLessEqual(report.measured, report.assembled)

    def test_l2_boundedness(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            f = SchwartzElement.random(self.phi, 4, self.t, rng)
            h = SchwartzElement.random(self.phi, 6, self.t, rng)
            report = check_l2_boundedness(f, h, self.t, self.constant)
            self.assertTrue(report.certified)

    def test_delta_at_identity_is_a_unit(self):
        h = SchwartzElement.random(self.phi, 4, self.t, np.random.default_rng(2))
        e = SchwartzElement.delta(self.phi, self.model.identity(), self.t)
        self.assertEqual(convolve(e, h).coefficients, h.coefficients)
        self.assertEqual(convolve(e, h).l2_norm(), h.l2_norm())
        self.assertEqual(schwartz_norm(e), 1.0)

    def test_star_preserves_the_norm(self):
        f = SchwartzElement.random(self.phi, 5, self.t, np.random.default_rng(7))
        self.assertEqual(schwartz_norm(f.star()), schwartz_norm(f))
        self.assertEqual(f.star().star().coefficients, f.coefficients)

    def test_associativity(self):
        rng = np.random.default_rng(12)
        f1, f2, f3 = (SchwartzElement.random(self.phi, 3, self.t, rng, size=6) for _ in range(3))
        left = convolve(convolve(f1, f2), f3)
        right = convolve(f1, convolve(f2, f3))
        for g in set(left.support()) | set(right.support()):
            self.assertAlmostEqual(left[g], right[g], places=12)

    def test_sphere_indicator(self):
        f = SchwartzElement.sphere_indicator(self.phi, 2, self.t)
        self.assertEqual(len(f.support()), 12)
        self.assertAlmostEqual(sum(f.coefficients.values()), 1.0, places=15)

    def test_model_mismatch(self):
        other = HarishChandraTable(exact_free_group_density(FreeGroup(3)))
        f = SchwartzElement.delta(self.phi, self.model.element("a"), self.t)
        g = SchwartzElement.delta(other, FreeGroup(3).element("a"), self.t)
        with self.assertRaises(ModelMismatchError):
            convolve(f, g)

    def test_cap(self):
        f = SchwartzElement.sphere_indicator(self.phi, 2, self.t)
        with self.assertRaises(EnumerationCapError):
            convolve(f, f, cap=10)


if __name__ == '__main__':
    unittest.main()
