import sys
import os

# Add the repository root to sys.path
module_path = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
sys.path.append(module_path)

import unittest
import math
from fractions import Fraction

from HypLab.group_model import FreeGroup, CyclicFreeProduct, GroupElement
from HypLab.boundary_measure import BoundaryPoint, exact_free_group_density, patterson_density
from HypLab.step_function import StepFunction
from HypLab.poisson_kernel import (free_group_harish_chandra, poisson_kernel_power, p_lambda_transform,
                                   harish_chandra, normalized_poisson, radial_limit_trace,
                                   fit_harish_chandra_estimates, certify_dirac_weierstrass)
from HypLab.errors import ResolutionError, PreconditionError, UnsupportedApproachError


def prefix_level_oracle(density, n):
    """
    phi(a^n) * 3^(n/2) as an exact rational: the kernel P^(1/2) equals 3^((2j-n)/2) on
    the points whose common prefix with a^n has length j.
    """
    model = density.model
    ray = (0,) * n
    total = Fraction(0)
    for j in range(n + 1):
        inside = density.base_mass_exact(ray[:j])
        deeper = density.base_mass_exact(ray[:j + 1]) if j < n else Fraction(0)
        total += (inside - deeper) * Fraction(3) ** j
    return total


class TestHarishChandra(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.model = FreeGroup(2)
        cls.density = exact_free_group_density(cls.model)

    def test_closed_form(self):
        for n in range(21):
            gamma = GroupElement(self.model, (0,) * n)
            exact = (n + 2) * 3 ** (-n / 2) / 2
            self.assertEqual(prefix_level_oracle(self.density, n), Fraction(n + 2, 2))
            self.assertLessEqual(abs(harish_chandra(self.density, gamma) - exact), 1e-10 * exact)
            self.assertAlmostEqual(free_group_harish_chandra(2, n), exact, places=15)

    def test_identity(self):
        self.assertEqual(harish_chandra(self.density, self.model.identity()), 1.0)

    def test_inverse_symmetry(self):
        for text in ("ab", "aBaa", "abAbb"):
            g = self.model.element(text)
            self.assertAlmostEqual(harish_chandra(self.density, g), harish_chandra(self.density, ~g),
                                   delta=1e-12)

    def test_rank_three(self):
        model = FreeGroup(3)
        density = exact_free_group_density(model)
        for n in range(6):
            gamma = GroupElement(model, model.canonical_extension((), n))
            exact = free_group_harish_chandra(3, n)
            self.assertLessEqual(abs(harish_chandra(density, gamma) - exact), 1e-10 * exact)

    def test_bounded_by_one(self):
        model = CyclicFreeProduct(2, 3)
        density = patterson_density(model, s=model.alpha + 0.05, radius=16, depth=6)
        for n in range(1, 6):
            gamma = GroupElement(model, model.canonical_extension((), n))
            self.assertLessEqual(harish_chandra(density, gamma), 1.0 + 1e-12)


class TestPoissonTransform(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.model = FreeGroup(2)
        cls.density = exact_free_group_density(cls.model)

    def test_kernel_power(self):
        e = self.model.identity()
        a = self.model.element("a")
        v = BoundaryPoint.parse(self.model, "b^inf")
        self.assertAlmostEqual(poisson_kernel_power(self.density, e, a, v, self.model.alpha), 1.0 / 3,
                               places=15)
        self.assertEqual(poisson_kernel_power(self.density, a, a, v, 1.0), 1.0)
        with self.assertRaises(ResolutionError):
            poisson_kernel_power(self.density, e, self.model.element("aa"), (0,), 1.0)

    def test_indicator_along_its_ray(self):
        f = StepFunction.indicator(self.density, "a")
        for n in range(1, 12):
            y = GroupElement(self.model, (0,) * n)
            self.assertAlmostEqual(normalized_poisson(self.density, f, y), 1 - 1.5 / (n + 2), places=13)

    def test_normalized_constant(self):
        y = self.model.element("abA")
        self.assertAlmostEqual(normalized_poisson(self.density, 3.0, y), 3.0, places=14)
        self.assertAlmostEqual(normalized_poisson(self.density, 3.0, y, lam=0.3), 3.0, places=14)

    def test_transform_of_one_at_lambda(self):
        """P_lambda 1 at the identity is the total mass for every lambda."""
        e = self.model.identity()
        for lam in (-0.5, 0.0, 0.5):
            self.assertAlmostEqual(p_lambda_transform(self.density, 1.0, e, lam), 1.0, places=15)

    def test_radial_limit_trace(self):
        f = StepFunction.indicator(self.density, "b")
        v = BoundaryPoint.parse(self.model, "b^inf")
        trace = radial_limit_trace(self.density, f, v, range(1, 10))
        self.assertTrue(all(b >= a for a, b in zip(trace, trace[1:])))
        self.assertAlmostEqual(trace[-1], 1 - 1.5 / 11, places=13)


class TestEstimateFit(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.model = FreeGroup(2)
        cls.density = exact_free_group_density(cls.model)

    def test_exact_free_group_fit(self):
        fit = fit_harish_chandra_estimates(self.density, 1, 12)
        self.assertAlmostEqual(fit.q1[0], 0.5, places=10)
        self.assertAlmostEqual(fit.q1[1], 1.0, places=10)
        for n in range(1, 13):
            phi = free_group_harish_chandra(2, n)
            self.assertLessEqual(fit.lower(n), phi * (1 + 1e-10))
            self.assertGreaterEqual(fit.upper(n), phi * (1 - 1e-10))

    def test_patterson_fit(self):
        model = CyclicFreeProduct(2, 3)
        density = patterson_density(model, s=model.alpha + 0.05, radius=16, depth=6)
        fit = fit_harish_chandra_estimates(density, 1, 5, representatives=8)
        self.assertTrue(all(c > 0 for c in fit.q1 + fit.q2))
        self.assertLessEqual(fit.q1[0], fit.q2[0])
        for n in range(1, 6):
            self.assertLessEqual(fit.Q1(n), fit.psi_min[n])
            self.assertGreaterEqual(fit.Q2(n), fit.psi_max[n])

    def test_bad_radii(self):
        with self.assertRaises(PreconditionError):
            fit_harish_chandra_estimates(self.density, 3, 3)


class TestDiracWeierstrass(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.model = FreeGroup(2)
        cls.density = exact_free_group_density(cls.model)
        cls.v0 = BoundaryPoint.parse(cls.model, "a^inf")

    def test_tails(self):
        approach = [GroupElement(self.model, (0,) * j) for j in range(1, 15)]
        report = certify_dirac_weierstrass(self.density, self.v0, math.exp(-0.5), approach)
        self.assertTrue(report.certified)
        for j, tail in zip(range(1, 15), report.tails):
            self.assertAlmostEqual(tail, 1.5 / (j + 2), places=13)
        self.assertFalse(report.below_threshold)

    def test_ball_covering_the_boundary(self):
        approach = [GroupElement(self.model, (0,) * j) for j in range(1, 6)]
        for r in (1.0, 2.0):
            report = certify_dirac_weierstrass(self.density, self.v0, r, approach)
            self.assertEqual(report.tails, [0.0] * 5)
            self.assertTrue(report.certified)
            self.assertTrue(report.below_threshold)

    def test_non_radial_approach(self):
        with self.assertRaises(UnsupportedApproachError):
            certify_dirac_weierstrass(self.density, self.v0, 0.5, [self.model.element("b")])


if __name__ == '__main__':
    unittest.main()
