import json
import math

import numpy as np
import pytest

from semigroup_lab.checks import (CheckReport, c0_uniform_convergence_check,
                                  compact_bump, duality_check,
                                  joint_continuity_probe,
                                  positivity_contraction_check,
                                  post_widder_rate_check, reports_to_json,
                                  resolvent_identity_check, run_generator_suite,
                                  run_suite, semigroup_law_check,
                                  suite_exit_code)
from semigroup_lab.elliptic import ExhaustionSchedule, assemble, laplace_field
from semigroup_lab.engine import (ResolventOracle, SemigroupOracle,
                                  random_submarkov_generator)
from semigroup_lab.grids import symmetric_interval_grid
from semigroup_lab.kernels import KernelMatrix


class TestCoreChecks:
    def test_semigroup_law_passes(self, random_generator):
        report = semigroup_law_check(SemigroupOracle(random_generator), (0.1, 0.5))
        assert report.passed
        assert report.worst_residual <= report.tolerance

    def test_resolvent_identity_passes(self, random_generator):
        report = resolvent_identity_check(ResolventOracle(random_generator),
                                          (0.5, 1.0, 2.0))
        assert report.passed

    def test_positivity_contraction_passes(self, random_generator):
        report = positivity_contraction_check(SemigroupOracle(random_generator),
                                              ResolventOracle(random_generator))
        assert report.passed
        assert report.tolerance == 0.0

    def test_duality_passes(self, random_generator, rng):
        kernel = SemigroupOracle(random_generator).matrix(0.5)
        assert duality_check(kernel, rng).passed

    def test_duality_detects_broken_adjoint(self, rng):
        # a kernel checked against itself always passes; a doctored report
        # pipeline must preserve pass = (residual <= tolerance)
        report = duality_check(KernelMatrix(0.5 * np.eye(3)), rng)
        assert report.passed == (report.worst_residual <= report.tolerance)

    def test_post_widder_rate_in_band(self, random_generator):
        report = post_widder_rate_check(ResolventOracle(random_generator),
                                        SemigroupOracle(random_generator), t=1.0)
        assert report.passed

    def test_post_widder_rate_vacuous_on_trivial_generator(self):
        from semigroup_lab.engine import GeneratorMatrix

        gen = GeneratorMatrix(np.zeros((3, 3)))
        report = post_widder_rate_check(ResolventOracle(gen), SemigroupOracle(gen),
                                        t=1.0)
        assert report.passed
        assert "vacuous" in report.notes


class TestJointContinuityProbe:
    def test_smooth_surface_passes(self):
        xs = np.linspace(-1.0, 1.0, 65)
        report = joint_continuity_probe(lambda t, x: math.exp(-t) * math.sin(x),
                                        (0.1, 1.0), xs)
        assert report.passed

    def test_discontinuous_surface_fails(self):
        xs = np.linspace(-1.0, 1.0, 65)
        report = joint_continuity_probe(lambda t, x: float(x >= t - 0.5),
                                        (0.1, 1.0), xs)
        assert not report.passed
        assert report.verdict == "fail"

    def test_constant_surface_trivially_passes(self):
        xs = np.linspace(-1.0, 1.0, 17)
        report = joint_continuity_probe(lambda t, x: 1.0, (0.1, 1.0), xs)
        assert report.passed


class TestC0Convergence:
    def test_laplace_stages_converge_on_bump(self):
        grid = symmetric_interval_grid(6.0, 0.2)
        field = laplace_field()
        stages = [SemigroupOracle(assemble(field, r, grid)) for r in (2.0, 4.0, 6.0)]
        bump = compact_bump(grid.points[:, 0])
        report = c0_uniform_convergence_check(stages[:-1], stages[-1], bump,
                                              t_horizon=0.5, tol=1e-2)
        assert report.passed

    def test_fails_when_limit_mismatched(self):
        grid = symmetric_interval_grid(4.0, 0.2)
        small = SemigroupOracle(assemble(laplace_field(), 1.5, grid))
        big = SemigroupOracle(assemble(laplace_field(), 4.0, grid))
        bump = compact_bump(grid.points[:, 0])
        report = c0_uniform_convergence_check([small], big, bump,
                                              t_horizon=1.0, tol=1e-6)
        assert not report.passed


class TestReportPlumbing:
    def test_json_roundtrip(self, random_generator, rng):
        reports = run_generator_suite(random_generator, rng)
        payload = json.loads(reports_to_json(reports))
        assert [p["name"] for p in payload] == sorted(p["name"] for p in payload)
        for p in payload:
            assert set(p) >= {"name", "passed", "worst_residual", "tolerance",
                              "verdict"}

    def test_exit_codes(self):
        ok = CheckReport("a", True, 0.0, None, 1.0, "pass")
        bad = CheckReport("b", False, 2.0, None, 1.0, "fail")
        odd = CheckReport("c", False, 0.8, None, 0.7, "inconclusive")
        assert suite_exit_code([ok]) == 0
        assert suite_exit_code([ok, bad]) == 2
        assert suite_exit_code([ok, odd]) == 0

    def test_generator_suite_prefix(self, random_generator, rng):
        reports = run_generator_suite(random_generator, rng, prefix="x")
        assert all(r.name.startswith("x:") for r in reports)


class TestCompactBump:
    def test_support(self):
        xs = np.linspace(-3.0, 3.0, 61)
        bump = compact_bump(xs, radius=1.0)
        assert bump[np.abs(xs) >= 1.0].max(initial=0.0) == 0.0
        assert bump[np.abs(xs) < 0.5].min() > 0.0
        assert bump.max() == pytest.approx(1.0)


class TestFullSuite:
    def test_deterministic_and_green(self):
        reports = run_suite(seed=7, sizes=(4, 8), per_size=2)
        assert suite_exit_code(reports) == 0
        again = run_suite(seed=7, sizes=(4, 8), per_size=2)
        assert reports_to_json(reports) == reports_to_json(again)
