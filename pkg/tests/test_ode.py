import numpy as np
import pytest

from cdfilter import (
    MaxStepsExceeded,
    OdeProblem,
    SingularFactor,
    SolverSpec,
    integrate,
    order_of_accuracy,
)


def _decay(lam=-1.0):
    return OdeProblem(dim=1, rhs=lambda t, y: lam * y, t0=0.0, t1=1.0,
                      y0=np.array([1.0]))


class TestFixedSteppers:
    def test_rk1_single_step_decay(self):
        y, stats = integrate(_decay(), SolverSpec(kind="fixed-rk1", steps=1))
        np.testing.assert_allclose(y, [0.0], atol=1e-15)
        assert stats.rhs_evals == 1

    def test_rk2_midpoint_single_step(self):
        # midpoint on y' = -y over one unit step: 1 - 1 + 1/2
        y, stats = integrate(_decay(), SolverSpec(kind="fixed-rk2", steps=1))
        np.testing.assert_allclose(y, [0.5], atol=1e-15)
        assert stats.rhs_evals == 2

    def test_rk4_single_step_matches_truncated_exponential(self):
        y, _ = integrate(_decay(), SolverSpec(kind="fixed-rk4", steps=1))
        np.testing.assert_allclose(y, [1 - 1 + 0.5 - 1 / 6 + 1 / 24], atol=1e-15)

    def test_rk4_eval_count(self):
        _, stats = integrate(_decay(), SolverSpec(kind="fixed-rk4", steps=13))
        assert stats.rhs_evals == 4 * 13
        assert stats.accepted_steps == 13

    def test_rk4_error_ratio(self):
        exact = np.exp(-1.0)
        e = []
        for m in (16, 32):
            y, _ = integrate(_decay(), SolverSpec(kind="fixed-rk4", steps=m))
            e.append(abs(y[0] - exact))
        assert 12.0 <= e[0] / e[1] <= 20.0

    def test_quadrature_is_exact_for_rk4(self):
        # rhs polynomial of degree <= 3 in t is integrated exactly
        prob = OdeProblem(dim=1, rhs=lambda t, y: np.array([t ** 3]),
                          t0=0.0, t1=2.0, y0=np.array([0.0]))
        y, _ = integrate(prob, SolverSpec(kind="fixed-rk4", steps=3))
        np.testing.assert_allclose(y, [4.0], rtol=1e-13)

    def test_zero_span(self):
        prob = OdeProblem(dim=2, rhs=lambda t, y: y, t0=1.0, t1=1.0,
                          y0=np.array([3.0, 4.0]))
        y, stats = integrate(prob, SolverSpec(kind="fixed-rk4", steps=5))
        np.testing.assert_array_equal(y, [3.0, 4.0])
        assert stats.rhs_evals == 0

    def test_reversed_interval_rejected(self):
        with pytest.raises(ValueError):
            OdeProblem(dim=1, rhs=lambda t, y: y, t0=1.0, t1=0.0, y0=np.array([1.0]))


class TestAdaptive:
    def test_tolerance_is_met(self):
        for tol in (1e-6, 1e-10):
            spec = SolverSpec(kind="adaptive-embedded", abs_tol=tol, rel_tol=tol)
            y, _ = integrate(_decay(), spec)
            assert abs(y[0] - np.exp(-1.0)) <= 100 * tol

    def test_stiff_direction_uses_more_steps(self):
        spec = SolverSpec(kind="adaptive-embedded", abs_tol=1e-9, rel_tol=1e-9)
        _, slow = integrate(_decay(-1.0), spec)
        _, fast = integrate(_decay(-40.0), spec)
        assert fast.accepted_steps > slow.accepted_steps

    def test_split_invariance(self):
        tol = 1e-9
        spec = SolverSpec(kind="adaptive-embedded", abs_tol=tol, rel_tol=tol)
        rhs = lambda t, y: np.array([np.sin(t) * y[0], y[0] - y[1]])
        whole = OdeProblem(dim=2, rhs=rhs, t0=0.0, t1=3.0, y0=np.array([1.0, 0.0]))
        y_whole, _ = integrate(whole, spec)
        y = np.array([1.0, 0.0])
        for (a, b) in ((0.0, 1.2), (1.2, 1.9), (1.9, 3.0)):
            y, _ = integrate(OdeProblem(dim=2, rhs=rhs, t0=a, t1=b, y0=y), spec)
        assert np.linalg.norm(y - y_whole) <= 10 * tol

    def test_recoverable_failure_halves_step(self):
        # rhs raises on any step that lands beyond t=0.5 with too large h;
        # the integrator must retry with smaller steps and still finish.
        calls = {"fail": 0}

        def rhs(t, y):
            if t > 0.5 and calls["fail"] < 3:
                calls["fail"] += 1
                raise SingularFactor("transient")
            return -y

        prob = OdeProblem(dim=1, rhs=rhs, t0=0.0, t1=1.0, y0=np.array([1.0]))
        y, stats = integrate(prob, SolverSpec(kind="adaptive-embedded",
                                              abs_tol=1e-8, rel_tol=1e-8))
        assert calls["fail"] == 3
        assert stats.rejected_steps >= 3
        np.testing.assert_allclose(y, [np.exp(-1.0)], atol=1e-6)

    def test_persistent_failure_propagates(self):
        def rhs(t, y):
            raise SingularFactor("always")

        prob = OdeProblem(dim=1, rhs=rhs, t0=0.0, t1=1.0, y0=np.array([1.0]))
        with pytest.raises(SingularFactor):
            integrate(prob, SolverSpec(kind="adaptive-embedded"))

    def test_max_steps_enforced(self):
        prob = _decay(-1000.0)
        with pytest.raises(MaxStepsExceeded):
            integrate(prob, SolverSpec(kind="adaptive-embedded", abs_tol=1e-13,
                                       rel_tol=1e-13, max_steps=5))


class TestOrderOfAccuracy:
    def test_orders_on_smooth_nonlinear_problem(self):
        prob = OdeProblem(dim=1, rhs=lambda t, y: np.array([y[0] * np.cos(t)]),
                          t0=0.0, t1=2.0, y0=np.array([1.0]))
        p1 = order_of_accuracy(prob, "fixed-rk1", [40, 80, 160, 320])
        p2 = order_of_accuracy(prob, "fixed-rk2", [20, 40, 80, 160])
        p4 = order_of_accuracy(prob, "fixed-rk4", [5, 10, 20, 40],
                               error_floor=1e-12)
        assert abs(p1 - 1.0) <= 0.25
        assert abs(p2 - 2.0) <= 0.25
        assert abs(p4 - 4.0) <= 0.35

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            SolverSpec(kind="fixed-rk3")
