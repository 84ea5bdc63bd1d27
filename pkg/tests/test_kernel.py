import math

import numpy as np
import pytest

from parakern import oracle
from parakern.errors import ParameterError, StructureError
from parakern.kernel import (KernelField, delta_property, eval_kernel,
                             kernel_gradient, kernel_log_gradient,
                             normal_derivative, normalization_check, residual,
                             varadhan_diag)
from parakern.polyalg import FourierEntry, PolyEntry, TimeEntry
from parakern.recursion import (ProblemCoefficients, WarpParams, expand,
                                select_beta, tau_of_t)

SIN_DRIFT = FourierEntry(1, ((0.3, (1.0,), 0.0),))
PC_SIN = ProblemCoefficients(1, 1, {(0, 0, 0): SIN_DRIFT})
PC_ZERO = ProblemCoefficients(1, 1, {})
PC_CONST = ProblemCoefficients(1, 1, {(0, 0, 0): PolyEntry(1, ((0.7, (0,)),))})


# ---------------------------------------------------------------------------
# eval_kernel
# ---------------------------------------------------------------------------

def test_gaussian_normalization_point():
    exp = expand(PC_ZERO, [0.0], 0)
    t = 1.0 / (4.0 * math.pi)
    kv = eval_kernel(exp, t, [0.0], [0.0])
    assert kv.value == pytest.approx(1.0, rel=1e-14)


def test_const_drift_matches_oracle():
    exp = expand(PC_CONST, [0.0], 2)
    for t in (0.1, 0.5, 1.0):
        for x in np.linspace(-1, 1, 7):
            kv = eval_kernel(exp, t, [x])
            ref = oracle.exact_const_drift_kernel(0.7, 0.0, t, x, 0.0)
            assert kv.value == pytest.approx(ref, rel=1e-12)


def test_time_dependent_drift_matches_oracle():
    entry = TimeEntry(((0, PolyEntry(1, ((0.3, (0,)),))),
                       (1, PolyEntry(1, ((0.5, (0,)),)))))
    pc = ProblemCoefficients(1, 1, {(0, 0, 0): entry})
    exp = expand(pc, [0.0], 4)
    kv = eval_kernel(exp, 0.4, [-0.2])
    ref = oracle.exact_const_drift_kernel(0.3, 0.5, 0.4, -0.2, 0.0)
    assert kv.value == pytest.approx(ref, rel=1e-10)


def test_eval_rejects_nonpositive_time_with_delta_note():
    exp = expand(PC_ZERO, [0.0], 1)
    with pytest.raises(ParameterError, match="delta"):
        eval_kernel(exp, 0.0, [0.1])


def test_eval_rejects_mismatched_center():
    exp = expand(PC_ZERO, [0.0], 1)
    with pytest.raises(StructureError):
        eval_kernel(exp, 0.1, [0.1], y=[0.5])


def test_positivity_on_probes():
    exp = expand(PC_SIN, [0.0], 6, WarpParams(), 12)
    rng = np.random.default_rng(12)
    for _ in range(50):
        kv = eval_kernel(exp, rng.uniform(0.01, 0.5), [rng.uniform(-1, 1)])
        assert kv.value > 0.0
        assert math.isfinite(kv.log_value)


# ---------------------------------------------------------------------------
# gradients
# ---------------------------------------------------------------------------

def test_gradient_vanishes_at_center_without_drift():
    exp = expand(PC_ZERO, [0.3], 2)
    g = kernel_gradient(exp, 0.2, [0.3])
    assert np.allclose(g, 0.0, atol=1e-15)


def test_gradient_matches_finite_differences():
    exp = expand(PC_SIN, [0.0], 6, WarpParams(), 12)
    rng = np.random.default_rng(13)
    h = 1e-5
    for _ in range(100):
        t = rng.uniform(0.02, 0.3)
        x = rng.uniform(-0.8, 0.8)
        g = kernel_gradient(exp, t, [x])[0]
        fd = (eval_kernel(exp, t, [x + h]).value
              - eval_kernel(exp, t, [x - h]).value) / (2 * h)
        assert g == pytest.approx(fd, rel=1e-6)


def test_const_drift_log_gradient_closed_form():
    exp = expand(PC_CONST, [0.0], 2)
    t, x = 0.4, 0.3
    lg = kernel_log_gradient(exp, t, [x])[0]
    assert lg == pytest.approx(-x / (2 * t) - 0.7 / 2, rel=1e-13)


def test_normal_derivative_definition():
    exp = expand(PC_SIN, [0.4], 4)
    t, x = 0.1, 0.0
    grad = kernel_gradient(exp, t, [x])
    assert normal_derivative(exp, t, [x], None, [-1.0]) == \
        pytest.approx(-grad[0], rel=1e-14)
    # unit-normal precondition
    with pytest.raises(ParameterError):
        normal_derivative(exp, t, [x], None, [2.0])
    # direction orthogonal to the gradient (2D) gives zero
    pc2 = ProblemCoefficients(2, 1, {})
    exp2 = expand(pc2, [0.0, 0.0], 1)
    g2 = kernel_gradient(exp2, 0.2, [0.5, 0.0])
    nu = np.array([0.0, 1.0])
    assert abs(float(np.dot(nu, g2))) <= 1e-15


def test_gradient_fd_agreement_timedep():
    entry = TimeEntry(((0, PolyEntry(1, ((0.3, (0,)),))),
                       (1, PolyEntry(1, ((0.5, (0,)),)))))
    pc = ProblemCoefficients(1, 1, {(0, 0, 0): entry})
    exp = expand(pc, [0.0], 4)
    h = 1e-5
    t, x = 0.25, -0.4
    g = kernel_gradient(exp, t, [x])[0]
    fd = (eval_kernel(exp, t, [x + h]).value
          - eval_kernel(exp, t, [x - h]).value) / (2 * h)
    assert g == pytest.approx(fd, rel=1e-6)


# ---------------------------------------------------------------------------
# residual
# ---------------------------------------------------------------------------

def test_residual_zero_drift():
    exp = expand(PC_ZERO, [0.0], 2)
    raw, rel = residual(exp, PC_ZERO, 0.1, [0.4])
    assert abs(rel[0]) <= 1e-13


def test_residual_const_drift_terminating_series():
    exp = expand(PC_CONST, [0.0], 2)
    for t in (0.05, 0.3, 0.8):
        raw, rel = residual(exp, PC_CONST, t, [0.5])
        assert abs(rel[0]) <= 1e-12


def test_residual_decreases_with_order():
    worst = {}
    for K in (2, 4, 6):
        exp = expand(PC_SIN, [0.0], K, WarpParams(), 12)
        worst[K] = max(abs(residual(exp, PC_SIN, 0.05, [x])[1][0])
                       for x in np.linspace(-0.5, 0.5, 11))
    assert worst[4] < worst[2] and worst[6] < worst[4]


def test_residual_beta_and_tau_modes():
    wp_b = WarpParams(mode="beta", beta=0.5)
    exp_b = expand(PC_SIN, [0.0], 6, wp_b, 12)
    _, rel_b = residual(exp_b, PC_SIN, 0.1, [0.2])
    assert abs(rel_b[0]) < 1e-6
    wp_t = WarpParams(mode="tau", beta=1.0)
    exp_t = expand(PC_SIN, [0.0], 6, wp_t, 12)
    _, rel_t = residual(exp_t, PC_SIN, 0.1, [0.2])
    assert abs(rel_t[0]) < 1e-6


# ---------------------------------------------------------------------------
# normalization / delta property
# ---------------------------------------------------------------------------

def test_normalization_examples():
    fld0 = KernelField(PC_ZERO, WarpParams(), K=1)
    assert normalization_check(fld0, 0.3, [0.0], 40) == \
        pytest.approx(1.0, abs=1e-12)
    flds = KernelField(PC_SIN, WarpParams(), K=6, D=12)
    assert normalization_check(flds, 0.1, [0.0], 40) == \
        pytest.approx(1.0, abs=1e-4)
    fldc = KernelField(PC_CONST, WarpParams(), K=2)
    assert normalization_check(fldc, 0.2, [0.3], 40) == \
        pytest.approx(1.0, abs=1e-10)


def test_delta_property_linear_rate_with_stable_constant():
    # int p(t, x, y) cos(y) dy -> cos(x) at a linear rate; the fitted
    # constant is the Taylor factor |cos x + 0.3 sin^2 x| at the probe
    fld = KernelField(PC_SIN, WarpParams(), K=6, D=12)
    x = 0.0
    errs = {}
    for t in (1e-2, 1e-3):
        val = delta_property(fld, lambda y: math.cos(y[0]), t, [x], 40)
        errs[t] = abs(val - math.cos(x))
    c_fit = errs[1e-2] / 1e-2
    assert errs[1e-3] <= 1.2 * c_fit * 1e-3
    assert errs[1e-3] >= 0.8 * c_fit * 1e-3
    assert c_fit == pytest.approx(1.0, rel=0.1)  # |L cos|(0) = 1


# ---------------------------------------------------------------------------
# varadhan diagnostic
# ---------------------------------------------------------------------------

def test_varadhan_zero_drift_exact():
    exp = expand(PC_ZERO, [0.0], 1)
    out = varadhan_diag(exp, [1e-2, 1e-3], [0.4])
    assert np.allclose(out, 0.16, atol=1e-14)


def test_varadhan_sin_drift_linear_in_t():
    exp = expand(PC_SIN, [0.0], 6, WarpParams(), 12)
    for t, val in zip((1e-2, 1e-3), varadhan_diag(exp, [1e-2, 1e-3], [0.4])):
        assert abs(val - 0.16) <= 5 * t


def test_varadhan_const_drift_closed_form():
    exp = expand(PC_CONST, [0.0], 2)
    b0, dx = 0.7, 0.4
    for t in (1e-2, 1e-3):
        val = varadhan_diag(exp, [t], [dx])[0]
        ref = dx * dx + 4 * t * (b0 * dx / 2 + b0 * b0 * t / 4)
        assert val == pytest.approx(ref, rel=1e-12)


# ---------------------------------------------------------------------------
# warp equivalences
# ---------------------------------------------------------------------------

def test_mode_equivalence_plain_beta():
    beta = 0.5
    plain = expand(PC_SIN, [0.0], 8, WarpParams(), 18)
    bexp = expand(PC_SIN, [0.0], 8, WarpParams(mode="beta", beta=beta), 18)
    for t in (0.05, 0.1, 0.2):
        for x in np.linspace(-0.5, 0.5, 5):
            v1 = eval_kernel(plain, t, [x]).log_value
            v2 = eval_kernel(bexp, t / beta, [x]).log_value
            assert abs(math.exp(v2 - v1) - 1.0) <= 1e-10


def test_mode_equivalence_plain_tau():
    wp = select_beta(PC_SIN)
    plain = expand(PC_SIN, [0.0], 8, WarpParams(), 18)
    texp = expand(PC_SIN, [0.0], 8, WarpParams(mode="tau", beta=wp.beta), 18)
    t = 0.1
    tau = tau_of_t(t, wp.beta)
    for x in np.linspace(-0.5, 0.5, 5):
        v1 = eval_kernel(plain, t, [x]).log_value
        v2 = eval_kernel(texp, tau, [x]).log_value
        assert abs(math.exp(v2 - v1) - 1.0) <= 1e-6
