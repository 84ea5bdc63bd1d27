import math

import numpy as np
import pytest

from parakern.errors import ParameterError
from parakern.oracle import (FDConfig, exact_const_drift_kernel,
                             exact_potential_kernel, fd_solve,
                             fd_solve_burgers, fd_solve_linear, gh_convolve,
                             quad_ray)


# ---------------------------------------------------------------------------
# exact kernels
# ---------------------------------------------------------------------------

def test_const_drift_reduces_to_gaussian():
    t, x, y = 0.3, 0.4, -0.1
    val = exact_const_drift_kernel(0.0, 0.0, t, x, y)
    ref = math.exp(-(x - y) ** 2 / (4 * t)) / math.sqrt(4 * math.pi * t)
    assert val == pytest.approx(ref, rel=1e-15)


def test_const_drift_solves_its_pde():
    # residual of u_t = u_xx + (b0 + b1 t) u_x by central differences
    b0, b1 = 0.4, -0.3
    rng = np.random.default_rng(2)
    hx, ht = 1e-4, 1e-5
    worst = 0.0
    for _ in range(200):
        t = rng.uniform(0.2, 1.0)
        x = rng.uniform(-1, 1)
        y = rng.uniform(-1, 1)

        def p(tt, xx):
            return exact_const_drift_kernel(b0, b1, tt, xx, y)

        ut = (p(t + ht, x) - p(t - ht, x)) / (2 * ht)
        ux = (p(t, x + hx) - p(t, x - hx)) / (2 * hx)
        uxx = (p(t, x + hx) - 2 * p(t, x) + p(t, x - hx)) / hx ** 2
        res = ut - uxx - (b0 + b1 * t) * ux
        worst = max(worst, abs(res) / p(t, x))
    assert worst < 1e-6  # FD-limited; the kernel itself is exact


def test_const_drift_normalizes():
    b0, b1, t, x = 0.7, 0.2, 0.4, 0.3
    val = gh_convolve(lambda y: math.exp(
        -(x - y[0] + b0 * t + b1 * t * t / 2) ** 2 / (4 * t)
        + (x - y[0]) ** 2 / (4 * t)), [x], t, order=60)
    assert val == pytest.approx(1.0, abs=1e-12)


def test_potential_kernel():
    val = exact_potential_kernel(0.4, 0.5, 0.2, 0.0)
    gauss = math.exp(-0.04 / 2.0) / math.sqrt(2 * math.pi)
    assert val == pytest.approx(gauss * math.exp(0.2), rel=1e-15)


# ---------------------------------------------------------------------------
# ray quadrature
# ---------------------------------------------------------------------------

def test_quad_ray_examples():
    assert quad_ray(lambda s: 1.0, 1.0) == pytest.approx(1.0, abs=1e-13)
    assert quad_ray(lambda s: s * s, 1.0) == pytest.approx(1 / 3, abs=1e-13)
    assert quad_ray(lambda s: 1.0, 0.5) == pytest.approx(2.0, abs=1e-11)


@pytest.mark.parametrize("a", [0.25, 0.5, 1.0, 2.0, 4.0, 8.0])
def test_quad_ray_monomials(a):
    for m in range(17):
        val = quad_ray(lambda s, m=m: s ** m, a)
        assert val == pytest.approx(1.0 / (m + a), abs=2e-11)


def test_quad_ray_rejects_bad_exponent():
    with pytest.raises(ParameterError):
        quad_ray(lambda s: 1.0, 0.0)


# ---------------------------------------------------------------------------
# Gauss-Hermite convolution
# ---------------------------------------------------------------------------

def test_gh_convolve_moments():
    t = 0.37
    assert gh_convolve(lambda y: 1.0, [0.0], t) == pytest.approx(1.0, abs=1e-13)
    assert gh_convolve(lambda y: y[0] ** 2, [0.0], t) == \
        pytest.approx(2 * t, rel=1e-12)
    assert gh_convolve(lambda y: math.exp(y[0]), [0.0], t) == \
        pytest.approx(math.exp(t), rel=1e-12)


def test_gh_convolve_2d():
    t = 0.2
    val = gh_convolve(lambda y: y[0] ** 2 + y[1] ** 2, [0.0, 0.0], t, order=20)
    assert val == pytest.approx(4 * t, rel=1e-12)


# ---------------------------------------------------------------------------
# finite-difference reference
# ---------------------------------------------------------------------------

def test_fd_preserves_constants_under_drift():
    def drift(i, j, t, grid):
        return 0.3 * np.sin(grid)

    cfg = FDConfig(h=1 / 64, dt=1e-3)
    _, grid, vals = fd_solve_linear(-8, 8, 0.2, cfg, lambda x: 1.0,
                                    drift=drift)
    mask = np.abs(grid) <= 2.0
    assert np.max(np.abs(vals[-1][mask, 0] - 1.0)) < 1e-8


def test_fd_self_convergence_is_second_order():
    def run(h, dt):
        cfg = FDConfig(h=h, dt=dt)
        _, grid, vals = fd_solve_linear(-8, 8, 0.25, cfg,
                                        lambda x: math.exp(-x * x))
        mask = np.abs(grid) <= 2
        exact = (1 + 1.0) ** -0.5 * np.exp(-grid[mask] ** 2 / 2.0)
        return np.max(np.abs(vals[-1][mask, 0] - exact))

    e1 = run(1 / 32, 1 / 200)
    e2 = run(1 / 64, 1 / 400)
    order = math.log2(e1 / e2)
    assert order >= 1.9


def test_fd_matches_const_drift_oracle():
    b0 = 0.7
    cfg = FDConfig(h=1 / 256, dt=2e-4)

    def drift(i, j, t, grid):
        return b0 * np.ones_like(grid)

    T = 0.25
    _, grid, vals = fd_solve_linear(-8, 8, T, cfg, lambda x: math.exp(-x * x),
                                    drift=drift)
    mask = np.abs(grid) <= 2
    # phi propagated by the exact shifted kernel: heat solution at x + b0 T
    shifted = grid[mask] + b0 * T
    exact = (1 + 4 * T) ** -0.5 * np.exp(-shifted ** 2 / (1 + 4 * T))
    assert np.max(np.abs(vals[-1][mask, 0] - exact)) <= 1e-4


def test_fd_explicit_stability_guard():
    with pytest.raises(ParameterError):
        fd_solve_burgers(-1, 1, 0.1, FDConfig(h=0.01, dt=0.01,
                                              scheme="explicit"),
                         lambda x: x, nu=0.1)


def test_fd_solve_dispatcher_all_kinds():
    from parakern.funcspec import (ExpTime, GaussianMix, SpaceFourier,
                                   SpacePoly, SpacePolyFourier)
    from parakern.polyalg import FourierEntry
    from parakern.recursion import ProblemCoefficients
    from parakern.solvers import ProblemSpec

    # cauchy with sin drift: constants stay constant
    pc = ProblemCoefficients(1, 1, {(0, 0, 0):
                                    FourierEntry(1, ((0.3, (1.0,), 0.0),))})
    ps = ProblemSpec("cauchy", (-8.0,), (8.0,), 0.2, pc,
                     phi=SpacePoly(((1.0, (0,)),)))
    sol = fd_solve(ps, FDConfig(h=1 / 64, dt=1e-3))
    mask = np.abs(sol.points[:, 0]) <= 2.0
    assert np.max(np.abs(sol.values[-1][mask, 0] - 1.0)) < 1e-8

    # ibvp2 robin rows against the manufactured decaying cosine
    pc0 = ProblemCoefficients(1, 1, {})
    ps2 = ProblemSpec(
        "ibvp2", (0.0,), (1.0,), 0.5, pc0,
        phi=SpaceFourier(((1.0, (1.0,), math.pi / 2),)),
        alpha=SpacePoly(((1.0, (0,)),)),
        psi=ExpTime(-1.0, SpacePolyFourier((
            (1.0, (0,), (1.0,), math.pi / 2),
            (-1.0, (1,), (1.0,), 0.0)))))
    sol2 = fd_solve(ps2, FDConfig(h=1 / 128, dt=1e-3))
    exact = math.exp(-0.5) * np.cos(sol2.points[:, 0])
    assert np.max(np.abs(sol2.values[-1][:, 0] - exact)) < 2e-4

    # burgers explicit stepping from a potential initial field
    ps3 = ProblemSpec("burgers", (-4.0,), (4.0,), 0.2, pc0, nu=0.1,
                      phi0=GaussianMix(((0.075, 1.0, (0.0,)),)))
    sol3 = fd_solve(ps3, FDConfig(h=1 / 50, dt=1.5e-4, scheme="explicit"))
    mask = np.abs(sol3.points[:, 0]) <= 1.0
    assert np.all(np.isfinite(sol3.values))
    assert np.max(np.abs(sol3.values[-1][mask, 0])) < 0.1


def test_fd_robin_manufactured():
    # u* = e^{-t} cos x with alpha = 1 on (0,1); psi from u*
    def alpha(t, x):
        return 1.0

    def psi(t, x):
        nu_dir = -1.0 if x < 0.5 else 1.0
        return math.exp(-t) * (nu_dir * (-math.sin(x)) + math.cos(x))

    cfg = FDConfig(h=1 / 128, dt=1e-3, boundary="exact_robin")
    _, grid, vals = fd_solve_linear(0.0, 1.0, 0.5, cfg,
                                    lambda x: math.cos(x),
                                    robin_alpha=alpha, robin_psi=psi)
    exact = math.exp(-0.5) * np.cos(grid)
    assert np.max(np.abs(vals[-1][:, 0] - exact)) < 2e-4
