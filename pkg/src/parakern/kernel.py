"""Fundamental-solution assembly and diagnostics.

Evaluates the Gaussian-times-exponential-series ansatz in log space, its
analytic gradient, PDE residuals, normalization and short-time
(Varadhan-type) diagnostics.  Multi-center helpers live on
:class:`KernelField`, which caches one coefficient expansion per
quadrature center.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ParameterError, StructureError
from .polyalg import jet_dt, jet_eval, jet_partial
from .recursion import (ExpansionCoeffs, ProblemCoefficients, WarpParams,
                        expand, t_of_tau)


@dataclass(frozen=True)
class KernelValue:
    """One kernel evaluation: value, log value and spatial gradient."""

    value: float
    log_value: float
    gradient: np.ndarray
    component: int


def _effective_time(warp: WarpParams, time: float) -> tuple[float, float]:
    """(t_eff, d t_eff / d time) for the Gaussian factor of each mode."""
    if time <= 0:
        raise ParameterError(
            "time must be positive; the t -> 0 limit of the kernel is the "
            "delta distribution at the expansion center, not a function value")
    if warp.mode == "plain":
        return time, 1.0
    if warp.mode == "beta":
        return warp.beta * time, warp.beta
    if time >= 1.0:
        raise ParameterError("tau must lie in (0, 1) in warped mode")
    return t_of_tau(time, warp.beta), warp.beta / (1.0 - time)


def _physical_time(warp: WarpParams, time: float) -> float:
    """Physical t corresponding to the mode's own time variable."""
    t_eff, _ = _effective_time(warp, time)
    return t_eff


def _check_center(exp: ExpansionCoeffs, y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.shape != (exp.dim,):
        raise StructureError(f"center of shape {y.shape}, expected ({exp.dim},)")
    if not np.allclose(y, exp.center, rtol=0, atol=0):
        raise StructureError(
            f"expansion is centered at {exp.center}, got y={tuple(y)}")
    return y


def log_correction(exp: ExpansionCoeffs, time: float, x, j: int) -> float:
    """``sum_k c^j_k(time, x) time^k`` summed in ascending k."""
    x = np.asarray(x, dtype=float)
    total = 0.0
    for k, jet in enumerate(exp.coeffs[j]):
        total += jet_eval(jet, time, x) * time ** k
    return total


def eval_kernel(exp: ExpansionCoeffs, time: float, x, y=None,
                j: int = 0) -> KernelValue:
    """Kernel value for component j, assembled in log space.

    ``time`` is the mode's own variable: physical t in plain mode, the
    scaled/warped tau otherwise.  ``y`` must match the expansion center
    when given.  Validity windows are advisory; callers probing beyond
    them get honest values and can consult the residual diagnostics.
    """
    if y is not None:
        _check_center(exp, y)
    x = np.asarray(x, dtype=float)
    t_eff, _ = _effective_time(exp.warp, time)
    n = exp.dim
    dx = x - np.asarray(exp.center)
    log_g = -0.5 * n * math.log(4.0 * math.pi * t_eff) \
        - float(np.dot(dx, dx)) / (4.0 * t_eff)
    logp = log_g + log_correction(exp, time, x, j)
    grad = kernel_log_gradient(exp, time, x, j)
    value = math.exp(logp) if logp < 700.0 else math.inf
    return KernelValue(value, logp, grad * value, j)


def kernel_log_gradient(exp: ExpansionCoeffs, time: float, x,
                        j: int = 0) -> np.ndarray:
    """grad_x log p = -dx/(2 t_eff) + sum_k grad c_k * time^k."""
    x = np.asarray(x, dtype=float)
    t_eff, _ = _effective_time(exp.warp, time)
    dx = x - np.asarray(exp.center)
    grad = -dx / (2.0 * t_eff)
    for k, jet in enumerate(exp.coeffs[j]):
        for axis in range(exp.dim):
            grad[axis] += jet_eval(jet_partial(jet, axis), time, x) * time ** k
    return grad


def kernel_gradient(exp: ExpansionCoeffs, time: float, x, y=None,
                    j: int = 0) -> np.ndarray:
    """Analytic spatial gradient of the kernel value."""
    kv = eval_kernel(exp, time, x, y, j)
    return kv.gradient


def normal_derivative(exp: ExpansionCoeffs, time: float, x, y, nu,
                      j: int = 0) -> float:
    """nu . grad_x p for a unit normal nu."""
    nu = np.asarray(nu, dtype=float)
    if abs(float(np.dot(nu, nu)) - 1.0) > 1e-12:
        raise ParameterError("nu must be a unit vector")
    return float(np.dot(nu, kernel_gradient(exp, time, x, y, j)))


def residual(exp: ExpansionCoeffs, pc: ProblemCoefficients, time: float,
             x, y=None) -> tuple[np.ndarray, np.ndarray]:
    """PDE residual of the assembled kernel, per component.

    Re-applies the mode's evolution operator
    ``d/dtime p_i - m(time)[Lap p_i + sum b^i_jk d_k p_j + V_i p_i]``
    with m = 1, beta, beta/(1-tau).  Returns (raw, relative) where the
    relative residual is scaled by p_i; the cross-component coupling uses
    the honest ratio p_j/p_i, so system-mode defects show up here.
    """
    if y is not None:
        _check_center(exp, y)
    x = np.asarray(x, dtype=float)
    warp = exp.warp
    t_eff, dteff = _effective_time(warp, time)
    t_phys = t_eff
    n = exp.dim
    m = exp.components
    dx = x - np.asarray(exp.center)
    mult = {"plain": 1.0, "beta": warp.beta,
            "tau": warp.beta / (1.0 - time) if warp.mode == "tau" else None}[warp.mode]

    logw = np.zeros(m)
    dtw = np.zeros(m)
    grads = np.zeros((m, n))
    lap_part = np.zeros(m)
    for j in range(m):
        for k, jet in enumerate(exp.coeffs[j]):
            tv = time ** k
            logw[j] += jet_eval(jet, time, x) * tv
            dtw[j] += jet_eval(jet_dt(jet), time, x) * tv
            if k >= 1:
                dtw[j] += k * jet_eval(jet, time, x) * time ** (k - 1)
            for axis in range(n):
                djet = jet_partial(jet, axis)
                grads[j, axis] += jet_eval(djet, time, x) * tv
                lap_part[j] += jet_eval(jet_partial(djet, axis), time, x) * tv

    gauss_dt = (-0.5 * n / t_eff + float(np.dot(dx, dx)) / (4.0 * t_eff ** 2)) \
        * dteff
    raw = np.zeros(m)
    rel = np.zeros(m)
    log_g = -0.5 * n * math.log(4.0 * math.pi * t_eff) \
        - float(np.dot(dx, dx)) / (4.0 * t_eff)
    for i in range(m):
        time_term = gauss_dt + dtw[i]
        lap = lap_part[i]
        for axis in range(n):
            gl = -dx[axis] / (2.0 * t_eff) + grads[i, axis]
            lap += -0.5 / t_eff + gl * gl
        coupling = 0.0
        for (ei, fj, ax), entry in pc.drift.items():
            if ei != i:
                continue
            ratio = math.exp(logw[fj] - logw[i])
            gl = -dx[ax] / (2.0 * t_eff) + grads[fj, ax]
            coupling += entry.eval(t_phys, x) * ratio * gl
        vterm = 0.0
        if i in pc.potential:
            vterm = pc.potential[i].eval(t_phys, x)
        r_over_p = time_term - mult * (lap + coupling + vterm)
        rel[i] = r_over_p
        p_i = math.exp(log_g + logw[i])
        raw[i] = r_over_p * p_i
    return raw, rel


def varadhan_diag(exp: ExpansionCoeffs, ts: Sequence[float], x, y=None,
                  j: int = 0) -> np.ndarray:
    """Short-time distance diagnostic, Gaussian prefactor removed.

    Returns ``-4 t log p - 2 n t ln(4 pi t)`` per t, which equals
    ``|dx|^2 - 4 t sum_k c_k t^k`` and tends to the squared distance
    linearly in t.  Plain-mode expansions only.
    """
    if exp.warp.mode != "plain":
        raise ParameterError("varadhan diagnostic expects a plain-mode expansion")
    out = []
    for t in ts:
        kv = eval_kernel(exp, t, x, y, j)
        out.append(-4.0 * t * kv.log_value
                   - 2.0 * exp.dim * t * math.log(4.0 * math.pi * t))
    return np.array(out)


# ---------------------------------------------------------------------------
# multi-center evaluation
# ---------------------------------------------------------------------------

class KernelField:
    """Kernel evaluations with expansions cached per center.

    Quadrature-based operations (normalization, convolution against
    initial data) need one expansion per quadrature node y; this class
    owns that cache.  Reads and inserts are lock-protected so parallel
    batch evaluation stays deterministic.
    """

    def __init__(self, pc: ProblemCoefficients, warp: WarpParams = WarpParams(),
                 K: int = 6, D: int | None = None):
        self.pc = pc
        self.warp = warp
        self.K = K
        self.D = D if D is not None else 2 * K + 2
        self._cache: dict = {}
        self._lock = threading.Lock()
        # zero drift and potential: the correction factor is identically 1
        self._trivial = not pc.drift and not pc.potential
        self.trust_radius = self._trust_radius()

    def _trust_radius(self) -> float:
        """|dx| beyond which the truncated coefficient algebra is noise.

        Degree-D Taylor tails of Fourier entries grow like
        A r^(D+1) rate^(D+1) / (D+1)!; past the radius where that bound
        reaches 0.1 the polynomial no longer represents the drift and the
        exponential of the garbage can outgrow the Gaussian weight.
        Quadrature nodes beyond the radius are dropped; their true
        contribution is the Gaussian tail.
        """
        r = math.inf
        entries = list(self.pc.drift.values()) + list(self.pc.potential.values())
        for entry in entries:
            for _, part in entry.parts:
                amp, rate = part.bound_constants()
                if hasattr(part, "max_degree"):
                    continue  # polynomial: exact at every radius
                if amp <= 0 or rate <= 0:
                    continue
                d1 = self.D + 1
                r_part = (0.1 * math.factorial(d1) / amp) ** (1.0 / d1) / rate
                r = min(r, r_part)
        return r

    def expansion(self, y, s_origin: float = 0.0) -> ExpansionCoeffs:
        key = (tuple(round(float(v), 14) for v in np.atleast_1d(y)),
               round(float(s_origin), 14))
        with self._lock:
            hit = self._cache.get(key)
        if hit is not None:
            return hit
        pc = self.pc.shifted_origin(s_origin)
        exp = expand(pc, np.atleast_1d(y), self.K, self.warp, self.D)
        with self._lock:
            self._cache.setdefault(key, exp)
            return self._cache[key]

    def log_value(self, time: float, x, y, j: int = 0,
                  s_origin: float = 0.0) -> float:
        exp = self.expansion(y, s_origin)
        return eval_kernel(exp, time, x, j=j).log_value

    def value(self, time: float, x, y, j: int = 0,
              s_origin: float = 0.0) -> float:
        return math.exp(self.log_value(time, x, y, j, s_origin))

    def correction(self, time: float, x, y, j: int = 0,
                   s_origin: float = 0.0) -> float:
        """exp(sum_k c_k time^k), the non-Gaussian factor."""
        if self._trivial:
            return 1.0
        exp = self.expansion(y, s_origin)
        return math.exp(log_correction(exp, time, x, j))

    def log_gradient(self, time: float, x, y, j: int = 0,
                     s_origin: float = 0.0) -> np.ndarray:
        if self._trivial:
            t_eff, _ = _effective_time(self.warp, time)
            dx = np.asarray(x, dtype=float) - np.atleast_1d(
                np.asarray(y, dtype=float))
            return -dx / (2.0 * t_eff)
        exp = self.expansion(y, s_origin)
        return kernel_log_gradient(exp, time, x, j)

    def mode_time(self, t_phys: float) -> float:
        """Map physical elapsed time to the warp's own time variable."""
        if self.warp.mode == "plain":
            return t_phys
        if self.warp.mode == "beta":
            return t_phys / self.warp.beta
        return -math.expm1(-t_phys / self.warp.beta)

    # -- two-parameter kernel p(t, x; s, y) ---------------------------------

    def pair_log_value(self, t: float, s: float, x, y, j: int = 0) -> float:
        """log p(t, x; s, y): expansion re-anchored at s when needed."""
        sigma = t - s
        if sigma <= 0:
            raise ParameterError("need t > s")
        x = np.asarray(x, dtype=float)
        y = np.atleast_1d(np.asarray(y, dtype=float))
        dx = x - y
        n = self.pc.n
        log_g = -0.5 * n * math.log(4.0 * math.pi * sigma) \
            - float(np.dot(dx, dx)) / (4.0 * sigma)
        if self._trivial:
            return log_g
        origin = s if self.pc.time_dependent else 0.0
        exp = self.expansion(y, origin)
        return log_g + log_correction(exp, self.mode_time(sigma), x, j)

    def pair_value(self, t: float, s: float, x, y, j: int = 0) -> float:
        return math.exp(self.pair_log_value(t, s, x, y, j))

    def pair_log_gradient(self, t: float, s: float, x, y,
                          j: int = 0) -> np.ndarray:
        sigma = t - s
        if self._trivial:
            dx = np.asarray(x, dtype=float) - np.atleast_1d(
                np.asarray(y, dtype=float))
            return -dx / (2.0 * sigma)
        origin = s if self.pc.time_dependent else 0.0
        exp = self.expansion(y, origin)
        return kernel_log_gradient(exp, self.mode_time(sigma), x, j)


def normalization_check(field: KernelField, time: float, x,
                        order: int = 40, j: int = 0) -> float:
    """``int p_j(time, x, y) dy`` by tensor Gauss-Hermite centered at x.

    The Gaussian factor of the kernel is the quadrature weight; the
    correction factor is evaluated with a fresh expansion per node.
    Returns the integral; callers assert how close to 1 it must be.
    """
    if time <= 0:
        raise ParameterError("time must be positive")
    x = np.asarray(x, dtype=float)
    n = field.pc.n
    t_eff, _ = _effective_time(field.warp, time)
    root = 2.0 * math.sqrt(t_eff)
    z, w = np.polynomial.hermite.hermgauss(order)
    grids = np.meshgrid(*([z] * n), indexing="ij")
    wgrids = np.meshgrid(*([w] * n), indexing="ij")
    zs = np.stack([g.ravel() for g in grids], axis=1)
    ws = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
    total = 0.0
    for zi, wi in zip(zs, ws):
        if root * float(np.linalg.norm(zi)) > field.trust_radius:
            continue
        y = x + root * zi
        total += wi * field.correction(time, x, y, j)
    return total / math.pi ** (n / 2.0)


def delta_property(field: KernelField, f, time: float, x,
                   order: int = 40, j: int = 0) -> float:
    """``int p_j(time, x, y) f(y) dy`` by Gauss-Hermite centered at x."""
    if time <= 0:
        raise ParameterError("time must be positive")
    x = np.asarray(x, dtype=float)
    n = field.pc.n
    t_eff, _ = _effective_time(field.warp, time)
    root = 2.0 * math.sqrt(t_eff)
    z, w = np.polynomial.hermite.hermgauss(order)
    grids = np.meshgrid(*([z] * n), indexing="ij")
    wgrids = np.meshgrid(*([w] * n), indexing="ij")
    zs = np.stack([g.ravel() for g in grids], axis=1)
    ws = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
    total = 0.0
    for zi, wi in zip(zs, ws):
        if root * float(np.linalg.norm(zi)) > field.trust_radius:
            continue
        y = x + root * zi
        total += wi * field.correction(time, x, y, j) * f(y)
    return total / math.pi ** (n / 2.0)
