"""Expansion-coefficient recursions for drift-coupled parabolic systems.

The kernel ansatz is a Gaussian times ``exp(sum_k c_k * time^k)``.  This
module computes the coefficient functions ``c^j_0 ... c^j_K`` for three
time parameterizations:

* ``plain`` -- physical time t, valid on a short horizon.
* ``beta``  -- rescaled time tau = t / beta; coefficients pick up a factor
  beta^k, shrinking them for small beta.
* ``tau``   -- warped time tau = 1 - exp(-t/beta), mapping any horizon
  into tau < 1.  Coefficients become jets in tau.

Each c_k solves the first-order equation  k c_k + dx . grad c_k = R_{k-1}
along rays from the expansion center, which on monomials acts diagonally:
the dx^gamma coefficient of c_k is the matching coefficient of R_{k-1}
scaled by 1/(k + |gamma|).  In tau mode the gradient term carries the
analytic multiplier nu(tau) = tau / ((1 - tau)(-ln(1 - tau))) and the
solve becomes a triangular jet inversion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ParameterError, SequencingError
from .polyalg import (CoefficientEntry, MultiIndex, TaylorPoly, TimeEntry,
                      TimeJet, index_table, jet_add, jet_compose_time, jet_dt,
                      jet_laplacian, jet_mul, jet_partial, jet_scale,
                      jet_scale_series, poly_shift_up, series_reciprocal,
                      taylorize)

SAMPLE_LATTICE = 17      # points per axis when sampling sup norms
BETA_FLOOR = 1e-6
BETA_CAP = 1.0
DIAG_TAU_REF = 0.5       # weight tau used in convergence diagnostics


# ---------------------------------------------------------------------------
# problem data
# ---------------------------------------------------------------------------

def _as_time_entry(entry) -> TimeEntry:
    if isinstance(entry, TimeEntry):
        return entry
    if isinstance(entry, CoefficientEntry):
        return TimeEntry(((0, entry),))
    raise ParameterError(f"not a coefficient entry: {type(entry).__name__}")


@dataclass(frozen=True)
class ProblemCoefficients:
    """Admissible drift/potential data for one parabolic system.

    ``drift`` maps (equation i, field j, direction k) to an entry for
    b^i_{jk}; ``potential`` maps equation i to V_i.  ``bound_C`` is the
    generic derivative-bound constant and ``domain_radius_R`` the radius
    of a ball containing the domain.
    """

    n: int
    components: int
    drift: dict
    potential: dict = field(default_factory=dict)
    bound_C: float = 1.0
    domain_radius_R: float = 1.0

    def __post_init__(self):
        if self.n < 1:
            raise ParameterError("dimension must be >= 1")
        if self.components not in (1, self.n):
            raise ParameterError("components must be 1 (scalar) or n (system)")
        if self.bound_C <= 0 or self.domain_radius_R <= 0:
            raise ParameterError("bound_C and domain_radius_R must be positive")
        object.__setattr__(self, "drift",
                           {k: _as_time_entry(v) for k, v in self.drift.items()})
        object.__setattr__(self, "potential",
                           {k: _as_time_entry(v) for k, v in self.potential.items()})
        for (i, j, k) in self.drift:
            if not (0 <= i < self.components and 0 <= j < self.components
                    and 0 <= k < self.n):
                raise ParameterError(f"drift index {(i, j, k)} out of range")
        for i in self.potential:
            if not 0 <= i < self.components:
                raise ParameterError(f"potential index {i} out of range")

    @property
    def time_dependent(self) -> bool:
        entries = list(self.drift.values()) + list(self.potential.values())
        return any(e.max_order > 0 for e in entries)

    @property
    def max_time_order(self) -> int:
        entries = list(self.drift.values()) + list(self.potential.values())
        return max((e.max_order for e in entries), default=0)

    def is_zero_drift(self) -> bool:
        return not self.drift and not self.potential

    def shifted_origin(self, s0: float) -> "ProblemCoefficients":
        """Coefficients re-expanded around time origin s0 (for p(t,x;s,y))."""
        if s0 == 0.0 or not self.time_dependent:
            return self
        return ProblemCoefficients(
            self.n, self.components,
            {k: v.shifted(s0) for k, v in self.drift.items()},
            {k: v.shifted(s0) for k, v in self.potential.items()},
            self.bound_C, self.domain_radius_R)

    def spot_check_bounds(self, max_order: int = 4, samples: int = 5) -> float:
        """Largest ratio |d^a entry| / C^|a| over a sample lattice.

        A return value <= 1 means the declared bound holds at the probes.
        """
        xs = np.linspace(-self.domain_radius_R, self.domain_radius_R, samples)
        grids = np.meshgrid(*([xs] * self.n), indexing="ij")
        points = np.stack([g.ravel() for g in grids], axis=1)
        worst = 0.0
        alphas = [tuple(a) for a in index_table(self.n, max_order)[0]]
        for entry in list(self.drift.values()) + list(self.potential.values()):
            for _, part in entry.parts:
                for alpha in alphas:
                    d = part.derivative(alpha)
                    bound = self.bound_C ** sum(alpha)
                    for p in points:
                        worst = max(worst, abs(d.eval(p)) / bound)
        return worst


@dataclass(frozen=True)
class WarpParams:
    """Time-parameterization choice for one expansion."""

    mode: str = "plain"
    beta: float = 1.0
    tau_max: float = 0.0

    def __post_init__(self):
        if self.mode not in ("plain", "beta", "tau"):
            raise ParameterError(f"unknown mode {self.mode!r}")
        if self.mode == "plain" and self.beta != 1.0:
            raise ParameterError("plain mode requires beta = 1")
        if self.beta <= 0:
            raise ParameterError("beta must be positive")
        if not 0.0 <= self.tau_max < 1.0:
            raise ParameterError("tau_max must lie in [0, 1)")

    @property
    def time_var(self) -> str:
        return "t" if self.mode == "plain" else "tau"


@dataclass(frozen=True)
class ExpansionDiagnostics:
    """Per-order sup-norm samples and truncation bookkeeping."""

    sup_norms: tuple[float, ...]           # c_k^up sampled on a lattice
    weighted: tuple[float, ...]            # c_k^up * tau_ref^k
    tau_ref: float
    truncated: bool

    def monotone_from(self, k0: int = 2) -> bool:
        w = self.weighted
        return all(w[k + 1] <= w[k] for k in range(k0, len(w) - 1))


@dataclass(frozen=True)
class ExpansionCoeffs:
    """Computed coefficient jets c^j_0 ... c^j_K for one center."""

    center: tuple[float, ...]
    warp: WarpParams
    order_K: int
    degree_D: int
    components: int
    coeffs: tuple[tuple[TimeJet, ...], ...]   # [component][k]
    diagnostics: ExpansionDiagnostics

    @property
    def dim(self) -> int:
        return len(self.center)

    def component(self, j: int) -> tuple[TimeJet, ...]:
        return self.coeffs[j]


# ---------------------------------------------------------------------------
# ray integrals and closed-form weights
# ---------------------------------------------------------------------------

def ray_integrate(p: TaylorPoly, a: float) -> TaylorPoly:
    """``int_0^1 p(y + s dx) s^(a-1) ds`` as a diagonal coefficient scaling.

    The dx^gamma coefficient picks up the factor 1/(|gamma| + a); this is
    the closed-form of the s-exponent convention fixed by the identity
    d/ds[s^k p(y + s dx)] = k s^(k-1) p + s^k dx . grad p.
    """
    if a <= 0:
        raise ParameterError("ray exponent a must be positive")
    _, _, orders = index_table(p.dim, p.cap)
    return TaylorPoly(p.dim, p.center, p.cap, p.coeffs / (orders + a),
                      p.truncated)


def jet_ray(jet: TimeJet, a: float) -> TimeJet:
    return TimeJet(jet.var, tuple(ray_integrate(p, a) for p in jet.terms))


def mode_ray_exponent(k: int, wp: WarpParams, tau: float = 0.0) -> float:
    """The s-exponent a_k of the mode's ray integral at a frozen tau."""
    if k < 1:
        raise ParameterError("k must be >= 1")
    if wp.mode == "plain":
        return float(k)
    if wp.mode == "beta":
        return k / wp.beta
    return (1.0 - tau) * k / wp.beta


def mode_ray_weight(gamma_order: int, k: int, wp: WarpParams,
                    tau: float = 0.0) -> float:
    """Closed-form diagonal weight 1/(a_k + |gamma|) for a frozen tau.

    plain: 1/(k + |g|); beta: beta/(k + beta |g|);
    tau:   beta/((1 - tau) k + beta |g|).
    """
    return 1.0 / (mode_ray_exponent(k, wp, tau) + gamma_order)


def pk_gamma(gamma, k: int, y: Sequence[float], a: float | None = None,
             cap: int | None = None) -> TaylorPoly:
    """Closed form of ``int_0^1 (y + s dx)^gamma s^(a-1) ds``.

    Binomial expansion of the shifted monomial: the dx^delta coefficient is
    ``prod_i C(gamma_i, delta_i) y^(gamma-delta) / (|delta| + a)``.
    Defaults to a = k, the plain-mode exponent.
    """
    if k < 1:
        raise ParameterError("k must be >= 1")
    gamma = gamma if isinstance(gamma, MultiIndex) else MultiIndex(tuple(gamma))
    if a is None:
        a = float(k)
    y = np.asarray(y, dtype=float)
    dim = gamma.dim
    if cap is None:
        cap = gamma.order
    out = TaylorPoly.zero(dim, tuple(y), cap)
    _, pos, _ = index_table(dim, cap)

    def rec(axis, delta, weight):
        if axis == dim:
            out.coeffs[pos[tuple(delta)]] += weight / (sum(delta) + a)
            return
        for d in range(gamma[axis] + 1):
            w = weight * math.comb(gamma[axis], d) * \
                y[axis] ** (gamma[axis] - d)
            rec(axis + 1, delta + [d], w)

    rec(0, [], 1.0)
    return out


# ---------------------------------------------------------------------------
# time warp scalar series
# ---------------------------------------------------------------------------

def tau_of_t(t: float, beta: float) -> float:
    """tau = 1 - exp(-t/beta)."""
    if t < 0:
        raise ParameterError("t must be >= 0")
    if beta <= 0:
        raise ParameterError("beta must be positive")
    return -math.expm1(-t / beta)


def t_of_tau(tau: float, beta: float) -> float:
    """t = -beta ln(1 - tau)."""
    if not 0.0 <= tau < 1.0:
        raise ParameterError("tau must lie in [0, 1)")
    if beta <= 0:
        raise ParameterError("beta must be positive")
    return -beta * math.log1p(-tau)


def _series_g(order: int) -> np.ndarray:
    """(-ln(1-tau))/tau = sum tau^m / (m+1)."""
    return np.array([1.0 / (m + 1) for m in range(order + 1)])


def _series_sigma(beta: float, order: int) -> np.ndarray:
    """beta/(1-tau) = beta sum tau^m."""
    return beta * np.ones(order + 1)


def _series_nu(order: int) -> np.ndarray:
    """nu(tau) = tau/((1-tau)(-ln(1-tau))), the gradient-term multiplier."""
    g = _series_g(order)
    h = np.zeros(order + 1)
    h[0] = g[0]
    h[1:] = g[1:] - g[:-1]          # (1-tau) * g
    return series_reciprocal(h, order)


def _series_t_of_tau(beta: float, order: int) -> np.ndarray:
    """t(tau) = beta(tau + tau^2/2 + ...), no constant term."""
    out = np.zeros(order + 1)
    for m in range(1, order + 1):
        out[m] = beta / m
    return out


def _series_power(s: np.ndarray, p: int, order: int) -> np.ndarray:
    out = np.zeros(order + 1)
    out[0] = 1.0
    for _ in range(p):
        nxt = np.zeros(order + 1)
        for i, v in enumerate(out):
            if v == 0.0:
                continue
            top = min(len(s), order + 1 - i)
            nxt[i:i + top] += v * s[:top]
        out = nxt
    return out


# ---------------------------------------------------------------------------
# the recursion proper
# ---------------------------------------------------------------------------

class _Workspace:
    """Mode-resolved drift/potential jets about one center."""

    def __init__(self, pc: ProblemCoefficients, y, wp: WarpParams,
                 D: int, jet_cap: int | None):
        self.pc = pc
        self.y = tuple(float(v) for v in y)
        self.wp = wp
        self.D = D
        if wp.mode == "tau" and jet_cap is None:
            jet_cap = max(6, pc.max_time_order)
        self.jet_cap = jet_cap
        self.var = wp.time_var
        self.truncated = False
        self.drift_jets = {}
        for key, entry in pc.drift.items():
            self.drift_jets[key] = self._entry_jet(entry)
        self.vpart_polys = {}
        for i, entry in pc.potential.items():
            self.vpart_polys[i] = {
                l: self._tay(part) for l, part in entry.parts}

    def _tay(self, part: CoefficientEntry) -> TaylorPoly:
        poly = taylorize(part, self.y, self.D).poly
        self.truncated |= poly.truncated
        return poly

    def _entry_jet(self, entry: TimeEntry) -> TimeJet:
        """b as a jet in the mode's own time variable."""
        zero = TaylorPoly.zero(self.pc.n, self.y, self.D)
        terms = [zero] * (entry.max_order + 1)
        for l, part in entry.parts:
            terms[l] = self._tay(part)
        tjet = TimeJet("t", tuple(terms))
        if self.wp.mode == "plain":
            return tjet
        if self.wp.mode == "beta":
            # t = beta tau: scale jet order l by beta^l
            scaled = tuple(p * (self.wp.beta ** l)
                           for l, p in enumerate(tjet.terms))
            return TimeJet("tau", scaled)
        inner = _series_t_of_tau(self.wp.beta, self.jet_cap)
        return jet_compose_time(tjet, inner, "tau", self.jet_cap)

    def zero_jet(self) -> TimeJet:
        return TimeJet.zero(self.pc.n, self.y, self.D, self.var)

    def clip(self, jet: TimeJet) -> TimeJet:
        if self.jet_cap is None or jet.order <= self.jet_cap:
            return jet
        return TimeJet(jet.var, jet.terms[:self.jet_cap + 1])


def compute_c0(pc: ProblemCoefficients, y, j: int,
               D: int, wp: WarpParams = WarpParams(),
               jet_cap: int | None = None,
               _ws: _Workspace | None = None) -> TimeJet:
    """Order-zero coefficient of component j about center y.

    Solves dx . grad c_0 = -(1/2) sum_lm b^j_{lm} dx_m, i.e. the ray
    integral of the drift row scaled by one half.  The half is forced by
    the t^(-1) balance of the ansatz (the Gaussian cross term enters with
    coefficient one) and is confirmed by the constant-drift kernel, whose
    exponent carries -b0 dx / 2.
    """
    ws = _ws or _Workspace(pc, y, wp, D, jet_cap)
    if not 0 <= j < pc.components:
        raise ParameterError(f"component {j} out of range")
    total = ws.zero_jet()
    for m in range(pc.n):
        row = ws.zero_jet()
        found = False
        for l in range(pc.components):
            jet = ws.drift_jets.get((j, l, m))
            if jet is not None:
                row = jet_add(row, jet)
                found = True
        if not found:
            continue
        integrated = jet_ray(row, 1.0)
        shifted = TimeJet(row.var,
                          tuple(poly_shift_up(p, m) for p in integrated.terms))
        total = jet_add(total, shifted)
    return ws.clip(jet_scale(total, -0.5))


def compute_R(k: int, prior: Sequence[Sequence[TimeJet]],
              pc: ProblemCoefficients, j: int, wp: WarpParams,
              _ws: _Workspace | None = None,
              y=None, D: int | None = None,
              jet_cap: int | None = None) -> TimeJet:
    """Right-hand side R_{k-1} feeding the order-k ray solve.

    Assembles  -d/dtime c_{k-1}  +  m(time) [ Lap c_{k-1}
    + sum_l sum_r d_l c_r d_l c_{k-1-r} + sum_lm b^j_lm d_m c^l_{k-1} ]
    plus the potential jet term of matching explicit order, where the
    spatial multiplier m is 1 (plain), beta (beta mode) or beta/(1-tau)
    (tau mode, as a jet).  The time-derivative term enters unscaled; it
    originates on the other side of the graded identity.
    """
    if k < 1:
        raise ParameterError("k must be >= 1")
    if len(prior) < pc.components or any(len(cj) < k for cj in prior):
        raise SequencingError(
            f"compute_R(k={k}) needs c_0..c_{k - 1} for every component")
    if _ws is None:
        if y is None or D is None:
            head = prior[j][0]
            y, D = head.center, head.cap
        _ws = _Workspace(pc, y, wp, D, jet_cap)
    ws = _ws
    prev = prior[j][k - 1]

    spatial = jet_laplacian(prev)
    for l in range(pc.n):
        for r in range(k):
            term = jet_mul(jet_partial(prior[j][r], l),
                           jet_partial(prior[j][k - 1 - r], l),
                           max_order=ws.jet_cap)
            spatial = jet_add(spatial, term)
    for lcomp in range(pc.components):
        for m in range(pc.n):
            bjet = ws.drift_jets.get((j, lcomp, m))
            if bjet is None:
                continue
            spatial = jet_add(spatial,
                              jet_mul(bjet, jet_partial(prior[lcomp][k - 1], m),
                                      max_order=ws.jet_cap))

    if wp.mode == "plain":
        out = spatial
    elif wp.mode == "beta":
        out = jet_scale(spatial, wp.beta)
    else:
        sigma = _series_sigma(wp.beta, ws.jet_cap)
        out = jet_scale_series(spatial, sigma, max_order=ws.jet_cap)

    out = jet_add(out, jet_scale(jet_dt(prev), -1.0))

    # potential: the explicit-order-(k-1) term of V_j enters R_{k-1}
    vparts = ws.vpart_polys.get(j)
    if vparts and (k - 1) in vparts:
        vpoly = vparts[k - 1]
        if wp.mode == "plain":
            vjet = TimeJet.of_poly(vpoly, ws.var)
        elif wp.mode == "beta":
            vjet = TimeJet.of_poly(vpoly * (wp.beta ** k), ws.var)
        else:
            # V_l t^l sits at explicit grade l = k-1 with the jet factor
            # sigma(tau) (t(tau)/tau)^l carried along.
            warp_pow = _series_power(_series_g(ws.jet_cap) * wp.beta,
                                     k - 1, ws.jet_cap)
            sigma = _series_sigma(wp.beta, ws.jet_cap)
            vjet = jet_scale_series(
                jet_scale_series(TimeJet.of_poly(vpoly, ws.var), warp_pow,
                                 max_order=ws.jet_cap),
                sigma, max_order=ws.jet_cap)
        out = jet_add(out, vjet)
    return ws.clip(out)


def _solve_order(R: TimeJet, k: int, wp: WarpParams,
                 jet_cap: int | None) -> TimeJet:
    """Solve k c + (gradient term) c = R for the order-k coefficient."""
    if wp.mode in ("plain", "beta"):
        return jet_ray(R, float(k))
    # tau mode: (k + |gamma| nu(tau)) acts per multi-index as a scalar jet
    cap = jet_cap if jet_cap is not None else R.order
    nu = _series_nu(cap)
    dim, center, D = R.dim, R.center, R.cap
    _, _, orders = index_table(dim, D)
    weights = {}
    for go in sorted(set(int(o) for o in orders)):
        op = go * nu.copy()
        op[0] += k
        weights[go] = series_reciprocal(op, cap)
    terms = [TaylorPoly.zero(dim, center, D) for _ in range(cap + 1)]
    trunc = R.truncated
    for l in range(min(R.order, cap) + 1):
        src = R.terms[l].coeffs
        for go, w in weights.items():
            mask = orders == go
            if not np.any(mask):
                continue
            for m in range(cap + 1 - l):
                if w[m] == 0.0:
                    continue
                terms[l + m].coeffs[mask] += src[mask] * w[m]
    return TimeJet(R.var, tuple(
        TaylorPoly(dim, center, D, p.coeffs, trunc) for p in terms))


def expand(pc: ProblemCoefficients, y, K: int,
           wp: WarpParams = WarpParams(), D: int | None = None) -> ExpansionCoeffs:
    """Full coefficient recursion c_0 ... c_K about one center.

    ``D`` defaults to 2K + 2; gradient products densify the polynomials
    quickly, so the dense cap is sized for the worst order.  Non-decaying
    diagnostics are reported, never raised.
    """
    if K < 0:
        raise ParameterError("K must be >= 0")
    if D is None:
        D = 2 * K + 2
    jet_cap = None
    if wp.mode == "tau":
        jet_cap = max(K, pc.max_time_order)
    ws = _Workspace(pc, y, wp, D, jet_cap)
    coeffs: list[list[TimeJet]] = []
    for j in range(pc.components):
        coeffs.append([compute_c0(pc, y, j, D, wp, jet_cap, _ws=ws)])
    for k in range(1, K + 1):
        for j in range(pc.components):
            R = compute_R(k, coeffs, pc, j, wp, _ws=ws)
            coeffs[j].append(_solve_order(R, k, wp, ws.jet_cap))

    sup, weighted = _diagnostics(coeffs, pc, ws)
    diag = ExpansionDiagnostics(tuple(sup), tuple(weighted), DIAG_TAU_REF,
                                ws.truncated or any(
                                    c.truncated for cj in coeffs for c in cj))
    return ExpansionCoeffs(ws.y, wp, K, D, pc.components,
                           tuple(tuple(cj) for cj in coeffs), diag)


def _diagnostics(coeffs, pc, ws):
    """Sample sup norms of each c_k over a lattice in the domain ball."""
    R = pc.domain_radius_R
    axis = np.linspace(-R, R, SAMPLE_LATTICE)
    grids = np.meshgrid(*([axis] * pc.n), indexing="ij")
    points = np.stack([g.ravel() for g in grids], axis=1)
    tau_ref = DIAG_TAU_REF
    K = len(coeffs[0]) - 1
    sup, weighted = [], []
    from .polyalg import jet_eval_poly, poly_eval_many
    for k in range(K + 1):
        worst = 0.0
        for j in range(pc.components):
            frozen = jet_eval_poly(coeffs[j][k], tau_ref)
            vals = poly_eval_many(frozen, points)
            worst = max(worst, float(np.max(np.abs(vals))))
        sup.append(worst)
        weighted.append(worst * tau_ref ** k)
    return sup, weighted


# ---------------------------------------------------------------------------
# warp parameter selection
# ---------------------------------------------------------------------------

def beta_upper_bound(n: int, C: float, c0_up: float) -> float:
    """Convergence threshold 1/(3 * 4 n^2 C^2 c0_up^2) for the beta scaling."""
    if c0_up <= 0:
        raise ParameterError("c0_up must be positive")
    return 1.0 / (12.0 * n * n * C * C * c0_up * c0_up)


def beta_from_bound(n: int, C: float, c0_up: float) -> float:
    """Selected beta: half the threshold, clipped to [1e-6, 1]."""
    if c0_up == 0.0:
        return 1.0
    raw = 0.5 * beta_upper_bound(n, C, c0_up)
    return float(min(BETA_CAP, max(BETA_FLOOR, raw)))


def select_beta(pc: ProblemCoefficients, K_probe: int = 0) -> WarpParams:
    """Estimate c_0^up on a lattice over Omega x Omega and pick beta.

    The sampled sup is capped at the analytic bound n^2 R C (it cannot
    honestly exceed it when the declared constants hold).  Zero drift
    returns beta = 1: the expansion terminates anyway.
    """
    if pc.is_zero_drift():
        return WarpParams(mode="beta", beta=1.0)
    R = pc.domain_radius_R
    axis = np.linspace(-R, R, SAMPLE_LATTICE)
    grids = np.meshgrid(*([axis] * pc.n), indexing="ij")
    points = np.stack([g.ravel() for g in grids], axis=1)
    from .polyalg import jet_eval_poly, poly_eval_many
    worst = 0.0
    D = max(6, 2 * K_probe + 2)
    for y in points:
        ws = _Workspace(pc, y, WarpParams(), D, None)
        for j in range(pc.components):
            c0 = compute_c0(pc, y, j, D, _ws=ws)
            frozen = jet_eval_poly(c0, 0.0)
            vals = poly_eval_many(frozen, points)
            worst = max(worst, float(np.max(np.abs(vals))))
    analytic = pc.components ** 2 * R * pc.bound_C
    c0_up = min(worst, analytic)
    return WarpParams(mode="beta", beta=beta_from_bound(pc.n, pc.bound_C, c0_up))


@dataclass(frozen=True)
class WarpSchedule:
    """Result of horizon planning under the constraint beta/(1-tau) <= c."""

    params: WarpParams
    achievable: bool
    max_horizon: float
    note: str = ""


def warp_schedule(T: float, c_target: float) -> WarpSchedule:
    """Best tau-mode schedule reaching toward horizon T.

    Maximizing t(tau) = -beta ln(1-tau) subject to beta/(1-tau) <= c gives
    1 - tau = 1/e, beta = c/e and the finite maximum horizon c/e.  The
    claimed unboundedness of the reachable range does not survive the
    constraint (the limiting argument evaluates to zero), so the flag
    reports honestly when T exceeds c/e.
    """
    if T <= 0 or c_target <= 0:
        raise ParameterError("T and c_target must be positive")
    beta = c_target / math.e
    tau_max = 1.0 - 1.0 / math.e
    max_horizon = c_target / math.e
    achievable = T <= max_horizon * (1.0 + 1e-14)
    note = ("" if achievable else
            f"horizon {T} exceeds the constrained maximum {max_horizon:.6g}; "
            f"returning the maximizing schedule")
    return WarpSchedule(WarpParams(mode="tau", beta=beta, tau_max=tau_max),
                        achievable, max_horizon, note)


# ---------------------------------------------------------------------------
# serialization (consumed by the CLI)
# ---------------------------------------------------------------------------

def expansion_to_dict(exp: ExpansionCoeffs) -> dict:
    exps, _, _ = index_table(exp.dim, exp.degree_D)
    comps = []
    for j in range(exp.components):
        orders = []
        for k, jet in enumerate(exp.coeffs[j]):
            terms = []
            for l, poly in enumerate(jet.terms):
                nz = np.nonzero(poly.coeffs)[0]
                terms.append({
                    "l": l,
                    "coeffs": [[list(map(int, exps[i])), float(poly.coeffs[i])]
                               for i in nz],
                })
            orders.append({"k": k, "jet_order": jet.order, "terms": terms})
        comps.append(orders)
    return {
        "center": list(exp.center),
        "mode": exp.warp.mode,
        "beta": exp.warp.beta,
        "tau_max": exp.warp.tau_max,
        "order_K": exp.order_K,
        "degree_D": exp.degree_D,
        "components": exp.components,
        "coefficients": comps,
        "diagnostics": {
            "sup_norms": list(exp.diagnostics.sup_norms),
            "weighted": list(exp.diagnostics.weighted),
            "tau_ref": exp.diagnostics.tau_ref,
            "truncated": exp.diagnostics.truncated,
        },
    }


def expansion_from_dict(data: dict) -> ExpansionCoeffs:
    center = tuple(float(v) for v in data["center"])
    dim = len(center)
    D = int(data["degree_D"])
    wp = WarpParams(mode=data["mode"], beta=float(data["beta"]),
                    tau_max=float(data["tau_max"]))
    _, pos, _ = index_table(dim, D)
    comps = []
    var = wp.time_var
    for orders in data["coefficients"]:
        jets = []
        for rec in orders:
            terms = []
            for tdata in rec["terms"]:
                p = TaylorPoly.zero(dim, center, D)
                for exps_list, val in tdata["coeffs"]:
                    p.coeffs[pos[tuple(exps_list)]] = val
                terms.append(p)
            if not terms:
                terms = [TaylorPoly.zero(dim, center, D)]
            jets.append(TimeJet(var, tuple(terms)))
        comps.append(tuple(jets))
    diag = data["diagnostics"]
    return ExpansionCoeffs(
        center, wp, int(data["order_K"]), D, int(data["components"]),
        tuple(comps),
        ExpansionDiagnostics(tuple(diag["sup_norms"]), tuple(diag["weighted"]),
                             float(diag["tau_ref"]), bool(diag["truncated"])))
