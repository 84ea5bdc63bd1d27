"""Truncated multivariate Taylor-polynomial algebra.

Everything downstream (coefficient recursions, kernel assembly) is built on
three value types:

* :class:`MultiIndex` -- exponent tuples with order and factorial helpers.
* :class:`TaylorPoly` -- a dense polynomial in ``dx = x - center`` truncated
  at a fixed total degree, stored in graded-lexicographic order.
* :class:`TimeJet` -- a truncated polynomial in a time variable whose
  coefficients are ``TaylorPoly`` values.

All values are immutable after construction and all operations are pure,
so results can be shared freely across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import ParameterError, StructureError, UnsupportedSpecError

# Factorials above this order are rejected rather than silently huge.
MAX_INDEX_ORDER = 64


# ---------------------------------------------------------------------------
# multi-indices and the graded-lexicographic index table
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MultiIndex:
    """Non-negative integer exponents, one per coordinate."""

    entries: tuple[int, ...]

    def __post_init__(self):
        if len(self.entries) < 1:
            raise ParameterError("dimension must be >= 1")
        if any(e < 0 for e in self.entries):
            raise ParameterError(f"negative exponent in {self.entries}")
        if self.order > MAX_INDEX_ORDER:
            raise ParameterError(
                f"|gamma|={self.order} exceeds cap {MAX_INDEX_ORDER}")

    @property
    def dim(self) -> int:
        return len(self.entries)

    @property
    def order(self) -> int:
        return sum(self.entries)

    def factorial(self) -> int:
        out = 1
        for e in self.entries:
            out *= math.factorial(e)
        return out

    def incremented(self, i: int) -> "MultiIndex":
        """gamma + 1_i."""
        if not 0 <= i < self.dim:
            raise ParameterError(f"coordinate {i} out of range")
        e = list(self.entries)
        e[i] += 1
        return MultiIndex(tuple(e))

    def __getitem__(self, i: int) -> int:
        return self.entries[i]

    def __iter__(self):
        return iter(self.entries)


def _grlex_key(exps: tuple[int, ...]) -> tuple:
    return (sum(exps), exps)


@lru_cache(maxsize=None)
def index_table(dim: int, cap: int):
    """All exponent tuples with total degree <= cap, graded-lex sorted.

    Returns ``(exps, pos, orders)`` where ``exps`` is an ``(N, dim)`` int
    array, ``pos`` maps tuple -> row, and ``orders`` holds total degrees.
    The table, not the polynomials, owns the canonical ordering.
    """
    if dim < 1:
        raise ParameterError("dimension must be >= 1")
    if cap < 0:
        raise ParameterError("degree cap must be >= 0")

    def gen(d):
        if d == 0:
            yield ()
            return
        for rest in gen(d - 1):
            for e in range(cap + 1 - sum(rest)):
                yield rest + (e,)

    tuples = sorted(gen(dim), key=_grlex_key)
    exps = np.array(tuples, dtype=np.int64).reshape(len(tuples), dim)
    pos = {t: i for i, t in enumerate(tuples)}
    orders = exps.sum(axis=1)
    return exps, pos, orders


@lru_cache(maxsize=None)
def _mul_tables(dim: int, cap: int):
    """Precomputed index pairs for truncated convolution.

    ``(ii, jj, tt)`` enumerate products landing inside the cap and
    ``(oi, oj)`` those that would exceed it (used for the truncation flag).
    """
    exps, pos, orders = index_table(dim, cap)
    n = len(exps)
    ii, jj, tt, oi, oj = [], [], [], [], []
    for i in range(n):
        for j in range(n):
            if orders[i] + orders[j] <= cap:
                ii.append(i)
                jj.append(j)
                tt.append(pos[tuple(exps[i] + exps[j])])
            else:
                oi.append(i)
                oj.append(j)
    return (np.array(ii), np.array(jj), np.array(tt),
            np.array(oi, dtype=np.int64), np.array(oj, dtype=np.int64))


@lru_cache(maxsize=None)
def _partial_tables(dim: int, cap: int):
    """Per-coordinate (source row, target row, scale) differentiation maps."""
    exps, pos, _ = index_table(dim, cap)
    out = []
    for axis in range(dim):
        src, dst, scale = [], [], []
        for i, e in enumerate(exps):
            if e[axis] > 0:
                t = tuple(e)
                lowered = t[:axis] + (t[axis] - 1,) + t[axis + 1:]
                src.append(i)
                dst.append(pos[lowered])
                scale.append(t[axis])
        out.append((np.array(src), np.array(dst), np.array(scale, dtype=float)))
    return tuple(out)


# ---------------------------------------------------------------------------
# TaylorPoly
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TaylorPoly:
    """Dense truncated polynomial in ``dx = x - center``.

    ``coeffs[i]`` pairs with row ``i`` of ``index_table(dim, cap)``.  The
    ``truncated`` flag records that some operation discarded a nonzero
    coefficient beyond the cap; it propagates through the algebra.
    """

    dim: int
    center: tuple[float, ...]
    cap: int
    coeffs: np.ndarray
    truncated: bool = False

    def __post_init__(self):
        exps, _, _ = index_table(self.dim, self.cap)
        if len(self.coeffs) != len(exps):
            raise StructureError(
                f"coefficient array of length {len(self.coeffs)} does not "
                f"match table size {len(exps)} for dim={self.dim} cap={self.cap}")
        if len(self.center) != self.dim:
            raise StructureError("center length does not match dimension")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(dim: int, center: Sequence[float], cap: int) -> "TaylorPoly":
        exps, _, _ = index_table(dim, cap)
        return TaylorPoly(dim, tuple(float(c) for c in center), cap,
                          np.zeros(len(exps)))

    @staticmethod
    def constant(value: float, dim: int, center: Sequence[float],
                 cap: int) -> "TaylorPoly":
        p = TaylorPoly.zero(dim, center, cap)
        p.coeffs[0] = value
        return p

    @staticmethod
    def delta_x(i: int, dim: int, center: Sequence[float],
                cap: int) -> "TaylorPoly":
        """The monomial dx_i."""
        if cap < 1:
            raise ParameterError("cap must be >= 1 to hold dx")
        p = TaylorPoly.zero(dim, center, cap)
        _, pos, _ = index_table(dim, cap)
        key = tuple(1 if a == i else 0 for a in range(dim))
        p.coeffs[pos[key]] = 1.0
        return p

    @staticmethod
    def from_coeff_dict(coeffs: dict, dim: int, center: Sequence[float],
                        cap: int) -> "TaylorPoly":
        p = TaylorPoly.zero(dim, center, cap)
        _, pos, _ = index_table(dim, cap)
        for key, val in coeffs.items():
            entries = key.entries if isinstance(key, MultiIndex) else tuple(key)
            if sum(entries) > cap:
                raise StructureError(f"index {entries} exceeds cap {cap}")
            p.coeffs[pos[entries]] = val
        return p

    # -- accessors -----------------------------------------------------------

    def coeff(self, gamma) -> float:
        entries = gamma.entries if isinstance(gamma, MultiIndex) else tuple(gamma)
        _, pos, _ = index_table(self.dim, self.cap)
        return float(self.coeffs[pos[entries]])

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.coeffs))) if len(self.coeffs) else 0.0

    def _like(self, coeffs: np.ndarray, truncated: bool) -> "TaylorPoly":
        return TaylorPoly(self.dim, self.center, self.cap, coeffs, truncated)

    def _check_mate(self, other: "TaylorPoly"):
        if (self.dim != other.dim or self.cap != other.cap
                or self.center != other.center):
            raise StructureError(
                f"mismatched polynomials: dim {self.dim}/{other.dim}, "
                f"cap {self.cap}/{other.cap}, center {self.center}/{other.center}")

    # -- operator sugar (delegates to the module-level ops) ------------------

    def __add__(self, other):
        return poly_add(self, other)

    def __mul__(self, other):
        if isinstance(other, TaylorPoly):
            return poly_mul(self, other)
        return self._like(self.coeffs * float(other), self.truncated)

    __rmul__ = __mul__

    def __sub__(self, other):
        return poly_add(self, other * -1.0)

    def __neg__(self):
        return self * -1.0


def poly_add(a: TaylorPoly, b: TaylorPoly) -> TaylorPoly:
    """Coefficient-wise sum; operands must share dim, center and cap."""
    a._check_mate(b)
    return a._like(a.coeffs + b.coeffs, a.truncated or b.truncated)


def poly_mul(a: TaylorPoly, b: TaylorPoly) -> TaylorPoly:
    """Truncated product; discarded above-cap terms raise the flag."""
    a._check_mate(b)
    ii, jj, tt, oi, oj = _mul_tables(a.dim, a.cap)
    out = np.zeros_like(a.coeffs)
    np.add.at(out, tt, a.coeffs[ii] * b.coeffs[jj])
    overflow = bool(len(oi)) and bool(np.any(a.coeffs[oi] * b.coeffs[oj] != 0.0))
    return a._like(out, a.truncated or b.truncated or overflow)


def poly_partial(p: TaylorPoly, i: int) -> TaylorPoly:
    """d/dx_i, coefficient shift-and-scale."""
    if not 0 <= i < p.dim:
        raise ParameterError(f"coordinate {i} out of range for dim {p.dim}")
    src, dst, scale = _partial_tables(p.dim, p.cap)[i]
    out = np.zeros_like(p.coeffs)
    if len(src):
        out[dst] = scale * p.coeffs[src]
    return p._like(out, p.truncated)


def poly_laplacian(p: TaylorPoly) -> TaylorPoly:
    out = TaylorPoly.zero(p.dim, p.center, p.cap)
    for i in range(p.dim):
        out = poly_add(out, poly_partial(poly_partial(p, i), i))
    return out._like(out.coeffs, p.truncated)


def poly_euler(p: TaylorPoly) -> TaylorPoly:
    """dx . grad p, which acts diagonally as multiplication by |gamma|."""
    _, _, orders = index_table(p.dim, p.cap)
    return p._like(p.coeffs * orders, p.truncated)


def poly_shift_up(p: TaylorPoly, i: int) -> TaylorPoly:
    """Multiply by the monomial dx_i (exact, flags on overflow)."""
    return poly_mul(p, TaylorPoly.delta_x(i, p.dim, p.center, p.cap))


def poly_eval(p: TaylorPoly, x: Sequence[float]) -> float:
    """Evaluate at a point, summing in graded-lexicographic order."""
    x = np.asarray(x, dtype=float)
    if x.shape != (p.dim,):
        raise StructureError(f"point of shape {x.shape}, expected ({p.dim},)")
    exps, _, _ = index_table(p.dim, p.cap)
    dx = x - np.asarray(p.center)
    monomials = np.prod(dx[None, :] ** exps, axis=1)
    return float(np.sum(p.coeffs * monomials))


def poly_eval_many(p: TaylorPoly, xs: np.ndarray) -> np.ndarray:
    """Vectorized evaluation over points of shape ``(m, dim)``."""
    xs = np.asarray(xs, dtype=float).reshape(-1, p.dim)
    exps, _, _ = index_table(p.dim, p.cap)
    dx = xs - np.asarray(p.center)[None, :]
    monomials = np.prod(dx[:, None, :] ** exps[None, :, :], axis=2)
    return monomials @ p.coeffs


# ---------------------------------------------------------------------------
# coefficient-entry specs (admissible b, V and friends)
# ---------------------------------------------------------------------------

class CoefficientEntry:
    """A spatial coefficient admitting exact Taylor expansion.

    Supported classes are multivariate polynomials and finite Fourier
    series; both satisfy a derivative bound ``|d^a f| <= A c^|a|`` which is
    what the expansion theory requires of drift and potential entries.
    """

    def eval(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def derivative(self, alpha: Sequence[int]) -> "CoefficientEntry":
        raise NotImplementedError

    def taylor_coeffs(self, y: Sequence[float], cap: int) -> TaylorPoly:
        raise NotImplementedError

    def bound_constants(self) -> tuple[float, float]:
        """(amplitude A, rate c) with |d^a f| <= A * c^|a| everywhere...

        ...for Fourier entries; for polynomials the bound holds on the
        declared domain only and the rate is degree-dependent, so callers
        should treat it as advisory there.
        """
        raise NotImplementedError


@dataclass(frozen=True)
class PolyEntry(CoefficientEntry):
    """Sum of monomial terms ``coef * x^exps`` in absolute coordinates."""

    dim: int
    terms: tuple[tuple[float, tuple[int, ...]], ...]

    def eval(self, x):
        x = np.asarray(x, dtype=float)
        total = 0.0
        for coef, exps in self.terms:
            total += coef * float(np.prod(x ** np.asarray(exps)))
        return total

    def derivative(self, alpha):
        new_terms = []
        for coef, exps in self.terms:
            c = coef
            e = list(exps)
            dead = False
            for axis, a in enumerate(alpha):
                for _ in range(a):
                    if e[axis] == 0:
                        dead = True
                        break
                    c *= e[axis]
                    e[axis] -= 1
                if dead:
                    break
            if not dead:
                new_terms.append((c, tuple(e)))
        return PolyEntry(self.dim, tuple(new_terms))

    def taylor_coeffs(self, y, cap):
        # exact binomial re-centering: x^m = sum_k C(m,k) y^(m-k) dx^k
        y = np.asarray(y, dtype=float)
        out = TaylorPoly.zero(self.dim, tuple(y), cap)
        _, pos, _ = index_table(self.dim, cap)
        truncated = False
        for coef, exps in self.terms:
            idx = [0] * self.dim
            while True:
                k = tuple(idx)
                if sum(k) <= cap:
                    w = coef
                    for a in range(self.dim):
                        w *= math.comb(exps[a], k[a]) * y[a] ** (exps[a] - k[a])
                    out.coeffs[pos[k]] += w
                else:
                    truncated = True
                # odometer over the per-axis ranges
                axis = 0
                while axis < self.dim:
                    idx[axis] += 1
                    if idx[axis] <= exps[axis]:
                        break
                    idx[axis] = 0
                    axis += 1
                if axis == self.dim:
                    break
        return TaylorPoly(self.dim, tuple(y), cap, out.coeffs, truncated)

    def max_degree(self) -> int:
        return max((sum(e) for _, e in self.terms), default=0)

    def bound_constants(self):
        amp = sum(abs(c) for c, _ in self.terms)
        return amp, float(max(1, self.max_degree()))


@dataclass(frozen=True)
class FourierEntry(CoefficientEntry):
    """Finite Fourier series ``sum amp * sin(k . x + phase)``."""

    dim: int
    terms: tuple[tuple[float, tuple[float, ...], float], ...]

    def eval(self, x):
        x = np.asarray(x, dtype=float)
        total = 0.0
        for amp, wavevec, phase in self.terms:
            total += amp * math.sin(float(np.dot(wavevec, x)) + phase)
        return total

    def derivative(self, alpha):
        # d^a sin(k.x + p) = (prod k_i^a_i) sin(k.x + p + |a| pi/2)
        new_terms = []
        order = sum(alpha)
        for amp, wavevec, phase in self.terms:
            scale = 1.0
            for axis, a in enumerate(alpha):
                scale *= wavevec[axis] ** a
            new_terms.append((amp * scale, wavevec, phase + order * math.pi / 2))
        return FourierEntry(self.dim, tuple(new_terms))

    def taylor_coeffs(self, y, cap):
        y = np.asarray(y, dtype=float)
        out = TaylorPoly.zero(self.dim, tuple(y), cap)
        exps, _, _ = index_table(self.dim, cap)
        for amp, wavevec, phase in self.terms:
            ky = float(np.dot(wavevec, y))
            kpow = np.prod(np.asarray(wavevec)[None, :] ** exps, axis=1)
            orders = exps.sum(axis=1)
            fact = np.array([MultiIndex(tuple(e)).factorial() for e in exps],
                            dtype=float)
            vals = amp * kpow * np.sin(ky + phase + orders * math.pi / 2) / fact
            out.coeffs[:] += vals
        # the analytic tail beyond the cap is nonzero by construction
        return TaylorPoly(self.dim, tuple(y), cap, out.coeffs, True)

    def bound_constants(self):
        amp = sum(abs(a) for a, _, _ in self.terms)
        rate = max((float(np.linalg.norm(w)) for _, w, _ in self.terms),
                   default=0.0)
        return amp, rate


@dataclass(frozen=True)
class TimeEntry:
    """Polynomial time dependence: ``sum_l entry_l(x) * t^l``."""

    parts: tuple[tuple[int, CoefficientEntry], ...]

    @property
    def max_order(self) -> int:
        return max((l for l, _ in self.parts), default=0)

    def eval(self, t: float, x) -> float:
        return sum(e.eval(x) * t ** l for l, e in self.parts)

    def part(self, l: int) -> CoefficientEntry | None:
        for ll, e in self.parts:
            if ll == l:
                return e
        return None

    def shifted(self, s0: float) -> "TimeEntry":
        """Re-expand around a shifted time origin: t -> s0 + t."""
        if not self.parts:
            return self
        dim = self.parts[0][1].dim
        acc: dict[int, list] = {}
        for l, e in self.parts:
            for m in range(l + 1):
                acc.setdefault(m, []).append((math.comb(l, m) * s0 ** (l - m), e))
        parts = []
        for m, pieces in sorted(acc.items()):
            parts.append((m, _scaled_sum(dim, pieces)))
        return TimeEntry(tuple(parts))


def _scaled_sum(dim: int, pieces) -> CoefficientEntry:
    """Combine (scale, entry) pieces into one entry of a uniform kind."""
    polys = [(s, e) for s, e in pieces if isinstance(e, PolyEntry)]
    fours = [(s, e) for s, e in pieces if isinstance(e, FourierEntry)]
    if polys and fours:
        raise UnsupportedSpecError("cannot mix poly and fourier in one entry")
    if fours:
        terms = []
        for s, e in fours:
            terms.extend((s * a, w, p) for a, w, p in e.terms)
        return FourierEntry(dim, tuple(terms))
    terms = []
    for s, e in polys:
        terms.extend((s * c, ex) for c, ex in e.terms)
    return PolyEntry(dim, tuple(terms))


@dataclass(frozen=True)
class TaylorExpansion:
    """taylorize() result: the truncated polynomial plus its tail bound."""

    poly: TaylorPoly
    amplitude: float
    rate: float

    def remainder_bound(self, radius: float) -> float:
        """Rigorous sup of |f - poly| on the ball of the given radius.

        Directional (D+1)-st derivatives of a Fourier term are bounded by
        ``amp * |k|^(D+1)``, giving the Lagrange form below.  Polynomial
        entries inside their degree have zero tail.
        """
        d1 = self.poly.cap + 1
        return self.amplitude * self.rate ** d1 * radius ** d1 / math.factorial(d1)


def taylorize(entry: CoefficientEntry, y: Sequence[float],
              degree: int) -> TaylorExpansion:
    """Expand an admissible coefficient entry about ``y`` to ``degree``."""
    if not isinstance(entry, CoefficientEntry):
        raise UnsupportedSpecError(
            f"cannot taylorize object of type {type(entry).__name__}")
    poly = entry.taylor_coeffs(y, degree)
    if isinstance(entry, PolyEntry) and entry.max_degree() <= degree:
        amp, rate = 0.0, 0.0
    else:
        amp, rate = entry.bound_constants()
    return TaylorExpansion(poly, amp, rate)


# ---------------------------------------------------------------------------
# TimeJet
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TimeJet:
    """``sum_l P_l(x) * time^l`` with TaylorPoly coefficients.

    ``var`` tags the time variable ('t' for plain/physical time, 'tau' for
    the warped variable).  Terms all share dim, center and cap.
    """

    var: str
    terms: tuple[TaylorPoly, ...]

    def __post_init__(self):
        if not self.terms:
            raise StructureError("a TimeJet needs at least the order-0 term")
        head = self.terms[0]
        for p in self.terms[1:]:
            head._check_mate(p)

    @property
    def order(self) -> int:
        return len(self.terms) - 1

    @property
    def dim(self) -> int:
        return self.terms[0].dim

    @property
    def center(self) -> tuple[float, ...]:
        return self.terms[0].center

    @property
    def cap(self) -> int:
        return self.terms[0].cap

    @property
    def truncated(self) -> bool:
        return any(p.truncated for p in self.terms)

    @staticmethod
    def of_poly(p: TaylorPoly, var: str = "t") -> "TimeJet":
        return TimeJet(var, (p,))

    @staticmethod
    def zero(dim: int, center, cap: int, var: str = "t") -> "TimeJet":
        return TimeJet(var, (TaylorPoly.zero(dim, center, cap),))

    def term(self, l: int) -> TaylorPoly:
        if l <= self.order:
            return self.terms[l]
        return TaylorPoly.zero(self.dim, self.center, self.cap)

    def is_time_constant(self, tol: float = 0.0) -> bool:
        return all(p.max_abs() <= tol for p in self.terms[1:])

    def max_abs(self) -> float:
        return max(p.max_abs() for p in self.terms)

    def trimmed(self) -> "TimeJet":
        """Drop zero trailing terms (canonical form for comparisons)."""
        last = 0
        for l, p in enumerate(self.terms):
            if p.max_abs() != 0.0:
                last = l
        return TimeJet(self.var, self.terms[:last + 1])

    def _check_var(self, other: "TimeJet"):
        if self.var != other.var:
            raise StructureError(f"mixed time variables {self.var}/{other.var}")


def jet_add(a: TimeJet, b: TimeJet) -> TimeJet:
    a._check_var(b)
    n = max(a.order, b.order)
    return TimeJet(a.var,
                   tuple(poly_add(a.term(l), b.term(l)) for l in range(n + 1)))


def jet_mul(a: TimeJet, b: TimeJet, max_order: int | None = None) -> TimeJet:
    a._check_var(b)
    n = a.order + b.order
    if max_order is not None:
        n = min(n, max_order)
    terms = []
    for l in range(n + 1):
        acc = TaylorPoly.zero(a.dim, a.center, a.cap)
        for i in range(max(0, l - b.order), min(l, a.order) + 1):
            acc = poly_add(acc, poly_mul(a.terms[i], b.terms[l - i]))
        terms.append(acc)
    return TimeJet(a.var, tuple(terms))


def jet_scale(a: TimeJet, s: float) -> TimeJet:
    return TimeJet(a.var, tuple(p * s for p in a.terms))


def jet_scale_series(a: TimeJet, series: np.ndarray,
                     max_order: int | None = None) -> TimeJet:
    """Multiply by a scalar power series in the jet's time variable."""
    n = a.order + len(series) - 1
    if max_order is not None:
        n = min(n, max_order)
    terms = []
    for l in range(n + 1):
        acc = TaylorPoly.zero(a.dim, a.center, a.cap)
        for i in range(max(0, l - len(series) + 1), min(l, a.order) + 1):
            if series[l - i] != 0.0:
                acc = poly_add(acc, a.terms[i] * float(series[l - i]))
        terms.append(acc)
    return TimeJet(a.var, tuple(terms))


def jet_dt(a: TimeJet) -> TimeJet:
    """Time derivative: lowers the jet order by one, scales by l."""
    if a.order == 0:
        return TimeJet.zero(a.dim, a.center, a.cap, a.var)
    return TimeJet(a.var,
                   tuple(a.terms[l] * float(l) for l in range(1, a.order + 1)))


def jet_partial(a: TimeJet, i: int) -> TimeJet:
    return TimeJet(a.var, tuple(poly_partial(p, i) for p in a.terms))


def jet_laplacian(a: TimeJet) -> TimeJet:
    return TimeJet(a.var, tuple(poly_laplacian(p) for p in a.terms))


def jet_eval(a: TimeJet, time: float, x: Sequence[float]) -> float:
    """Horner evaluation in time of the spatially evaluated terms."""
    vals = [poly_eval(p, x) for p in a.terms]
    out = 0.0
    for v in reversed(vals):
        out = out * time + v
    return out


def jet_eval_poly(a: TimeJet, time: float) -> TaylorPoly:
    """Collapse the time dependence at a fixed time, keeping the polynomial."""
    out = TaylorPoly.zero(a.dim, a.center, a.cap)
    for l, p in enumerate(a.terms):
        out = poly_add(out, p * (time ** l))
    return out


def jet_compose_time(a: TimeJet, inner: np.ndarray, var: str,
                     max_order: int) -> TimeJet:
    """Substitute ``time = inner(s)`` where ``inner`` has no constant term.

    Used to re-express t-jets in the warped variable, e.g. b(t(tau)).
    """
    if len(inner) and inner[0] != 0.0:
        raise ParameterError("inner series must vanish at 0")
    zero = TaylorPoly.zero(a.dim, a.center, a.cap)
    terms = [zero] * (max_order + 1)
    # powers of the inner series, truncated
    power = np.zeros(max_order + 1)
    power[0] = 1.0
    for l, p in enumerate(a.terms):
        if l > 0:
            power = _series_mul(power, inner, max_order)
        if p.max_abs() == 0.0:
            continue
        for m in range(max_order + 1):
            if power[m] != 0.0:
                terms[m] = poly_add(terms[m], p * float(power[m]))
    return TimeJet(var, tuple(terms))


# ---------------------------------------------------------------------------
# scalar power-series helpers (shared with the recursion module)
# ---------------------------------------------------------------------------

def _series_mul(a: np.ndarray, b: np.ndarray, max_order: int) -> np.ndarray:
    out = np.zeros(max_order + 1)
    for i, ai in enumerate(a[:max_order + 1]):
        if ai == 0.0:
            continue
        top = min(len(b), max_order + 1 - i)
        out[i:i + top] += ai * b[:top]
    return out


def series_reciprocal(a: np.ndarray, max_order: int) -> np.ndarray:
    """Power-series inverse of a series with nonzero constant term."""
    if a[0] == 0.0:
        raise ParameterError("series has no reciprocal: zero constant term")
    out = np.zeros(max_order + 1)
    out[0] = 1.0 / a[0]
    for m in range(1, max_order + 1):
        s = 0.0
        for i in range(1, min(m, len(a) - 1) + 1):
            s += a[i] * out[m - i]
        out[m] = -s / a[0]
    return out
