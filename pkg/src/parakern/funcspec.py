"""Function specs for initial data, sources and boundary data.

Solvers consume these instead of bare callables so problem files can
describe them declaratively.  Every spec evaluates as f(t, x) with x a
length-n array; space-only kinds ignore t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import UnsupportedSpecError


class FunctionSpec:
    time_dependent = False

    def eval(self, t: float, x: np.ndarray) -> float:
        raise NotImplementedError

    def __call__(self, t: float, x) -> float:
        return self.eval(t, np.atleast_1d(np.asarray(x, dtype=float)))


@dataclass(frozen=True)
class ZeroFunc(FunctionSpec):
    def eval(self, t, x):
        return 0.0


@dataclass(frozen=True)
class SpacePoly(FunctionSpec):
    """sum coef * x^exps."""

    terms: tuple[tuple[float, tuple[int, ...]], ...]

    def eval(self, t, x):
        return sum(c * float(np.prod(x ** np.asarray(e)))
                   for c, e in self.terms)


@dataclass(frozen=True)
class SpaceFourier(FunctionSpec):
    """sum amp * sin(k . x + phase)."""

    terms: tuple[tuple[float, tuple[float, ...], float], ...]

    def eval(self, t, x):
        return sum(a * math.sin(float(np.dot(k, x)) + p)
                   for a, k, p in self.terms)


@dataclass(frozen=True)
class SpacePolyFourier(FunctionSpec):
    """sum coef * x^exps * sin(k . x + phase); covers terms like x sin x."""

    terms: tuple[tuple[float, tuple[int, ...], tuple[float, ...], float], ...]

    def eval(self, t, x):
        total = 0.0
        for c, e, k, p in self.terms:
            total += c * float(np.prod(x ** np.asarray(e))) * \
                math.sin(float(np.dot(k, x)) + p)
        return total


@dataclass(frozen=True)
class GaussianMix(FunctionSpec):
    """sum a * exp(-b |x - c|^2)."""

    terms: tuple[tuple[float, float, tuple[float, ...]], ...]

    def eval(self, t, x):
        total = 0.0
        for a, b, c in self.terms:
            d = x - np.asarray(c)
            total += a * math.exp(-b * float(np.dot(d, d)))
        return total


@dataclass(frozen=True)
class GridSamples(FunctionSpec):
    """1D samples with cubic-spline interpolation (natural ends)."""

    points: tuple[float, ...]
    values: tuple[float, ...]

    def _spline(self):
        cached = getattr(self, "_spline_obj", None)
        if cached is None:
            from scipy.interpolate import CubicSpline
            cached = CubicSpline(self.points, self.values, bc_type="natural")
            object.__setattr__(self, "_spline_obj", cached)
        return cached

    def eval(self, t, x):
        return float(self._spline()(float(x[0])))


@dataclass(frozen=True)
class TimePolyFunc(FunctionSpec):
    """sum_l t^l * space_l(x)."""

    parts: tuple[tuple[int, FunctionSpec], ...]
    time_dependent = True

    def eval(self, t, x):
        return sum(t ** l * s.eval(t, x) for l, s in self.parts)


@dataclass(frozen=True)
class ExpTime(FunctionSpec):
    """exp(rate * t) * space(x)."""

    rate: float
    space: FunctionSpec
    time_dependent = True

    def eval(self, t, x):
        return math.exp(self.rate * t) * self.space.eval(t, x)


@dataclass(frozen=True)
class CallableFunc(FunctionSpec):
    """Wrap an arbitrary callable f(t, x); for in-process use only."""

    fn: Callable
    time_dependent = True

    def eval(self, t, x):
        return float(self.fn(t, x))


def constant(value: float) -> SpacePoly:
    return SpacePoly(((float(value), (0,)),))


def spec_from_dict(data: dict | None, dim: int) -> FunctionSpec:
    """Build a spec from its problem-file JSON form."""
    if data is None:
        return ZeroFunc()
    kind = data.get("kind")
    if kind == "zero":
        return ZeroFunc()
    if kind == "poly":
        return SpacePoly(tuple((float(c), tuple(int(v) for v in e))
                               for c, e in data["terms"]))
    if kind == "fourier":
        return SpaceFourier(tuple((float(a), tuple(float(v) for v in k),
                                   float(p)) for a, k, p in data["terms"]))
    if kind == "polyfourier":
        return SpacePolyFourier(tuple(
            (float(c), tuple(int(v) for v in e), tuple(float(v) for v in k),
             float(p)) for c, e, k, p in data["terms"]))
    if kind == "gaussian_mix":
        return GaussianMix(tuple((float(a), float(b),
                                  tuple(float(v) for v in c))
                                 for a, b, c in data["terms"]))
    if kind == "grid":
        return GridSamples(tuple(float(v) for v in data["points"]),
                           tuple(float(v) for v in data["values"]))
    if kind == "time_poly":
        return TimePolyFunc(tuple((int(l), spec_from_dict(s, dim))
                                  for l, s in data["parts"]))
    if kind == "expt":
        return ExpTime(float(data["rate"]), spec_from_dict(data["space"], dim))
    raise UnsupportedSpecError(f"unknown function kind {kind!r}")
