"""Problem-file ingestion: JSON schema validation and object construction."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources

import jsonschema

from .errors import ParameterError as ParakernValueError
from .errors import SchemaError, UnsupportedSpecError
from .funcspec import spec_from_dict
from .polyalg import CoefficientEntry, FourierEntry, PolyEntry, TimeEntry
from .recursion import ProblemCoefficients, WarpParams, select_beta, warp_schedule
from .solvers import ProblemSpec, QuadratureConfig


@dataclass(frozen=True)
class ProblemFile:
    """Everything a CLI command needs, parsed and validated."""

    pc: ProblemCoefficients
    ps: ProblemSpec
    order_K: int
    degree_D: int | None
    warp: WarpParams
    quad: QuadratureConfig
    raw: dict


def _schema() -> dict:
    text = resources.files("parakern").joinpath(
        "schemas/problem.schema.json").read_text()
    return json.loads(text)


def _reject_nonfinite(value: str):
    raise SchemaError(f"non-finite number {value!r} in problem file")


def entry_from_dict(kind: str, terms, dim: int) -> CoefficientEntry | TimeEntry:
    if kind == "poly":
        return PolyEntry(dim, tuple(
            (float(c), tuple(int(v) for v in e)) for c, e in terms))
    if kind == "fourier":
        return FourierEntry(dim, tuple(
            (float(a), tuple(float(v) for v in k), float(p))
            for a, k, p in terms))
    if kind == "time_poly":
        parts = []
        for l, sub in terms:
            entry = entry_from_dict(sub["kind"], sub["terms"], dim)
            if isinstance(entry, TimeEntry):
                raise UnsupportedSpecError("time_poly cannot nest time_poly")
            parts.append((int(l), entry))
        return TimeEntry(tuple(parts))
    raise UnsupportedSpecError(f"unknown coefficient kind {kind!r}")


def _default_bound_c(entries) -> float:
    """Smallest admissible generic constant the entries advertise.

    Fourier entries demand C >= max(1, |k|) (their derivatives never
    decay); polynomial entries are only domain-bounded, so 1 is kept as
    the floor and users override bound_C when they know better.
    """
    c = 1.0
    for e in entries:
        parts = e.parts if isinstance(e, TimeEntry) else ((0, e),)
        for _, part in parts:
            if isinstance(part, FourierEntry):
                _, rate = part.bound_constants()
                c = max(c, rate)
    return c


def load_problem_dict(data: dict) -> ProblemFile:
    try:
        jsonschema.validate(data, _schema())
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaError(f"at {path}: {exc.message}") from exc

    dim = data["dimension"]
    components = data["components"]
    if len(data["domain"]["lower"]) != dim or len(data["domain"]["upper"]) != dim:
        raise SchemaError("at domain: bounds must have length 'dimension'")

    drift = {}
    for rec in data["drift"]:
        key = (rec["i"], rec["j"], rec["k"])
        if key in drift:
            raise SchemaError(f"at drift: duplicate index {key}")
        drift[key] = entry_from_dict(rec["kind"], rec["terms"], dim)
    potential = {}
    for rec in data.get("potential", []):
        potential[rec["i"]] = entry_from_dict(rec["kind"], rec["terms"], dim)

    lo = tuple(float(v) for v in data["domain"]["lower"])
    hi = tuple(float(v) for v in data["domain"]["upper"])
    radius = math.sqrt(sum(max(a * a, b * b) for a, b in zip(lo, hi)))

    try:
        pc = ProblemCoefficients(
            dim, components, drift, potential,
            bound_C=float(data.get("bound_C",
                                   _default_bound_c(list(drift.values())
                                                    + list(potential.values())))),
            domain_radius_R=radius)
    except ParakernValueError as exc:
        raise SchemaError(f"at drift/potential: {exc}") from exc

    prob = data["problem"]
    ps = ProblemSpec(
        kind=prob["kind"],
        domain_lo=lo,
        domain_hi=hi,
        horizon=float(data["horizon"]),
        coefficients=pc,
        phi=spec_from_dict(prob.get("phi"), dim),
        source=spec_from_dict(prob.get("f"), dim),
        alpha=spec_from_dict(prob.get("alpha"), dim),
        psi=spec_from_dict(prob.get("psi"), dim),
        nu=float(prob.get("nu", 0.0)) if prob.get("nu") is not None else 0.0,
        phi0=spec_from_dict(prob.get("phi0"), dim))

    expn = data.get("expansion", {})
    mode = expn.get("mode", "plain")
    beta = expn.get("beta")
    c_target = expn.get("c_target")
    if mode == "plain":
        warp = WarpParams()
    elif mode == "beta":
        warp = WarpParams(mode="beta", beta=float(beta)) if beta else \
            select_beta(pc)
    else:
        if beta:
            warp = WarpParams(mode="tau", beta=float(beta))
        elif c_target:
            warp = warp_schedule(ps.horizon, float(c_target)).params
        else:
            warp = WarpParams(mode="tau", beta=select_beta(pc).beta)

    quad_data = data.get("quadrature", {})
    quad = QuadratureConfig(
        gh_order=int(quad_data.get("gh_order", 40)),
        gl_order=int(quad_data.get("gl_order", 32)),
        steps=int(quad_data.get("steps", 64)))

    return ProblemFile(pc, ps, int(expn.get("order_K", 6)),
                       expn.get("degree_D"), warp, quad, data)


def load_problem_file(path: str) -> ProblemFile:
    try:
        with open(path) as fh:
            data = json.load(fh, parse_constant=_reject_nonfinite)
    except FileNotFoundError as exc:
        raise SchemaError(f"problem file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise SchemaError("problem file must hold a JSON object")
    return load_problem_dict(data)
