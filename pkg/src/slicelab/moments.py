"""Directional p-th absolute moments and their minimization over the sphere."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bodies import StarBody, reference_volume
from .quad import (IntegrationConfig, ValueWithError, _check_unit, body_integrate, combine_status,
                   polar_moments, rel_err)
from .sphere_opt import axis_starts, minimize_on_sphere, random_starts

RANDOM_STARTS = 8
POLISH_STARTS = 3


@dataclass
class MomentResult:
    direction: np.ndarray
    value: ValueWithError
    p: float
    normalized_gamma: float | None = None
    start_values: list = field(default_factory=list)
    spread: float = 0.0
    note: str = "best value found by multi-start local search (an upper bound on the minimum)"

    def to_dict(self) -> dict:
        return {"direction": [float(v) for v in self.direction], "value": self.value.to_dict(),
                "p": self.p, "normalized_gamma": self.normalized_gamma,
                "start_values": [float(v) for v in self.start_values], "spread": self.spread,
                "note": self.note}


def _check_p(p, strict=True):
    p = float(p)
    if not p > 0:
        raise ValueError("p must be positive")
    return p


def moment(body: StarBody, f, p: float, xi, cfg: IntegrationConfig | None = None) -> ValueWithError:
    """M_{K,f,p}(xi) = int_K |(x, xi)|^p f(x) dx."""
    cfg = cfg or IntegrationConfig()
    p = _check_p(p)
    xi = _check_unit(xi, body.dim)
    return polar_moments(body, f, p, cfg).moment(xi)


def min_moment(body: StarBody, f, p: float, cfg: IntegrationConfig | None = None,
               random_starts_count: int = RANDOM_STARTS) -> MomentResult:
    """Smallest directional moment found from axis starts and random starts.

    The objective is evaluated on one fixed polar rule, so it is a deterministic
    function of the direction; the reported value is re-estimated with errors.
    The moment is even in xi, so one sign per axis suffices; all starts are
    scored and the best few are polished.
    """
    cfg = cfg or IntegrationConfig()
    p = _check_p(p)
    n = body.dim
    pm = polar_moments(body, f, p, cfg)
    if pm.mass().value <= 0.0:
        raise ValueError("density vanishes on the body")
    starts = axis_starts(n, both_signs=False) + random_starts(n, random_starts_count, cfg.seed, "min-moment")
    scores = np.array([pm.moment_value(u) for u in starts])
    order = np.argsort(scores, kind="stable")[:POLISH_STARTS]
    res = minimize_on_sphere(pm.moment_value, [starts[i] for i in order], xatol=1e-5)
    val = pm.moment(res.direction)
    return MomentResult(res.direction, val, p, None, [v for _, _, v in res.starts], res.spread)


def gamma_ratio(body: StarBody, f, p: float, cfg: IntegrationConfig | None = None,
                result: MomentResult | None = None) -> float:
    """(min_xi M / (|K|^{p/n} int_K f))^{1/p}; its supremum over (K, f) is gamma(p, n)."""
    cfg = cfg or IntegrationConfig()
    result = result or min_moment(body, f, p, cfg)
    vol = reference_volume(body, cfg).value
    mass = body_integrate(body, f, cfg).value
    if vol <= 0 or mass <= 0:
        raise ValueError("body volume and density mass must be positive")
    return float((result.value.value / (vol ** (p / body.dim) * mass)) ** (1.0 / p))


@dataclass
class MomentRatioReport:
    ratio: float
    ratio_error: float
    v_hat: float
    best_witness: str
    scaling: float
    min_moment: MomentResult
    mass: ValueWithError
    status: str
    witnesses: list

    def to_dict(self) -> dict:
        return {"ratio": self.ratio, "ratio_error": self.ratio_error, "v_hat": self.v_hat,
                "best_witness": self.best_witness, "scaling": self.scaling,
                "min_moment": self.min_moment.to_dict(), "mass": self.mass.to_dict(),
                "status": self.status, "witnesses": self.witnesses}


def moment_ratio(body: StarBody, f, p: float, witnesses, cfg: IntegrationConfig | None = None,
                result: MomentResult | None = None) -> MomentRatioReport:
    """Empirical constant (min_xi int |(x,xi)|^p dmu)^{1/p} / (sqrt(p) V_hat) for mu = f dx / int f.

    V_hat is the smallest |s* D|^{1/n} over the witnesses, with s* the least
    dilation placing K inside s* D. The ratio lower-bounds the absolute constant.
    """
    from .distances import contains_body

    cfg = cfg or IntegrationConfig()
    p = _check_p(p)
    if not witnesses:
        raise ValueError("at least one witness is required")
    n = body.dim
    rows = []
    for w in witnesses:
        if float(w.p) != p:
            raise ValueError(f"witness {w.tag!r} represents p={w.p}, expected {p}")
        _, s_star = contains_body(body, w.body, cfg)
        if not (s_star > 0 and math.isfinite(s_star)):
            continue
        vd = reference_volume(w.body, cfg).value
        rows.append({"tag": w.tag, "scaling": s_star, "v": s_star * vd ** (1.0 / n)})
    if not rows:
        raise ValueError("no witness contains the body after scaling")
    best = min(rows, key=lambda r: r["v"])
    result = result or min_moment(body, f, p, cfg)
    mass = body_integrate(body, f, cfg)
    norm_moment = result.value.value / mass.value
    ratio = norm_moment ** (1.0 / p) / (math.sqrt(p) * best["v"])
    err = ratio / p * (rel_err(result.value) + rel_err(mass))
    return MomentRatioReport(ratio, err, best["v"], best["tag"], best["scaling"], result, mass,
                       combine_status(result.value, mass), rows)
