"""Containment, witness-restricted distances to L_p^n, and moment comparison."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .bodies import StarBody, make_ellipsoid, make_lq_ball, reference_volume
from .densities import (DirectionMeasure, ellipsoid_measure, euclidean_ball_measure,
                        gauge_from_measure, lp_ball_measure)
from .quad import (IntegrationConfig, SpecError, ValueWithError, combine_status, polar_moments,
                   rule_for, sphere_area, stream)
from .sphere_opt import maximize_on_sphere, minimize_on_sphere, random_starts

CONTAINMENT_SAMPLES = 2**14


@dataclass(frozen=True, eq=False)
class Witness:
    """A body D in L_p^n together with the measure representing ||.||_D^p."""
    body: StarBody
    measure: DirectionMeasure
    p: float
    tag: str

    def consistency_error(self, points: int = 256, seed: int = 0) -> float:
        """Largest relative gap between the measure-based norm and the body's gauge."""
        z = stream(seed, "witness-check", self.body.dim).standard_normal((points, self.body.dim))
        a = gauge_from_measure(self.measure, self.p, z)
        b = self.body.gauge(z)
        return float(np.max(np.abs(a - b) / np.maximum(b, 1e-300)))

    def check(self, tol: float = 1e-6) -> "Witness":
        err = self.consistency_error()
        if err > tol:
            raise ValueError(f"witness {self.tag!r} inconsistent with its measure (rel. error {err:.2e})")
        return self


def euclidean_witness(n: int, p: float, radius: float = 1.0) -> Witness:
    return Witness(make_lq_ball(n, 2.0, radius),
                   euclidean_ball_measure(n, p).scaled_norm(radius, p), float(p),
                   f"euclidean(r={radius:.6g})")


def lp_ball_witness(n: int, p: float, scale: float = 1.0) -> Witness:
    return Witness(make_lq_ball(n, p, scale), lp_ball_measure(n, p).scaled_norm(scale, p), float(p),
                   f"l{p:g}_ball(s={scale:.6g})")


def ellipsoid_witness(axes, p: float, rotation=None) -> Witness:
    return Witness(make_ellipsoid(axes, rotation), ellipsoid_measure(axes, p, rotation), float(p),
                   "ellipsoid(" + ", ".join(f"{float(a):.6g}" for a in np.atleast_1d(axes)) + ")")


def john_witnesses(body: StarBody, p: float) -> list[Witness]:
    """Circumscribed ball plus sqrt(n) times the John ellipsoid, where it is known analytically.

    For the hyperoctahedrally symmetric families the John ellipsoid is the inscribed
    ball; an ellipsoid is its own John ellipsoid.
    """
    n = body.dim
    out = [euclidean_witness(n, p, body.bounding_radius)]
    dil = body.params.get("dilation", 1.0)
    if body.family == "ellipsoid":
        axes = [a * dil for a in body.params["axes"]]
        out.append(ellipsoid_witness(axes, p, body.params.get("rotation")))
    elif body.family in ("cube", "cross_polytope", "lq_ball") and body.inradius is not None:
        out.append(euclidean_witness(n, p, math.sqrt(n) * body.inradius))
    return out


def self_witness(body: StarBody, p: float) -> Witness | None:
    """The body itself as a witness when it is an l_p ball (or ellipsoid) of the right exponent."""
    dil = body.params.get("dilation", 1.0)
    if body.family == "lq_ball" and body.params["q"] == p:
        return lp_ball_witness(body.dim, p, body.params["scale"] * dil)
    if body.family == "cross_polytope" and p == 1:
        return lp_ball_witness(body.dim, 1.0, body.params["scale"] * dil)
    if body.family == "ellipsoid":
        return ellipsoid_witness([a * dil for a in body.params["axes"]], p, body.params.get("rotation"))
    return None


def witness_from_spec(spec: dict, p: float) -> Witness:
    if not isinstance(spec, dict):
        raise SpecError("witness: expected a JSON object")
    kind = spec.get("type")
    allowed = {"lp_ball": {"n", "scale"}, "euclidean": {"n", "radius"}, "ellipsoid": {"axes", "rotation"}}
    if kind not in allowed:
        raise SpecError(f"witness.type: expected one of {sorted(allowed)}, got {kind!r}")
    unknown = sorted(set(spec) - allowed[kind] - {"type", "p"})
    if unknown:
        raise SpecError(f"witness: unknown field(s) {unknown}")
    if "p" in spec and float(spec["p"]) != float(p):
        raise SpecError(f"witness.p={spec['p']} does not match p={p}")
    try:
        if kind == "lp_ball":
            return lp_ball_witness(int(spec["n"]), p, float(spec.get("scale", 1.0)))
        if kind == "euclidean":
            return euclidean_witness(int(spec["n"]), p, float(spec.get("radius", 1.0)))
        return ellipsoid_witness(spec["axes"], p, spec.get("rotation"))
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(f"witness: {exc}") from None


# ---------------------------------------------------------------------------
# containment and distances

def _extreme_ratio(num: StarBody, den: StarBody, cfg: IntegrationConfig, maximize: bool) -> float:
    """sup (or inf) over the sphere of num.gauge / den.gauge."""
    n = num.dim
    if n != den.dim:
        raise ValueError("bodies differ in dimension")
    rule = rule_for(n, cfg, samples=CONTAINMENT_SAMPLES, tag="containment")
    pts = rule.points
    ratio = num.gauge(pts) / den.gauge(pts)
    sgn = 1.0 if maximize else -1.0
    best = float(np.max(sgn * ratio))
    if n == 1:
        return sgn * best
    order = np.argsort(-sgn * ratio, kind="stable")[:4]
    obj = (lambda t: float(num.gauge(t) / den.gauge(t)))
    search = maximize_on_sphere if maximize else minimize_on_sphere
    res = search(obj, [pts[i] for i in order], step=0.02, xatol=1e-9, maxiter=200)
    return float(max(sgn * res.value, best) * sgn)


_MARGINS: dict = {}


def _outer_key(body: StarBody):
    # Witness bodies are rebuilt per call; bodies with a spec share one cache entry.
    try:
        return json.dumps(body.to_spec(), sort_keys=True)
    except SpecError:
        return body


def clear_margin_cache() -> None:
    _MARGINS.clear()


def contains_body(inner: StarBody, outer: StarBody, cfg: IntegrationConfig | None = None,
                  tol: float = 1e-9) -> tuple[bool, float]:
    """(inner ⊆ outer, margin) with margin = sup_theta ||theta||_outer / ||theta||_inner.

    The margin is also the least s with inner ⊆ s * outer.
    """
    cfg = cfg or IntegrationConfig()
    key = (inner, _outer_key(outer), cfg)
    margin = _MARGINS.get(key)
    if margin is None:
        if len(_MARGINS) > 256:
            _MARGINS.clear()
        margin = _MARGINS[key] = _extreme_ratio(outer, inner, cfg, maximize=True)
    return margin <= 1.0 + tol, margin


def dbm_scaling(M: StarBody, D: StarBody, cfg: IntegrationConfig | None = None,
                diagonal: bool = False, sweeps: int = 3) -> float:
    """Least a with s D ⊆ M ⊆ a s D over homothets s D of D.

    With ``diagonal=True`` the search also runs over diagonal images of D by
    cyclic coordinate descent on log-scales.
    """
    cfg = cfg or IntegrationConfig()

    def ratio_range(body_d):
        hi = _extreme_ratio(body_d, M, cfg, maximize=True)
        lo = _extreme_ratio(body_d, M, cfg, maximize=False)
        return hi / lo

    a = ratio_range(D)
    if not diagonal:
        return max(1.0, a)
    n = M.dim
    y = np.zeros(n)

    def image(y):
        scale = np.exp(-y)
        return StarBody(n, lambda x: D.gauge_fn(x * scale), D.family, dict(D.params),
                        D.bounding_radius * float(np.exp(y).max()))

    for _ in range(sweeps):
        for i in range(n):
            def f(t, i=i):
                yy = y.copy()
                yy[i] = t
                return ratio_range(image(yy))
            r = minimize_scalar(f, bounds=(y[i] - 1.0, y[i] + 1.0), method="bounded",
                                options={"xatol": 1e-4})
            if r.fun < a:
                a = float(r.fun)
                y[i] = r.x
    return max(1.0, a)


@dataclass
class DistanceReport:
    dovr_upper: float
    best_witness_tag: str
    scaling_used: float
    dbm_upper: float
    per_witness: list = field(default_factory=list)
    restriction: str = "witness-restricted upper bounds; homothets of the given witnesses only"

    def to_dict(self) -> dict:
        return {"dovr_upper": self.dovr_upper, "best_witness_tag": self.best_witness_tag,
                "scaling_used": self.scaling_used, "dbm_upper": self.dbm_upper,
                "per_witness": self.per_witness, "restriction": self.restriction}


def dovr_upper(K: StarBody, p: float, witnesses: list[Witness],
               cfg: IntegrationConfig | None = None, with_dbm: bool = True) -> DistanceReport:
    """Upper bound min_D s*(D) (|D| / |K|)^{1/n} on the outer volume ratio distance."""
    cfg = cfg or IntegrationConfig()
    if not witnesses:
        raise ValueError("at least one witness is required")
    n = K.dim
    volK = reference_volume(K, cfg).value
    rows = []
    for w in witnesses:
        if w.body.dim != n:
            raise ValueError(f"witness {w.tag!r} has dimension {w.body.dim}, expected {n}")
        if float(w.p) != float(p):
            raise ValueError(f"witness {w.tag!r} represents p={w.p}, expected {p}")
        _, s_star = contains_body(K, w.body, cfg)
        volD = reference_volume(w.body, cfg).value
        if not (s_star > 0 and math.isfinite(s_star) and volD > 0):
            continue
        bound = s_star * (volD / volK) ** (1.0 / n)
        dbm = dbm_scaling(K, w.body, cfg) if with_dbm else math.nan
        rows.append({"tag": w.tag, "scaling": s_star, "bound": bound, "dbm": dbm})
    if not rows:
        raise ValueError("all witnesses are degenerate")
    best = min(rows, key=lambda r: r["bound"])
    dbm = min(r["dbm"] for r in rows) if with_dbm else math.nan
    return DistanceReport(best["bound"], best["tag"], best["scaling"], dbm, rows)


# ---------------------------------------------------------------------------
# Jensen step and moment comparison

@dataclass
class JensenResult:
    lhs: ValueWithError
    rhs: ValueWithError
    holds: bool

    def to_dict(self) -> dict:
        return {"lhs": self.lhs.to_dict(), "rhs": self.rhs.to_dict(), "holds": self.holds}


def jensen_check(body: StarBody, p: float, cfg: IntegrationConfig | None = None) -> JensenResult:
    """int ||theta||^{-n} dsigma >= (int ||theta||^p dsigma)^{-n/p} with normalized sigma."""
    cfg = cfg or IntegrationConfig()
    if not p > 0:
        raise ValueError("p must be positive")
    n = body.dim
    rule = rule_for(n, cfg)
    g = body.gauge(rule.points)
    area = sphere_area(n)
    vals = np.stack([g ** (-n) / area, g**p / area])
    means, errs = rule.reduce(rule.group_sums(vals))
    lhs = ValueWithError(float(means[0]), float(errs[0]), len(rule),
                         "ok" if errs[0] <= cfg.rel_tol_target * means[0] else "tolerance_not_met")
    rhs_v = float(means[1]) ** (-n / p)
    rhs_e = rhs_v * (n / p) * float(errs[1]) / float(means[1])
    rhs = ValueWithError(rhs_v, rhs_e, len(rule),
                         "ok" if rhs_e <= cfg.rel_tol_target * rhs_v else "tolerance_not_met")
    holds = lhs.value >= rhs.value - 2.0 * (lhs.std_error + rhs.std_error) - 1e-12 * rhs.value
    return JensenResult(lhs, rhs, bool(holds))


def direction_grid(n: int, count: int = 512, seed: int = 0) -> np.ndarray:
    """``count`` antipodal-paired directions plus the coordinate axes."""
    if n == 1:
        return np.array([[1.0], [-1.0]])
    half = random_starts(n, count // 2, seed, "bp-grid")
    half = np.array(half)
    return np.concatenate([half, -half, np.eye(n)])


@dataclass
class BPReport:
    hypothesis_worst: float          # max over grid of (M_K - M_M) / M_M
    hypothesis_holds: bool
    a: float
    lhs: ValueWithError              # int_K f
    rhs: float                       # a^p int_M f
    rhs_error: float
    margin: float
    conclusion_holds: bool
    status: str

    def to_dict(self) -> dict:
        return {"hypothesis_worst": self.hypothesis_worst, "hypothesis_holds": self.hypothesis_holds,
                "a": self.a, "lhs": self.lhs.to_dict(), "rhs": self.rhs, "rhs_error": self.rhs_error,
                "margin": self.margin, "conclusion_holds": self.conclusion_holds, "status": self.status,
                "restriction": "a is the homothety-restricted distance from M to the given D"}


def bp_compare(K: StarBody, M: StarBody, f, p: float, D, cfg: IntegrationConfig | None = None,
               grid: int = 512) -> BPReport:
    """Check the moment hypothesis on a direction grid, then the volume-type conclusion.

    ``D`` is a :class:`Witness` or a body assumed to lie in L_p^n.
    """
    cfg = cfg or IntegrationConfig()
    if p < 1:
        raise ValueError("p must be >= 1")
    if K.dim != M.dim:
        raise ValueError("K and M differ in dimension")
    D_body = D.body if isinstance(D, Witness) else D
    pmK = polar_moments(K, f, p, cfg)
    pmM = polar_moments(M, f, p, cfg)
    xis = direction_grid(K.dim, grid, cfg.seed)
    mk, ek = pmK.moments(xis)
    mm, em = pmM.moments(xis)
    rel = (mk - mm) / np.maximum(mm, 1e-300)
    slack = 2.0 * (ek + em) / np.maximum(mm, 1e-300)
    worst = float(np.max(rel))
    hyp = bool(np.all(rel <= slack))
    a = dbm_scaling(M, D_body, cfg)
    lhs = pmK.mass()
    mass_M = pmM.mass()
    rhs = a**p * mass_M.value
    rhs_err = a**p * mass_M.std_error
    margin = rhs - lhs.value
    concl = bool(margin >= -2.0 * (lhs.std_error + rhs_err))
    if not hyp:
        status = "hypothesis_violated"
    elif not concl:
        status = "conclusion_violated"
    else:
        status = combine_status(lhs, mass_M)
    return BPReport(worst, hyp, a, lhs, rhs, rhs_err, margin, concl, status)
