"""Maximal sections, slicing constants and the one-dimensional moment inequalities."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .bodies import StarBody, reference_volume
from .quad import (DegenerateDensityError, IntegrationConfig, SpecError, ValueWithError,
                   _check_unit, body_integrate, gauss_legendre01, make_value,
                   profile_g, rel_err, section_extent, sections, stream)
from .sphere_opt import axis_starts, maximize_on_sphere, random_starts

MODES = ("central", "affine", "both")


class ValidationError(ValueError):
    """A profile function leaves [0, 1]."""


# ---------------------------------------------------------------------------
# maximal sections

@dataclass
class SectionMax:
    xi: np.ndarray
    s: float
    value: ValueWithError
    mode: str
    candidates: int

    def to_dict(self) -> dict:
        return {"xi": [float(v) for v in self.xi], "s": self.s, "value": self.value.to_dict(),
                "mode": self.mode}


def _even_setting(body: StarBody, f) -> bool:
    return body.symmetric and (f is None or getattr(f, "even", False))


LOG_CONCAVE = ("constant", "gaussian", "exp_l1")


def _central_is_max(body: StarBody, f) -> bool:
    """True when every section profile is even and log-concave, so s = 0 is a maximizer.

    This holds for symmetric convex bodies with even log-concave densities
    (Brunn's principle for the Lebesgue case, Prekopa-Leindler in general).
    """
    if not (body.convex and body.symmetric):
        return False
    if f is None:
        return True
    fam = getattr(f, "family", None)
    if fam == "radial_power":
        return f.params.get("alpha", 1.0) == 0.0
    return fam in LOG_CONCAVE


def _candidates(n: int, seed: int, tag: str, k: int) -> list[np.ndarray]:
    """Axes, pair diagonals, the main diagonal and k random directions."""
    out = axis_starts(n, both_signs=False)
    eye = np.eye(n)
    if n <= 8:
        for i in range(n):
            for j in range(i + 1, n):
                out.append((eye[i] + eye[j]) / math.sqrt(2))
                out.append((eye[i] - eye[j]) / math.sqrt(2))
    if n > 1:
        out.append(np.ones(n) / math.sqrt(n))
    return out + random_starts(n, k, seed, tag)


FINAL_OFFSET_GRID = 33


def _search_cfg(cfg: IntegrationConfig) -> IntegrationConfig:
    return replace(cfg.scaled(0.125), radial_nodes=max(8, cfg.radial_nodes // 2), profile_grid=33)


def _best_offset(body, f, xi, cfg, grid, half_line, polish_iters=20):
    """Largest section over offsets along xi: grid, then golden-section polish."""
    h = section_extent(body, xi)
    s_grid = np.linspace(0.0 if half_line else -h, h, grid)
    vals, errs, _ = sections(body, f, xi, s_grid, cfg)
    k = int(np.argmax(vals))
    best_s, best_v, best_e = float(s_grid[k]), float(vals[k]), float(errs[k])
    lo, hi = s_grid[max(k - 1, 0)], s_grid[min(k + 1, grid - 1)]
    invphi = (math.sqrt(5) - 1) / 2
    a, b = float(lo), float(hi)
    for _ in range(polish_iters):
        c = b - invphi * (b - a)
        d = a + invphi * (b - a)
        v, e, _ = sections(body, f, xi, [c, d], cfg)
        if v[0] >= v[1]:
            b = d
            if v[0] > best_v:
                best_s, best_v, best_e = c, float(v[0]), float(e[0])
        else:
            a = c
            if v[1] > best_v:
                best_s, best_v, best_e = d, float(v[1]), float(e[1])
    return best_s, best_v, best_e


def max_section(body: StarBody, f, mode: str = "central", cfg: IntegrationConfig | None = None,
                random_starts_count: int = 16, polish_starts: int = 2) -> SectionMax:
    """Largest section integral over central (s = 0) or all affine hyperplanes.

    Candidates (axes, pair diagonals, the main diagonal, random directions) are
    screened; the best few are polished by Nelder-Mead on the sphere with a
    reduced budget, and the polished direction replaces the best candidate only
    if it wins at the full budget. When every section profile is even and
    log-concave the affine maximum is attained at s = 0 and only central
    sections are searched. The result is a lower bound on the true supremum.
    """
    cfg = cfg or IntegrationConfig()
    if mode not in ("central", "affine"):
        raise ValueError(f"mode must be 'central' or 'affine', got {mode!r}")
    n = body.dim
    half_line = _even_setting(body, f)
    if n == 1:
        xi = np.array([1.0])
        if mode == "central":
            v, _, _ = sections(body, f, xi, [0.0], cfg)
            return SectionMax(xi, 0.0, make_value(v[0], 0, 1, cfg, exact=True), mode, 1)
        s, v, _ = _best_offset(body, f, xi, cfg, cfg.profile_grid, half_line)
        return SectionMax(xi, s, make_value(v, 0, 1, cfg, exact=True), mode, 1)

    scfg = _search_cfg(cfg)
    cands = _candidates(n, cfg.seed, "max-section", random_starts_count)

    if mode == "central" or _central_is_max(body, f):
        def full(xi):
            v, e, used = sections(body, f, xi, [0.0], cfg)
            return float(v[0]), float(e[0]), used

        def objective(xi):
            return float(sections(body, f, xi, [0.0], scfg)[0][0])

        scores = [full(c)[0] for c in cands]
        order = np.argsort(-np.asarray(scores), kind="stable")[:polish_starts]
        res = maximize_on_sphere(objective, [cands[i] for i in order], step=0.15, xatol=1e-4,
                                 maxiter=40 * n)
        finals = [(full(xi), xi) for xi in (cands[order[0]], res.direction)]
        (val, err, used), xi = max(finals, key=lambda r: r[0][0])
        return SectionMax(xi, 0.0, make_value(val, err, used, cfg), mode, len(cands))

    # general affine case: the central optimum is always a finalist
    base = max_section(body, f, "central", cfg, random_starts_count, polish_starts)

    def objective(xi):
        return _best_offset(body, f, xi, scfg, 9, half_line, polish_iters=0)[1]

    def screen(xi):
        h = section_extent(body, xi)
        grid = np.linspace(0.0 if half_line else -h, h, 9)
        return float(np.max(sections(body, f, xi, grid, scfg)[0]))

    scores = [screen(c) for c in cands]
    top = cands[int(np.argmax(scores))]
    res = maximize_on_sphere(objective, [top], step=0.15, xatol=1e-4, maxiter=8 * n)
    finals = [(0.0, base.value.value, base.value.std_error, base.xi)]
    for xi in (top, res.direction):
        # locate the offset cheaply, then measure that one section at full budget
        s_ = _best_offset(body, f, xi, scfg, FINAL_OFFSET_GRID, half_line)[0]
        v_, e_, _ = sections(body, f, xi, [s_], cfg)
        finals.append((s_, float(v_[0]), float(e_[0]), xi))
    s, val, err, xi = max(finals, key=lambda r: r[1])
    used = base.value.samples_used
    return SectionMax(xi, float(s), make_value(val, err, used, cfg), mode, len(cands))


@dataclass
class SlicingReport:
    central_constant: float | None
    affine_constant: float | None
    maximizing_direction: np.ndarray
    maximizing_offset: float
    central_error: float | None
    affine_error: float | None
    mass: ValueWithError
    volume: float
    central_section: SectionMax | None = None
    affine_section: SectionMax | None = None

    def to_dict(self) -> dict:
        return {
            "central_constant": self.central_constant, "central_error": self.central_error,
            "affine_constant": self.affine_constant, "affine_error": self.affine_error,
            "maximizing_direction": [float(v) for v in self.maximizing_direction],
            "maximizing_offset": self.maximizing_offset, "mass": self.mass.to_dict(),
            "volume": self.volume,
            "central_section": None if self.central_section is None else self.central_section.to_dict(),
            "affine_section": None if self.affine_section is None else self.affine_section.to_dict(),
        }


def slicing_constant(body: StarBody, f, mode: str = "central", cfg: IntegrationConfig | None = None,
                     central: SectionMax | None = None, affine: SectionMax | None = None) -> SlicingReport:
    """S_hat = int_K f / (max section * |K|^{1/n}) for central and/or affine hyperplanes."""
    cfg = cfg or IntegrationConfig()
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    n = body.dim
    mass = body_integrate(body, f, cfg)
    vol = reference_volume(body, cfg).value
    scale = vol ** (1.0 / n)
    if mode in ("central", "both") and central is None:
        central = max_section(body, f, "central", cfg)
    if mode in ("affine", "both") and affine is None:
        affine = max_section(body, f, "affine", cfg)
    if affine is not None and central is not None and central.value.value > affine.value.value:
        # the central hyperplane is itself affine
        affine = SectionMax(central.xi, 0.0, central.value, "affine", affine.candidates)

    def const(sec):
        if sec is None:
            return None, None
        if sec.value.value <= 0:
            raise DegenerateDensityError("maximal section carries zero mass")
        c = mass.value / (sec.value.value * scale)
        return c, c * (rel_err(mass) + rel_err(sec.value))

    cc, ce = const(central)
    ac, ae = const(affine)
    lead = affine if mode == "affine" else central
    return SlicingReport(cc, ac, lead.xi, lead.s, ce, ae, mass, vol, central, affine)


# ---------------------------------------------------------------------------
# one-dimensional moment functional

@dataclass(frozen=True)
class StepFunction:
    """Piecewise-constant function: ``heights[i]`` on [edges[i], edges[i+1])."""
    edges: tuple
    heights: tuple

    def __post_init__(self):
        e = np.asarray(self.edges, float)
        if len(e) != len(self.heights) + 1 or np.any(np.diff(e) <= 0):
            raise ValueError("edges must be increasing with len(edges) == len(heights) + 1")

    @property
    def support(self):
        return float(self.edges[0]), float(self.edges[-1])

    @property
    def breakpoints(self):
        return tuple(float(e) for e in self.edges)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        e = np.asarray(self.edges)
        h = np.asarray(self.heights, dtype=float)
        idx = np.searchsorted(e, t, side="right") - 1
        inside = (idx >= 0) & (idx < len(h))
        return np.where(inside, h[np.clip(idx, 0, len(h) - 1)], 0.0)

    def abs_moment(self, q: float) -> float:
        """Exact int |t|^q g(t) dt, cell by cell."""
        total = 0.0
        for a, b, hgt in zip(self.edges[:-1], self.edges[1:], self.heights):
            total += hgt * (_abs_power_antideriv(b, q) - _abs_power_antideriv(a, q))
        return total


def _abs_power_antideriv(t, q):
    # d/dt of sign(t)|t|^{q+1}/(q+1) is |t|^q
    return math.copysign(abs(t) ** (q + 1), t) / (q + 1)


@dataclass(frozen=True)
class Tent:
    """max(0, 1 - |t|/A)."""
    A: float = 1.0

    @property
    def support(self):
        return -self.A, self.A

    @property
    def breakpoints(self):
        return (-self.A, 0.0, self.A)

    def __call__(self, t):
        return np.maximum(0.0, 1.0 - np.abs(np.asarray(t, float)) / self.A)


def indicator(A: float) -> StepFunction:
    return StepFunction((-float(A), float(A)), (1.0,))


def random_step_function(seed: int, index: int = 0, cells: int = 32, support=(-2.0, 2.0)) -> StepFunction:
    """Heights i.i.d. uniform on [0, 1] over ``cells`` equal cells."""
    rng = stream(seed, "step-function", index)
    edges = np.linspace(support[0], support[1], cells + 1)
    return StepFunction(tuple(edges), tuple(rng.random(cells)))


def g_from_spec(spec: dict):
    if not isinstance(spec, dict):
        raise SpecError("g: expected a JSON object")
    kind = spec.get("type")
    allowed = {"step": {"edges", "heights"}, "indicator": {"A"}, "tent": {"A"},
               "random_step": {"seed", "index", "cells", "support"}}
    if kind not in allowed:
        raise SpecError(f"g.type: expected one of {sorted(allowed)}, got {kind!r}")
    unknown = sorted(set(spec) - allowed[kind] - {"type"})
    if unknown:
        raise SpecError(f"g: unknown field(s) {unknown}")
    try:
        if kind == "step":
            return StepFunction(tuple(map(float, spec["edges"])), tuple(map(float, spec["heights"])))
        if kind == "indicator":
            return indicator(float(spec.get("A", 1.0)))
        if kind == "tent":
            return Tent(float(spec.get("A", 1.0)))
        return random_step_function(int(spec.get("seed", 0)), int(spec.get("index", 0)),
                                    int(spec.get("cells", 32)), tuple(spec.get("support", (-2.0, 2.0))))
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(f"g: {exc}") from None


def _panel_nodes(a: float, b: float, q: float, nodes: int, graded: int, panels: int = 1):
    """Nodes/weights for int_a^b |t|^q h(t) dt, where a, b do not straddle 0.

    The weights already include |t|^q. The panel is split into ``panels``
    equal pieces; when q is negative or non-integer, the piece touching 0 is
    replaced by ``graded`` geometric subintervals plus a constant-h remainder.
    """
    x01, w01 = gauss_legendre01(nodes)
    ts, ws = [], []
    grade = graded > 0 and (q < 0 or q != int(q))
    edges = np.linspace(a, b, panels + 1)
    for lo, hi in zip(edges[:-1], edges[1:]):
        if grade and (lo == 0.0 or hi == 0.0):
            sgn = 1.0 if hi > 0 else -1.0
            far = abs(hi) if hi != 0.0 else abs(lo)
            for k in range(graded):
                g_lo, g_hi = far * 2.0 ** -(k + 1), far * 2.0 ** -k
                t = g_lo + (g_hi - g_lo) * x01
                ts.append(sgn * t)
                ws.append((g_hi - g_lo) * w01 * t**q)
            eps = far * 2.0**-graded
            ts.append(np.array([sgn * eps / 2]))
            ws.append(np.array([eps ** (q + 1) / (q + 1)]))
            continue
        t = lo + (hi - lo) * x01
        ts.append(t)
        ws.append((hi - lo) * w01 * np.abs(t) ** q)
    return np.concatenate(ts), np.concatenate(ws)


def abs_power_rule(q: float, a: float, b: float, breakpoints=(), nodes: int = 32, graded: int = 64,
                   panels: int = 1):
    """Nodes and weights for int_a^b |t|^q h(t) dt, split at 0 and at the breakpoints."""
    cuts = sorted({a, b, *[c for c in breakpoints if a < c < b], *([0.0] if a < 0 < b else [])})
    ts, ws = [], []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        t, w = _panel_nodes(lo, hi, q, nodes, graded, panels)
        ts.append(t)
        ws.append(w)
    return np.concatenate(ts), np.concatenate(ws)


def moment_functional(g, q: float, cfg: IntegrationConfig | None = None, support=None,
                      breakpoints=None, validate: bool = True) -> float:
    """F(q) = ((q + 1)/2 * int |t|^q g(t) dt)^{1/(q+1)} for g with values in [0, 1].

    Gauss-Legendre panels split at 0 and at ``breakpoints`` (taken from ``g``
    when it has them); near 0 a graded mesh handles the |t|^q kink.
    """
    if not q > -1:
        raise ValueError("q must exceed -1")
    support = support if support is not None else getattr(g, "support", None)
    if support is None:
        raise ValueError("support interval is required")
    a, b = float(support[0]), float(support[1])
    bps = breakpoints if breakpoints is not None else getattr(g, "breakpoints", ())
    nodes = (cfg.radial_nodes if cfg is not None else 32)
    t, w = abs_power_rule(q, a, b, bps, nodes=nodes)
    vals = np.asarray(g(t), dtype=float)
    if validate:
        probe = np.concatenate([np.linspace(a, b, 257), t])
        gv = np.asarray(g(probe), dtype=float)
        if np.any(gv < -1e-12) or np.any(gv > 1 + 1e-12):
            raise ValidationError("g takes values outside [0, 1]")
    integral = float(np.dot(w, vals))
    if integral <= 0:
        return 0.0
    return ((q + 1) / 2 * integral) ** (1.0 / (q + 1))


@dataclass
class MonotonicityResult:
    qs: list
    values: list
    worst_drop: float
    nondecreasing: bool

    def to_dict(self) -> dict:
        return {"q": self.qs, "F": self.values, "worst_drop": self.worst_drop,
                "nondecreasing": self.nondecreasing}


def monotonic_q(g, qgrid, cfg: IntegrationConfig | None = None, slack: float = 1e-6) -> MonotonicityResult:
    qs = [float(q) for q in qgrid]
    vals = [moment_functional(g, q, cfg) for q in qs]
    drops = [vals[i] - vals[i + 1] for i in range(len(vals) - 1)]
    worst = max(drops) if drops else -math.inf
    return MonotonicityResult(qs, vals, worst, bool(worst <= slack))


# ---------------------------------------------------------------------------
# section / moment inequality

@dataclass
class SectionMomentResult:
    lhs: float
    rhs: float
    margin: float
    error: float
    holds: bool
    sup_section: ValueWithError
    moment: ValueWithError
    mass: ValueWithError
    argmax: float

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "margin": self.margin, "error": self.error,
                "holds": self.holds, "sup_section": self.sup_section.to_dict(),
                "moment": self.moment.to_dict(), "mass": self.mass.to_dict(), "argmax": self.argmax}


def _profile_integrals(body, f, xi, p, cfg, h, half_line, panels=8, nodes=8, graded=8):
    """int |t|^a S(t) dt for a in {0, p}, S the section function along xi (Fubini).

    Returns ((mass, err), (moment, err), sections used, (offsets, values, errors)).
    The error combines the section error (taken as fully correlated) and a
    fine/coarse panel difference.
    """
    rules = []
    for a in (0.0, p):
        for pan in (panels, panels // 2):
            if half_line:
                t, w = abs_power_rule(a, 0.0, h, nodes=nodes, graded=graded, panels=pan)
                w = 2 * w
            else:
                t, w = abs_power_rule(a, -h, h, nodes=nodes, graded=graded, panels=pan)
            rules.append((t, w))
    offsets, inverse = np.unique(np.concatenate([t for t, _ in rules]), return_inverse=True)
    vals, errs, _ = sections(body, f, xi, offsets, cfg)
    res = []
    k = 0
    for t, w in rules:
        idx = inverse[k:k + len(t)]
        k += len(t)
        res.append((float(np.dot(w, vals[idx])), float(np.dot(np.abs(w), errs[idx]))))
    out = []
    for i in (0, 2):
        (fine, stat), (coarse, _) = res[i], res[i + 1]
        out.append((fine, stat + abs(fine - coarse)))
    return out[0], out[1], len(offsets), (offsets, vals, errs)


def section_moment_check(body: StarBody, f, p: float, xi, cfg: IntegrationConfig | None = None,
                  profile_grid: int = 33) -> SectionMomentResult:
    """2^p (p+1) (sup_s section)^p * moment >= (mass)^{p+1} along ``xi``, for p > 0.

    The moment and the mass are integrated over the section profile (Fubini),
    so flat profiles are handled exactly. The sup is the central section when
    the profile is even and log-concave, otherwise the best of a grid search
    with polish and the integration nodes. Using a lower bound of the true sup
    only makes the check harder to pass.
    """
    cfg = cfg or IntegrationConfig()
    if not p > 0:
        raise ValueError("p must be positive")
    xi = _check_unit(xi, body.dim)
    half_line = _even_setting(body, f)
    h = section_extent(body, xi)
    (mv, me), (pv, pe), used, (t, tv, te) = _profile_integrals(body, f, xi, p, cfg, h, half_line)
    if _central_is_max(body, f):
        v, e, _ = sections(body, f, xi, [0.0], cfg)
        s_best, v_best, e_best = 0.0, float(v[0]), float(e[0])
    else:
        k = int(np.argmax(tv))
        s_best, v_best, e_best = float(t[k]), float(tv[k]), float(te[k])
        try:
            prof = profile_g(body, f, xi, cfg, grid_points=profile_grid)
            if prof.sup.value > v_best:
                s_best, v_best, e_best = prof.argmax, prof.sup.value, prof.sup.std_error
        except DegenerateDensityError:
            pass
    if v_best <= 0.0 and mv <= 0.0:
        z = ValueWithError(0.0, 0.0, 0)
        return SectionMomentResult(0.0, 0.0, 0.0, 0.0, True, z, z, z, 0.0)
    sup = make_value(v_best, e_best, used, cfg, exact=body.dim == 1)
    mass = make_value(mv, me, used, cfg)
    mom = make_value(pv, pe, used, cfg)
    lhs = 2.0**p * (p + 1) * sup.value**p * mom.value
    rhs = mass.value ** (p + 1)
    err = lhs * (p * rel_err(sup) + rel_err(mom)) + rhs * (p + 1) * rel_err(mass)
    margin = lhs - rhs
    return SectionMomentResult(lhs, rhs, margin, err, bool(margin >= -2 * err - 1e-12 * rhs), sup, mom, mass,
                         s_best)


@dataclass
class SlicingRatioResult:
    c_hat: float
    c_hat_error: float
    p: float
    dovr_upper: float
    mass: ValueWithError
    volume: float
    affine_section: SectionMax
    note: str

    def to_dict(self) -> dict:
        return {"c_hat": self.c_hat, "c_hat_error": self.c_hat_error, "p": self.p,
                "dovr_upper": self.dovr_upper, "mass": self.mass.to_dict(), "volume": self.volume,
                "affine_section": self.affine_section.to_dict(), "note": self.note}


def slicing_ratio(body: StarBody, f, p: float, dovr_upper: float, cfg: IntegrationConfig | None = None,
                affine: SectionMax | None = None) -> SlicingRatioResult:
    """C_hat = int_K f / (sqrt(p) d_ovr_upper |K|^{1/n} sup_H int_{K ∩ H} f).

    Because the distance is an upper bound and the section sup a lower bound,
    C_hat errs on the low side only through quadrature noise.
    """
    cfg = cfg or IntegrationConfig()
    if dovr_upper < 1.0 - 1e-9:
        raise ValueError("dovr_upper must be >= 1")
    if p < 1:
        raise ValueError("p must be >= 1")
    note = "p > 2" if p > 2 else "1 <= p <= 2: reported only (the statement is weaker there)"
    mass = body_integrate(body, f, cfg)
    vol = reference_volume(body, cfg).value
    affine = affine or max_section(body, f, "affine", cfg)
    denom = math.sqrt(p) * dovr_upper * vol ** (1.0 / body.dim) * affine.value.value
    c = mass.value / denom
    return SlicingRatioResult(c, c * (rel_err(mass) + rel_err(affine.value)), p, dovr_upper, mass, vol, affine, note)
