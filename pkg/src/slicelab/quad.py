"""Integration engines on the sphere, on star bodies and on hyperplane sections.

Every estimator returns a :class:`ValueWithError`. Random rules are built from
independent replicates whose streams are derived from ``(seed, tag, replicate)``
with a counter-based generator (Philox), so a result depends only on the
configuration and never on evaluation order.
"""
from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field, fields, replace
from functools import cached_property, lru_cache

import numpy as np
from scipy import special, stats

METHODS = ("mc", "qmc", "product_polar", "grid1d")


class SpecError(ValueError):
    """Malformed user specification (JSON body/density/config)."""


class DegenerateDensityError(ValueError):
    """The density carries no mass where it is needed."""


@dataclass(frozen=True)
class IntegrationConfig:
    method: str = "qmc"
    sphere_samples: int = 65536
    radial_nodes: int = 32
    mc_samples: int = 1_000_000
    seed: int = 42
    rel_tol_target: float = 0.005
    batch_size: int = 4096
    replicates: int = 16
    # directions on the (n-2)-sphere inside a hyperplane
    section_samples: int = 16384
    profile_grid: int = 129

    def __post_init__(self):
        if self.method not in METHODS:
            raise SpecError(f"method: expected one of {METHODS}, got {self.method!r}")
        for name in ("sphere_samples", "radial_nodes", "mc_samples", "batch_size",
                     "replicates", "section_samples", "profile_grid"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v <= 0:
                raise SpecError(f"{name}: expected a positive integer, got {v!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise SpecError(f"seed: expected a 64-bit unsigned integer, got {self.seed!r}")
        if not 0.0 < float(self.rel_tol_target) < 1.0:
            raise SpecError(f"rel_tol_target: expected a value in (0, 1), got {self.rel_tol_target!r}")
        if self.replicates < 2 and self.method in ("mc", "qmc"):
            raise SpecError("replicates: randomized methods need at least 2 replicates")

    def to_spec(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def scaled(self, factor: float) -> "IntegrationConfig":
        """A cheaper (factor < 1) or richer copy with sample budgets rescaled."""
        def sc(v, lo):
            return max(lo, int(round(v * factor)))
        return replace(
            self,
            sphere_samples=sc(self.sphere_samples, 4 * self.replicates),
            mc_samples=sc(self.mc_samples, 4 * self.replicates),
            section_samples=sc(self.section_samples, 4 * self.replicates),
        )


def config_from_spec(spec: dict) -> IntegrationConfig:
    if not isinstance(spec, dict):
        raise SpecError("cfg: expected a JSON object")
    known = {f.name for f in fields(IntegrationConfig)}
    unknown = sorted(set(spec) - known)
    if unknown:
        raise SpecError(f"cfg: unknown field(s) {unknown}")
    return IntegrationConfig(**spec)


@dataclass(frozen=True)
class ValueWithError:
    value: float
    std_error: float
    samples_used: int
    status: str = "ok"

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_dict(self) -> dict:
        return {"value": self.value, "std_error": self.std_error,
                "samples_used": self.samples_used, "status": self.status}


def make_value(value, err, used, cfg: IntegrationConfig | None, exact=False) -> ValueWithError:
    value = float(value)
    err = 0.0 if exact else float(abs(err))
    if not math.isfinite(err):
        raise FloatingPointError("non-finite error estimate")
    status = "ok"
    if cfg is not None and err > cfg.rel_tol_target * abs(value) and err > 1e-300:
        status = "tolerance_not_met"
    return ValueWithError(value, err, int(used), status)


def exact_value(value: float) -> ValueWithError:
    return ValueWithError(float(value), 0.0, 0, "ok")


def combine_status(*vals: ValueWithError) -> str:
    return "ok" if all(v.ok for v in vals) else "tolerance_not_met"


def rel_err(v: ValueWithError) -> float:
    if v.value == 0.0:
        return 0.0 if v.std_error == 0.0 else math.inf
    return v.std_error / abs(v.value)


# ---------------------------------------------------------------------------
# constants

def sphere_area(n: int) -> float:
    """s_{n-1} = 2 pi^{n/2} / Gamma(n/2), the surface measure of S^{n-1}."""
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


def spherical_constant(n: int, p: float) -> float:
    """Constant c(n, p) with |x|^p = c(n, p) * int_{S^{n-1}} |(x, theta)|^p dtheta.

    Computed in the log domain; stays finite for large ``n`` and ``p``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not p > 0:
        raise ValueError("p must be positive")
    log_c = (special.gammaln((p + n) / 2) - math.log(2.0)
             - (n - 1) / 2 * math.log(math.pi) - special.gammaln((p + 1) / 2))
    return float(math.exp(log_c))


# ---------------------------------------------------------------------------
# random streams

def _tag_code(tag: str) -> int:
    return zlib.crc32(tag.encode())


def stream(seed: int, tag: str, *index: int) -> np.random.Generator:
    """Counter-based generator for ``(seed, tag, *index)``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(_tag_code(tag), *map(int, index)))
    return np.random.Generator(np.random.Philox(ss))


def _unit_cube_points(d: int, m: int, method: str, rng: np.random.Generator) -> np.ndarray:
    if method == "qmc":
        sob = stats.qmc.Sobol(d, scramble=True, seed=rng)
        k = int(math.log2(m))
        if 2**k == m:
            return sob.random_base2(k)
        return sob.random(m)
    return rng.random((m, d))


def _cube_to_sphere(u: np.ndarray) -> np.ndarray:
    """Measure-preserving map [0,1]^{n-1} -> S^{n-1}.

    The first coordinate is an angle on S^1; each further coordinate sets the
    new last coordinate t of S^{k-1}, whose law has density ~ (1 - t^2)^{(k-3)/2},
    through the inverse Beta((k-1)/2, (k-1)/2) distribution function. Unlike the
    inverse Gaussian map this stays bounded at the faces of the cube.
    """
    ang = 2.0 * math.pi * u[:, 0]
    pts = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    for k in range(3, u.shape[1] + 2):
        a = 0.5 * (k - 1)
        t = 2.0 * stats.beta.ppf(u[:, k - 2], a, a) - 1.0
        pts = np.hstack([np.sqrt(np.clip(1.0 - t * t, 0.0, None))[:, None] * pts, t[:, None]])
    return pts


# ---------------------------------------------------------------------------
# rules

@dataclass(frozen=True, eq=False)
class Rule:
    """Weighted point set with an error model.

    ``kind`` is ``"replicate"`` (mean and standard error over groups),
    ``"richardson"`` (group 0 fine, group 1 coarse; error is their difference)
    or ``"exact"`` (a single group with no error).
    """
    points: np.ndarray
    weights: np.ndarray
    groups: np.ndarray
    n_groups: int
    kind: str
    mates: np.ndarray | None = None      # index of the antipodal point, when pairs are stored

    def __len__(self):
        return len(self.weights)

    def bounds(self) -> list[tuple[int, int]]:
        """(start, stop) of each group; the groups are stored contiguously."""
        edges = np.searchsorted(self.groups, np.arange(self.n_groups + 1))
        return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:])]

    def group_sums(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        if values.ndim == 1:
            return np.bincount(self.groups, weights=self.weights * values, minlength=self.n_groups)
        # values (k, M): k independent integrands
        out = np.zeros((values.shape[0], self.n_groups))
        for g, (a, b) in enumerate(self.bounds()):
            out[:, g] = values[:, a:b] @ self.weights[a:b]
        return out

    def reduce(self, sums: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        sums = np.asarray(sums, dtype=float)
        if self.kind == "exact":
            return sums[..., 0], np.zeros(sums.shape[:-1])
        if self.kind == "richardson":
            return sums[..., 0], np.abs(sums[..., 0] - sums[..., 1])
        mean = sums.mean(axis=-1)
        se = sums.std(axis=-1, ddof=1) / math.sqrt(self.n_groups)
        return mean, se

    def estimate(self, values, cfg: IntegrationConfig | None = None) -> ValueWithError:
        v, e = self.reduce(self.group_sums(values))
        return make_value(v, e, len(self), cfg, exact=self.kind == "exact")

    def samples_per_estimate(self) -> int:
        return len(self) if self.kind != "richardson" else int(np.sum(self.groups == 0))


def _frozen(*arrays):
    for a in arrays:
        a.setflags(write=False)


def _trapezoid_circle(m: int) -> tuple[np.ndarray, np.ndarray]:
    ang = 2 * np.pi * np.arange(m) / m
    pts = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    return pts, np.full(m, 2 * np.pi / m)


def _product_sphere(n: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    # S^{k-1}: t in [-1,1] with weight (1-t^2)^{(k-3)/2} times S^{k-2} scaled
    pts, w = _trapezoid_circle(2 * m)
    for k in range(3, n + 1):
        a = (k - 3) / 2
        t, wt = special.roots_jacobi(m, a, a)
        s = np.sqrt(1 - t**2)
        new_pts = np.concatenate([np.broadcast_to(t[:, None, None], (m, len(pts), 1)),
                                  s[:, None, None] * pts[None, :, :]], axis=2)
        pts = new_pts.reshape(-1, k)
        w = (wt[:, None] * w[None, :]).ravel()
    return pts, w


def _cubed_block(n: int, per_face: int, method: str, rng: np.random.Generator):
    """Points of one replicate on the 2n faces of the cube, projected to S^{n-1}.

    Face i holds y' = (y with 1 inserted at i), y in [-1, 1]^{n-1}; the
    projection y'/|y'| has Jacobian |y'|^{-n}. Opposite faces reuse the
    points negated, so antipodal pairs are built in.
    """
    pts, wts = [], []
    for i in range(n):
        y = 2.0 * _unit_cube_points(n - 1, per_face, method, rng) - 1.0
        yp = np.insert(y, i, 1.0, axis=1)
        norm = np.linalg.norm(yp, axis=1)
        theta = yp / norm[:, None]
        w = (2.0 ** (n - 1) / per_face) * norm ** (-n)
        pts += [theta, -theta]
        wts += [w, w]
    return np.concatenate(pts), np.concatenate(wts)


def _pair_mates(total: int, block: int) -> np.ndarray:
    """Mates for points stored as consecutive [theta, -theta] blocks of length ``block``."""
    idx = np.arange(total)
    first = (idx // block) % 2 == 0
    return np.where(first, idx + block, idx - block)


@lru_cache(maxsize=64)
def sphere_rule(n: int, samples: int, method: str, seed: int, replicates: int, tag: str = "sphere",
                layout: str = "uniform") -> Rule:
    """Quadrature rule for the unnormalized surface measure of S^{n-1}.

    n = 1: the two-point set {-1, 1}. n = 2: trapezoid on an angle grid with a
    half-resolution companion. n >= 3: randomized QMC (or MC) replicates with
    antipodal pairs, or a deterministic product rule for ``product_polar``.
    QMC points go through :func:`_cube_to_sphere`. ``layout="cubed"`` instead
    spreads the points over the faces of the cube (gnomonic projection), which
    keeps integrands built from the cube's radial function smooth on each patch.
    """
    if n == 1:
        pts = np.array([[1.0], [-1.0]])
        w = np.ones(2)
        g = np.zeros(2, dtype=np.intp)
        _frozen(pts, w, g)
        return Rule(pts, w, g, 1, "exact")
    if n == 2 or method == "product_polar":
        if n == 2:
            m = max(4, samples - samples % 2)
            fine_p, fine_w = _trapezoid_circle(m)
            coarse_p, coarse_w = _trapezoid_circle(m // 2)
        else:
            m = max(2, int((samples / 2) ** (1 / (n - 1))))
            fine_p, fine_w = _product_sphere(n, m)
            coarse_p, coarse_w = _product_sphere(n, max(1, m // 2))
        pts = np.concatenate([fine_p, coarse_p])
        w = np.concatenate([fine_w, coarse_w])
        g = np.concatenate([np.zeros(len(fine_w), np.intp), np.ones(len(coarse_w), np.intp)])
        _frozen(pts, w, g)
        return Rule(pts, w, g, 2, "richardson")
    if layout not in ("uniform", "cubed"):
        raise ValueError(f"unknown sphere layout {layout!r}")
    per = max(2, samples // replicates)
    if layout == "cubed":
        face = max(1, per // (2 * n))
        face = max(1, 2 ** int(math.log2(face))) if method == "qmc" else face
        blocks, weights = [], []
        for r in range(replicates):
            p_, w_ = _cubed_block(n, face, method, stream(seed, tag + "-cubed", n, r))
            blocks.append(p_)
            weights.append(w_)
        pts = np.concatenate(blocks)
        w = np.concatenate(weights)
        g = np.repeat(np.arange(replicates, dtype=np.intp), 2 * n * face)
        mates = _pair_mates(len(pts), face)
        _frozen(pts, w, g, mates)
        return Rule(pts, w, g, replicates, "replicate", mates)
    half = max(1, 2 ** int(math.log2(max(1, per // 2)))) if method == "qmc" else max(1, per // 2)
    area = sphere_area(n)
    blocks = []
    for r in range(replicates):
        rng = stream(seed, tag, n, r)
        if method == "qmc":
            theta = _cube_to_sphere(_unit_cube_points(n - 1, half, "qmc", rng))
        else:
            z = rng.standard_normal((half, n))
            theta = z / np.linalg.norm(z, axis=1, keepdims=True)
        blocks.append(np.concatenate([theta, -theta]))
    pts = np.concatenate(blocks)
    w = np.full(len(pts), area / (2 * half))
    g = np.repeat(np.arange(replicates, dtype=np.intp), 2 * half)
    mates = _pair_mates(len(pts), half)
    _frozen(pts, w, g, mates)
    return Rule(pts, w, g, replicates, "replicate", mates)


def rule_for(n: int, cfg: IntegrationConfig, samples: int | None = None, tag: str = "sphere",
             layout: str = "uniform") -> Rule:
    method = "qmc" if cfg.method == "grid1d" else cfg.method
    if method == "product_polar":
        layout = "uniform"
    return sphere_rule(n, int(samples or cfg.sphere_samples), method,
                       int(cfg.seed), int(cfg.replicates), tag, layout)


def body_rule(body, cfg: IntegrationConfig, samples: int | None = None, tag: str = "sphere") -> Rule:
    """Sphere rule adapted to the body's preferred layout."""
    return rule_for(body.dim, cfg, samples, tag, getattr(body, "polar_layout", "uniform"))


def sphere_integrate(g, n: int, cfg: IntegrationConfig) -> ValueWithError:
    """Integrate ``g`` over S^{n-1} against unnormalized surface measure.

    ``g`` maps an (m, n) array of unit vectors to m values.
    """
    rule = rule_for(n, cfg)
    vals = _batched(g, rule.points, cfg.batch_size)
    return rule.estimate(vals, cfg)


def _batched(fn, pts: np.ndarray, batch: int) -> np.ndarray:
    if len(pts) <= batch:
        return np.asarray(fn(pts), dtype=float)
    return np.concatenate([np.asarray(fn(pts[i:i + batch]), dtype=float)
                           for i in range(0, len(pts), batch)])


@lru_cache(maxsize=16)
def gauss_legendre01(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(m)
    x = (x + 1) / 2
    w = w / 2
    _frozen(x, w)
    return x, w


def _eval_density(f, pts: np.ndarray) -> np.ndarray:
    if f is None:
        return np.ones(pts.shape[:-1])
    return np.asarray(f(pts), dtype=float)


# ---------------------------------------------------------------------------
# body integrals in polar coordinates

def _homogeneous(f):
    """(c, alpha) when f(x) = c |x|^alpha, else None."""
    if f is None:
        return 1.0, 0.0
    family = getattr(f, "family", None)
    if family == "constant":
        return float(f.params["c"]), 0.0
    if family == "radial_power":
        return 1.0, float(f.params["alpha"])
    return None


def radial_integrals(body, f, powers, thetas: np.ndarray, radial_nodes: int,
                     batch: int = 4096, lengths: np.ndarray | None = None,
                     center: np.ndarray | None = None, dim: int | None = None) -> np.ndarray:
    """int_0^{rho(theta)} r^{d-1+a} f(c + r theta) dr for each direction and power ``a``.

    ``d`` defaults to the body dimension; ``rho`` defaults to the radial function.
    Returns an array of shape (len(powers), len(thetas)).
    """
    powers = np.atleast_1d(np.asarray(powers, dtype=float))
    d = body.dim if dim is None else dim
    if lengths is None:
        lengths = body.radial(thetas)
    homog = _homogeneous(f) if center is None else None
    if homog is not None:
        # f(r theta) = c |theta|^alpha r^alpha, so the radial integral has a closed form
        c, alpha = homog
        scale = c * np.linalg.norm(thetas, axis=-1) ** alpha if alpha else np.full(len(thetas), c)
        return np.stack([scale * lengths ** (d + a + alpha) / (d + a + alpha) for a in powers])
    x01, w01 = gauss_legendre01(radial_nodes)
    out = np.empty((len(powers), len(thetas)))
    for i in range(0, len(thetas), batch):
        th = thetas[i:i + batch]
        rho = lengths[i:i + batch]
        r = rho[:, None] * x01[None, :]                      # (b, m)
        pts = r[:, :, None] * th[:, None, :]
        if center is not None:
            c = center if center.ndim == 1 else center[i:i + batch, None, :]
            pts = pts + c
        fv = _eval_density(f, pts)                            # (b, m)
        base = fv * w01[None, :] * r ** (d - 1)
        for k, a in enumerate(powers):
            rr = base if a == 0 else base * r ** a
            out[k, i:i + batch] = rho * rr.sum(axis=1)
    return out


def abs_pow(x: np.ndarray, p: float) -> np.ndarray:
    """|x|^p with multiplication chains for small integer p (much faster than pow)."""
    a = np.abs(x)
    if p == 1.0:
        return a
    if p == 2.0:
        return a * a
    if p == int(p) and 2 < p <= 16:
        k = int(p)
        out = None
        base = a
        while k:
            if k & 1:
                out = base if out is None else out * base
            k >>= 1
            if k:
                base = base * base
        return out
    return a ** p


@dataclass(frozen=True, eq=False)
class PolarMoments:
    """Direction rule plus radial integrals R_a(theta) = int_0^{r(theta)} r^{n-1+a} f(r theta) dr.

    Moments in any direction xi reduce to a weighted sum over the rule:
    int_K |(x, xi)|^p f = int_S |(theta, xi)|^p R_p(theta) dtheta.
    """
    rule: Rule
    p: float
    mass_radial: np.ndarray
    moment_radial: np.ndarray
    cfg: IntegrationConfig

    def mass(self) -> ValueWithError:
        return self.rule.estimate(self.mass_radial, self.cfg)

    @cached_property
    def _folded(self):
        """Points and weighted radial terms with antipodal pairs merged.

        |(-theta, xi)|^p = |(theta, xi)|^p, so each pair contributes through
        one point; the per-group bounds refer to the folded arrays.
        """
        rule = self.rule
        wr = rule.weights * self.moment_radial
        if rule.mates is None:
            keep = np.arange(len(rule))
            folded = wr
        else:
            keep = np.flatnonzero(np.arange(len(rule)) < rule.mates)
            folded = wr[keep] + wr[rule.mates[keep]]
        edges = np.searchsorted(rule.groups[keep], np.arange(rule.n_groups + 1))
        return rule.points[keep], folded, list(zip(edges[:-1], edges[1:]))

    def _sums(self, xis: np.ndarray, chunk: int = 64) -> np.ndarray:
        pts, wr, bounds = self._folded
        sums = np.zeros((len(xis), len(bounds)))
        for i in range(0, len(xis), chunk):
            block = xis[i:i + chunk]
            for g, (a, b) in enumerate(bounds):
                sums[i:i + chunk, g] = abs_pow(block @ pts[a:b].T, self.p) @ wr[a:b]
        return sums

    def moment(self, xi) -> ValueWithError:
        xi = np.asarray(xi, dtype=float)
        v, e = self.rule.reduce(self._sums(xi[None, :])[0])
        return make_value(v, e, len(self.rule), self.cfg, exact=self.rule.kind == "exact")

    def moment_value(self, xi) -> float:
        """Point estimate only; the fast path used inside optimizers."""
        xi = np.asarray(xi, dtype=float)
        pts, wr, bounds = self._folded
        if self.rule.kind == "replicate":
            return float(np.dot(abs_pow(pts @ xi, self.p), wr) / self.rule.n_groups)
        a, b = bounds[0]
        return float(np.dot(abs_pow(pts[a:b] @ xi, self.p), wr[a:b]))

    def moments(self, xis: np.ndarray, chunk: int = 64) -> tuple[np.ndarray, np.ndarray]:
        """Values and errors for a batch of directions (k, n)."""
        return self.rule.reduce(self._sums(np.atleast_2d(np.asarray(xis, float)), chunk))


def clear_caches() -> None:
    """Drop cached rules and polar integrals (for cold-start reproducibility checks)."""
    sphere_rule.cache_clear()
    gauss_legendre01.cache_clear()
    polar_moments.cache_clear()
    body_integrate.cache_clear()


@lru_cache(maxsize=32)
def polar_moments(body, f, p: float, cfg: IntegrationConfig) -> PolarMoments:
    rule = body_rule(body, cfg)
    rad = radial_integrals(body, f, [0.0, float(p)], rule.points, cfg.radial_nodes, cfg.batch_size)
    _frozen(rad)
    return PolarMoments(rule, float(p), rad[0], rad[1], cfg)


@lru_cache(maxsize=64)
def body_integrate(body, f, cfg: IntegrationConfig) -> ValueWithError:
    """int_K f via polar coordinates: outer sphere rule, inner Gauss-Legendre on [0, r_K(theta)]."""
    rule = body_rule(body, cfg)
    rad = radial_integrals(body, f, [0.0], rule.points, cfg.radial_nodes, cfg.batch_size)[0]
    out = rule.estimate(rad, cfg)
    return replace(out, samples_used=out.samples_used * cfg.radial_nodes)


# ---------------------------------------------------------------------------
# hyperplane sections

def orthonormal_complement(xi: np.ndarray) -> np.ndarray:
    """(n, n-1) matrix whose columns are an orthonormal basis of xi^perp.

    Householder construction: deterministic and continuous away from xi_n = 0.
    """
    xi = np.asarray(xi, dtype=float)
    n = len(xi)
    e = np.zeros(n)
    e[-1] = 1.0
    sgn = 1.0 if xi[-1] >= 0 else -1.0
    v = xi + sgn * e
    H = np.eye(n) - 2.0 * np.outer(v, v) / np.dot(v, v)
    return H[:, :-1]


def _check_unit(xi, n):
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (n,):
        raise ValueError(f"direction has shape {xi.shape}, expected ({n},)")
    nrm = np.linalg.norm(xi)
    if abs(nrm - 1.0) > 1e-9:
        raise ValueError(f"direction must be a unit vector (|xi| = {nrm})")
    return xi / nrm


def _section_center(body, xi: np.ndarray, s: float):
    """An interior point of K ∩ {(x, xi) = s}, or None when no polar route applies.

    Returns ``"empty"`` when the hyperplane misses the interior of a convex body.
    """
    if s == 0.0:
        return np.zeros(body.dim)
    if not body.convex:
        return None
    sp = body.support_point(xi)
    if sp is None:
        return None
    h = float(np.dot(sp, xi))
    if abs(s) >= h:
        return "empty"
    return (s / h) * sp


CIRCLE_SECTION_POINTS = 2048


def _polar_sections(body, f, xi, offsets, cfg, centers, tag="section"):
    """Vectorized polar-in-hyperplane section integrals for several offsets."""
    n = body.dim
    B = orthonormal_complement(xi)
    samples = cfg.section_samples
    if n == 3:
        # trapezoid on the circle: errors fall like m^-2 even for kinked profiles
        samples = min(samples, CIRCLE_SECTION_POINTS)
    layout = "uniform"
    if getattr(body, "polar_layout", "uniform") == "cubed" and np.all(np.sum(np.abs(B) > 0, axis=0) == 1):
        # axis-aligned section of a cube: the section is again a cube
        layout = "cubed"
    sub = rule_for(n - 1, cfg, samples=samples, tag=tag, layout=layout)
    phis = sub.points @ B.T                                   # (m, n) unit, in xi^perp
    m = len(phis)
    vals = np.zeros(len(offsets))
    errs = np.zeros(len(offsets))
    for k, c in enumerate(centers):
        if c is None:
            raise AssertionError("polar section requested without a center")
        if np.all(c == 0.0):
            lengths = body.radial(phis)
            center = None
        else:
            lengths = body.ray_exit(np.broadcast_to(c, phis.shape), phis)
            center = c
        rad = radial_integrals(body, f, [0.0], phis, cfg.radial_nodes, cfg.batch_size,
                               lengths=lengths, center=center, dim=n - 1)[0]
        v, e = sub.reduce(sub.group_sums(rad))
        vals[k], errs[k] = float(v), float(e)
    return vals, errs, m * cfg.radial_nodes


def _box_section(body, f, xi, s, cfg, tag="box"):
    n = body.dim
    R = body.bounding_radius
    half = math.sqrt(max(R * R - s * s, 0.0))
    B = orthonormal_complement(xi)
    G = cfg.replicates
    per = max(2, cfg.mc_samples // G)
    if cfg.method == "qmc":
        per = 2 ** int(math.log2(per))
    sums = np.empty(G)
    vol = (2 * half) ** (n - 1)
    for r in range(G):
        rng = stream(cfg.seed, tag, n, r)
        u = _unit_cube_points(n - 1, per, "qmc" if cfg.method == "qmc" else "mc", rng)
        acc = 0.0
        for i in range(0, per, cfg.batch_size * 16):
            y = (2 * u[i:i + cfg.batch_size * 16] - 1) * half
            x = s * xi + y @ B.T
            inside = body.gauge(x) <= 1.0
            if np.any(inside):
                acc += float(np.sum(_eval_density(f, x[inside])))
        sums[r] = vol * acc / per
    return float(sums.mean()), float(sums.std(ddof=1) / math.sqrt(G)), G * per


def sections(body, f, xi, offsets, cfg: IntegrationConfig) -> tuple[np.ndarray, np.ndarray, int]:
    """Section integrals int_{K ∩ {(x,xi)=s}} f for an array of offsets.

    Returns (values, std_errors, samples_per_section).
    """
    n = body.dim
    xi = _check_unit(xi, n)
    offsets = np.atleast_1d(np.asarray(offsets, dtype=float))
    vals = np.zeros(len(offsets))
    errs = np.zeros(len(offsets))
    if n == 1:
        pts = offsets[:, None] * xi[None, :]
        inside = body.gauge(pts) <= 1.0
        vals = np.where(inside, _eval_density(f, pts), 0.0)
        return vals, errs, 1
    R = body.bounding_radius
    polar_idx, polar_centers, box_idx = [], [], []
    for k, s in enumerate(offsets):
        if abs(s) > R:
            continue
        c = _section_center(body, xi, float(s))
        if isinstance(c, str):
            continue
        if c is None:
            box_idx.append(k)
        else:
            polar_idx.append(k)
            polar_centers.append(c)
    used = 0
    if polar_idx:
        v, e, used = _polar_sections(body, f, xi, offsets[polar_idx], cfg, polar_centers)
        vals[polar_idx] = v
        errs[polar_idx] = e
    for k in box_idx:
        vals[k], errs[k], used_k = _box_section(body, f, xi, float(offsets[k]), cfg)
        used = max(used, used_k)
    return vals, errs, used


def section_integrate(body, f, xi, s: float, cfg: IntegrationConfig) -> ValueWithError:
    """int over K ∩ {(x, xi) = s} of f against (n-1)-dimensional Lebesgue measure."""
    if abs(s) > body.bounding_radius:
        return exact_value(0.0)
    v, e, used = sections(body, f, xi, [s], cfg)
    exact = body.dim == 1
    return make_value(v[0], e[0], used, cfg, exact=exact)


# ---------------------------------------------------------------------------
# section profile

@dataclass(frozen=True, eq=False)
class SectionProfile:
    """t -> section(t) / sup_s section(s) along a fixed direction."""
    body: object
    density: object
    xi: np.ndarray
    sup: ValueWithError
    argmax: float
    grid: np.ndarray
    grid_values: np.ndarray
    cfg: IntegrationConfig = field(repr=False)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        vals, _, _ = sections(self.body, self.density, self.xi, t.ravel(), self.cfg)
        return (vals / self.sup.value).reshape(t.shape)


def _golden_max(fun, a: float, b: float, tol: float, max_iter: int = 60):
    invphi = (math.sqrt(5) - 1) / 2
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fun(c), fun(d)
    it = 0
    while abs(b - a) > tol and it < max_iter:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fun(d)
        it += 1
    return (c, fc) if fc >= fd else (d, fd)


def section_extent(body, xi) -> float:
    """Half-width of the offset range where sections can be nonzero."""
    if body.convex:
        sp = body.support_point(np.asarray(xi, float))
        if sp is not None:
            return float(np.dot(sp, xi))
    return float(body.bounding_radius)


def profile_g(body, f, xi, cfg: IntegrationConfig, grid_points: int | None = None,
              polish: bool = True) -> SectionProfile:
    """Section profile along ``xi`` and its supremum (grid search, then golden-section polish)."""
    xi = _check_unit(xi, body.dim)
    m = int(grid_points or cfg.profile_grid)
    h = section_extent(body, xi)
    grid = np.linspace(-h, h, m)
    vals, errs, used = sections(body, f, xi, grid, cfg)
    k = int(np.argmax(vals))
    best_s, best_v, best_e = float(grid[k]), float(vals[k]), float(errs[k])
    if polish and body.dim > 1 and m >= 3:
        lo = grid[max(k - 1, 0)]
        hi = grid[min(k + 1, m - 1)]
        cache = {}

        def fun(s):
            v, e, _ = sections(body, f, xi, [s], cfg)
            cache[s] = (float(v[0]), float(e[0]))
            return float(v[0])

        s_star, v_star = _golden_max(fun, float(lo), float(hi), tol=1e-6 * max(h, 1e-12), max_iter=30)
        if v_star > best_v:
            best_s, best_v, best_e = s_star, v_star, cache[s_star][1]
    if best_v <= 0.0:
        raise DegenerateDensityError("all sections carry zero mass along this direction")
    sup = make_value(best_v, best_e, used, cfg, exact=body.dim == 1)
    _frozen(grid, vals)
    return SectionProfile(body, f, xi, sup, best_s, grid, vals, cfg)
