"""Origin-symmetric star bodies described by their gauge (Minkowski functional)."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import special

from .quad import IntegrationConfig, SpecError, ValueWithError, make_value, body_rule, _batched, stream

FAMILIES = ("lq_ball", "cube", "cross_polytope", "ellipsoid", "custom")


class UnboundedBodyError(ValueError):
    """The gauge vanishes on a direction, so the body is not bounded there."""


@dataclass(frozen=True)
class VolumeEstimate(ValueWithError):
    exact: float | None = None

    def to_dict(self) -> dict:
        d = super().to_dict()
        d["exact"] = self.exact
        return d


@dataclass(frozen=True, eq=False)
class StarBody:
    """A star body with the origin in its interior.

    ``gauge_fn`` maps an array of shape (..., n) to shape (...). Instances are
    immutable; they hash by identity so they can key integration caches.
    """
    dim: int
    gauge_fn: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    family: str
    params: dict
    bounding_radius: float
    exact_volume: float | None = None
    symmetric: bool = True
    convex: bool = False
    inradius: float | None = None
    _support: Callable | None = field(default=None, repr=False)
    _ray_exit: Callable | None = field(default=None, repr=False)
    polar_layout: str = "uniform"

    def _coerce(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1:] != (self.dim,):
            raise ValueError(f"point of shape {x.shape} does not match body dimension {self.dim}")
        return x

    def gauge(self, x) -> np.ndarray | float:
        x = self._coerce(x)
        g = self.gauge_fn(x)
        return float(g) if np.ndim(g) == 0 else g

    def radial(self, theta) -> np.ndarray | float:
        theta = self._coerce(theta)
        g = np.asarray(self.gauge_fn(theta), dtype=float)
        if np.any(g <= 0.0):
            raise UnboundedBodyError("gauge vanishes on a direction; the body is unbounded there")
        r = 1.0 / g
        return float(r) if r.ndim == 0 else r

    def contains(self, x, tol: float = 0.0):
        if tol < 0:
            raise ValueError("tol must be nonnegative")
        g = self.gauge(x)
        return g <= 1.0 + tol

    def support_point(self, xi: np.ndarray) -> np.ndarray | None:
        """A point of K maximizing (x, xi), for families where it is known in closed form."""
        if self._support is None:
            return None
        return self._support(np.asarray(xi, dtype=float))

    def ray_exit(self, c: np.ndarray, phi: np.ndarray) -> np.ndarray:
        """Largest t with gauge(c + t phi) <= 1, for interior points c of a convex body."""
        c = np.asarray(c, dtype=float)
        phi = np.asarray(phi, dtype=float)
        if self._ray_exit is not None:
            return self._ray_exit(c, phi)
        return _bisect_exit(self.gauge_fn, c, phi, self.bounding_radius + np.linalg.norm(c, axis=-1))

    def scaled(self, lam: float) -> "StarBody":
        """The body lam * K."""
        if not lam > 0:
            raise ValueError("scale must be positive")
        base = self
        sup = None if self._support is None else (lambda xi: lam * base._support(xi))
        ray = None if self._ray_exit is None else (lambda c, phi: lam * base._ray_exit(c / lam, phi))
        params = dict(self.params)
        params["dilation"] = params.get("dilation", 1.0) * lam
        return StarBody(
            dim=self.dim,
            gauge_fn=lambda x: base.gauge_fn(x) / lam,
            family=self.family,
            params=params,
            bounding_radius=self.bounding_radius * lam,
            exact_volume=None if self.exact_volume is None else self.exact_volume * lam**self.dim,
            symmetric=self.symmetric,
            convex=self.convex,
            inradius=None if self.inradius is None else self.inradius * lam,
            _support=sup,
            _ray_exit=ray,
            polar_layout=self.polar_layout,
        )

    def to_spec(self) -> dict:
        if self.family == "custom":
            raise SpecError("custom bodies have no JSON representation")
        spec = {"type": self.family}
        p = self.params
        if self.family == "ellipsoid":
            spec["axes"] = list(p["axes"])
            if p.get("rotation") is not None:
                spec["rotation"] = [list(r) for r in p["rotation"]]
        else:
            spec["n"] = self.dim
            if self.family == "lq_ball":
                spec["q"] = "inf" if math.isinf(p["q"]) else p["q"]
                spec["scale"] = p["scale"]
            elif self.family == "cube":
                spec["half_side"] = p["half_side"]
            else:
                spec["scale"] = p["scale"]
        if "dilation" in p:
            spec["dilation"] = p["dilation"]
        return spec


def _bisect_exit(gauge_fn, c, phi, t_hi, iters: int = 52):
    lo = np.zeros(c.shape[:-1])
    hi = np.broadcast_to(np.asarray(t_hi, dtype=float), lo.shape).copy()
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        inside = gauge_fn(c + mid[..., None] * phi) <= 1.0
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    return 0.5 * (lo + hi)


def _positive(name, v):
    v = float(v)
    if not (v > 0) or not math.isfinite(v):
        raise ValueError(f"{name} must be a positive finite number, got {v!r}")
    return v


def _check_dim(n):
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValueError(f"dimension must be a positive integer, got {n!r}")
    return int(n)


def lq_volume(n: int, q: float, scale: float = 1.0) -> float:
    """Closed-form volume (2 Gamma(1/q + 1))^n / Gamma(n/q + 1) of the scaled unit l_q ball."""
    if math.isinf(q):
        return (2.0 * scale) ** n
    logv = n * (math.log(2.0) + special.gammaln(1.0 / q + 1.0)) - special.gammaln(n / q + 1.0)
    return float(math.exp(logv)) * scale**n


def unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def make_cube(n: int, half_side: float = 1.0) -> StarBody:
    n = _check_dim(n)
    a = _positive("half_side", half_side)

    def gauge(x):
        return np.max(np.abs(x), axis=-1) / a

    def support(xi):
        return a * np.sign(xi)

    def ray(c, phi):
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(phi > 0, (a - c) / phi, np.where(phi < 0, (-a - c) / phi, np.inf))
        return np.min(t, axis=-1)

    return StarBody(n, gauge, "cube", {"half_side": a}, a * math.sqrt(n), (2 * a) ** n,
                    convex=True, inradius=a, _support=support, _ray_exit=ray, polar_layout="cubed")


def make_cross_polytope(n: int, scale: float = 1.0) -> StarBody:
    n = _check_dim(n)
    s = _positive("scale", scale)

    def gauge(x):
        return np.sum(np.abs(x), axis=-1) / s

    def support(xi):
        k = int(np.argmax(np.abs(xi)))
        out = np.zeros_like(xi)
        out[k] = s * (1.0 if xi[k] >= 0 else -1.0)
        return out

    return StarBody(n, gauge, "cross_polytope", {"scale": s}, s, (2 * s) ** n / math.factorial(n),
                    convex=True, inradius=s / math.sqrt(n), _support=support)


def _quadric_exit(Minv, c, phi):
    # |Minv (c + t phi)| = 1
    u = c @ Minv.T
    v = phi @ Minv.T
    vv = np.sum(v * v, axis=-1)
    uv = np.sum(u * v, axis=-1)
    uu = np.sum(u * u, axis=-1)
    disc = np.maximum(uv * uv - vv * (uu - 1.0), 0.0)
    return (-uv + np.sqrt(disc)) / vv


def make_ellipsoid(axis_lengths, rotation=None) -> StarBody:
    """Ellipsoid R diag(axes) B_2^n; ``rotation`` is an optional orthogonal matrix R."""
    axes = np.array([_positive("axis length", a) for a in np.atleast_1d(axis_lengths)], dtype=float)
    n = len(axes)
    if n < 1:
        raise ValueError("at least one axis length is required")
    if rotation is None:
        R = np.eye(n)
    else:
        R = np.asarray(rotation, dtype=float)
        if R.shape != (n, n) or not np.allclose(R.T @ R, np.eye(n), atol=1e-10):
            raise ValueError("rotation must be an orthogonal n x n matrix")
    A = R @ np.diag(axes)
    Ainv = np.diag(1.0 / axes) @ R.T
    A2 = A @ A.T

    def gauge(x):
        return np.linalg.norm(x @ Ainv.T, axis=-1)

    def support(xi):
        return A2 @ xi / np.linalg.norm(A.T @ xi)

    def ray(c, phi):
        return _quadric_exit(Ainv, c, phi)

    params = {"axes": tuple(float(a) for a in axes),
              "rotation": None if rotation is None else tuple(tuple(map(float, r)) for r in R)}
    return StarBody(n, gauge, "ellipsoid", params, float(axes.max()),
                    unit_ball_volume(n) * float(np.prod(axes)),
                    convex=True, inradius=float(axes.min()), _support=support, _ray_exit=ray)


def make_lq_ball(n: int, q: float, scale: float = 1.0) -> StarBody:
    """scale times the unit ball of l_q^n, q in (0, inf]; q = inf gives the cube."""
    n = _check_dim(n)
    q = float(q)
    s = _positive("scale", scale)
    if not q > 0:
        raise ValueError(f"q must be positive, got {q!r}")
    if math.isinf(q):
        cube = make_cube(n, s)
        return cube
    if q == 2.0:
        body = make_ellipsoid([s] * n)
        return StarBody(n, body.gauge_fn, "lq_ball", {"q": 2.0, "scale": s}, s,
                        lq_volume(n, 2.0, s), convex=True, inradius=s,
                        _support=body._support, _ray_exit=body._ray_exit)

    def gauge(x):
        ax = np.abs(x)
        m = np.max(ax, axis=-1)
        safe = np.where(m > 0, m, 1.0)
        inner = np.sum((ax / safe[..., None]) ** q, axis=-1)
        return np.where(m > 0, m * inner ** (1.0 / q), 0.0) / s

    support = None
    if q >= 1.0:
        if q == 1.0:
            support = make_cross_polytope(n, s)._support
        else:
            qd = q / (q - 1.0)

            def support(xi):
                a = np.abs(xi)
                m = a.max()
                w = (a / m) ** (qd - 1.0)
                x = np.sign(xi) * w
                return s * x / np.sum(np.abs(x) ** q) ** (1.0 / q)

    R = s * n ** (0.5 - 1.0 / q) if q > 2 else s
    r_in = s if q >= 2 else s * n ** (1.0 / q - 0.5)
    return StarBody(n, gauge, "lq_ball", {"q": q, "scale": s}, R, lq_volume(n, q, s),
                    convex=q >= 1.0, inradius=r_in, _support=support)


def make_custom(n: int, gauge_evaluator, bounding_radius: float, convex: bool = False,
                symmetric: bool = True, check_points: int = 64, seed: int = 0) -> StarBody:
    """Body from a user gauge. Homogeneity and symmetry are sampled, not proven."""
    n = _check_dim(n)
    R = _positive("bounding_radius", bounding_radius)
    body = StarBody(n, gauge_evaluator, "custom", {}, R, symmetric=symmetric, convex=convex)
    rng = stream(seed, "custom-check", n)
    z = rng.standard_normal((check_points, n))
    lam = rng.uniform(0.1, 10.0, check_points)
    g = np.asarray(gauge_evaluator(z), dtype=float)
    g_lam = np.asarray(gauge_evaluator(lam[:, None] * z), dtype=float)
    if np.any(g < 0) or not np.allclose(g_lam, lam * g, rtol=1e-9, atol=1e-12):
        warnings.warn("custom gauge fails sampled positive homogeneity", RuntimeWarning, stacklevel=2)
    if symmetric and not np.allclose(np.asarray(gauge_evaluator(-z)), g, rtol=1e-12, atol=0):
        warnings.warn("custom gauge fails sampled symmetry", RuntimeWarning, stacklevel=2)
    theta = z / np.linalg.norm(z, axis=1, keepdims=True)
    with np.errstate(divide="ignore"):
        r = 1.0 / np.asarray(gauge_evaluator(theta), dtype=float)
    if np.any(r > R * (1 + 1e-12)):
        warnings.warn("custom body extends past bounding_radius on sampled directions",
                      RuntimeWarning, stacklevel=2)
    return body


def gauge(body: StarBody, x):
    return body.gauge(x)


def radial(body: StarBody, theta):
    theta = np.asarray(theta, dtype=float)
    nrm = np.linalg.norm(theta, axis=-1)
    if np.any(np.abs(nrm - 1.0) > 1e-12):
        raise ValueError("theta must be a unit vector")
    return body.radial(theta)


def contains_point(body: StarBody, x, tol: float = 0.0):
    return body.contains(x, tol)


def volume(body: StarBody, cfg: IntegrationConfig | None = None) -> VolumeEstimate:
    """|K| from n|K| = int_{S^{n-1}} r_K(theta)^n dtheta."""
    cfg = cfg or IntegrationConfig()
    n = body.dim
    rule = body_rule(body, cfg)
    r = _batched(body.radial, rule.points, cfg.batch_size)
    est = rule.estimate(r**n / n, cfg)
    return VolumeEstimate(est.value, est.std_error, est.samples_used, est.status, body.exact_volume)


def reference_volume(body: StarBody, cfg: IntegrationConfig | None = None) -> ValueWithError:
    """Exact volume when known, otherwise the polar estimate."""
    if body.exact_volume is not None:
        return make_value(body.exact_volume, 0.0, 0, None, exact=True)
    v = volume(body, cfg)
    return ValueWithError(v.value, v.std_error, v.samples_used, v.status)


# ---------------------------------------------------------------------------
# JSON specs

_BODY_FIELDS = {
    "lq_ball": ({"type", "n", "q"}, {"scale", "dilation"}),
    "cube": ({"type", "n"}, {"half_side", "dilation"}),
    "cross_polytope": ({"type", "n"}, {"scale", "dilation"}),
    "ellipsoid": ({"type", "axes"}, {"rotation", "dilation"}),
}


def body_from_spec(spec: dict) -> StarBody:
    if not isinstance(spec, dict):
        raise SpecError("body: expected a JSON object")
    kind = spec.get("type")
    if kind not in _BODY_FIELDS:
        raise SpecError(f"body.type: expected one of {sorted(_BODY_FIELDS)}, got {kind!r}")
    required, optional = _BODY_FIELDS[kind]
    missing = sorted(required - set(spec))
    if missing:
        raise SpecError(f"body: missing field(s) {missing}")
    unknown = sorted(set(spec) - required - optional)
    if unknown:
        raise SpecError(f"body: unknown field(s) {unknown}")
    try:
        if kind == "lq_ball":
            q = spec["q"]
            q = math.inf if q in ("inf", "infinity", None) else float(q)
            body = make_lq_ball(spec["n"], q, spec.get("scale", 1.0))
        elif kind == "cube":
            body = make_cube(spec["n"], spec.get("half_side", 1.0))
        elif kind == "cross_polytope":
            body = make_cross_polytope(spec["n"], spec.get("scale", 1.0))
        else:
            body = make_ellipsoid(spec["axes"], spec.get("rotation"))
    except (TypeError, ValueError) as exc:
        raise SpecError(f"body: {exc}") from None
    if "dilation" in spec:
        try:
            body = body.scaled(float(spec["dilation"]))
        except (TypeError, ValueError) as exc:
            raise SpecError(f"body.dilation: {exc}") from None
    return body
