"""Even densities and spherical measures that represent L_p-type norms."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .quad import SpecError, spherical_constant, sphere_area, stream

DENSITY_FAMILIES = ("constant", "gaussian", "radial_power", "exp_l1", "mixture", "custom")


@dataclass(frozen=True, eq=False)
class Density:
    """Nonnegative evaluator on R^n, vectorized over the last axis."""
    evaluator: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    family: str
    params: dict
    even: bool = True
    dim: int | None = None

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.dim is not None and x.shape[-1] != self.dim:
            raise ValueError(f"point dimension {x.shape[-1]} does not match density dimension {self.dim}")
        return self.evaluator(x)

    def to_spec(self) -> dict:
        if self.family == "custom":
            raise SpecError("custom densities have no JSON representation")
        if self.family == "mixture":
            return {"type": "mixture", "parts": [p.to_spec() for p in self.params["parts"]],
                    "weights": list(self.params["weights"])}
        return {"type": self.family, **self.params}


def _const(c):
    def f(x):
        return np.full(np.shape(x)[:-1], c)
    return f


def make_density(spec: dict | None = None, **kwargs) -> Density:
    """Build a density from a spec dict such as ``{"type": "gaussian", "sigma": 1.0}``."""
    spec = dict(spec or {}, **kwargs)
    kind = spec.get("type")
    allowed = {
        "constant": {"c"},
        "gaussian": {"sigma"},
        "radial_power": {"alpha"},
        "exp_l1": {"sigma"},
        "mixture": {"parts", "weights"},
    }
    if kind not in allowed:
        raise SpecError(f"density.type: expected one of {sorted(allowed)}, got {kind!r}")
    unknown = sorted(set(spec) - allowed[kind] - {"type"})
    if unknown:
        raise SpecError(f"density: unknown field(s) {unknown}")
    try:
        if kind == "constant":
            c = float(spec.get("c", 1.0))
            if c < 0 or not math.isfinite(c):
                raise ValueError("c must be nonnegative")
            return Density(_const(c), "constant", {"c": c})
        if kind == "gaussian":
            sigma = float(spec.get("sigma", 1.0))
            if not sigma > 0:
                raise ValueError("sigma must be positive")
            return Density(lambda x: np.exp(-np.sum(x * x, axis=-1) / (2 * sigma**2)),
                           "gaussian", {"sigma": sigma})
        if kind == "radial_power":
            alpha = float(spec.get("alpha", 0.0))
            if not alpha >= 0:
                raise ValueError("alpha must be nonnegative")
            return Density(lambda x: np.sum(x * x, axis=-1) ** (alpha / 2),
                           "radial_power", {"alpha": alpha})
        if kind == "exp_l1":
            sigma = float(spec.get("sigma", 1.0))
            if not sigma > 0:
                raise ValueError("sigma must be positive")
            return Density(lambda x: np.exp(-np.sum(np.abs(x), axis=-1) / sigma),
                           "exp_l1", {"sigma": sigma})
        parts = spec.get("parts")
        weights = spec.get("weights")
        if not isinstance(parts, list) or not isinstance(weights, list) or len(parts) != len(weights) or not parts:
            raise ValueError("mixture needs equal-length nonempty 'parts' and 'weights' lists")
        dens = [p if isinstance(p, Density) else make_density(p) for p in parts]
        w = [float(v) for v in weights]
        if any(v < 0 for v in w) or sum(w) <= 0:
            raise ValueError("mixture weights must be nonnegative with positive sum")
        total = sum(w)
        w = [v / total for v in w]

        def mix(x):
            out = w[0] * dens[0](x)
            for wi, d in zip(w[1:], dens[1:]):
                out = out + wi * d(x)
            return out

        return Density(mix, "mixture", {"parts": tuple(dens), "weights": tuple(w)},
                       even=all(d.even for d in dens))
    except (TypeError, ValueError) as exc:
        raise SpecError(f"density ({kind}): {exc}") from None


def make_custom_density(evaluator, dim: int, even: bool = True, check_pairs: int = 64, seed: int = 0) -> Density:
    """Wrap a user evaluator; nonnegativity and evenness are sampled on antipodal pairs."""
    rng = stream(seed, "density-check", dim)
    x = rng.standard_normal((check_pairs, dim)) * 2.0
    fx = np.asarray(evaluator(x), dtype=float)
    if np.any(fx < 0):
        raise ValueError("density takes negative values at sampled points")
    if even and not np.allclose(fx, np.asarray(evaluator(-x), dtype=float), rtol=1e-12, atol=1e-300):
        warnings.warn("density fails the sampled evenness check", RuntimeWarning, stacklevel=2)
    return Density(evaluator, "custom", {}, even=even, dim=dim)


density_from_spec = make_density


# ---------------------------------------------------------------------------
# spherical measures

@dataclass(frozen=True, eq=False)
class DirectionMeasure:
    """Atoms plus a multiple of surface measure on S^{n-1}.

    ``linear_map`` T (optional) precomposes the norm: ||x|| = ||T x||_measure.
    """
    dim: int
    directions: np.ndarray
    weights: np.ndarray
    uniform_weight: float = 0.0
    linear_map: np.ndarray | None = None

    def __post_init__(self):
        d = np.asarray(self.directions, dtype=float).reshape(-1, self.dim)
        w = np.asarray(self.weights, dtype=float).ravel()
        if len(d) != len(w):
            raise ValueError("directions and weights differ in length")
        if np.any(w <= 0):
            raise ValueError("atom weights must be positive")
        if len(d) and np.any(np.abs(np.linalg.norm(d, axis=1) - 1.0) > 1e-12):
            raise ValueError("atom directions must be unit vectors")
        if self.uniform_weight < 0:
            raise ValueError("uniform_weight must be nonnegative")
        if len(w) == 0 and self.uniform_weight == 0:
            raise ValueError("measure has zero total mass")
        d.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "directions", d)
        object.__setattr__(self, "weights", w)

    def scaled_norm(self, lam: float, p: float) -> "DirectionMeasure":
        """Measure of lam * D: the norm divides by lam, so the measure by lam^p."""
        return DirectionMeasure(self.dim, self.directions, self.weights / lam**p,
                                self.uniform_weight / lam**p, self.linear_map)


def total_mass(measure: DirectionMeasure) -> float:
    """nu(S^{n-1}) = sum of atom weights + u * s_{n-1}."""
    return float(np.sum(measure.weights) + measure.uniform_weight * sphere_area(measure.dim))


def gauge_from_measure(measure: DirectionMeasure, p: float, x) -> np.ndarray | float:
    """(int |(x, theta)|^p dnu(theta))^{1/p}; the uniform part is evaluated in closed form."""
    if p < 1:
        raise ValueError("p must be >= 1")
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != measure.dim:
        raise ValueError(f"point dimension {x.shape[-1]} does not match measure dimension {measure.dim}")
    if measure.linear_map is not None:
        x = x @ measure.linear_map.T
    total = np.zeros(x.shape[:-1])
    if len(measure.weights):
        total = total + (np.abs(x @ measure.directions.T) ** p) @ measure.weights
    if measure.uniform_weight:
        total = total + measure.uniform_weight * np.linalg.norm(x, axis=-1) ** p / spherical_constant(measure.dim, p)
    out = total ** (1.0 / p)
    return float(out) if out.ndim == 0 else out


def lp_ball_measure(n: int, p: float) -> DirectionMeasure:
    """Atoms of mass 1/2 at +-e_i: reproduces the l_p^n norm."""
    if p < 1:
        raise ValueError("p must be >= 1")
    eye = np.eye(n)
    return DirectionMeasure(n, np.concatenate([eye, -eye]), np.full(2 * n, 0.5))


def euclidean_ball_measure(n: int, p: float) -> DirectionMeasure:
    """Uniform measure with density c(n, p): reproduces the Euclidean norm."""
    if p < 1:
        raise ValueError("p must be >= 1")
    return DirectionMeasure(n, np.zeros((0, n)), np.zeros(0), spherical_constant(n, p))


def ellipsoid_measure(axes, p: float, rotation=None) -> DirectionMeasure:
    """Euclidean witness pulled back by the map sending the ellipsoid onto the unit ball."""
    axes = np.asarray(axes, dtype=float)
    n = len(axes)
    R = np.eye(n) if rotation is None else np.asarray(rotation, dtype=float)
    T = np.diag(1.0 / axes) @ R.T
    base = euclidean_ball_measure(n, p)
    return DirectionMeasure(n, base.directions, base.weights, base.uniform_weight, T)
