"""Multi-start derivative-free search on the unit sphere.

Each local search runs Nelder-Mead in a tangent chart at its start point and
reprojects to the sphere. Starts are independent, so they are mapped through
:func:`pmap`, which preserves order; the merge is keyed by value and then
by the lexicographic order of a canonical direction.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .quad import orthonormal_complement, stream


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("SLICELAB_THREADS", "1")))
    except ValueError:
        return 1


def pmap(fn, items):
    items = list(items)
    k = min(worker_count(), len(items))
    if k <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=k) as ex:
        return list(ex.map(fn, items))


def canonical(xi: np.ndarray) -> np.ndarray:
    """Representative of {xi, -xi} whose first nonzero coordinate is positive."""
    xi = np.asarray(xi, dtype=float)
    nz = np.flatnonzero(np.abs(xi) > 1e-15)
    if len(nz) and xi[nz[0]] < 0:
        return -xi
    return xi


def axis_starts(n: int, both_signs: bool = True) -> list[np.ndarray]:
    eye = np.eye(n)
    out = [eye[i] for i in range(n)]
    if both_signs:
        out += [-eye[i] for i in range(n)]
    return out


def random_starts(n: int, k: int, seed: int, tag: str) -> list[np.ndarray]:
    if k <= 0:
        return []
    z = stream(seed, tag, n).standard_normal((k, n))
    return list(z / np.linalg.norm(z, axis=1, keepdims=True))


@dataclass
class SearchResult:
    direction: np.ndarray
    value: float
    starts: list          # (start, end direction, value) per start
    evaluations: int

    @property
    def spread(self) -> float:
        vals = np.array([v for _, _, v in self.starts])
        if len(vals) == 0:
            return 0.0
        ref = max(abs(self.value), 1e-300)
        return float((vals.max() - vals.min()) / ref)


def _local(objective, u, step, xatol, maxiter, fatol_rel=1e-12):
    n = len(u)
    if n == 1:
        return u, float(objective(u)), 1
    B = orthonormal_complement(u)
    count = [0]

    def chart(y):
        x = u + B @ y
        return x / np.linalg.norm(x)

    def obj(y):
        count[0] += 1
        return float(objective(chart(y)))

    d = n - 1
    simplex = np.vstack([np.zeros(d), step * np.eye(d)])
    # scipy stops only when both tolerances hold; fatol is relative to the start value
    fatol = fatol_rel * abs(float(objective(u)))
    res = minimize(obj, np.zeros(d), method="Nelder-Mead",
                   options={"initial_simplex": simplex, "xatol": xatol, "fatol": fatol,
                            "maxiter": maxiter, "maxfev": maxiter})
    best = chart(res.x)
    return best, float(res.fun), count[0]


def minimize_on_sphere(objective, starts, step: float = 0.25, xatol: float = 1e-7,
                       maxiter: int = 400, tie_rtol: float = 1e-9, polish: bool = True) -> SearchResult:
    """Minimize ``objective`` (unit vector -> float) from each start.

    Values within ``tie_rtol`` of the best are ties; among ties the
    lexicographically smallest canonical direction wins.
    """
    starts = [np.asarray(s, dtype=float) / np.linalg.norm(s) for s in starts]

    def run(u):
        if not polish:
            return u, float(objective(u)), 1
        return _local(objective, u, step, xatol, maxiter)

    results = pmap(run, starts)
    records = [(s, canonical(x), v) for s, (x, v, _) in zip(starts, results)]
    evals = sum(c for _, _, c in results)
    best_val = min(v for _, _, v in records)
    tol = tie_rtol * max(abs(best_val), 1e-300)
    ties = [r for r in records if r[2] <= best_val + tol]
    ties.sort(key=lambda r: tuple(np.round(r[1], 12)))
    return SearchResult(ties[0][1], ties[0][2], records, evals)


def maximize_on_sphere(objective, starts, **kw) -> SearchResult:
    res = minimize_on_sphere(lambda x: -objective(x), starts, **kw)
    return SearchResult(res.direction, -res.value, [(s, x, -v) for s, x, v in res.starts], res.evaluations)
