"""Small derivative-free minimizer used by the boundary and witness searches.

A plain Nelder-Mead simplex with deterministic tie-breaking.  The multi-start
driver runs a fixed, index-ordered list of starting points and demands that
several independent starts reproduce the winning value; a scattered field of
minima signals an unreliable landscape and raises ConvergenceFailure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ConvergenceFailure


def nelder_mead(f: Callable[[np.ndarray], float], x0, *, step: float = 0.25,
                xtol: float = 1e-10, ftol: float = 1e-14, max_iter: int = 600):
    """Minimize ``f`` from ``x0``; returns (x_best, f_best).

    Terminates when the simplex diameter drops below ``xtol`` or the value
    spread below ``ftol``.
    """
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    simplex = [x0.copy()]
    for i in range(n):
        xi = x0.copy()
        xi[i] += step
        simplex.append(xi)
    vals = [f(x) for x in simplex]

    for _ in range(max_iter):
        order = sorted(range(n + 1), key=lambda i: vals[i])
        simplex = [simplex[i] for i in order]
        vals = [vals[i] for i in order]
        diam = max(np.max(np.abs(s - simplex[0])) for s in simplex[1:])
        if diam < xtol or vals[-1] - vals[0] < ftol:
            break
        centroid = np.mean(simplex[:-1], axis=0)
        xr = centroid + (centroid - simplex[-1])
        fr = f(xr)
        if fr < vals[0]:
            xe = centroid + 2.0 * (centroid - simplex[-1])
            fe = f(xe)
            if fe < fr:
                simplex[-1], vals[-1] = xe, fe
            else:
                simplex[-1], vals[-1] = xr, fr
        elif fr < vals[-2]:
            simplex[-1], vals[-1] = xr, fr
        else:
            xc = centroid + 0.5 * (simplex[-1] - centroid)
            fc = f(xc)
            if fc < vals[-1]:
                simplex[-1], vals[-1] = xc, fc
            else:
                for i in range(1, n + 1):
                    simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0])
                    vals[i] = f(simplex[i])
    best = int(np.argmin(vals))
    return simplex[best], vals[best]


@dataclass(frozen=True)
class MultistartResult:
    x: np.ndarray
    value: float
    start_values: tuple[float, ...]


def multistart_minimize(f: Callable[[np.ndarray], float], starts: Sequence[np.ndarray], *,
                        agree: int = 3, agree_tol: float = 1e-6, label: str = "objective",
                        **nm_kwargs) -> MultistartResult:
    """Run Nelder-Mead from every start and keep the index-ordered best.

    Raises ConvergenceFailure unless at least ``agree`` starts land within
    ``agree_tol`` of the winning value.
    """
    results = [nelder_mead(f, s, **nm_kwargs) for s in starts]
    values = [v for _, v in results]
    best_idx = int(np.argmin(values))
    best_x, best_v = results[best_idx]
    close = sum(1 for v in values if v - best_v <= agree_tol)
    if close < min(agree, len(starts)):
        raise ConvergenceFailure(
            f"{label}: only {close} of {len(starts)} starts reach the minimum "
            f"{best_v:.6g} within {agree_tol:g}")
    return MultistartResult(best_x, best_v, tuple(values))
