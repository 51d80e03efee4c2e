"""Scrambling-invariant entanglement witness families.

The family consists of operators

    W = 1 + alpha |x1 x2><x1 x2| + beta |y1 y2><y1 y2| + gamma |z1 z2><z1 z2|

over all choices of local eigenvectors.  Local unitaries plus the partial
transpose map family members onto each other, so if one member is a witness
all are, and reassigning probabilities to outcomes only moves between
members.  Evaluating the family on scrambled data therefore amounts to an
extremal choice from each multiset, and a negative value certifies
entanglement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping

import numpy as np

from .errors import ConvergenceFailure, DomainError, MissingSetting
from .measurement import XX, YY, ZZ, OutcomeDistribution, ScrambledData, setting
from .optimize import multistart_minimize
from .quantum import PureState

TANGENT_TOL = 1e-8
REGIME_RATIO = -3.0 - 2.0 * math.sqrt(2.0)  # gamma/alpha at the optimal-state crossover


@dataclass(frozen=True)
class WitnessParams:
    """Coefficients and projector choices selecting one family member.

    ``choice_*`` indexes the outcome basis state of the respective setting
    (order ++, +-, -+, -- for XX/YY and 00, 01, 10, 11 for ZZ).  A detecting
    member needs at least one negative coefficient.
    """

    alpha: float
    beta: float
    gamma: float
    choice_x: int = 0
    choice_y: int = 0
    choice_z: int = 0

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            if not np.isfinite(getattr(self, name)):
                raise DomainError(f"witness coefficient {name} must be finite")
        for name in ("choice_x", "choice_y", "choice_z"):
            c = getattr(self, name)
            if c not in (0, 1, 2, 3):
                raise DomainError(f"{name} must be an outcome index 0..3, got {c}")


def witness_matrix(w: WitnessParams) -> np.ndarray:
    """1 + alpha Pi_x + beta Pi_y + gamma Pi_z with the chosen projectors."""
    m = np.eye(4, dtype=complex)
    m = m + w.alpha * setting(XX).projectors[w.choice_x]
    m = m + w.beta * setting(YY).projectors[w.choice_y]
    m = m + w.gamma * setting(ZZ).projectors[w.choice_z]
    return m


def _dist_map(dists) -> Mapping[str, OutcomeDistribution]:
    if isinstance(dists, Mapping):
        return dists
    return {d.setting: d for d in dists}


def witness_value(dists: Iterable[OutcomeDistribution] | Mapping[str, OutcomeDistribution],
                  w: WitnessParams) -> float:
    """<W> = 1 + alpha p_x + beta p_y + gamma p_z for labeled distributions."""
    dmap = _dist_map(dists)
    value = 1.0
    for coeff, label, choice in ((w.alpha, XX, w.choice_x), (w.beta, YY, w.choice_y),
                                 (w.gamma, ZZ, w.choice_z)):
        if coeff == 0.0:
            continue
        if label not in dmap:
            raise MissingSetting(f"witness needs the {label} distribution")
        value += coeff * float(dmap[label].p[choice])
    return value


def scrambled_witness_min(d: ScrambledData, alpha: float, beta: float,
                          gamma: float) -> float:
    """Minimum of <W> over all probability-to-outcome assignments.

    Each assignment corresponds to a valid family member, so a negative
    result certifies entanglement from the scrambled data alone.
    """
    value = 1.0
    for coeff, label in ((alpha, XX), (beta, YY), (gamma, ZZ)):
        if coeff == 0.0:
            continue
        m = d.multiset(label)  # sorted descending
        value += coeff * float(m[0] if coeff < 0.0 else m[-1])
    return value


def min_entropy_form(alpha: float, beta: float, gamma: float,
                     d: ScrambledData) -> float:
    """<W> rewritten through min-entropies, valid for nonpositive coefficients.

    Returns 1 + alpha 2^{-S_inf(xx)} + beta 2^{-S_inf(yy)} + gamma 2^{-S_inf(zz)},
    which coincides with :func:`scrambled_witness_min` there.  Zero
    coefficients skip their setting.
    """
    if alpha > 0.0 or beta > 0.0 or gamma > 0.0:
        raise DomainError("the min-entropy form needs nonpositive coefficients")
    value = 1.0
    for coeff, label in ((alpha, XX), (beta, YY), (gamma, ZZ)):
        if coeff == 0.0:
            continue
        s_inf = -math.log2(float(d.multiset(label)[0]))
        value += coeff * 2.0 ** (-s_inf)
    return value


def correlation_witness_values(
        dists: Iterable[OutcomeDistribution] | Mapping[str, OutcomeDistribution]) -> np.ndarray:
    """The four values 1 + s1 E_xx + s2 E_zz for s1, s2 in {+1, -1}.

    E = p0 - p1 - p2 + p3 in outcome-label order; sign order (++, +-, -+, --).
    """
    dmap = _dist_map(dists)
    for label in (XX, ZZ):
        if label not in dmap:
            raise MissingSetting(f"correlation witnesses need the {label} distribution")
    sign = np.array([1.0, -1.0, -1.0, 1.0])
    e_xx = float(sign @ dmap[XX].p)
    e_zz = float(sign @ dmap[ZZ].p)
    return np.array([1.0 + s1 * e_xx + s2 * e_zz
                     for s1 in (1.0, -1.0) for s2 in (1.0, -1.0)])


# ---------------------------------------------------------------------------
# Minimization over product states and the tangency construction.
# ---------------------------------------------------------------------------


def _product_expectation(x: np.ndarray, alpha: float, beta: float, gamma: float) -> float:
    """<W> on the product state with Bloch angles (theta_a, phi_a, theta_b, phi_b)."""
    ta, pa, tb, pb = x
    sa, sb = math.sin(ta), math.sin(tb)
    pxa = 0.5 * (1.0 + sa * math.cos(pa))
    pxb = 0.5 * (1.0 + sb * math.cos(pb))
    pya = 0.5 * (1.0 + sa * math.sin(pa))
    pyb = 0.5 * (1.0 + sb * math.sin(pb))
    pza = math.cos(0.5 * ta) ** 2
    pzb = math.cos(0.5 * tb) ** 2
    return 1.0 + alpha * pxa * pxb + beta * pya * pyb + gamma * pza * pzb


_WITNESS_SEED = 0x3A11CE


def _witness_starts(beta: float, n_random: int) -> list[np.ndarray]:
    starts = []
    # symmetric family theta_a = theta_b, phi = 0 (optimal for gamma/alpha above the crossover)
    for th in np.linspace(0.0, math.pi, 7):
        starts.append(np.array([th, 0.0, th, 0.0]))
    # mirrored family theta_a - 3pi/4 = 3pi/4 - theta_b (the other regime)
    for delta in np.linspace(-0.6 * math.pi, 0.6 * math.pi, 7):
        starts.append(np.array([0.75 * math.pi + delta, 0.0, 0.75 * math.pi - delta, 0.0]))
    if beta != 0.0:
        for th in np.linspace(0.1, math.pi - 0.1, 5):
            starts.append(np.array([th, 0.5 * math.pi, th, 0.5 * math.pi]))
    gen = np.random.Generator(np.random.Philox(key=_WITNESS_SEED))
    for _ in range(n_random):
        starts.append(np.array([
            gen.uniform(0.0, math.pi), gen.uniform(0.0, 2.0 * math.pi),
            gen.uniform(0.0, math.pi), gen.uniform(0.0, 2.0 * math.pi),
        ]))
    return starts


def _min_over_separable_full(alpha: float, beta: float, gamma: float,
                             starts: int = 64):
    for name, c in (("alpha", alpha), ("beta", beta), ("gamma", gamma)):
        if not np.isfinite(c):
            raise DomainError(f"witness coefficient {name} must be finite")

    def objective(x: np.ndarray) -> float:
        return _product_expectation(x, alpha, beta, gamma)

    n_structured = len(_witness_starts(beta, 0))
    return multistart_minimize(
        objective, _witness_starts(beta, max(starts - n_structured, 4)),
        agree=3, agree_tol=1e-6, label="separable witness minimum",
        step=0.3, xtol=1e-10, max_iter=500)


def min_over_separable(alpha: float, beta: float, gamma: float, *,
                       starts: int = 64) -> float:
    """min over pure product states of <W>; >= 0 iff W is a witness.

    Full (theta_a, phi_a, theta_b, phi_b) multi-start search.  The known
    optimal-state structures for beta = 0 only seed starting points; the
    search itself explores the whole product manifold.
    """
    return _min_over_separable_full(alpha, beta, gamma, starts=starts).value


def witness_min_eigvec(alpha: float, gamma: float) -> tuple[float, PureState]:
    """Parameter t and state psi_t spanning the minimal eigenvector of W.

    Valid for W = 1 + alpha |++><++| + gamma |00><00| with alpha nonzero and
    at least one negative coefficient; uses the closed form
    t = -(alpha - 2 gamma + 2 sqrt(alpha^2 - alpha gamma + gamma^2)) / alpha.
    """
    if alpha == 0.0:
        raise DomainError("the t-formula requires alpha != 0")
    if alpha >= 0.0 and gamma >= 0.0:
        raise DomainError("a detecting witness needs a negative coefficient")
    t = -(alpha - 2.0 * gamma + 2.0 * math.sqrt(alpha * alpha - alpha * gamma
                                                + gamma * gamma)) / alpha
    vec = np.array([t, 1.0, 1.0, 1.0], dtype=complex)
    return t, PureState(vec / np.linalg.norm(vec))


# -- tangency: scale coefficients so the separable minimum is exactly zero --


def _tangency_scale(alpha0: float, gamma0: float, beta: float,
                    starts: int = 64) -> tuple[float, float] | None:
    """Scale c with min_sep(c alpha0, beta, c gamma0) = 0, or None if impossible."""
    if beta == 0.0:
        base = min_over_separable(alpha0, 0.0, gamma0, starts=starts)
        linear_min = base - 1.0
        if linear_min >= -1e-12:
            return None
        c = -1.0 / linear_min
        return c * alpha0, c * gamma0
    if beta <= -1.0:
        return None  # 1 + beta p_y is already nonpositive on a product state
    # Newton iteration on f(c) = min_prod <W_c>: f is concave and decreasing,
    # and its one-sided derivative at the minimizer x* is the linear term
    # alpha0 p_x(x*) + gamma0 p_z(x*), so the tangent-line update converges
    # monotonically once it crosses the root.
    c = 1.0
    for _ in range(40):
        res = _min_over_separable_full(c * alpha0, beta, c * gamma0, starts=starts)
        val = res.value
        if abs(val) <= TANGENT_TOL:
            return c * alpha0, c * gamma0
        ta, pa, tb, pb = res.x
        pxa = 0.5 * (1.0 + math.sin(ta) * math.cos(pa))
        pxb = 0.5 * (1.0 + math.sin(tb) * math.cos(pb))
        pza = math.cos(0.5 * ta) ** 2
        pzb = math.cos(0.5 * tb) ** 2
        slope = alpha0 * pxa * pxb + gamma0 * pza * pzb
        if slope >= -1e-15:
            return None  # scaling alpha0, gamma0 cannot push the minimum down
        c = max(c - val / slope, 1e-12)
    raise ConvergenceFailure("tangency scaling did not converge for beta != 0")


def optimize_params(beta: float, *, num: int = 33, starts: int = 64) -> list[tuple[float, float]]:
    """Tangent-witness curve: (alpha, gamma) pairs with separable minimum zero.

    Directions (-cos w, -sin w) sweep from the pure-alpha to the pure-gamma
    witness; for beta = 0 one multi-start minimization per direction fixes
    the scale exactly, because min <W> is affine in a common rescaling of
    alpha and gamma.
    """
    if not np.isfinite(beta):
        raise DomainError("beta must be finite")
    curve = []
    for omega in np.linspace(0.0, 0.5 * math.pi, num):
        a0, g0 = -math.cos(omega), -math.sin(omega)
        if abs(a0) < 1e-15:
            a0 = 0.0
        if abs(g0) < 1e-15:
            g0 = 0.0
        if a0 == 0.0 and beta == 0.0:
            curve.append((0.0, -1.0))  # tangent at |00>, degenerate endpoint
            continue
        scaled = _tangency_scale(a0, g0, beta, starts=starts)
        if scaled is not None:
            curve.append(scaled)
    return curve


@lru_cache(maxsize=4)
def tangent_curve(beta: float = 0.0, num: int = 17) -> tuple[tuple[float, float], ...]:
    """Cached tangent curve used by the detector's witness method."""
    return tuple(optimize_params(beta, num=num))


def _min_pairing_delta(m: np.ndarray) -> float:
    """Smallest |sum of a pair - sum of the complement| over the 3 pairings.

    At every outcome assignment the correlation E = q0 - q1 - q2 + q3 equals
    one of these pairing differences up to sign, and the sign is absorbed by
    the witness family 1 +/- XX +/- ZZ.
    """
    return min(abs(float(m[0] + m[1] - m[2] - m[3])),
               abs(float(m[0] + m[2] - m[1] - m[3])),
               abs(float(m[0] + m[3] - m[1] - m[2])))


def scrambled_correlation_min(d: ScrambledData) -> float:
    """Guaranteed correlation-witness value on scrambled data.

    Equals max over assignments of the best (most favorable to separability)
    of the four sign witnesses; negative means every assignment is refuted,
    which certifies entanglement.
    """
    return 1.0 - _min_pairing_delta(d.multiset(XX)) - _min_pairing_delta(d.multiset(ZZ))


def scrambled_family_min(d: ScrambledData, *, curve=None) -> tuple[float, tuple[float, float]]:
    """Best certified witness value over the tangent curve plus correlation family.

    Returns (value, (alpha, gamma)); for the correlation witnesses the pair
    is reported as the (-1, -1) sentinel.  Negative value means detected.
    """
    best = math.inf
    best_params = (0.0, 0.0)
    for a, g in (curve if curve is not None else tangent_curve()):
        v = scrambled_witness_min(d, a, 0.0, g)
        if v < best:
            best, best_params = v, (a, g)
    v = scrambled_correlation_min(d)
    if v < best:
        best, best_params = v, (-1.0, -1.0)
    return best, best_params
