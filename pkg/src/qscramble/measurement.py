"""Local measurements, outcome probabilities, and the scrambled-data format.

Scrambled data keeps, for each measurement setting, only the multiset of the
four outcome probabilities; the assignment of probabilities to outcomes is
forgotten.  Permutations act independently per setting, so a full relabeling
is a pair of permutations of four symbols, one for the XX and one for the ZZ
setting.  Local bit flips and the qubit swap generate a 32-element group of
relabelings that never changes physics, which cuts the 576 assignment pairs
down to 18 canonical representatives.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping

import numpy as np

from .errors import DomainError, DuplicateSetting, MissingSetting, SettingMismatch
from .quantum import I2, SIGMA_X, SIGMA_Z, DensityMatrix

XX, YY, ZZ = "XX", "YY", "ZZ"
SETTING_LABELS = (XX, YY, ZZ)

_OUTCOME_LABELS = {
    XX: ("++", "+-", "-+", "--"),
    YY: ("++", "+-", "-+", "--"),
    ZZ: ("00", "01", "10", "11"),
}

_SQ2 = np.sqrt(2.0)
_LOCAL_BASES = {
    XX: (np.array([1, 1], dtype=complex) / _SQ2, np.array([1, -1], dtype=complex) / _SQ2),
    # y eigenbasis pinned to |y+/-> = (|0> +/- i|1>)/sqrt(2)
    YY: (np.array([1, 1j], dtype=complex) / _SQ2, np.array([1, -1j], dtype=complex) / _SQ2),
    ZZ: (np.array([1, 0], dtype=complex), np.array([0, 1], dtype=complex)),
}

PROB_SUM_ATOL = 1e-9
PROB_ENTRY_ATOL = 1e-9
_RENORM_BAND = 1e-12


@dataclass(frozen=True)
class MeasurementSetting:
    """One local two-qubit measurement: label, rank-1 projectors, outcome names."""

    label: str
    projectors: np.ndarray  # (4, 4, 4), outcome index first
    outcome_labels: tuple[str, str, str, str]


@lru_cache(maxsize=None)
def setting(label: str) -> MeasurementSetting:
    """The measurement setting for ``label`` in {"XX", "YY", "ZZ"}."""
    if label not in SETTING_LABELS:
        raise DomainError(f"unknown setting label {label!r}")
    va, vb = _LOCAL_BASES[label]
    kets = [np.kron(a, b) for a in (va, vb) for b in (va, vb)]
    projs = np.stack([np.outer(k, k.conj()) for k in kets])
    projs.setflags(write=False)
    return MeasurementSetting(label, projs, _OUTCOME_LABELS[label])


@dataclass(frozen=True)
class OutcomeDistribution:
    """Four outcome probabilities for one setting, in outcome-label order."""

    setting: str
    p: np.ndarray

    def __post_init__(self):
        if self.setting not in SETTING_LABELS:
            raise DomainError(f"unknown setting label {self.setting!r}")
        p = np.asarray(self.p, dtype=float).reshape(4)
        if np.any(p < -PROB_ENTRY_ATOL) or np.any(p > 1.0 + PROB_ENTRY_ATOL):
            raise DomainError(
                f"probability outside [-1e-9, 1+1e-9] for setting {self.setting}: {p}")
        p = np.clip(p, 0.0, 1.0)
        total = float(p.sum())
        if abs(total - 1.0) > PROB_SUM_ATOL:
            raise DomainError(
                f"probabilities for {self.setting} sum to {total!r}, violating |sum-1| <= 1e-9")
        if abs(total - 1.0) > _RENORM_BAND:
            p = p / total
        p.setflags(write=False)
        object.__setattr__(self, "p", p)


def probabilities(rho: DensityMatrix, s: MeasurementSetting | str) -> OutcomeDistribution:
    """Outcome probabilities p_i = Tr(rho Pi_i) for one setting."""
    if isinstance(s, str):
        s = setting(s)
    p = np.real(np.einsum("kab,ba->k", s.projectors, rho.matrix))
    return OutcomeDistribution(s.label, p)


def probabilities_stack(rhos: np.ndarray, label: str) -> np.ndarray:
    """Raw probabilities (..., 4) of a stack of state matrices, no clamping."""
    return np.real(np.einsum("kab,...ba->...k", setting(label).projectors, rhos))


@dataclass(frozen=True)
class ScrambledData:
    """Per-setting multisets of outcome probabilities, stored sorted descending."""

    multisets: Mapping[str, np.ndarray]

    def __post_init__(self):
        canon = {}
        for label in SETTING_LABELS:
            if label not in self.multisets:
                continue
            m = np.sort(np.asarray(self.multisets[label], dtype=float).reshape(4))[::-1].copy()
            if abs(float(m.sum()) - 1.0) > PROB_SUM_ATOL:
                raise DomainError(f"multiset for {label} does not sum to 1")
            m.setflags(write=False)
            canon[label] = m
        unknown = set(self.multisets) - set(SETTING_LABELS)
        if unknown:
            raise DomainError(f"unknown setting labels {sorted(unknown)}")
        object.__setattr__(self, "multisets", canon)

    @property
    def settings(self) -> tuple[str, ...]:
        return tuple(label for label in SETTING_LABELS if label in self.multisets)

    def multiset(self, label: str) -> np.ndarray:
        try:
            return self.multisets[label]
        except KeyError:
            raise MissingSetting(label) from None


def scramble(dists: Iterable[OutcomeDistribution]) -> ScrambledData:
    """Forget outcome labels, keeping one sorted multiset per setting."""
    multisets: dict[str, np.ndarray] = {}
    for d in dists:
        if d.setting in multisets:
            raise DuplicateSetting(f"two distributions given for setting {d.setting}")
        multisets[d.setting] = d.p
    return ScrambledData(multisets)


def scramble_state(rho: DensityMatrix, labels: Iterable[str] = (XX, ZZ)) -> ScrambledData:
    """Measure ``rho`` in the given settings and scramble the outcomes."""
    return scramble([probabilities(rho, lab) for lab in labels])


def scramble_equivalent(d1: ScrambledData, d2: ScrambledData, tol: float = 1e-9) -> bool:
    """Whether two scrambled-data objects agree elementwise within ``tol``."""
    if d1.settings != d2.settings:
        raise SettingMismatch(f"settings {d1.settings} vs {d2.settings}")
    return all(
        bool(np.all(np.abs(d1.multiset(lab) - d2.multiset(lab)) <= tol))
        for lab in d1.settings
    )


# ---------------------------------------------------------------------------
# Permutation machinery.
# ---------------------------------------------------------------------------

Perm = tuple[int, int, int, int]
_IDENTITY: Perm = (0, 1, 2, 3)


@dataclass(frozen=True, order=True)
class PermutationPair:
    """An outcome relabeling: one permutation for XX, one for ZZ."""

    pi_x: Perm
    pi_z: Perm

    def __post_init__(self):
        for name, pi in (("pi_x", self.pi_x), ("pi_z", self.pi_z)):
            if sorted(pi) != [0, 1, 2, 3]:
                raise DomainError(f"{name} = {pi} is not a permutation of 0..3")


def _compose(a: Perm, b: Perm) -> Perm:
    # (a o b)(i) = a[b[i]]
    return (a[b[0]], a[b[1]], a[b[2]], a[b[3]])


def _induced_permutation(u: np.ndarray, label: str) -> Perm:
    """Outcome permutation sigma with U^dag Pi_i U = Pi_sigma(i)."""
    projs = setting(label).projectors
    conj = np.einsum("ab,kbc,cd->kad", u.conj().T, projs, u)
    perm = []
    for i in range(4):
        match = [j for j in range(4) if np.max(np.abs(conj[i] - projs[j])) < 1e-9]
        if len(match) != 1:
            raise ArithmeticError(f"relabeling does not permute {label} projectors")
        perm.append(match[0])
    return tuple(perm)  # type: ignore[return-value]


@lru_cache(maxsize=1)
def relabeling_group() -> tuple[PermutationPair, ...]:
    """The group of physical outcome relabelings, computed numerically.

    Generated by the induced actions of sigma_x (x) 1, sigma_z (x) 1,
    1 (x) sigma_x, 1 (x) sigma_z and the qubit swap on the XX and ZZ
    outcome sets.  Its order is 32.
    """
    swap = np.zeros((4, 4), dtype=complex)
    swap[0, 0] = swap[3, 3] = 1
    swap[1, 2] = swap[2, 1] = 1
    gens = [np.kron(SIGMA_X, I2), np.kron(SIGMA_Z, I2),
            np.kron(I2, SIGMA_X), np.kron(I2, SIGMA_Z), swap]
    gen_pairs = [(_induced_permutation(u, XX), _induced_permutation(u, ZZ)) for u in gens]
    group = {(_IDENTITY, _IDENTITY)}
    frontier = [(_IDENTITY, _IDENTITY)]
    while frontier:
        nxt = []
        for gx, gz in frontier:
            for hx, hz in gen_pairs:
                prod = (_compose(hx, gx), _compose(hz, gz))
                if prod not in group:
                    group.add(prod)
                    nxt.append(prod)
        frontier = nxt
    return tuple(sorted(PermutationPair(gx, gz) for gx, gz in group))


@lru_cache(maxsize=1)
def canonical_permutations() -> tuple[PermutationPair, ...]:
    """Lexicographically minimal representatives of the 18 relabeling orbits.

    Two assignment pairs are equivalent when they differ by right-composition
    with a relabeling-group element; equivalent assignments yield feasibility
    problems related by a separability-preserving transformation.
    """
    group = [(g.pi_x, g.pi_z) for g in relabeling_group()]
    reps: set[tuple[Perm, Perm]] = set()
    for ax in itertools.permutations(range(4)):
        for az in itertools.permutations(range(4)):
            orbit_min = min((_compose(ax, hx), _compose(az, hz)) for hx, hz in group)
            reps.add(orbit_min)
    return tuple(PermutationPair(px, pz) for px, pz in sorted(reps))


def apply_permutation(d: ScrambledData, pair: PermutationPair) -> list[OutcomeDistribution]:
    """Assign the sorted multiset entries to outcome labels according to ``pair``.

    Outcome ``i`` of XX receives the ``pair.pi_x[i]``-th largest probability,
    and likewise for ZZ.
    """
    mx = d.multiset(XX)
    mz = d.multiset(ZZ)
    return [
        OutcomeDistribution(XX, mx[list(pair.pi_x)]),
        OutcomeDistribution(ZZ, mz[list(pair.pi_z)]),
    ]
