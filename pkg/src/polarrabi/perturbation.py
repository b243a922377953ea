"""
Second-order Rayleigh-Schroedinger corrections to the JC ladder.

The perturbation is ``V = g_R (s+ a^dag + s- a) + g_S (sz + 1)(a + a^dag)``.
It couples manifold ``n`` to ``n +- 1`` through ``g_S`` and to ``n +- 2``
through ``g_R``; it has no matrix elements inside a manifold, so the first-order
energy shift vanishes and corrected states have support on ``n-4 .. n+4``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

from .errors import NearDegeneracy, UnsupportedParameter
from .model import ModelParams, StateLabel, canonical, jc_eigenpair, jc_energy, manifold

#: energy denominators below this (units of omega_c) abort the expansion
DEGENERACY_TOL = 1e-6

_COUPLED_OFFSETS = (-2, -1, 1, 2)


@dataclass(frozen=True)
class EnergyCorrection:
    label: StateLabel
    e0: float
    e2: float

    @property
    def energy(self) -> float:
        return self.e0 + self.e2


@dataclass
class PerturbedState:
    """Amplitudes of a corrected state over zeroth-order JC labels."""

    label: StateLabel
    amplitudes: Dict[StateLabel, float] = field(default_factory=dict)

    def __getitem__(self, label: StateLabel) -> float:
        return self.amplitudes.get(label, 0.0)

    @property
    def central(self) -> float:
        return self.amplitudes[self.label]

    def norm(self) -> float:
        return math.sqrt(sum(a * a for a in self.amplitudes.values()))

    def manifolds(self) -> List[int]:
        return sorted({lab.n for lab, a in self.amplitudes.items() if a != 0.0})


def _check_supported(p: ModelParams):
    if p.g_S_prime != 0.0:
        raise UnsupportedParameter(
            "perturbative expressions assume a vanishing ground-state permanent dipole (g_S_prime = 0)")


def v_matrix_element(m_label: StateLabel, n_label: StateLabel, p: ModelParams) -> float:
    """``<m_a| V |n_s>`` between zeroth-order JC states (angular frequency)."""
    _check_supported(p)
    return _v(canonical(m_label, p), canonical(n_label, p), p)


def _v(ml: StateLabel, nl: StateLabel, p: ModelParams) -> float:
    m, n = ml.n, nl.n
    d = m - n
    if d == 2:
        return p.g_R * math.sqrt(n + 1) * jc_eigenpair(nl, p).A * jc_eigenpair(ml, p).B
    if d == -2:
        return p.g_R * math.sqrt(n - 1) * jc_eigenpair(nl, p).B * jc_eigenpair(ml, p).A
    if d == 1:
        return 2.0 * p.g_S * math.sqrt(n) * jc_eigenpair(ml, p).B * jc_eigenpair(nl, p).B
    if d == -1:
        return 2.0 * p.g_S * math.sqrt(n - 1) * jc_eigenpair(ml, p).B * jc_eigenpair(nl, p).B
    return 0.0


def coupled_labels(label: StateLabel, p: ModelParams) -> List[StateLabel]:
    """Labels with a possibly nonzero matrix element of V to ``label``."""
    out = []
    for d in _COUPLED_OFFSETS:
        out.extend(manifold(label.n + d, p))
    return out


def _ratio(num: float, label: StateLabel, other: StateLabel, p: ModelParams, e_n: float) -> float:
    """``num / (E_label - E_other)`` with the degeneracy guard; zero numerators never fail."""
    if num == 0.0:
        return 0.0
    gap = e_n - jc_energy(other, p)
    if abs(gap) < DEGENERACY_TOL * p.omega_c:
        raise NearDegeneracy(
            f"levels {label} and {other} are degenerate within {DEGENERACY_TOL:g} omega_c "
            f"(gap {gap:.3e}); perturbation theory breaks down", label, other, gap)
    return num / gap


def energy_with_correction(label: StateLabel, p: ModelParams) -> EnergyCorrection:
    """
    Second-order energy ``sum_k |V_kn|^2 / (E_n - E_k)`` of ``label``.

    Raises
    ------
    NearDegeneracy
        If ``label`` is degenerate with a level it is coupled to.
    """
    _check_supported(p)
    label = canonical(label, p)
    e0 = jc_energy(label, p)
    e2 = 0.0
    for k in coupled_labels(label, p):
        v = _v(k, label, p)
        e2 += v * _ratio(v, label, k, p, e0)
    return EnergyCorrection(label, e0, e2)


def state_orders(label: StateLabel, p: ModelParams) -> Tuple[Dict[StateLabel, float], Dict[StateLabel, float]]:
    """
    First- and second-order amplitude corrections of ``|label>``, kept separate.

    First order: ``c1_k = V_kn / E_nk``. Second order: off the central label
    ``c2_k = sum_l V_kl V_ln / (E_nk E_nl)`` (the ``V_nn`` term vanishes), and on it
    the normalization term ``-1/2 sum_k c1_k^2``.
    """
    _check_supported(p)
    label = canonical(label, p)
    e_n = jc_energy(label, p)
    first: Dict[StateLabel, float] = {}
    for k in coupled_labels(label, p):
        c = _ratio(_v(k, label, p), label, k, p, e_n)
        if c != 0.0:
            first[k] = c
    second: Dict[StateLabel, float] = {}
    for l_lab, c_l in first.items():
        for k in coupled_labels(l_lab, p):
            if k == label:
                continue
            term = _ratio(_v(k, l_lab, p) * c_l, label, k, p, e_n)
            if term != 0.0:
                second[k] = second.get(k, 0.0) + term
    second[label] = second.get(label, 0.0) - 0.5 * sum(c * c for c in first.values())
    return first, second


def perturbed_state(label: StateLabel, p: ModelParams) -> PerturbedState:
    """
    Corrected state ``|n_s>`` through second order, not renormalized.

    The central amplitude is ``1 - 1/2 sum (V/E)^2``; the remaining amplitudes
    span manifolds ``n-4 .. n+4``.
    """
    label = canonical(label, p)
    first, second = state_orders(label, p)
    amps = {label: 1.0}
    for part in (first, second):
        for k, c in part.items():
            amps[k] = amps.get(k, 0.0) + c
    return PerturbedState(label, amps)


def state_norm(label: StateLabel, p: ModelParams) -> float:
    """Euclidean norm of the second-order state; far from 1 flags breakdown."""
    return perturbed_state(label, p).norm()


def state_norm_or_inf(label: StateLabel, p: ModelParams) -> Tuple[float, bool]:
    """``(norm, breakdown)`` for sweeps: a degenerate denominator gives ``(inf, True)``."""
    try:
        return state_norm(label, p), False
    except NearDegeneracy:
        return math.inf, True
