"""
Golden-rule emission of the dressed atom-cavity states into a reservoir.

A photon leaks out through the cavity operator ``a``; the specific rate into
final state ``f`` is ``Gamma |<f|a|i>|^2 P(omega_if)`` and the emitted spectrum
is a sum of Lorentzians of common width ``Gamma_total`` shifted by the
reservoir-induced ``Delta``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from .errors import DegenerateChannelsWarning, DivisionByZeroChannel, ParameterError
from .formfactor import FormFactor
from .model import ModelParams, StateLabel, canonical, jc_eigenpair, manifold
from .perturbation import energy_with_correction, state_orders

GROUPS = ("JC", "AS", "CR")
_GROUP_OF_OFFSET = {1: "JC", 0: "AS", 2: "AS", 3: "CR"}


@dataclass(frozen=True)
class TransitionChannel:
    initial: StateLabel
    final: StateLabel
    frequency: float
    a_sq: float
    rate: float
    group: str

    @property
    def key(self) -> str:
        return f"{self.final.n}_{'+' if self.final.s > 0 else '-'}"


@dataclass
class EmissionSpectrum:
    grid: np.ndarray
    values: np.ndarray
    shift: float
    total_rate: float
    channels: List[TransitionChannel] = field(default_factory=list)
    per_channel: Dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def normalized(self) -> np.ndarray:
        peak = self.values.max() if self.values.size else 0.0
        return self.values / peak if peak > 0 else np.zeros_like(self.values)


def group_of(initial: StateLabel, final: StateLabel) -> Optional[str]:
    return _GROUP_OF_OFFSET.get(initial.n - final.n)


def zeroth_a(final: StateLabel, initial: StateLabel, p: ModelParams) -> float:
    """``<f(0)|a|i(0)>``: nonzero only between adjacent JC manifolds."""
    n = initial.n
    if final.n != n - 1:
        return 0.0
    i, f = jc_eigenpair(initial, p), jc_eigenpair(final, p)
    return math.sqrt(n) * i.A * f.A + math.sqrt(n - 1) * i.B * f.B


def a_matrix_element_orders(final: StateLabel, initial: StateLabel, p: ModelParams):
    """
    ``<f|a|i>`` split into contributions of order 0, 1 and 2 in the couplings.

    Each state is expanded through second order; a product of an order-``p``
    piece of ``<f|`` and an order-``q`` piece of ``|i>`` contributes to order ``p+q``.
    """
    final, initial = canonical(final, p), canonical(initial, p)
    pieces = []
    for lab in (final, initial):
        first, second = state_orders(lab, p)
        pieces.append(({lab: 1.0}, first, second))
    f_parts, i_parts = pieces
    out = [0.0, 0.0, 0.0]
    for order in range(3):
        for pf in range(order + 1):
            qi = order - pf
            for kf, cf in f_parts[pf].items():
                for ki, ci in i_parts[qi].items():
                    if kf.n == ki.n - 1:
                        out[order] += cf * ci * zeroth_a(kf, ki, p)
    return tuple(out)


def a_matrix_element_sq(final: StateLabel, initial: StateLabel, p: ModelParams,
                        expansion: str = "amplitude") -> float:
    """
    ``|<f|a|i>|^2`` from the second-order state expansions.

    With ``<f|a|i> = M0 + M1 + M2 + ...`` (orders in the couplings):

    ``expansion="amplitude"`` (default)
        ``(M0 + M1 + M2)^2``: the matrix element is kept through second order,
        then squared. Resonant manifolds are split by only ``2 sqrt(n) g_R``, so
        second-order amplitudes on the partner state are effectively first
        order; this form keeps them and tracks exact diagonalization closely.
    ``expansion="square"``
        ``M0^2 + 2 M0 M1 + M1^2 + 2 M0 M2``: strict second order in the square.
        Can dip below zero outside the perturbative regime and is clipped at 0.
    """
    m0, m1, m2 = a_matrix_element_orders(final, initial, p)
    if expansion == "amplitude":
        return (m0 + m1 + m2) ** 2
    if expansion == "square":
        return max(m0 * m0 + 2 * m0 * m1 + m1 * m1 + 2 * m0 * m2, 0.0)
    raise ParameterError(f"unknown expansion {expansion!r}")


def candidate_finals(initial: StateLabel, p: ModelParams) -> List[StateLabel]:
    """Final labels reachable by one emission: manifolds n, n-1, n-2, n-3 (excluding ``initial``)."""
    initial = canonical(initial, p)
    out = []
    for dn in (0, 1, 2, 3):
        out.extend(lab for lab in manifold(initial.n - dn, p) if lab != initial)
    return out


def second_order_energy(label: StateLabel, p: ModelParams) -> float:
    return energy_with_correction(label, p).energy


def enumerate_channels(initial: StateLabel, p: ModelParams, ff: FormFactor, Gamma: float,
                       warn: bool = True, expansion: str = "amplitude") -> List[TransitionChannel]:
    """
    All downward decay channels of ``initial`` with nonzero second-order ``|<f|a|i>|^2``.

    Channels are ordered by final label (manifold descending, ``+`` before ``-``).
    Emits :class:`DegenerateChannelsWarning` when two line centres are closer than
    the total rate.
    """
    if not Gamma > 0:
        raise ParameterError("base rate Gamma must be positive")
    initial = canonical(initial, p)
    e_i = second_order_energy(initial, p)
    channels = []
    for fin in candidate_finals(initial, p):
        freq = e_i - second_order_energy(fin, p)
        if freq <= 0:
            continue
        a_sq = a_matrix_element_sq(fin, initial, p, expansion)
        if a_sq <= 0.0:
            continue
        rate = Gamma * a_sq * float(ff(freq))
        channels.append(TransitionChannel(initial, fin, freq, a_sq, rate, group_of(initial, fin)))
    if warn:
        check_overlaps(channels)
    return channels


def check_overlaps(channels: Sequence[TransitionChannel]) -> List[tuple]:
    width = total_rate(channels)
    ordered = sorted(channels, key=lambda c: c.frequency)
    close = [(a, b) for a, b in zip(ordered, ordered[1:]) if b.frequency - a.frequency < width]
    for c1, c2 in close:
        warnings.warn(
            f"channels {c1.initial}->{c1.final} and {c2.initial}->{c2.final} lie within the total "
            f"linewidth {width:.3e}; interference is neglected", DegenerateChannelsWarning, stacklevel=3)
    return close


def total_rate(channels: Sequence[TransitionChannel]) -> float:
    return float(sum(c.rate for c in channels))


def group_rates(channels: Sequence[TransitionChannel]) -> Dict[str, float]:
    out = {g: 0.0 for g in GROUPS}
    for c in channels:
        out[c.group] += c.rate
    return out


def lamb_shift(channels: Sequence[TransitionChannel], ff: FormFactor, Gamma: float) -> float:
    """
    Reservoir-induced line shift ``(Gamma/2pi) sum |<f|a|i>|^2 PV int P(w)/(w - w_if) dw``.

    Raises
    ------
    DivergentShift
        If the form factor has no cutoff and its integral diverges.
    """
    return Gamma / (2 * math.pi) * sum(c.a_sq * ff.pv_integral(c.frequency) for c in channels)


def lorentzian_lines(omega, channels: Sequence[TransitionChannel], ff: FormFactor, Gamma: float,
                     shift: float = 0.0):
    """Per-channel spectral densities, shape ``(len(channels), len(omega))``."""
    w = np.asarray(omega, dtype=float)
    width = total_rate(channels)
    out = np.empty((len(channels), w.size))
    for j, c in enumerate(channels):
        out[j] = (Gamma / (2 * math.pi)) * c.a_sq * float(ff(c.frequency)) / (
            (w - c.frequency - shift) ** 2 + width ** 2 / 4.0)
    return out


def spectrum(initial: StateLabel, p: ModelParams, ff: FormFactor, Gamma: float, grid,
             include_shift: bool = False) -> EmissionSpectrum:
    """
    Emission spectrum of ``initial`` on ``grid``.

    The line shift is included only on request (``include_shift=True``); it
    requires a form factor with a convergent principal-value integral.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ParameterError("spectrum grid must be a non-empty 1D array")
    if grid.size > 1 and np.any(np.diff(grid) <= 0):
        raise ParameterError("spectrum grid must be strictly increasing")
    channels = enumerate_channels(initial, p, ff, Gamma)
    shift = lamb_shift(channels, ff, Gamma) if include_shift else 0.0
    lines = lorentzian_lines(grid, channels, ff, Gamma, shift)
    values = lines.sum(axis=0) if channels else np.zeros_like(grid)
    return EmissionSpectrum(grid, values, shift, total_rate(channels), channels,
                            {c.key: lines[j] for j, c in enumerate(channels)})


def weight_ratio(c1: TransitionChannel, c2: TransitionChannel) -> float:
    if c2.rate == 0:
        raise DivisionByZeroChannel(f"channel {c2.initial}->{c2.final} has zero rate")
    return c1.rate / c2.rate


def intramanifold_frequency(n: int, p: ModelParams) -> float:
    """Frequency of the ``|n+> -> |n->`` line (second-order energies)."""
    return second_order_energy(StateLabel(n, 1), p) - second_order_energy(StateLabel(n, -1), p)
