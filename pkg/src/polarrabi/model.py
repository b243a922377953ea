"""
Model parameters and the Jaynes-Cummings dressed-state ladder.

All energies are angular frequencies in units of the cavity frequency
(``omega_c = 1`` by default); the reduced Planck constant never appears.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import bisect

from .errors import NoCrossingFound, ParameterError


@dataclass(frozen=True)
class ModelParams:
    """
    Frequencies and couplings of the polar two-level system + cavity.

    Parameters
    ----------
    omega_c : float
        Cavity angular frequency.
    omega_a : float
        Atomic transition angular frequency.
    g_R : float
        Coupling of the transition dipole (rotating and counter-rotating terms).
    g_S : float
        Diagonal coupling through the excited-state permanent dipole.
    g_S_prime : float
        Diagonal coupling through the ground-state permanent dipole. Only the
        exact-diagonalization oracle supports a nonzero value.
    unit_scale : float
        Physical angular frequency (rad/s) of one working unit. Used only when
        converting results for output.
    """

    omega_c: float = 1.0
    omega_a: float = 1.0
    g_R: float = 0.0
    g_S: float = 0.0
    g_S_prime: float = 0.0
    unit_scale: float = 1.0

    def __post_init__(self):
        if not (self.omega_c > 0 and self.omega_a > 0):
            raise ParameterError("omega_c and omega_a must be positive")
        if self.g_R < 0 or self.g_S < 0:
            raise ParameterError("g_R and g_S must be nonnegative")
        if not self.unit_scale > 0:
            raise ParameterError("unit_scale must be positive")

    @property
    def detuning(self) -> float:
        """omega_c - omega_a"""
        return self.omega_c - self.omega_a

    def with_couplings(self, g_R: Optional[float] = None, g_S: Optional[float] = None) -> "ModelParams":
        kw = {}
        if g_R is not None:
            kw["g_R"] = g_R
        if g_S is not None:
            kw["g_S"] = g_S
        return replace(self, **kw)

    def to_physical(self, value):
        return value * self.unit_scale


@dataclass(frozen=True, order=True)
class StateLabel:
    """Dressed state ``|n_s>``: manifold index ``n`` and branch ``s = +1/-1``."""

    n: int
    s: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 0:
            raise ParameterError(f"manifold index must be a nonnegative integer, got {self.n!r}")
        if self.s not in (1, -1):
            raise ParameterError(f"branch must be +1 or -1, got {self.s!r}")

    def __str__(self):
        return f"{self.n}{'+' if self.s > 0 else '-'}"

    @classmethod
    def parse(cls, text: str) -> "StateLabel":
        """Parse ``"10+"``, ``"10,-"`` or ``"10 -1"``."""
        t = text.strip().replace(",", " ")
        if t.endswith(("+", "-")) and " " not in t:
            n, s = t[:-1], t[-1]
        else:
            parts = t.split()
            if len(parts) != 2:
                raise ParameterError(f"cannot parse state label {text!r}")
            n, s = parts
        sign = {"+": 1, "-": -1, "+1": 1, "-1": -1, "1": 1}.get(s.strip())
        if sign is None:
            raise ParameterError(f"cannot parse branch in state label {text!r}")
        try:
            return cls(int(n), sign)
        except ValueError as exc:
            raise ParameterError(f"cannot parse state label {text!r}") from exc


@dataclass(frozen=True)
class JCEigenpair:
    label: StateLabel
    energy: float
    A: float  # amplitude on |g; n>
    B: float  # amplitude on |e; n-1>


def ground_branch(p: ModelParams) -> int:
    """Branch sign used for the one-dimensional n = 0 manifold."""
    return 1 if p.omega_c > p.omega_a else -1


def canonical(label: StateLabel, p: ModelParams) -> StateLabel:
    if label.n == 0:
        return StateLabel(0, ground_branch(p))
    return label


def manifold(n: int, p: ModelParams) -> List[StateLabel]:
    """Valid labels of manifold ``n`` (empty for n < 0)."""
    if n < 0:
        return []
    if n == 0:
        return [StateLabel(0, ground_branch(p))]
    return [StateLabel(n, 1), StateLabel(n, -1)]


def labels_between(n_lo: int, n_hi: int, p: ModelParams) -> Iterator[StateLabel]:
    for n in range(max(n_lo, 0), n_hi + 1):
        yield from manifold(n, p)


def _half_splitting(n: int, p: ModelParams) -> float:
    return math.sqrt(p.detuning ** 2 / 4.0 + n * p.g_R ** 2)


def jc_energy(label: StateLabel, p: ModelParams) -> float:
    """Zeroth-order (Jaynes-Cummings) energy of ``label``."""
    if label.n == 0:
        return -p.omega_a / 2.0
    return p.omega_c * (label.n - 0.5) + label.s * _half_splitting(label.n, p)


def jc_eigenpair(label: StateLabel, p: ModelParams) -> JCEigenpair:
    """
    Energy and amplitudes ``A|g;n> + B|e;n-1>`` of a JC dressed state.

    The amplitudes follow the ratio ``A : B = (E - omega_c (n-1) - omega_a/2) : g_R sqrt(n)``
    with ``B >= 0``. They are evaluated through the mixing angle, which is free of
    cancellation in the far-detuned branch and has a well-defined limit at
    ``g_R = 0`` (resonant degenerate limit taken as ``A = s/sqrt(2)``, ``B = 1/sqrt(2)``).
    """
    energy = jc_energy(label, p)
    if label.n == 0:
        return JCEigenpair(canonical(label, p), energy, 1.0, 0.0)
    off = p.g_R * math.sqrt(label.n)
    if off == 0.0 and p.detuning == 0.0:
        theta = math.pi / 4.0
    else:
        theta = 0.5 * math.atan2(2.0 * off, p.detuning)
    if label.s > 0:
        A, B = math.cos(theta), math.sin(theta)
    else:
        A, B = -math.sin(theta), math.cos(theta)
    return JCEigenpair(label, energy, A, B)


def ladder_energies(p: ModelParams, n_max: int, n_min: int = 0) -> Tuple[List[StateLabel], np.ndarray]:
    labels = list(labels_between(n_min, n_max, p))
    return labels, np.array([jc_energy(lab, p) for lab in labels])


def _ladder_vs_coupling(p: ModelParams, labels: Sequence[StateLabel], g: np.ndarray) -> np.ndarray:
    """Energies with shape (len(g), len(labels)), vectorized over g_R."""
    out = np.empty((g.size, len(labels)))
    d2 = p.detuning ** 2 / 4.0
    for j, lab in enumerate(labels):
        if lab.n == 0:
            out[:, j] = -p.omega_a / 2.0
        else:
            out[:, j] = p.omega_c * (lab.n - 0.5) + lab.s * np.sqrt(d2 + lab.n * g ** 2)
    return out


def jc_crossing_scan(p_template: ModelParams, g_range: Tuple[float, float], n_max: int = 10,
                     n_min: int = 0, points: int = 2000, xtol: float = 1e-4) -> float:
    """
    Smallest g_R in ``g_range`` at which two JC levels with ``n_min <= n <= n_max`` cross.

    The ladder is sampled on a uniform grid of ``points`` values; the first grid
    interval where any pairwise gap changes sign is refined by bisection to ``xtol``.

    Raises
    ------
    NoCrossingFound
        If no pairwise gap changes sign over the range.
    """
    g_lo, g_hi = float(g_range[0]), float(g_range[1])
    if not (0 <= g_lo < g_hi):
        raise ParameterError("g_range must be an increasing interval of nonnegative couplings")
    if n_max < 2:
        raise ParameterError("n_max must be at least 2")
    labels = list(labels_between(n_min, n_max, p_template))
    g = np.linspace(g_lo, g_hi, points)
    E = _ladder_vs_coupling(p_template, labels, g)
    iu, ju = np.triu_indices(len(labels), k=1)
    gaps = E[:, iu] - E[:, ju]
    change = gaps[:-1] * gaps[1:] < 0
    rows = np.flatnonzero(change.any(axis=1))
    if rows.size == 0:
        raise NoCrossingFound(f"no level crossing for n <= {n_max} in g_R range {g_range}")
    k = rows[0]
    best = math.inf
    for pair in np.flatnonzero(change[k]):
        a, b = labels[iu[pair]], labels[ju[pair]]

        def gap(x, a=a, b=b):
            q = p_template.with_couplings(g_R=x)
            return jc_energy(a, q) - jc_energy(b, q)

        best = min(best, bisect(gap, g[k], g[k + 1], xtol=xtol))
    return best
