"""Conversion of microscopic dipole parameters into couplings."""

import math

from scipy.constants import epsilon_0, hbar

from .errors import ParameterError

_FACTOR = {"offdiagonal": 2.0, "diagonal": 8.0}


def coupling_from_dipole(dipole: float, omega_c: float, mode_volume: float, kind: str = "offdiagonal") -> float:
    """
    Coupling constant in units of ``omega_c`` from a dipole matrix element.

    Parameters
    ----------
    dipole : float
        Dipole component along the cavity polarization, in C m. Only its
        magnitude enters.
    omega_c : float
        Cavity angular frequency, rad/s.
    mode_volume : float
        Cavity mode volume, m^3.
    kind : {"offdiagonal", "diagonal"}
        ``offdiagonal`` gives ``g_R`` from the transition dipole;
        ``diagonal`` gives ``g_S`` (or ``g_S_prime``) from a permanent dipole.

    Notes
    -----
    ``g = |d| sqrt(hbar omega_c / (k eps0 V)) / hbar`` with ``k = 2`` or ``8``;
    hbar and eps0 are the CODATA values shipped with scipy.
    """
    if kind not in _FACTOR:
        raise ParameterError(f"kind must be one of {sorted(_FACTOR)}")
    if not (omega_c > 0 and mode_volume > 0):
        raise ParameterError("omega_c and mode_volume must be positive")
    g = abs(dipole) * math.sqrt(hbar * omega_c / (_FACTOR[kind] * epsilon_0 * mode_volume)) / hbar
    return g / omega_c
