"""
Emission spectra of a two-level emitter with a permanent dipole in a cavity.

The Rabi model extended by a permanent-dipole term is treated perturbatively
around the Jaynes-Cummings ladder; golden-rule rates and spectra follow, with
exact diagonalization available as a check.
"""

__version__ = "0.1.0"

from .model import ModelParams, StateLabel, jc_eigenpair, jc_energy, jc_crossing_scan  # noqa: E402
from .perturbation import energy_with_correction, perturbed_state, state_norm  # noqa: E402
from .formfactor import ConstantFormFactor, LorentzianFormFactor, PowerLawFormFactor, make_form_factor  # noqa: E402
from .emission import enumerate_channels, spectrum, total_rate, group_rates, lamb_shift  # noqa: E402
from .units import coupling_from_dipole  # noqa: E402

__all__ = [
    "ModelParams", "StateLabel", "jc_eigenpair", "jc_energy", "jc_crossing_scan",
    "energy_with_correction", "perturbed_state", "state_norm",
    "ConstantFormFactor", "LorentzianFormFactor", "PowerLawFormFactor", "make_form_factor",
    "enumerate_channels", "spectrum", "total_rate", "group_rates", "lamb_shift",
    "coupling_from_dipole",
]
