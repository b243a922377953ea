"""
Reservoir form factors P(omega) and their principal-value integrals.

Every form factor satisfies ``P(omega_c) = 1`` and vanishes for ``omega <= 0``
(no emission below threshold). ``pv_integral(w0)`` returns
``PV int_0^cutoff P(w) / (w - w0) dw``, the frequency integral entering the
reservoir-induced line shift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate

from .errors import DivergentShift, ParameterError


def principal_value(f: Callable[[float], float], pole: float, lo: float, hi: float,
                    points: Sequence[float] = (), epsabs: float = 1e-13, epsrel: float = 1e-11) -> float:
    """
    ``PV int_lo^hi f(x) / (x - pole) dx`` by adaptive quadrature.

    A symmetric interval ``[pole - d, pole + d]`` around the pole is folded onto
    ``int_0^d (f(pole + u) - f(pole - u)) / u du``, which is regular; the rest is
    integrated directly. ``hi`` may be ``inf``.
    """
    if not lo < pole < hi:
        # no pole inside: ordinary integral
        val, _ = integrate.quad(lambda x: f(x) / (x - pole), lo, hi, epsabs=epsabs, epsrel=epsrel, limit=500)
        return val
    d = min(pole - lo, hi - pole) if math.isfinite(hi) else pole - lo

    def folded(u):
        if u == 0.0:
            u = 1e-300
        return (f(pole + u) - f(pole - u)) / u

    inner_pts = sorted({abs(x - pole) for x in points if 0 < abs(x - pole) < d})
    total, _ = integrate.quad(folded, 0.0, d, points=inner_pts or None, epsabs=epsabs, epsrel=epsrel, limit=500)
    if pole - d > lo:
        pts = [x for x in points if lo < x < pole - d] or None
        val, _ = integrate.quad(lambda x: f(x) / (x - pole), lo, pole - d, points=pts,
                                epsabs=epsabs, epsrel=epsrel, limit=500)
        total += val
    if pole + d < hi:
        if math.isfinite(hi):
            pts = [x for x in points if pole + d < x < hi] or None
            val, _ = integrate.quad(lambda x: f(x) / (x - pole), pole + d, hi, points=pts,
                                    epsabs=epsabs, epsrel=epsrel, limit=500)
        else:
            # split so that quad sees any narrow feature before the infinite tail
            edge = max([pole + d] + [x for x in points if x > pole + d]) + 1.0
            val, _ = integrate.quad(lambda x: f(x) / (x - pole), pole + d, edge,
                                    points=[x for x in points if pole + d < x < edge] or None,
                                    epsabs=epsabs, epsrel=epsrel, limit=500)
            tail, _ = integrate.quad(lambda x: f(x) / (x - pole), edge, np.inf, epsabs=epsabs, epsrel=epsrel,
                                     limit=500)
            val += tail
        total += val
    return total


@dataclass(frozen=True)
class FormFactor:
    """Base class. ``cutoff`` bounds the principal-value integral (``None`` = unbounded)."""

    omega_c: float = 1.0
    cutoff: Optional[float] = None

    kind = "base"

    def shape(self, omega):
        raise NotImplementedError

    def __call__(self, omega):
        w = np.asarray(omega, dtype=float)
        out = np.where(w > 0, self.shape(np.where(w > 0, w, self.omega_c)), 0.0)
        return float(out) if out.ndim == 0 else out

    def _needs_cutoff(self) -> bool:
        return True

    def _upper(self) -> float:
        if self.cutoff is None:
            if self._needs_cutoff():
                raise DivergentShift(f"{self.kind} form factor needs a finite cutoff for the principal-value integral")
            return math.inf
        return float(self.cutoff)

    def pv_integral(self, w0: float) -> float:
        """``PV int_0^cutoff P(w)/(w - w0) dw`` by quadrature."""
        return self.pv_quadrature(w0)

    def pv_quadrature(self, w0: float) -> float:
        return principal_value(lambda x: float(self(x)), w0, 0.0, self._upper(), points=self._features())

    def _features(self):
        return ()

    def describe(self) -> dict:
        return {"kind": self.kind, "cutoff": self.cutoff}


@dataclass(frozen=True)
class ConstantFormFactor(FormFactor):
    kind = "constant"

    def shape(self, omega):
        return np.ones_like(omega)

    def pv_integral(self, w0: float) -> float:
        lam = self._upper()
        if w0 <= 0:
            raise ParameterError("transition frequency must be positive")
        return math.log(abs((lam - w0) / w0))


@dataclass(frozen=True)
class PowerLawFormFactor(FormFactor):
    """``P = (omega / omega_c)**exponent``; e.g. 2 for a 3D continuum, 0 for 1D."""

    exponent: float = 2.0
    kind = "powerlaw"

    def __post_init__(self):
        if self.exponent <= -1:
            raise ParameterError("power-law exponent must exceed -1 for an integrable form factor")

    def shape(self, omega):
        return (np.asarray(omega) / self.omega_c) ** self.exponent

    def _needs_cutoff(self) -> bool:
        return self.exponent >= 0

    def pv_integral(self, w0: float) -> float:
        if self.exponent == 0:
            return ConstantFormFactor(self.omega_c, self.cutoff).pv_integral(w0)
        return self.pv_quadrature(w0)

    def describe(self) -> dict:
        return {"kind": self.kind, "exponent": self.exponent, "cutoff": self.cutoff}


@dataclass(frozen=True)
class LorentzianFormFactor(FormFactor):
    """
    Lorentzian centred at ``omega_ext`` with full width ``gamma_ext``.

    Stored peak-normalized (``shape(omega_ext) = 1``); ``scale`` rescales to
    ``P(omega_c) = 1``.
    """

    omega_ext: float = 1.0
    gamma_ext: float = 1e-4
    kind = "lorentzian"

    def __post_init__(self):
        if not (self.omega_ext > 0 and self.gamma_ext > 0):
            raise ParameterError("Lorentzian centre and width must be positive")

    @property
    def half_width(self) -> float:
        return 0.5 * self.gamma_ext

    @property
    def scale(self) -> float:
        b = self.half_width
        return ((self.omega_c - self.omega_ext) ** 2 + b * b) / (b * b)

    def shape(self, omega):
        b = self.half_width
        return self.scale * b * b / ((np.asarray(omega) - self.omega_ext) ** 2 + b * b)

    def _needs_cutoff(self) -> bool:
        return False

    def _features(self):
        b = self.half_width
        return tuple(self.omega_ext + k * b for k in (-20, -4, -1, 0, 1, 4, 20) if self.omega_ext + k * b > 0)

    def pv_integral(self, w0: float) -> float:
        """Closed form (logarithm + arctangent antiderivative)."""
        b = self.half_width
        y = w0 - self.omega_ext
        pref = self.scale * b * b / (y * y + b * b)

        def anti(x):  # x = omega - omega_ext
            if math.isinf(x):
                return -(y / b) * math.copysign(math.pi / 2, x)
            return math.log(abs(x - y)) - 0.5 * math.log(x * x + b * b) - (y / b) * math.atan(x / b)

        return pref * (anti(self._upper() - self.omega_ext) - anti(-self.omega_ext))

    def describe(self) -> dict:
        return {"kind": self.kind, "omega_ext": self.omega_ext, "gamma_ext": self.gamma_ext, "cutoff": self.cutoff}


def make_form_factor(spec: dict, omega_c: float = 1.0) -> FormFactor:
    """Build a form factor from a ``{"kind": ..., ...}`` mapping (strict keys)."""
    spec = dict(spec)
    kind = spec.pop("kind", None)
    classes = {"constant": ConstantFormFactor, "powerlaw": PowerLawFormFactor, "lorentzian": LorentzianFormFactor}
    allowed = {"constant": {"cutoff"}, "powerlaw": {"cutoff", "exponent"},
               "lorentzian": {"cutoff", "omega_ext", "gamma_ext"}}
    if kind not in classes:
        raise ParameterError(f"unknown form factor kind {kind!r}; expected one of {sorted(classes)}")
    extra = set(spec) - allowed[kind]
    if extra:
        raise ParameterError(f"unknown keys for {kind} form factor: {sorted(extra)}")
    return classes[kind](omega_c=omega_c, **spec)
