"""Refractive-index dispersion for uniaxial crystals.

Provides Sellmeier-type index models in the three algebraic forms the shipped
material data uses, the effective extraordinary index of a wave propagating at
an angle to the optic axis, and the walk-off coefficients of a collinear
type-II downconversion geometry:

* ``gvm``   -- group-delay mismatch between the extraordinary and ordinary
  waves at the degenerate wavelength, d(k_e - k_o)/d(omega), in s/m.
* ``angular_dispersion`` -- derivative of the extraordinary wave number with
  respect to the internal propagation angle, dk_e/dtheta, in 1/(m rad).

All wavelengths passed to the index models are vacuum wavelengths in
micrometres; angles are internal angles in radians.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

SPEED_OF_LIGHT = 299792458.0  # m/s

_FORMS = ("kato", "sellmeier", "laurent")


@dataclass(frozen=True)
class SellmeierSet:
    """One named dispersion formula n(lambda) for a single polarization.

    ``form`` selects the algebraic shape (x = lambda^2 in um^2):

    kato       n^2 = c0 + c1/(x - c2) + c3*x [+ c4*x^2 + c5*x^3]
    sellmeier  n^2 = c0 + a1*x/(x - b1) + a2*x/(x - b2) + ...
               coefficients = [c0, a1, b1, a2, b2, ...]
    laurent    n^2 = c0 + c1*x + c2/x + c3/x^2 + c4/x^3 + c5/x^4
    """

    form: str
    coefficients: tuple
    source: str = ""
    wavelength_range_um: tuple = (0.2, 3.0)

    def __post_init__(self):
        if self.form not in _FORMS:
            raise ValueError(f"unknown dispersion form {self.form!r}")
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))
        object.__setattr__(self, "wavelength_range_um", tuple(self.wavelength_range_um))

    def n_squared(self, wavelength_um):
        x = np.asarray(wavelength_um, dtype=float) ** 2
        c = self.coefficients
        if self.form == "kato":
            value = c[0] + c[1] / (x - c[2])
            for power, coeff in enumerate(c[3:], start=1):
                value = value + coeff * x**power
            return value
        if self.form == "sellmeier":
            value = c[0]
            for a, b in zip(c[1::2], c[2::2]):
                value = value + a * x / (x - b)
            return value
        # laurent
        value = c[0] + c[1] * x
        for power, coeff in enumerate(c[2:], start=1):
            value = value + coeff / x**power
        return value

    def n(self, wavelength_um):
        return np.sqrt(self.n_squared(wavelength_um))

    def dn2_dlambda(self, wavelength_um):
        """Analytic d(n^2)/d(lambda), per micrometre."""
        lam = np.asarray(wavelength_um, dtype=float)
        x = lam**2
        c = self.coefficients
        if self.form == "kato":
            dv_dx = -c[1] / (x - c[2]) ** 2
            for power, coeff in enumerate(c[3:], start=1):
                dv_dx = dv_dx + power * coeff * x ** (power - 1)
        elif self.form == "sellmeier":
            dv_dx = np.zeros_like(x)
            for a, b in zip(c[1::2], c[2::2]):
                dv_dx = dv_dx - a * b / (x - b) ** 2
        else:  # laurent
            dv_dx = np.full_like(x, c[1])
            for power, coeff in enumerate(c[2:], start=1):
                dv_dx = dv_dx - power * coeff / x ** (power + 1)
        return dv_dx * 2.0 * lam

    def dn_dlambda(self, wavelength_um):
        return self.dn2_dlambda(wavelength_um) / (2.0 * self.n(wavelength_um))

    def group_index(self, wavelength_um):
        """N = n - lambda dn/dlambda."""
        lam = np.asarray(wavelength_um, dtype=float)
        return self.n(lam) - lam * self.dn_dlambda(lam)

    def to_dict(self):
        return {
            "form": self.form,
            "coefficients": list(self.coefficients),
            "source": self.source,
            "wavelength_range_um": list(self.wavelength_range_um),
        }

    @classmethod
    def from_dict(cls, payload):
        return cls(
            form=payload["form"],
            coefficients=payload["coefficients"],
            source=payload.get("source", ""),
            wavelength_range_um=tuple(payload.get("wavelength_range_um", (0.2, 3.0))),
        )


def extraordinary_index(sell_o: SellmeierSet, sell_e: SellmeierSet, psi, wavelength_um):
    """Index of the extraordinary wave propagating at angle psi to the optic axis.

    1/n^2(psi) = cos^2(psi)/n_o^2 + sin^2(psi)/n_e^2
    """
    no2 = sell_o.n_squared(wavelength_um)
    ne2 = sell_e.n_squared(wavelength_um)
    return 1.0 / np.sqrt(np.cos(psi) ** 2 / no2 + np.sin(psi) ** 2 / ne2)


def extraordinary_index_angle_derivative(sell_o, sell_e, psi, wavelength_um):
    """Analytic dn(psi)/dpsi of the extraordinary wave."""
    no2 = sell_o.n_squared(wavelength_um)
    ne2 = sell_e.n_squared(wavelength_um)
    n_eff = extraordinary_index(sell_o, sell_e, psi, wavelength_um)
    return -0.5 * n_eff**3 * np.sin(2.0 * psi) * (1.0 / ne2 - 1.0 / no2)


def extraordinary_group_index(sell_o, sell_e, psi, wavelength_um):
    """Group index N = n - lambda dn/dlambda of the extraordinary wave at fixed psi."""
    lam = np.asarray(wavelength_um, dtype=float)
    n_o = sell_o.n(lam)
    n_e = sell_e.n(lam)
    n_eff = extraordinary_index(sell_o, sell_e, psi, lam)
    # d(1/n^2)/dlam = -2 [cos^2 dn_o/dlam / n_o^3 + sin^2 dn_e/dlam / n_e^3]
    dinv = -2.0 * (
        np.cos(psi) ** 2 * sell_o.dn_dlambda(lam) / n_o**3
        + np.sin(psi) ** 2 * sell_e.dn_dlambda(lam) / n_e**3
    )
    dn_dlam = -0.5 * n_eff**3 * dinv
    return n_eff - lam * dn_dlam


def ordinary_wave_number(sell_o, angular_frequency):
    """k_o(Omega) = n_o(lambda(Omega)) * Omega / c, in rad/m."""
    lam_um = 2.0 * np.pi * SPEED_OF_LIGHT / np.asarray(angular_frequency) * 1e6
    return sell_o.n(lam_um) * np.asarray(angular_frequency) / SPEED_OF_LIGHT


def extraordinary_wave_number(sell_o, sell_e, angular_frequency, theta, axis_angle):
    """k_e(Omega, theta) for a wave at internal angle theta from the reference axis.

    The angle to the optic axis is axis_angle + theta; positive theta tilts
    toward the optic axis.
    """
    lam_um = 2.0 * np.pi * SPEED_OF_LIGHT / np.asarray(angular_frequency) * 1e6
    n_eff = extraordinary_index(sell_o, sell_e, axis_angle + theta, lam_um)
    return n_eff * np.asarray(angular_frequency) / SPEED_OF_LIGHT


def derive_walkoff(sell_o, sell_e, axis_angle, degenerate_wavelength_nm):
    """Walk-off coefficients (gvm, angular_dispersion) at the degenerate wavelength.

    gvm = d(k_e - k_o)/dOmega = (N_e(psi) - N_o)/c           [s/m]
    angular_dispersion = dk_e/dtheta = (2 pi / lambda) dn/dpsi  [1/(m rad)]

    Both are evaluated analytically from the dispersion formulas; tests check
    them against independent finite-difference stencils.
    """
    lam_um = degenerate_wavelength_nm * 1e-3
    gvm = (
        extraordinary_group_index(sell_o, sell_e, axis_angle, lam_um)
        - sell_o.group_index(lam_um)
    ) / SPEED_OF_LIGHT
    angular = (
        2.0
        * np.pi
        / (degenerate_wavelength_nm * 1e-9)
        * extraordinary_index_angle_derivative(sell_o, sell_e, axis_angle, lam_um)
    )
    return float(gvm), float(angular)


def birefringent_retardation(sell_o, sell_e, axis_angle, length_mm, wavelength_nm):
    """Single-pass phase retardation (k_e(psi) - k_o) * L of a plate, in radians."""
    lam_um = wavelength_nm * 1e-3
    delta_n = extraordinary_index(sell_o, sell_e, axis_angle, lam_um) - sell_o.n(lam_um)
    return float(delta_n * 2.0 * np.pi / (wavelength_nm * 1e-9) * length_mm * 1e-3)


_materials_cache = None


def materials():
    """Shipped material dispersion data, keyed as 'material/name'."""
    global _materials_cache
    if _materials_cache is None:
        payload = json.loads(
            resources.files("spdctomo.data").joinpath("materials.json").read_text()
        )
        table = {}
        for material, entries in payload.items():
            for name, axes in entries.items():
                table[f"{material}/{name}"] = {
                    "ordinary": SellmeierSet.from_dict(axes["ordinary"]),
                    "extraordinary": SellmeierSet.from_dict(axes["extraordinary"]),
                }
        _materials_cache = table
    return _materials_cache


def material(key):
    """Look up a shipped dispersion data set, e.g. 'bbo/kato1986'."""
    table = materials()
    if key not in table:
        raise KeyError(f"unknown material {key!r}; available: {sorted(table)}")
    return table[key]["ordinary"], table[key]["extraordinary"]
