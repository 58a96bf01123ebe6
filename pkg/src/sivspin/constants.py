"""Physical constants and unit conversions used throughout the package.

Unit conventions: frequencies in GHz, magnetic fields in mT, temperatures
in K, times in s, energies in meV. All conversions between these systems
go through the single frozen constant set below (2018/2022 CODATA; h, k,
and e are exact SI values).
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class PhysicalConstants:
    """Frozen CODATA constants in the package's working units."""

    #: Bohr magneton over Planck constant, GHz/T.
    bohr_magneton_over_h: float = 13.996244917056908
    #: Boltzmann constant over Planck constant, GHz/K.
    boltzmann_over_h: float = 20.836619123327576
    #: Conversion from meV to GHz (1e-3 e / h / 1e9).
    mev_to_ghz: float = 241.7989242084918
    #: Conversion from eV to J (exact elementary charge).
    ev_to_joule: float = 1.602176634e-19
    #: Planck constant, J s (exact).
    planck_joule_s: float = 6.62607015e-34
    #: Reduced Planck constant, J s.
    hbar_joule_s: float = 6.62607015e-34 / (2.0 * math.pi)
    #: Boltzmann constant, J/K (exact).
    boltzmann_joule_per_k: float = 1.380649e-23
    #: Bohr magneton, J/T.
    bohr_magneton_joule_per_t: float = 9.2740100657e-24
    #: Vacuum permeability over 4 pi, T m / A.
    mu0_over_4pi: float = 1.0e-7

    @property
    def bohr_magneton_ghz_per_mt(self) -> float:
        """Bohr magneton over h expressed per mT."""
        return self.bohr_magneton_over_h * 1e-3

    @property
    def mev_to_kelvin(self) -> float:
        """Thermal-energy equivalent of 1 meV in K (meV / k)."""
        return self.mev_to_ghz / self.boltzmann_over_h

    def boltzmann_exponent(self, energy_mev: float, temperature_k: float) -> float:
        """Return E/kT for an energy in meV and a temperature in K."""
        if temperature_k <= 0:
            raise ValueError("temperature must be positive")
        return energy_mev * self.mev_to_kelvin / temperature_k

    def arrhenius_factor(self, energy_mev: float, temperature_k: float) -> float:
        """Return exp(-E/kT)."""
        return math.exp(-self.boltzmann_exponent(energy_mev, temperature_k))


#: Shared immutable constant set.
CONSTANTS = PhysicalConstants()
