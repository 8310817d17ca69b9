//! Physical constants and the natural-unit scale used for lattice work.
//!
//! Lattice computations run with hbar = c = eps0 = mu0 = 1 and one reference
//! energy per scenario; [`NaturalScale`] converts to and from SI at the edges.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub const CODATA_VERSION: &str = "CODATA 2018";

const HBAR_SI: f64 = 1.054_571_817e-34;
const C_SI: f64 = 299_792_458.0;
const EPS0_SI: f64 = 8.854_187_812_8e-12;
const E_SI: f64 = 1.602_176_634e-19;
const ELECTRON_REST_KEV: f64 = 510.998_950_00;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Reduced Planck constant (action).
    pub hbar: f64,
    /// Speed of light.
    pub c: f64,
    /// Vacuum permittivity.
    pub eps0: f64,
    /// Vacuum permeability.
    pub mu0: f64,
    /// Electron rest energy in keV (a pure number in every unit system).
    pub electron_rest_energy_kev: f64,
    /// Elementary charge (positive).
    pub elementary_charge: f64,
}

impl PhysicalConstants {
    /// SI values.
    pub fn si() -> Self {
        Self {
            hbar: HBAR_SI,
            c: C_SI,
            eps0: EPS0_SI,
            // fixes mu0 eps0 c^2 = 1 to rounding
            mu0: 1.0 / (EPS0_SI * C_SI * C_SI),
            electron_rest_energy_kev: ELECTRON_REST_KEV,
            elementary_charge: E_SI,
        }
    }

    /// Heaviside-Lorentz natural units: hbar = c = eps0 = mu0 = 1, e = sqrt(4 pi alpha).
    pub fn natural() -> Self {
        Self {
            hbar: 1.0,
            c: 1.0,
            eps0: 1.0,
            mu0: 1.0,
            electron_rest_energy_kev: ELECTRON_REST_KEV,
            elementary_charge: (4.0 * PI * fine_structure()).sqrt(),
        }
    }

    pub fn h(&self) -> f64 {
        2.0 * PI * self.hbar
    }

    /// `1 / (mu0 c^2)`, the prefactor of the Poynting-type densities.
    pub fn poynting_prefactor(&self) -> f64 {
        1.0 / (self.mu0 * self.c * self.c)
    }

    /// `mu0 eps0 c^2`; equals 1 in a consistent constant set.
    pub fn consistency(&self) -> f64 {
        self.mu0 * self.eps0 * self.c * self.c
    }

    /// Electron rest energy in joules (SI constants only).
    pub fn electron_rest_energy_joule() -> f64 {
        ELECTRON_REST_KEV * 1e3 * E_SI
    }
}

/// Fine-structure constant from the SI values.
pub fn fine_structure() -> f64 {
    E_SI * E_SI / (4.0 * PI * EPS0_SI * HBAR_SI * C_SI)
}

/// Electronvolt in joules.
pub fn electronvolt() -> f64 {
    E_SI
}

/// Conversion between SI and natural units anchored at one reference energy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NaturalScale {
    /// Reference energy in joules; it is 1 in natural units.
    pub energy_joule: f64,
}

impl NaturalScale {
    pub fn new(energy_joule: f64) -> Self {
        assert!(energy_joule > 0.0 && energy_joule.is_finite(), "reference energy must be positive");
        Self { energy_joule }
    }

    /// Scale where the electron rest energy is 1.
    pub fn electron() -> Self {
        Self::new(PhysicalConstants::electron_rest_energy_joule())
    }

    /// Natural length unit `hbar c / E` in metres.
    pub fn length_m(&self) -> f64 {
        HBAR_SI * C_SI / self.energy_joule
    }

    /// Natural time unit `hbar / E` in seconds.
    pub fn time_s(&self) -> f64 {
        HBAR_SI / self.energy_joule
    }

    /// Electric-field unit in V/m: `eps0 E_unit^2 l^3 = E`.
    pub fn electric_field_v_per_m(&self) -> f64 {
        (self.energy_joule / (EPS0_SI * self.length_m().powi(3))).sqrt()
    }

    pub fn energy_to_natural(&self, joule: f64) -> f64 {
        joule / self.energy_joule
    }

    pub fn energy_to_si(&self, natural: f64) -> f64 {
        natural * self.energy_joule
    }

    pub fn length_to_natural(&self, metre: f64) -> f64 {
        metre / self.length_m()
    }

    pub fn length_to_si(&self, natural: f64) -> f64 {
        natural * self.length_m()
    }

    pub fn time_to_natural(&self, second: f64) -> f64 {
        second / self.time_s()
    }

    pub fn time_to_si(&self, natural: f64) -> f64 {
        natural * self.time_s()
    }

    /// Angular frequency (rad/s) to natural units.
    pub fn angular_frequency_to_natural(&self, rad_per_s: f64) -> f64 {
        rad_per_s * self.time_s()
    }

    pub fn angular_frequency_to_si(&self, natural: f64) -> f64 {
        natural / self.time_s()
    }

    pub fn wavenumber_to_si(&self, natural: f64) -> f64 {
        natural / self.length_m()
    }

    /// Momentum (kg m/s) to natural units.
    pub fn momentum_to_natural(&self, si: f64) -> f64 {
        si * C_SI / self.energy_joule
    }

    pub fn momentum_to_si(&self, natural: f64) -> f64 {
        natural * self.energy_joule / C_SI
    }

    /// Rest energy (J) of a mass to its natural mass value.
    pub fn mass_from_rest_energy(&self, joule: f64) -> f64 {
        joule / self.energy_joule
    }

    pub fn electric_field_to_si(&self, natural: f64) -> f64 {
        natural * self.electric_field_v_per_m()
    }

    pub fn electric_field_to_natural(&self, v_per_m: f64) -> f64 {
        v_per_m / self.electric_field_v_per_m()
    }

    /// Scalar potential (V) to natural units, so that `e V` is preserved.
    pub fn potential_to_natural(&self, volt: f64) -> f64 {
        volt * E_SI / (self.energy_joule * PhysicalConstants::natural().elementary_charge)
    }

    /// Vector potential (V s / m) to natural units, so that `e A` is preserved.
    pub fn vector_potential_to_natural(&self, si: f64) -> f64 {
        si * E_SI * C_SI / (self.energy_joule * PhysicalConstants::natural().elementary_charge)
    }
}
