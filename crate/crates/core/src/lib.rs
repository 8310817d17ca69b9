//! Lattice laboratory for the rotating spin-field picture of photons and
//! electrons.
//!
//! Fields live on uniform lattices and are manipulated with spectral
//! (discrete Fourier) operators. Physics modules build circularly polarized
//! photon packets and massive "electron field" packets, integrate their
//! energy, momentum and spin densities, quantize them by total spin, map the
//! rotating real vector onto a complex Schrödinger field, apply Lorentz
//! boosts and study modulation by electromagnetic potentials.
//!
//! Every physics routine takes a [`PhysicalConstants`] value, so the same code
//! runs in natural units (the default for lattice work) or in SI.

pub mod constants;
pub mod electron;
pub mod error;
pub mod lattice;
pub mod lorentz;
pub mod modulation;
pub mod photon;
pub mod scenario;
pub mod vec3;

pub use constants::{NaturalScale, PhysicalConstants};
pub use error::{Error, Result};
pub use lattice::{Axis, Boundary, ComplexScalarField, GridSpec, Parity, RealVectorField, ScalarField};

/// Sign of the spin projection on the reference axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Helicity {
    Positive,
    Negative,
}

impl Helicity {
    pub fn sign(self) -> f64 {
        match self {
            Helicity::Positive => 1.0,
            Helicity::Negative => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Helicity::Positive => Helicity::Negative,
            Helicity::Negative => Helicity::Positive,
        }
    }

    pub fn from_sign(sign: i64) -> Result<Self> {
        match sign {
            1 => Ok(Helicity::Positive),
            -1 => Ok(Helicity::Negative),
            other => Err(Error::InvalidInput(format!("helicity must be +1 or -1, got {other}"))),
        }
    }
}

/// Amplitude profile of a packet.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum Envelope {
    /// Constant amplitude over a periodic lattice (plane wave).
    Uniform,
    /// `exp(-|r - center|^2 / 2 width^2)`; `center` defaults to the middle of the lattice.
    Gaussian { width: f64, center: Option<[f64; 3]> },
}

impl Envelope {
    pub fn gaussian(width: f64) -> Self {
        Envelope::Gaussian { width, center: None }
    }

    pub fn gaussian_at(width: f64, center: [f64; 3]) -> Self {
        Envelope::Gaussian { width, center: Some(center) }
    }
}
