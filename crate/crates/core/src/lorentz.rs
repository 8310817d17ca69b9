//! Four-vectors, boosts and frame changes of packets.
//!
//! Boosts are active: [`boost`] with velocity `beta c` returns the four-vector
//! of the same object set moving by `beta` relative to its original frame.
//! An observer moving at `beta c` sees the result of `boost(-beta)`.

use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::electron::{electron_summarize, make_electron_packet, ElectronKind, ElectronPacket};
use crate::error::{Error, Result};
use crate::photon::{build_traveling, summarize, PhotonKind, PhotonPacket};
use crate::vec3::{self, Vec3};
use crate::Envelope;

/// `1 / sqrt(1 - v^2/c^2)`.
pub fn lorentz_factor(velocity: Vec3, c: f64) -> Result<f64> {
    let speed = vec3::norm(velocity);
    if !speed.is_finite() || speed >= c {
        return Err(Error::Superluminal { speed, c });
    }
    let b = speed / c;
    Ok(1.0 / ((1.0 - b) * (1.0 + b)).sqrt())
}

/// `(time, space)`: `(E/c, p)` for momenta, `(c t, r)` for events.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourVector {
    pub time: f64,
    pub space: Vec3,
}

impl FourVector {
    pub fn new(time: f64, space: Vec3) -> Self {
        Self { time, space }
    }

    pub fn momentum(energy: f64, p: Vec3, constants: &PhysicalConstants) -> Self {
        Self { time: energy / constants.c, space: p }
    }

    pub fn event(t: f64, r: Vec3, constants: &PhysicalConstants) -> Self {
        Self { time: constants.c * t, space: r }
    }

    /// `time^2 - |space|^2`.
    pub fn minkowski_norm(&self) -> f64 {
        self.time * self.time - vec3::dot(self.space, self.space)
    }

    /// Minkowski product `a.time b.time - a.space . b.space`.
    pub fn dot(&self, other: &FourVector) -> f64 {
        self.time * other.time - vec3::dot(self.space, other.space)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoostParams {
    beta: Vec3,
    gamma: f64,
}

impl BoostParams {
    pub fn new(beta: Vec3) -> Result<Self> {
        let b = vec3::norm(beta);
        if !(b.is_finite() && b < 1.0) {
            return Err(Error::InvalidBoost { beta: b });
        }
        Ok(Self { beta, gamma: 1.0 / ((1.0 - b) * (1.0 + b)).sqrt() })
    }

    pub fn identity() -> Self {
        Self { beta: [0.0; 3], gamma: 1.0 }
    }

    pub fn beta(&self) -> Vec3 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn inverse(&self) -> Self {
        Self { beta: vec3::scale(self.beta, -1.0), gamma: self.gamma }
    }
}

/// Active boost: `t' = gamma (t + beta.x)`,
/// `x' = x + ((gamma - 1)/beta^2)(beta.x) beta + gamma beta t`.
pub fn boost(fv: &FourVector, b: &BoostParams) -> FourVector {
    let beta = b.beta;
    let b2 = vec3::dot(beta, beta);
    if b2 == 0.0 {
        return *fv;
    }
    let g = b.gamma;
    let bx = vec3::dot(beta, fv.space);
    let time = g * (fv.time + bx);
    // (gamma - 1)/beta^2 = gamma^2/(gamma + 1), stable for small beta
    let coef = g * g / (g + 1.0);
    let space = vec3::add(vec3::add(fv.space, vec3::scale(beta, coef * bx)), vec3::scale(beta, g * fv.time));
    FourVector { time, space }
}

/// `theta = (E t - p.r) / hbar` for `p4 = (E/c, p)` and `event = (c t, r)`.
pub fn invariant_phase(p4: &FourVector, event: &FourVector, constants: &PhysicalConstants) -> f64 {
    p4.dot(event) / constants.hbar
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElectronCarrier {
    pub omega: f64,
    pub k: Vec3,
    pub velocity: Vec3,
}

/// Carrier `(w', k', v')` of a mass `m` moving at `v` after boost `b`.
pub fn boost_electron_carrier(
    mass: f64,
    velocity: Vec3,
    b: &BoostParams,
    constants: &PhysicalConstants,
) -> Result<ElectronCarrier> {
    let gamma = lorentz_factor(velocity, constants.c)?;
    let c = constants.c;
    let p4 = FourVector::momentum(gamma * mass * c * c, vec3::scale(velocity, gamma * mass), constants);
    let q = boost(&p4, b);
    let energy = q.time * c;
    Ok(ElectronCarrier {
        omega: energy / constants.hbar,
        k: vec3::scale(q.space, 1.0 / constants.hbar),
        velocity: vec3::scale(q.space, c * c / energy),
    })
}

/// `(w'/c, k')` of a photon carrier after boost `b`.
pub fn boost_photon_carrier(omega: f64, k: Vec3, b: &BoostParams, constants: &PhysicalConstants) -> (f64, Vec3) {
    let q = boost(&FourVector::new(omega / constants.c, k), b);
    (q.time * constants.c, q.space)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoostedPhoton {
    pub packet: PhotonPacket,
    /// `|S| / |S_in| - 1` of the rebuilt packet before spin renormalization.
    pub spin_deviation: f64,
}

/// Boosts the carrier and rebuilds the packet in the new frame.
///
/// The rebuilt field has amplitude scaled by the Doppler factor `w'/w` and a
/// Gaussian width scaled by `w/w'`, so the envelope keeps its wavelength count.
/// The result is then rescaled to the input spin magnitude.
pub fn boost_photon_packet(p: &PhotonPacket, b: &BoostParams) -> Result<BoostedPhoton> {
    if p.kind != PhotonKind::Traveling {
        return Err(Error::UnsupportedGeometry("only traveling packets can be boosted".into()));
    }
    let c = &p.constants;
    let (omega2, k2) = boost_photon_carrier(p.carrier_omega, p.carrier_k, b, c);
    let doppler = omega2 / p.carrier_omega;
    let n_in = vec3::normalized(p.carrier_k).ok_or_else(|| Error::InvalidInput("zero carrier".into()))?;
    let n_out = vec3::normalized(k2).ok_or_else(|| Error::InvalidInput("zero boosted carrier".into()))?;
    let envelope_out = match p.envelope {
        Envelope::Uniform => Envelope::Uniform,
        Envelope::Gaussian { width, center } => Envelope::Gaussian { width: width / doppler, center },
    };
    let unit_in = build_traveling(p.carrier_omega, n_in, p.helicity, p.envelope, p.grid(), c, 1.0, p.cross_section)?;
    let s_unit = summarize(&unit_in)?.spin_magnitude();
    let s_in = summarize(p)?.spin_magnitude();
    if s_unit == 0.0 || s_in == 0.0 {
        return Err(Error::CannotNormalize);
    }
    let amplitude = (s_in / s_unit).sqrt();
    let pre =
        build_traveling(omega2, n_out, p.helicity, envelope_out, p.grid(), c, amplitude * doppler, p.cross_section)?;
    let s_pre = summarize(&pre)?.spin_magnitude();
    let spin_deviation = s_pre / s_in - 1.0;
    Ok(BoostedPhoton { packet: pre.scaled((s_in / s_pre).sqrt()), spin_deviation })
}

/// Speeds below this fraction of `c` after a boost are treated as rest.
const REST_SNAP: f64 = 1e-12;

/// Boosts an electron packet at carrier level and rebuilds its field with the
/// same envelope, spin axis and helicity, rescaled to the input spin.
pub fn boost_electron_packet(p: &ElectronPacket, b: &BoostParams) -> Result<ElectronPacket> {
    if p.kind != ElectronKind::Traveling {
        return Err(Error::UnsupportedGeometry("box modes cannot be boosted".into()));
    }
    let c = &p.constants;
    let carrier = boost_electron_carrier(p.rest_mass, p.velocity, b, c)?;
    let mut velocity = carrier.velocity;
    if vec3::norm(velocity) < REST_SNAP * c.c {
        velocity = [0.0; 3];
    }
    let rebuilt = make_electron_packet(p.rest_mass, velocity, p.spin_axis, p.helicity, p.envelope, p.grid(), c)?
        .with_cross_section(p.cross_section);
    let s_in = electron_summarize(p)?.spin_magnitude();
    let s_new = electron_summarize(&rebuilt)?.spin_magnitude();
    if s_new == 0.0 {
        return Err(Error::CannotNormalize);
    }
    Ok(rebuilt.scaled((s_in / s_new).sqrt()))
}

#[cfg(test)]
mod tests;
