//! Circularly polarized electromagnetic packets and standing modes.
//!
//! `E` is built from the rotating-vector ansatz, `B` from the carrier-level
//! plane-wave relation, and the energy, momentum and spin densities are
//! integrated over the lattice. Spin is computed from `E x A` with the
//! Coulomb-gauge vector potential.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::lattice::{
    inverse_curl_coulomb, spectral_propagate, Boundary, ComplexScalarField, GridSpec, Parity, RealVectorField,
    ScalarField, Transform,
};
use crate::vec3::{self, Vec3};
use crate::{Envelope, Helicity};

/// What kind of photon state a packet holds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum PhotonKind {
    Traveling,
    /// Mode `n` between reflecting walls a distance `length` apart.
    Standing {
        n: u32,
        length: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhotonPacket {
    pub e: RealVectorField,
    pub b: RealVectorField,
    pub helicity: Helicity,
    pub carrier_omega: f64,
    pub carrier_k: Vec3,
    pub envelope: Envelope,
    pub kind: PhotonKind,
    /// Transverse area a one-dimensional lattice stands for; 1 on 3D lattices.
    pub cross_section: f64,
    pub constants: PhysicalConstants,
}

/// Integrated energy, momentum and spin of a packet.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensitySummary {
    pub total_energy: f64,
    pub total_momentum: Vec3,
    pub total_spin: Vec3,
    /// `total_energy / |total_spin|`; `None` when the spin vanishes.
    pub effective_omega: Option<f64>,
    /// `|total_momentum| / |total_spin|`; `None` when the spin vanishes.
    pub effective_k: Option<f64>,
}

impl DensitySummary {
    pub(crate) fn from_totals(total_energy: f64, total_momentum: Vec3, total_spin: Vec3) -> Self {
        let s = vec3::norm(total_spin);
        let (effective_omega, effective_k) =
            if s > 0.0 { (Some(total_energy / s), Some(vec3::norm(total_momentum) / s)) } else { (None, None) };
        Self { total_energy, total_momentum, total_spin, effective_omega, effective_k }
    }

    pub fn spin_magnitude(&self) -> f64 {
        vec3::norm(self.total_spin)
    }

    pub fn momentum_magnitude(&self) -> f64 {
        vec3::norm(self.total_momentum)
    }

    /// `(effective_omega, effective_k)`.
    pub fn ratios(&self) -> Result<(f64, f64)> {
        match (self.effective_omega, self.effective_k) {
            (Some(w), Some(k)) => Ok((w, k)),
            _ => Err(Error::UndefinedRatio),
        }
    }
}

/// Minimum number of samples per carrier wavelength along any resolved axis.
const MIN_SAMPLES_PER_WAVELENGTH: f64 = 4.0;
/// Envelope widths that must separate a packet centre from an open boundary.
const ENVELOPE_CLEARANCE: f64 = 7.0;

pub(crate) fn check_resolution(grid: &GridSpec, k: Vec3) -> Result<()> {
    for (i, a) in grid.axes().iter().enumerate() {
        let kc = k[grid.cartesian_axis(i)].abs();
        let limit = 2.0 * PI / (MIN_SAMPLES_PER_WAVELENGTH * a.spacing());
        if kc > limit * (1.0 + 1e-12) {
            return Err(Error::Aliasing(format!(
                "wavenumber {kc:e} along lattice axis {i} exceeds {limit:e} ({MIN_SAMPLES_PER_WAVELENGTH} samples per wavelength)"
            )));
        }
    }
    Ok(())
}

/// Checks a packet carrier and envelope against the lattice, returning the
/// resolved envelope centre.
pub(crate) fn check_envelope(grid: &GridSpec, k: Vec3, envelope: &Envelope, min_width: Option<f64>) -> Result<Vec3> {
    match *envelope {
        Envelope::Uniform => {
            for (i, a) in grid.axes().iter().enumerate() {
                if a.boundary != Boundary::Periodic {
                    return Err(Error::UnsupportedGeometry("a uniform envelope needs a periodic lattice".into()));
                }
                let cycles = k[grid.cartesian_axis(i)] * a.extent / (2.0 * PI);
                if (cycles - cycles.round()).abs() > 1e-9 {
                    return Err(Error::Incommensurate(format!("{cycles} carrier periods along lattice axis {i}")));
                }
            }
            for dir in 0..3 {
                if !grid.resolves(dir) && k[dir] != 0.0 {
                    return Err(Error::UnsupportedGeometry(format!(
                        "carrier has a component along unresolved direction {dir}"
                    )));
                }
            }
            Ok(grid.center())
        }
        Envelope::Gaussian { width, center } => {
            if !(width.is_finite() && width > 0.0) {
                return Err(Error::InvalidInput(format!("envelope width must be positive, got {width}")));
            }
            if let Some(wavelength) = min_width {
                if width < wavelength {
                    return Err(Error::SubWavelength { width, wavelength });
                }
            }
            let c = center.unwrap_or_else(|| grid.center());
            for (i, a) in grid.axes().iter().enumerate() {
                let x = c[grid.cartesian_axis(i)];
                if a.boundary == Boundary::Open
                    && (x - ENVELOPE_CLEARANCE * width < 0.0 || x + ENVELOPE_CLEARANCE * width > a.extent)
                {
                    return Err(Error::SupportTooClose(format!(
                        "centre {x} on lattice axis {i} is within {ENVELOPE_CLEARANCE} widths of the boundary"
                    )));
                }
            }
            Ok(c)
        }
    }
}

pub(crate) fn envelope_value(envelope: &Envelope, center: Vec3, grid: &GridSpec, r: Vec3) -> f64 {
    match *envelope {
        Envelope::Uniform => 1.0,
        Envelope::Gaussian { width, .. } => {
            let mut d2 = 0.0;
            for dir in 0..3 {
                if grid.resolves(dir) {
                    d2 += (r[dir] - center[dir]).powi(2);
                }
            }
            (-d2 / (2.0 * width * width)).exp()
        }
    }
}

/// Builds a traveling CP packet along `direction` with unit peak amplitude
/// (times `amplitude`).
#[allow(clippy::too_many_arguments)]
pub(crate) fn build_traveling(
    omega: f64,
    direction: Vec3,
    helicity: Helicity,
    envelope: Envelope,
    grid: &GridSpec,
    constants: &PhysicalConstants,
    amplitude: f64,
    cross_section: f64,
) -> Result<PhotonPacket> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::InvalidInput(format!("angular frequency must be positive, got {omega}")));
    }
    let n = vec3::normalized(direction).ok_or_else(|| Error::InvalidInput("zero propagation direction".into()))?;
    for dir in 0..3 {
        if !grid.resolves(dir) && n[dir].abs() > 1e-12 {
            return Err(Error::UnsupportedGeometry(
                "propagation direction must lie along a resolved lattice direction".into(),
            ));
        }
    }
    if grid.has_dirichlet() {
        return Err(Error::UnsupportedGeometry("traveling packets need a periodic or open lattice".into()));
    }
    let k_mag = omega / constants.c;
    let k = vec3::scale(n, k_mag);
    check_resolution(grid, k)?;
    let center = check_envelope(grid, k, &envelope, Some(2.0 * PI / k_mag))?;

    let (e1, e2) = vec3::transverse_basis(n);
    let h = helicity.sign();
    let raw = RealVectorField::from_fn(grid, |r| {
        // theta = w t - k.r at t = 0
        let theta = -vec3::dot(k, vec3::sub(r, center));
        let g = amplitude * envelope_value(&envelope, center, grid, r);
        vec3::add(vec3::scale(e1, g * theta.cos()), vec3::scale(e2, h * g * theta.sin()))
    })?;
    let (e, b) = radiative_fields(&raw, n, constants.c)?;
    Ok(PhotonPacket {
        e,
        b,
        helicity,
        carrier_omega: omega,
        carrier_k: k,
        envelope,
        kind: PhotonKind::Traveling,
        cross_section: if grid.dims() == 1 { cross_section } else { 1.0 },
        constants: *constants,
    })
}

/// Transverse projection of `E` and the matching `B` for waves moving along
/// `+n`: `B(q) = sign(q.n) q^ x E(q) / c`. Modes with `q.n = 0` (including
/// the uniform one) and Nyquist modes are dropped.
fn radiative_fields(raw: &RealVectorField, n: Vec3, c: f64) -> Result<(RealVectorField, RealVectorField)> {
    let grid = raw.grid();
    let t = Transform::new(grid);
    let spec: Vec<Vec<Complex64>> = (0..3).map(|i| t.forward_real(raw.component(i), Parity::Odd)).collect();
    let len = t.len();
    let mut e_out = vec![vec![Complex64::default(); len]; 3];
    let mut b_out = vec![vec![Complex64::default(); len]; 3];
    for q in 0..len {
        let k = t.wavevector(q);
        let along = vec3::dot(k, n);
        if t.is_nyquist(q) || along.abs() < 1e-12 * vec3::norm(k).max(1e-300) || vec3::norm(k) == 0.0 {
            continue;
        }
        let kh = vec3::scale(k, 1.0 / vec3::norm(k));
        let ev = [spec[0][q], spec[1][q], spec[2][q]];
        let proj = kh[0] * ev[0] + kh[1] * ev[1] + kh[2] * ev[2];
        let et = [ev[0] - kh[0] * proj, ev[1] - kh[1] * proj, ev[2] - kh[2] * proj];
        let s = along.signum() / c;
        let bt = [
            s * (kh[1] * et[2] - kh[2] * et[1]),
            s * (kh[2] * et[0] - kh[0] * et[2]),
            s * (kh[0] * et[1] - kh[1] * et[0]),
        ];
        for i in 0..3 {
            e_out[i][q] = et[i];
            b_out[i][q] = bt[i];
        }
    }
    let mut e_comp = e_out.into_iter().map(|v| t.inverse_real(v));
    let mut b_comp = b_out.into_iter().map(|v| t.inverse_real(v));
    let e =
        RealVectorField::new(grid.clone(), [e_comp.next().unwrap(), e_comp.next().unwrap(), e_comp.next().unwrap()])?;
    let b =
        RealVectorField::new(grid.clone(), [b_comp.next().unwrap(), b_comp.next().unwrap(), b_comp.next().unwrap()])?;
    Ok((e, b))
}

/// CP packet traveling along `+z`:
/// `E = E0(r) [x cos(theta) +/- y sin(theta)]`, `theta = w t - k z` at `t = 0`.
pub fn make_cp_traveling_packet(
    omega: f64,
    helicity: Helicity,
    envelope: Envelope,
    grid: &GridSpec,
    constants: &PhysicalConstants,
) -> Result<PhotonPacket> {
    build_traveling(omega, [0.0, 0.0, 1.0], helicity, envelope, grid, constants, 1.0, 1.0)
}

/// CP packet traveling along an arbitrary `direction` (3D lattices, or `+/-z` on lines).
pub fn make_cp_packet_along(
    omega: f64,
    direction: Vec3,
    helicity: Helicity,
    envelope: Envelope,
    grid: &GridSpec,
    constants: &PhysicalConstants,
) -> Result<PhotonPacket> {
    build_traveling(omega, direction, helicity, envelope, grid, constants, 1.0, 1.0)
}

/// Standing CP mode between walls at `z = 0` and `z = L`, evaluated at time `t`:
/// `E = E0 [x cos(w t) +/- y sin(w t)] sin(k_n z)`, `k_n = n pi / L`.
pub fn make_cp_standing_mode_at(
    n: u32,
    length: f64,
    helicity: Helicity,
    grid: &GridSpec,
    constants: &PhysicalConstants,
    time: f64,
) -> Result<PhotonPacket> {
    if n == 0 {
        return Err(Error::InvalidMode("mode number must be at least 1".into()));
    }
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::InvalidMode(format!("box length must be positive, got {length}")));
    }
    let axis = grid.axes()[0];
    if grid.dims() != 1 || axis.boundary != Boundary::Dirichlet {
        return Err(Error::UnsupportedGeometry("standing modes need a one-dimensional reflecting lattice".into()));
    }
    if ((axis.extent - length) / length).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!("lattice spans {} but the box is {length}", axis.extent)));
    }
    if (axis.points as f64) < 8.0 * n as f64 {
        return Err(Error::Aliasing(format!(
            "mode {n} has fewer than 8 samples per half-wavelength on {} points",
            axis.points
        )));
    }
    let k = n as f64 * PI / length;
    let omega = constants.c * k;
    let h = helicity.sign();
    let (cw, sw) = ((omega * time).cos(), (omega * time).sin());
    let e = RealVectorField::from_fn(grid, |r| {
        let s = (k * r[2]).sin();
        [cw * s, h * sw * s, 0.0]
    })?
    .set_parity([Parity::Odd, Parity::Odd, Parity::Odd]);
    // Faraday's law for the field above: B = -(E0/c) cos(kz) [+/- cos(wt), sin(wt), 0]
    let b = RealVectorField::from_fn(grid, |r| {
        let c = (k * r[2]).cos() / constants.c;
        [-h * cw * c, -sw * c, 0.0]
    })?
    .set_parity([Parity::Even, Parity::Even, Parity::Odd]);
    Ok(PhotonPacket {
        e,
        b,
        helicity,
        carrier_omega: omega,
        carrier_k: [0.0, 0.0, k],
        envelope: Envelope::Uniform,
        kind: PhotonKind::Standing { n, length },
        cross_section: 1.0,
        constants: *constants,
    })
}

/// Standing CP mode at `t = 0`.
pub fn make_cp_standing_mode(
    n: u32,
    length: f64,
    helicity: Helicity,
    grid: &GridSpec,
    constants: &PhysicalConstants,
) -> Result<PhotonPacket> {
    make_cp_standing_mode_at(n, length, helicity, grid, constants, 0.0)
}

impl PhotonPacket {
    /// Packet from explicit fields (e.g. superpositions built by hand).
    pub fn from_fields(
        e: RealVectorField,
        b: RealVectorField,
        helicity: Helicity,
        carrier_omega: f64,
        carrier_k: Vec3,
        constants: &PhysicalConstants,
    ) -> Result<Self> {
        if e.grid() != b.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            e,
            b,
            helicity,
            carrier_omega,
            carrier_k,
            envelope: Envelope::Uniform,
            kind: PhotonKind::Traveling,
            cross_section: 1.0,
            constants: *constants,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        self.e.grid()
    }

    pub fn with_cross_section(mut self, area: f64) -> Self {
        if self.grid().dims() == 1 {
            self.cross_section = area;
        }
        self
    }

    /// Field sum; carrier metadata is taken from `self`.
    pub fn superpose(&self, other: &PhotonPacket) -> Result<PhotonPacket> {
        let mut out = self.clone();
        out.e = self.e.add(&other.e)?;
        out.b = self.b.add(&other.b)?;
        Ok(out)
    }

    pub fn scaled(&self, s: f64) -> PhotonPacket {
        let mut out = self.clone();
        out.e = self.e.scaled(s);
        out.b = self.b.scaled(s);
        out
    }

    pub fn wavelength(&self) -> f64 {
        2.0 * PI * self.constants.c / self.carrier_omega
    }

    /// Peak `|E|` on the lattice.
    pub fn peak_amplitude(&self) -> f64 {
        self.e.max_norm()
    }
}

/// Pointwise `eps0 E^2`.
pub fn energy_density(p: &PhotonPacket) -> ScalarField {
    let mut d = p.e.norm_sqr();
    let eps0 = p.constants.eps0;
    d = ScalarField::new(d.grid().clone(), d.values().iter().map(|v| eps0 * v).collect()).expect("finite");
    d
}

/// Pointwise `(E x B) / (mu0 c^2)`.
pub fn momentum_density(p: &PhotonPacket) -> Result<RealVectorField> {
    Ok(p.e.cross(&p.b)?.scaled(p.constants.poynting_prefactor()))
}

/// Pointwise `(E x A) / (mu0 c^2)` with `A` the Coulomb-gauge potential of `B`.
pub fn spin_density(p: &PhotonPacket) -> Result<RealVectorField> {
    let a = inverse_curl_coulomb(&p.b)?;
    Ok(p.e.cross(&a)?.scaled(p.constants.poynting_prefactor()))
}

/// Integrated energy, momentum and spin with the energy/spin and momentum/spin ratios.
pub fn summarize(p: &PhotonPacket) -> Result<DensitySummary> {
    let area = p.cross_section;
    let energy = energy_density(p).integrate()? * area;
    let momentum = vec3::scale(momentum_density(p)?.integrate()?, area);
    let spin = vec3::scale(spin_density(p)?.integrate()?, area);
    Ok(DensitySummary::from_totals(energy, momentum, spin))
}

/// Rescales the fields so that `|total spin| = target`.
pub fn normalize_to_spin(p: &PhotonPacket, target: f64) -> Result<PhotonPacket> {
    let s = summarize(p)?.spin_magnitude();
    if s == 0.0 || !s.is_finite() {
        return Err(Error::CannotNormalize);
    }
    Ok(p.scaled((target / s).sqrt()))
}

/// `E_n = hbar c n pi / L`, identical for both helicities.
pub fn quantized_mode_energy(n: u32, length: f64, constants: &PhysicalConstants) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidMode("mode number must be at least 1".into()));
    }
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::InvalidMode(format!("box length must be positive, got {length}")));
    }
    Ok(constants.hbar * constants.c * n as f64 * PI / length)
}

/// Free propagation with `w = c|k|` for a traveling packet.
///
/// Each field component is lifted to its analytic signal along the carrier
/// direction, advanced with [`spectral_propagate`] and projected back.
pub fn propagate(p: &PhotonPacket, time: f64) -> Result<PhotonPacket> {
    if p.kind != PhotonKind::Traveling {
        return Err(Error::UnsupportedGeometry("only traveling packets propagate freely".into()));
    }
    let n = vec3::normalized(p.carrier_k).ok_or_else(|| Error::InvalidInput("zero carrier".into()))?;
    let c = p.constants.c;
    let advance = |f: &RealVectorField| -> Result<RealVectorField> {
        let grid = f.grid();
        let t = Transform::new(grid);
        let mut comps: [Vec<f64>; 3] = Default::default();
        for (i, comp) in comps.iter_mut().enumerate() {
            let mut spec = t.forward_real(f.component(i), Parity::Odd);
            for (q, v) in spec.iter_mut().enumerate() {
                let along = vec3::dot(t.wavevector(q), n);
                *v *= if along > 0.0 { 2.0 } else { 0.0 };
            }
            let analytic = ComplexScalarField::new(grid.clone(), t.inverse(spec))?;
            let moved = spectral_propagate(&analytic, |k| c * vec3::norm(k), time)?;
            *comp = moved.values().iter().map(|v| v.re).collect();
        }
        RealVectorField::new(grid.clone(), comps)
    };
    let mut out = p.clone();
    out.e = advance(&p.e)?;
    out.b = advance(&p.b)?;
    Ok(out)
}

/// Photon scale for the closed-form checkpoint.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum PhotonScale {
    /// Ordinary frequency `f` (not angular).
    Frequency(f64),
    Energy(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum CheckpointVolume {
    /// One cubic wavelength.
    CubicWavelength,
    Fixed(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhotonCheckpoint {
    pub frequency: f64,
    pub wavelength: f64,
    pub energy: f64,
    pub volume: f64,
    /// Amplitude with `eps0 E0^2 volume = energy`.
    pub e0: f64,
}

/// Wavelength, photon energy and the field amplitude of one photon spread over `volume`.
pub fn photon_checkpoint(
    scale: PhotonScale,
    volume: CheckpointVolume,
    constants: &PhysicalConstants,
) -> Result<PhotonCheckpoint> {
    let (frequency, energy) = match scale {
        PhotonScale::Frequency(f) => (f, constants.h() * f),
        PhotonScale::Energy(e) => (e / constants.h(), e),
    };
    if !(frequency.is_finite() && frequency > 0.0) {
        return Err(Error::InvalidInput("photon frequency/energy must be positive".into()));
    }
    let wavelength = constants.c / frequency;
    let volume = match volume {
        CheckpointVolume::CubicWavelength => wavelength.powi(3),
        CheckpointVolume::Fixed(v) if v > 0.0 && v.is_finite() => v,
        CheckpointVolume::Fixed(v) => return Err(Error::InvalidInput(format!("volume must be positive, got {v}"))),
    };
    let e0 = (energy / (constants.eps0 * volume)).sqrt();
    Ok(PhotonCheckpoint { frequency, wavelength, energy, volume, e0 })
}
