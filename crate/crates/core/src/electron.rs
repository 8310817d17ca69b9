//! Massive rotating spin-field packets and their complex Schrödinger image.
//!
//! The real field `Psi = Psi0(r) [x' cos(theta) +/- y' sin(theta)]` rotates at
//! `w = gamma m c^2 / hbar` about its spin axis. Its energy density is
//! `KAPPA |Psi|^2`; spin is tied to energy by `S = E / 2w`, which is what gives
//! `E = hbar w` and `p = hbar k` once the total spin is `hbar / 2`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::lattice::{
    laplacian, spectrum, Boundary, ComplexScalarField, GridSpec, Parity, RealVectorField, ScalarField, Transform,
};
use crate::lorentz::lorentz_factor;
use crate::photon::{check_envelope, check_resolution, envelope_value, DensitySummary};
use crate::vec3::{self, Vec3};
use crate::{Envelope, Helicity};

/// Energy per unit `|Psi|^2`. Amplitudes are fixed by spin normalization, so
/// this constant only sets the unit of `Psi`.
pub const KAPPA: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ElectronKind {
    Traveling,
    /// Standing mode `n` between walls a distance `length` apart.
    BoxMode {
        n: u32,
        length: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ElectronPacket {
    pub psi: RealVectorField,
    pub rest_mass: f64,
    pub velocity: Vec3,
    pub spin_axis: Vec3,
    pub helicity: Helicity,
    pub carrier_omega: f64,
    pub carrier_k: Vec3,
    pub envelope: Envelope,
    pub kind: ElectronKind,
    /// Transverse area a one-dimensional lattice stands for; 1 on 3D lattices.
    pub cross_section: f64,
    pub constants: PhysicalConstants,
}

impl ElectronPacket {
    pub fn grid(&self) -> &GridSpec {
        self.psi.grid()
    }

    pub fn with_cross_section(mut self, area: f64) -> Self {
        if self.grid().dims() == 1 {
            self.cross_section = area;
        }
        self
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.psi = self.psi.scaled(s);
        out
    }

    /// Field sum; carrier metadata is taken from `self`.
    pub fn superpose(&self, other: &ElectronPacket) -> Result<Self> {
        let mut out = self.clone();
        out.psi = self.psi.add(&other.psi)?;
        Ok(out)
    }

    /// `m c^2 / hbar`.
    pub fn rest_omega(&self) -> f64 {
        rest_omega(self.rest_mass, &self.constants)
    }

    /// Orthonormal pair spanning the rotation plane, with `e1 x e2 = spin_axis`.
    pub fn rotation_basis(&self) -> (Vec3, Vec3) {
        vec3::transverse_basis(self.spin_axis)
    }
}

fn rest_omega(mass: f64, c: &PhysicalConstants) -> f64 {
    mass * c.c * c.c / c.hbar
}

fn check_mass(mass: f64) -> Result<()> {
    if mass.is_finite() && mass > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("rest mass must be positive, got {mass}")))
    }
}

/// Moving packet with carrier `w = gamma m c^2 / hbar`, `k = gamma m v / hbar`.
#[allow(clippy::too_many_arguments)]
pub fn make_electron_packet(
    mass: f64,
    velocity: Vec3,
    spin_axis: Vec3,
    helicity: Helicity,
    envelope: Envelope,
    grid: &GridSpec,
    constants: &PhysicalConstants,
) -> Result<ElectronPacket> {
    check_mass(mass)?;
    let gamma = lorentz_factor(velocity, constants.c)?;
    let axis = vec3::normalized(spin_axis).ok_or_else(|| Error::InvalidInput("zero spin axis".into()))?;
    if grid.has_dirichlet() {
        return Err(Error::UnsupportedGeometry("moving packets need a periodic or open lattice".into()));
    }
    let speed = vec3::norm(velocity);
    if grid.dims() == 1 && speed > 0.0 {
        if velocity[0] != 0.0 || velocity[1] != 0.0 {
            return Err(Error::UnsupportedGeometry("velocity must lie along the lattice line".into()));
        }
        if !vec3::is_parallel(axis, velocity, 1e-12) {
            return Err(Error::UnsupportedGeometry(
                "spin axis not parallel to the velocity needs a three-dimensional lattice".into(),
            ));
        }
    }
    let omega = gamma * rest_omega(mass, constants);
    let k = vec3::scale(velocity, gamma * mass / constants.hbar);
    check_resolution(grid, k)?;
    let k_mag = vec3::norm(k);
    let min_width = (k_mag > 0.0).then(|| 2.0 * PI / k_mag);
    let center = check_envelope(grid, k, &envelope, min_width)?;

    let (e1, e2) = vec3::transverse_basis(axis);
    let h = helicity.sign();
    let psi = RealVectorField::from_fn(grid, |r| {
        let theta = -vec3::dot(k, vec3::sub(r, center));
        let g = envelope_value(&envelope, center, grid, r);
        vec3::add(vec3::scale(e1, g * theta.cos()), vec3::scale(e2, h * g * theta.sin()))
    })?;
    Ok(ElectronPacket {
        psi,
        rest_mass: mass,
        velocity,
        spin_axis: axis,
        helicity,
        carrier_omega: omega,
        carrier_k: k,
        envelope,
        kind: ElectronKind::Traveling,
        cross_section: 1.0,
        constants: *constants,
    })
}

/// Pointwise `KAPPA |Psi|^2`.
pub fn electron_energy_density(p: &ElectronPacket) -> ScalarField {
    let d = p.psi.norm_sqr();
    ScalarField::new(d.grid().clone(), d.values().iter().map(|v| KAPPA * v).collect()).expect("finite")
}

/// Totals with `S = E / 2w` along `helicity * spin_axis` and the momentum
/// taken from the transform-space current of the complex image.
pub fn electron_summarize(p: &ElectronPacket) -> Result<DensitySummary> {
    let area = p.cross_section;
    let energy = electron_energy_density(p).integrate()? * area;
    let spin = vec3::scale(p.spin_axis, p.helicity.sign() * energy / (2.0 * p.carrier_omega));
    let spec = spectrum(&to_complex(p));
    let mut current = [0.0; 3];
    for ((k, c), nyq) in spec.wavevectors.iter().zip(&spec.coefficients).zip(&spec.nyquist) {
        if *nyq {
            continue;
        }
        let w = c.norm_sqr();
        for i in 0..3 {
            current[i] += w * k[i];
        }
    }
    let momentum = vec3::scale(current, KAPPA * p.grid().cell_volume() * area / p.carrier_omega);
    Ok(DensitySummary::from_totals(energy, momentum, spin))
}

/// Rescales the amplitude so that `|total spin| = hbar / 2`.
pub fn normalize_to_spin_half(p: &ElectronPacket) -> Result<ElectronPacket> {
    let s = electron_summarize(p)?.spin_magnitude();
    if s == 0.0 || !s.is_finite() {
        return Err(Error::CannotNormalize);
    }
    Ok(p.scaled((0.5 * p.constants.hbar / s).sqrt()))
}

/// `integral(E dV) / c^2`, equal to `gamma m` after normalization.
pub fn mass_functional(p: &ElectronPacket) -> Result<f64> {
    let c = p.constants.c;
    Ok(electron_energy_density(p).integrate()? * p.cross_section / (c * c))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeBroglie {
    /// `h / (gamma m v)`.
    pub wavelength: f64,
    /// `gamma m c^2 / hbar`.
    pub omega: f64,
    /// `(m c^2 + m v^2 / 2) / hbar`.
    pub omega_nonrelativistic: f64,
}

pub fn de_broglie_wavelength(mass: f64, speed: f64, constants: &PhysicalConstants) -> Result<DeBroglie> {
    check_mass(mass)?;
    if speed == 0.0 {
        return Err(Error::InfiniteWavelength);
    }
    if !(speed.is_finite() && speed > 0.0) {
        return Err(Error::InvalidInput(format!("speed must be positive, got {speed}")));
    }
    let gamma = lorentz_factor([speed, 0.0, 0.0], constants.c)?;
    let c2 = constants.c * constants.c;
    Ok(DeBroglie {
        wavelength: constants.h() / (gamma * mass * speed),
        omega: gamma * mass * c2 / constants.hbar,
        omega_nonrelativistic: (mass * c2 + 0.5 * mass * speed * speed) / constants.hbar,
    })
}

/// `E_n = m c^2 + (hbar n pi)^2 / (2 m L^2)`.
pub fn box_energy(n: u32, length: f64, mass: f64, constants: &PhysicalConstants) -> Result<f64> {
    check_mass(mass)?;
    if n == 0 {
        return Err(Error::InvalidMode("mode number must be at least 1".into()));
    }
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::InvalidMode(format!("box length must be positive, got {length}")));
    }
    let p = constants.hbar * n as f64 * PI / length;
    Ok(mass * constants.c * constants.c + p * p / (2.0 * mass))
}

/// Box eigenmode at time `t`: `Psi = [x cos(w t) +/- y sin(w t)] sin(k_n z)`, `w = E_n / hbar`.
pub fn box_mode_at(
    n: u32,
    length: f64,
    mass: f64,
    helicity: Helicity,
    grid: &GridSpec,
    constants: &PhysicalConstants,
    time: f64,
) -> Result<(ElectronPacket, f64)> {
    let energy = box_energy(n, length, mass, constants)?;
    let axis = grid.axes()[0];
    if grid.dims() != 1 || axis.boundary != Boundary::Dirichlet {
        return Err(Error::UnsupportedGeometry("box modes need a one-dimensional reflecting lattice".into()));
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
    let omega = energy / constants.hbar;
    let h = helicity.sign();
    let (cw, sw) = ((omega * time).cos(), (omega * time).sin());
    let psi = RealVectorField::from_fn(grid, |r| {
        let s = (k * r[2]).sin();
        [cw * s, h * sw * s, 0.0]
    })?
    .set_parity([Parity::Odd; 3]);
    let packet = ElectronPacket {
        psi,
        rest_mass: mass,
        velocity: [0.0; 3],
        spin_axis: [0.0, 0.0, 1.0],
        helicity,
        carrier_omega: omega,
        carrier_k: [0.0; 3],
        envelope: Envelope::Uniform,
        kind: ElectronKind::BoxMode { n, length },
        cross_section: 1.0,
        constants: *constants,
    };
    Ok((packet, energy))
}

pub fn box_mode(
    n: u32,
    length: f64,
    mass: f64,
    helicity: Helicity,
    grid: &GridSpec,
    constants: &PhysicalConstants,
) -> Result<(ElectronPacket, f64)> {
    box_mode_at(n, length, mass, helicity, grid, constants, 0.0)
}

/// `Psi_c = Psi.x' - i s Psi.y'` for map sign `s`.
pub fn to_complex_with_sign(p: &ElectronPacket, sign: f64) -> ComplexScalarField {
    let (e1, e2) = p.rotation_basis();
    let values = (0..p.psi.len())
        .map(|j| {
            let v = p.psi.at(j);
            Complex64::new(vec3::dot(v, e1), -sign * vec3::dot(v, e2))
        })
        .collect();
    ComplexScalarField::new(p.grid().clone(), values).expect("finite field")
}

/// Complex image with the map sign set by the packet helicity, so that both
/// helicities map to `Psi0 exp(-i theta)`.
pub fn to_complex(p: &ElectronPacket) -> ComplexScalarField {
    to_complex_with_sign(p, p.helicity.sign())
}

/// Inverse of [`to_complex`]: `Psi.x' = Re`, `Psi.y' = -/+ Im`.
pub fn from_complex(f: &ComplexScalarField, helicity: Helicity, spin_axis: Vec3) -> Result<RealVectorField> {
    let axis = vec3::normalized(spin_axis).ok_or_else(|| Error::InvalidInput("zero spin axis".into()))?;
    let (e1, e2) = vec3::transverse_basis(axis);
    let s = helicity.sign();
    let mut comps: [Vec<f64>; 3] = Default::default();
    for v in f.values() {
        let r = vec3::add(vec3::scale(e1, v.re), vec3::scale(e2, -s * v.im));
        for i in 0..3 {
            comps[i].push(r[i]);
        }
    }
    RealVectorField::new(f.grid().clone(), comps)
}

/// Rotates every field vector about the spin axis by `helicity * w * t`.
pub fn rotate_rigid(p: &ElectronPacket, time: f64) -> ElectronPacket {
    let angle = p.helicity.sign() * p.carrier_omega * time;
    let (c, s) = (angle.cos(), angle.sin());
    let n = p.spin_axis;
    let mut out = p.clone();
    out.psi = p.psi.map(|v| {
        // Rodrigues rotation
        let along = vec3::scale(n, vec3::dot(n, v) * (1.0 - c));
        vec3::add(vec3::add(vec3::scale(v, c), vec3::scale(vec3::cross(n, v), s)), along)
    });
    out
}

/// Source of `dPsi/dt` for [`schrodinger_residual`].
#[derive(Clone, Copy, Debug)]
pub enum TimeDerivative<'a> {
    /// Stationary state rotating as `exp(-i w t)`.
    Eigen { omega: f64 },
    /// Uniform snapshots (3 or 5) centred on the field under test.
    Series { snapshots: &'a [ComplexScalarField], dt: f64 },
}

/// `(m c^2 + U - hbar^2 lap / 2m) f` with `U` a potential energy.
pub fn apply_hamiltonian(
    f: &ComplexScalarField,
    mass: f64,
    potential_energy: Option<&ScalarField>,
    constants: &PhysicalConstants,
) -> Result<ComplexScalarField> {
    check_mass(mass)?;
    if let Some(u) = potential_energy {
        if u.grid() != f.grid() {
            return Err(Error::GridMismatch);
        }
    }
    let lap = laplacian(f)?;
    let rest = mass * constants.c * constants.c;
    let kin = -constants.hbar * constants.hbar / (2.0 * mass);
    let values = f
        .values()
        .iter()
        .zip(lap.values())
        .enumerate()
        .map(|(j, (v, l))| {
            let u = potential_energy.map_or(0.0, |u| u.values()[j]);
            v * (rest + u) + l * kin
        })
        .collect();
    ComplexScalarField::new(f.grid().clone(), values)
}

/// `||i hbar df/dt - H f|| / ||H f||`.
pub fn schrodinger_residual(
    f: &ComplexScalarField,
    mass: f64,
    potential_energy: Option<&ScalarField>,
    derivative: TimeDerivative<'_>,
    constants: &PhysicalConstants,
) -> Result<f64> {
    let hf = apply_hamiltonian(f, mass, potential_energy, constants)?;
    let lhs: Vec<Complex64> = match derivative {
        TimeDerivative::Eigen { omega } => f.values().iter().map(|v| v * (constants.hbar * omega)).collect(),
        TimeDerivative::Series { snapshots, dt } => {
            let weights: &[f64] = match snapshots.len() {
                3 => &[-0.5, 0.0, 0.5],
                5 => &[1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0],
                n => return Err(Error::InvalidInput(format!("need 3 or 5 snapshots, got {n}"))),
            };
            if !(dt.is_finite() && dt > 0.0) {
                return Err(Error::InvalidInput(format!("snapshot spacing must be positive, got {dt}")));
            }
            if snapshots.iter().any(|s| s.grid() != f.grid()) {
                return Err(Error::GridMismatch);
            }
            let i_hbar = Complex64::new(0.0, constants.hbar / dt);
            (0..f.values().len())
                .map(|j| {
                    let d: Complex64 = snapshots.iter().zip(weights).map(|(s, w)| s.values()[j] * *w).sum();
                    d * i_hbar
                })
                .collect()
        }
    };
    let diff = ComplexScalarField::new(f.grid().clone(), lhs.iter().zip(hf.values()).map(|(a, b)| a - b).collect())?;
    let denom = hf.sum_sqr();
    if denom == 0.0 {
        return Err(Error::InvalidInput("zero field".into()));
    }
    Ok((diff.sum_sqr() / denom).sqrt())
}

/// Frequency minimizing the eigen residual: `<f, H f> / (hbar <f, f>)`.
pub fn rayleigh_omega(
    f: &ComplexScalarField,
    mass: f64,
    potential_energy: Option<&ScalarField>,
    constants: &PhysicalConstants,
) -> Result<f64> {
    let hf = apply_hamiltonian(f, mass, potential_energy, constants)?;
    let num = f.inner(&hf)?;
    let den = f.norm_sqr();
    if den == 0.0 {
        return Err(Error::InvalidInput("zero field".into()));
    }
    Ok(num.re / (den * constants.hbar))
}

/// Kinetic dispersion used by the split-step propagator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dispersion {
    /// `m c^2 + hbar^2 k^2 / 2m`.
    #[default]
    NonRelativistic,
    /// `sqrt((m c^2)^2 + (hbar k c)^2)`.
    Relativistic,
}

impl Dispersion {
    /// Energy of a mode with kinetic wavevector `k`.
    pub fn energy(self, k: Vec3, mass: f64, constants: &PhysicalConstants) -> f64 {
        let rest = mass * constants.c * constants.c;
        let p2 = constants.hbar * constants.hbar * vec3::dot(k, k);
        match self {
            Dispersion::NonRelativistic => rest + p2 / (2.0 * mass),
            Dispersion::Relativistic => (rest * rest + p2 * constants.c * constants.c).sqrt(),
        }
    }
}

/// Electromagnetic potentials seen by the propagator.
pub trait Potentials {
    /// Scalar potential (volts in SI) at time `t`; `None` means zero.
    fn scalar(&self, grid: &GridSpec, t: f64) -> Result<Option<ScalarField>>;
    /// Vector potential at time `t`; `None` means zero.
    fn vector(&self, grid: &GridSpec, t: f64) -> Result<Option<RealVectorField>>;
    /// `dA/dt`; defaults to a fourth-order central difference.
    fn vector_rate(&self, grid: &GridSpec, t: f64, dt: f64) -> Result<Option<RealVectorField>> {
        let h = dt / 8.0;
        let samples = [
            self.vector(grid, t - 2.0 * h)?,
            self.vector(grid, t - h)?,
            self.vector(grid, t + h)?,
            self.vector(grid, t + 2.0 * h)?,
        ];
        if samples.iter().all(Option::is_none) {
            return Ok(None);
        }
        let w = [1.0 / 12.0, -2.0 / 3.0, 2.0 / 3.0, -1.0 / 12.0];
        let mut acc = RealVectorField::zeros(grid);
        for (s, w) in samples.iter().zip(w) {
            if let Some(a) = s {
                acc = acc.add(&a.scaled(w / h))?;
            }
        }
        Ok(Some(acc))
    }
}

/// Time-independent potentials.
#[derive(Clone, Debug, Default)]
pub struct StaticPotentials {
    pub scalar: Option<ScalarField>,
    pub vector: Option<RealVectorField>,
}

impl StaticPotentials {
    pub fn none() -> Self {
        Self::default()
    }
}

impl Potentials for StaticPotentials {
    fn scalar(&self, _grid: &GridSpec, _t: f64) -> Result<Option<ScalarField>> {
        Ok(self.scalar.clone())
    }

    fn vector(&self, _grid: &GridSpec, _t: f64) -> Result<Option<RealVectorField>> {
        Ok(self.vector.clone())
    }

    fn vector_rate(&self, _grid: &GridSpec, _t: f64, _dt: f64) -> Result<Option<RealVectorField>> {
        Ok(None)
    }
}

/// Parameters of a split-step run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evolution {
    pub mass: f64,
    /// Coupling charge `q`: potential energy `q V`, kinetic momentum `hbar k - q A`.
    pub charge: f64,
    pub dt: f64,
    pub steps: usize,
    pub start_time: f64,
    pub dispersion: Dispersion,
}

impl Evolution {
    pub fn new(mass: f64, charge: f64, dt: f64, steps: usize) -> Self {
        Self { mass, charge, dt, steps, start_time: 0.0, dispersion: Dispersion::NonRelativistic }
    }

    pub fn with_dispersion(mut self, dispersion: Dispersion) -> Self {
        self.dispersion = dispersion;
        self
    }

    pub fn starting_at(mut self, t: f64) -> Self {
        self.start_time = t;
        self
    }
}

/// Largest `dt max|U| / hbar` a single potential step may take.
pub const SPLIT_STEP_PHASE_LIMIT: f64 = 0.1;

/// Potentials at one instant, decomposed for the split-step scheme.
///
/// The uniform part of `A` along resolved directions shifts the kinetic
/// wavevector. On lines the varying `A_z` is removed by the gauge phase
/// `chi = integral(dA_z dz)`, which adds `q dchi/dt` to the potential energy.
/// Components along unresolved directions only enter through `q^2 A^2 / 2m`.
struct Decomposed {
    k_shift: Vec3,
    potential_energy: Vec<f64>,
    chi: Option<Vec<f64>>,
}

fn spectral_antiderivative(t: &Transform, data: &[f64]) -> Vec<f64> {
    let mut spec = t.forward_real(data, Parity::Odd);
    for (q, v) in spec.iter_mut().enumerate() {
        let k = t.wavevector(q)[2];
        *v = if k == 0.0 || t.is_nyquist(q) { Complex64::default() } else { *v / Complex64::new(0.0, k) };
    }
    t.inverse_real(spec)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn decompose(
    pot: &dyn Potentials,
    grid: &GridSpec,
    t: &Transform,
    ev: &Evolution,
    time: f64,
    constants: &PhysicalConstants,
) -> Result<Decomposed> {
    let n = grid.len();
    let q = ev.charge;
    let mut potential_energy = match pot.scalar(grid, time)? {
        Some(v) => {
            if v.grid() != grid {
                return Err(Error::GridMismatch);
            }
            v.values().iter().map(|x| q * x).collect()
        }
        None => vec![0.0; n],
    };
    let mut k_shift = [0.0; 3];
    let mut chi = None;
    if let Some(a) = pot.vector(grid, time)? {
        if a.grid() != grid {
            return Err(Error::GridMismatch);
        }
        let scale = a.max_norm().max(f64::MIN_POSITIVE);
        for dir in 0..3 {
            let comp = a.component(dir);
            let m = mean(comp);
            let varying = comp.iter().any(|x| (x - m).abs() > 1e-12 * scale);
            if grid.resolves(dir) {
                k_shift[dir] = q * m / constants.hbar;
                if varying {
                    if grid.dims() != 1 {
                        return Err(Error::UnsupportedGeometry(
                            "non-uniform vector potentials are only supported on lines".into(),
                        ));
                    }
                    let delta: Vec<f64> = comp.iter().map(|x| x - m).collect();
                    chi = Some(spectral_antiderivative(t, &delta));
                }
            } else {
                if varying && ev.dispersion == Dispersion::Relativistic {
                    return Err(Error::UnsupportedGeometry(
                        "relativistic dispersion needs a uniform transverse vector potential".into(),
                    ));
                }
                match ev.dispersion {
                    Dispersion::NonRelativistic => {
                        for (u, x) in potential_energy.iter_mut().zip(comp) {
                            *u += q * q * x * x / (2.0 * ev.mass);
                        }
                    }
                    // enters the square root through the wavevector
                    Dispersion::Relativistic => k_shift[dir] = q * m / constants.hbar,
                }
            }
        }
        if chi.is_some() {
            let rate = pot.vector_rate(grid, time, ev.dt)?;
            if let Some(r) = rate {
                let zr = r.component(2);
                let m = mean(zr);
                let delta: Vec<f64> = zr.iter().map(|x| x - m).collect();
                for (u, d) in potential_energy.iter_mut().zip(spectral_antiderivative(t, &delta)) {
                    *u += q * d;
                }
            }
        }
    }
    Ok(Decomposed { k_shift, potential_energy, chi })
}

fn gauge_rotate(values: &mut [Complex64], chi: &Option<Vec<f64>>, factor: f64) {
    if let Some(chi) = chi {
        for (v, c) in values.iter_mut().zip(chi) {
            *v *= Complex64::from_polar(1.0, factor * c);
        }
    }
}

fn kinetic_step(
    t: &Transform,
    values: &mut Vec<Complex64>,
    k_shift: Vec3,
    ev: &Evolution,
    time: f64,
    constants: &PhysicalConstants,
) {
    let mut spec = t.forward(values, Parity::Odd);
    for (q, v) in spec.iter_mut().enumerate() {
        let k = vec3::sub(t.wavevector(q), k_shift);
        let e = ev.dispersion.energy(k, ev.mass, constants);
        *v *= Complex64::from_polar(1.0, -e * time / constants.hbar);
    }
    *values = t.inverse(spec);
}

fn check_evolution(f: &ComplexScalarField, ev: &Evolution) -> Result<()> {
    check_mass(ev.mass)?;
    if !f.grid().all(Boundary::Periodic) {
        return Err(Error::UnsupportedGeometry("split-step evolution needs a periodic lattice".into()));
    }
    if !(ev.dt.is_finite() && ev.dt > 0.0) {
        return Err(Error::InvalidInput(format!("time step must be positive, got {}", ev.dt)));
    }
    Ok(())
}

/// Symmetric split-step evolution calling `observe(time, values)` before the
/// first step and after every step.
pub fn evolve_observed(
    f: &ComplexScalarField,
    pot: &dyn Potentials,
    ev: &Evolution,
    constants: &PhysicalConstants,
    mut observe: impl FnMut(f64, &[Complex64]),
) -> Result<ComplexScalarField> {
    check_evolution(f, ev)?;
    let grid = f.grid();
    let t = Transform::new(grid);
    let hbar = constants.hbar;
    let mut values = f.values().to_vec();
    observe(ev.start_time, &values);
    for step in 0..ev.steps {
        let t0 = ev.start_time + step as f64 * ev.dt;
        let first = decompose(pot, grid, &t, ev, t0 + 0.25 * ev.dt, constants)?;
        let mid = decompose(pot, grid, &t, ev, t0 + 0.5 * ev.dt, constants)?;
        let second = decompose(pot, grid, &t, ev, t0 + 0.75 * ev.dt, constants)?;
        let max_u = mid.potential_energy.iter().fold(0.0_f64, |m, u| m.max(u.abs()));
        let phase = ev.dt * max_u / hbar;
        if phase >= SPLIT_STEP_PHASE_LIMIT {
            return Err(Error::StepTooLarge { phase });
        }
        // psi = exp(i q chi / hbar) phi; phi is what the split steps act on
        let boundary_chi =
            |time: f64| -> Result<Option<Vec<f64>>> { Ok(decompose(pot, grid, &t, ev, time, constants)?.chi) };
        let chi_start = if mid.chi.is_some() { boundary_chi(t0)? } else { None };
        gauge_rotate(&mut values, &chi_start, -ev.charge / hbar);
        kinetic_step(&t, &mut values, first.k_shift, ev, 0.5 * ev.dt, constants);
        for (v, u) in values.iter_mut().zip(&mid.potential_energy) {
            *v *= Complex64::from_polar(1.0, -u * ev.dt / hbar);
        }
        kinetic_step(&t, &mut values, second.k_shift, ev, 0.5 * ev.dt, constants);
        let chi_end = if mid.chi.is_some() { boundary_chi(t0 + ev.dt)? } else { None };
        gauge_rotate(&mut values, &chi_end, ev.charge / hbar);
        observe(t0 + ev.dt, &values);
    }
    ComplexScalarField::new(grid.clone(), values)
}

/// Split-step evolution recording the field at the flat lattice index `probe`
/// before the first step and after every step.
pub fn evolve_with_probe(
    f: &ComplexScalarField,
    pot: &dyn Potentials,
    ev: &Evolution,
    probe: usize,
    constants: &PhysicalConstants,
) -> Result<(ComplexScalarField, Vec<Complex64>)> {
    if probe >= f.grid().len() {
        return Err(Error::InvalidInput(format!("probe index {probe} outside the lattice")));
    }
    let mut series = Vec::with_capacity(ev.steps + 1);
    let out = evolve_observed(f, pot, ev, constants, |_, v| series.push(v[probe]))?;
    Ok((out, series))
}

/// Symmetric split-step evolution of the complex field over `ev.steps` steps.
pub fn evolve_schrodinger(
    f: &ComplexScalarField,
    pot: &dyn Potentials,
    ev: &Evolution,
    constants: &PhysicalConstants,
) -> Result<ComplexScalarField> {
    evolve_observed(f, pot, ev, constants, |_, _| {})
}

/// `<H>` at time `t` per unit norm, with the same dispersion and coupling as the propagator.
pub fn energy_expectation(
    f: &ComplexScalarField,
    pot: &dyn Potentials,
    ev: &Evolution,
    time: f64,
    constants: &PhysicalConstants,
) -> Result<f64> {
    check_evolution(f, ev)?;
    let grid = f.grid();
    let t = Transform::new(grid);
    let d = decompose(pot, grid, &t, ev, time, constants)?;
    let mut values = f.values().to_vec();
    gauge_rotate(&mut values, &d.chi, -ev.charge / constants.hbar);
    let spec = t.forward(&values, Parity::Odd);
    let mut kin = 0.0;
    let mut total = 0.0;
    for (q, v) in spec.iter().enumerate() {
        let w = v.norm_sqr();
        kin += w * ev.dispersion.energy(vec3::sub(t.wavevector(q), d.k_shift), ev.mass, constants);
        total += w;
    }
    if total == 0.0 {
        return Err(Error::InvalidInput("zero field".into()));
    }
    let norm: f64 = values.iter().map(|v| v.norm_sqr()).sum();
    let pot_e: f64 = values.iter().zip(&d.potential_energy).map(|(v, u)| v.norm_sqr() * u).sum();
    Ok(kin / total + pot_e / norm)
}

/// Product of stationary complex fields with additive energies.
#[derive(Clone, Debug, PartialEq)]
pub struct CompositeState {
    pub components: Vec<ComplexScalarField>,
    pub energies: Vec<f64>,
    pub total_energy: f64,
    pub product: ComplexScalarField,
}

pub fn composite_product(states: &[(ComplexScalarField, f64)]) -> Result<CompositeState> {
    let (first, _) = states.first().ok_or_else(|| Error::InvalidInput("empty composite".into()))?;
    let mut product = first.clone();
    for (f, _) in &states[1..] {
        product = product.mul(f)?;
    }
    let energies: Vec<f64> = states.iter().map(|(_, e)| *e).collect();
    Ok(CompositeState {
        components: states.iter().map(|(f, _)| f.clone()).collect(),
        total_energy: energies.iter().sum(),
        energies,
        product,
    })
}

impl CompositeState {
    /// Evolves each component freely for `steps` of `dt` and rebuilds the product.
    pub fn evolve(&self, mass: f64, dt: f64, steps: usize, constants: &PhysicalConstants) -> Result<CompositeState> {
        let ev = Evolution::new(mass, 0.0, dt, steps);
        let states = self
            .components
            .iter()
            .zip(&self.energies)
            .map(|(f, e)| Ok((evolve_schrodinger(f, &StaticPotentials::none(), &ev, constants)?, *e)))
            .collect::<Result<Vec<_>>>()?;
        composite_product(&states)
    }
}

/// Least-squares rotation rate `w` of snapshots evolving as `exp(-i w t)`,
/// from the unwrapped phase of their overlap with the first snapshot.
/// Consecutive snapshots must differ by less than half a turn.
pub fn fit_phase_rate(snapshots: &[ComplexScalarField], times: &[f64]) -> Result<f64> {
    if snapshots.len() != times.len() || snapshots.len() < 2 {
        return Err(Error::InvalidInput("need at least two snapshots with matching times".into()));
    }
    let reference = &snapshots[0];
    let mut phases = Vec::with_capacity(snapshots.len());
    let mut last = 0.0_f64;
    for s in snapshots {
        let raw = reference.inner(s)?.arg();
        let mut unwrapped = raw + 2.0 * PI * ((last - raw) / (2.0 * PI)).round();
        if phases.is_empty() {
            unwrapped = raw;
        }
        phases.push(unwrapped);
        last = unwrapped;
    }
    let n = times.len() as f64;
    let tm = times.iter().sum::<f64>() / n;
    let pm = phases.iter().sum::<f64>() / n;
    let (mut num, mut den) = (0.0, 0.0);
    for (t, p) in times.iter().zip(&phases) {
        num += (t - tm) * (p - pm);
        den += (t - tm) * (t - tm);
    }
    Ok(-num / den)
}

/// Shape traced by the tip of the field vector carried along with the packet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrajectoryShape {
    /// Packet at rest: the tip stays on a circle.
    Circle,
    /// Rotation plane normal to the motion.
    Helix,
    /// Rotation plane containing the motion.
    Cycloid,
    Other,
}

/// Tip of `display_scale * Psi_hat` riding at the packet velocity from the
/// lattice point nearest the envelope centre. Along that path the carrier
/// phase advances at `w - k.v`.
pub fn tip_trajectory(p: &ElectronPacket, display_scale: f64, times: &[f64]) -> Result<Vec<Vec3>> {
    let centre = match p.envelope {
        Envelope::Gaussian { center: Some(c), .. } => c,
        _ => p.grid().center(),
    };
    let start = (0..p.psi.len())
        .min_by(|&a, &b| {
            let da = vec3::norm(vec3::sub(p.grid().position(a), centre));
            let db = vec3::norm(vec3::sub(p.grid().position(b), centre));
            da.total_cmp(&db)
        })
        .expect("non-empty lattice");
    let v0 = p.psi.at(start);
    let unit = vec3::normalized(v0).ok_or_else(|| Error::InvalidInput("field vanishes at the packet centre".into()))?;
    let rate = p.carrier_omega - vec3::dot(p.carrier_k, p.velocity);
    let n = p.spin_axis;
    Ok(times
        .iter()
        .map(|&t| {
            let a = p.helicity.sign() * rate * t;
            let (c, s) = (a.cos(), a.sin());
            let r = vec3::add(
                vec3::add(vec3::scale(unit, c), vec3::scale(vec3::cross(n, unit), s)),
                vec3::scale(n, vec3::dot(n, unit) * (1.0 - c)),
            );
            vec3::add(vec3::scale(p.velocity, t), vec3::scale(r, display_scale))
        })
        .collect())
}

/// Classifies a tip path by comparing the normal of its rotation plane with the drift direction.
pub fn classify_trajectory(points: &[Vec3], velocity: Vec3, times: &[f64]) -> TrajectoryShape {
    if points.len() < 3 || points.len() != times.len() {
        return TrajectoryShape::Other;
    }
    let rel: Vec<Vec3> = points.iter().zip(times).map(|(x, &t)| vec3::sub(*x, vec3::scale(velocity, t))).collect();
    let mut normal = [0.0; 3];
    for w in rel.windows(2) {
        normal = vec3::add(normal, vec3::cross(w[0], w[1]));
    }
    let Some(normal) = vec3::normalized(normal) else {
        return TrajectoryShape::Other;
    };
    let Some(drift) = vec3::normalized(velocity) else {
        return TrajectoryShape::Circle;
    };
    let c = vec3::dot(normal, drift).abs();
    if c > 1.0 - 1e-9 {
        TrajectoryShape::Helix
    } else if c < 1e-9 {
        TrajectoryShape::Cycloid
    } else {
        TrajectoryShape::Other
    }
}
