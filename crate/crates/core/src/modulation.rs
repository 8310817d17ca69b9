//! Frequency and wavevector modulation of the complex field by
//! electromagnetic potentials, sideband analysis and transition bookkeeping.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::electron::{energy_expectation, evolve_observed, evolve_with_probe, Dispersion, Evolution, Potentials};
use crate::error::{Error, Result};
use crate::lattice::{spectrum, ComplexScalarField, GridSpec, RealVectorField, ScalarField};
use crate::vec3::{self, Vec3};

/// `V = V_s + V0 cos(w t - k.r + phi)` and `A = A_s + A0 cos(w t - k.r + phi)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialField {
    pub v_static: f64,
    pub v0: f64,
    pub a_static: Vec3,
    pub a0: Vec3,
    pub omega_ph: f64,
    pub k_ph: Vec3,
    pub phase: f64,
    /// Oscillating part is a free photon: `w = c |k|` is enforced.
    pub free_photon: bool,
}

impl PotentialField {
    pub fn zero() -> Self {
        Self {
            v_static: 0.0,
            v0: 0.0,
            a_static: [0.0; 3],
            a0: [0.0; 3],
            omega_ph: 0.0,
            k_ph: [0.0; 3],
            phase: 0.0,
            free_photon: false,
        }
    }

    pub fn constant(v: f64) -> Self {
        Self { v_static: v, ..Self::zero() }
    }

    /// Spatially uniform `V0 cos(w t + phi)`.
    pub fn oscillating(v0: f64, omega_ph: f64, phase: f64) -> Self {
        Self { v0, omega_ph, phase, ..Self::zero() }
    }

    pub fn traveling(v0: f64, a0: Vec3, omega_ph: f64, k_ph: Vec3, phase: f64) -> Self {
        Self { v0, a0, omega_ph, k_ph, phase, ..Self::zero() }
    }

    pub fn validate(&self, constants: &PhysicalConstants) -> Result<()> {
        let finite = [self.v_static, self.v0, self.omega_ph, self.phase]
            .iter()
            .chain(&self.a_static)
            .chain(&self.a0)
            .chain(&self.k_ph)
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidInput("non-finite potential parameter".into()));
        }
        if self.free_photon {
            let ck = constants.c * vec3::norm(self.k_ph);
            if (self.omega_ph - ck).abs() > 1e-12 * self.omega_ph.abs().max(ck) {
                return Err(Error::InvalidInput(format!(
                    "free-photon potential needs w = c|k|, got w = {} and c|k| = {ck}",
                    self.omega_ph
                )));
            }
        }
        Ok(())
    }

    fn argument(&self, r: Vec3, t: f64) -> f64 {
        self.omega_ph * t - vec3::dot(self.k_ph, r) + self.phase
    }

    pub fn scalar_at(&self, r: Vec3, t: f64) -> f64 {
        self.v_static + self.v0 * self.argument(r, t).cos()
    }

    pub fn vector_at(&self, r: Vec3, t: f64) -> Vec3 {
        vec3::add(self.a_static, vec3::scale(self.a0, self.argument(r, t).cos()))
    }

    /// `E = -grad V - dA/dt`.
    pub fn electric_field_at(&self, r: Vec3, t: f64) -> Vec3 {
        let s = self.argument(r, t).sin();
        vec3::scale(vec3::sub(vec3::scale(self.a0, self.omega_ph), vec3::scale(self.k_ph, self.v0)), s)
    }

    /// Largest `|E - target| / max|target|` over the lattice at time `t`.
    pub fn gauge_mismatch(&self, grid: &GridSpec, t: f64, target: &RealVectorField) -> Result<f64> {
        if target.grid() != grid {
            return Err(Error::GridMismatch);
        }
        let scale = target.max_norm();
        let mut worst = 0.0_f64;
        for j in 0..grid.len() {
            let e = self.electric_field_at(grid.position(j), t);
            worst = worst.max(vec3::norm(vec3::sub(e, target.at(j))));
        }
        Ok(if scale > 0.0 { worst / scale } else { worst })
    }

    fn has_vector(&self) -> bool {
        self.a_static.iter().chain(&self.a0).any(|v| *v != 0.0)
    }
}

impl Potentials for PotentialField {
    fn scalar(&self, grid: &GridSpec, t: f64) -> Result<Option<ScalarField>> {
        if self.v_static == 0.0 && self.v0 == 0.0 {
            return Ok(None);
        }
        ScalarField::from_fn(grid, |r| self.scalar_at(r, t)).map(Some)
    }

    fn vector(&self, grid: &GridSpec, t: f64) -> Result<Option<RealVectorField>> {
        if !self.has_vector() {
            return Ok(None);
        }
        RealVectorField::from_fn(grid, |r| self.vector_at(r, t)).map(Some)
    }

    fn vector_rate(&self, grid: &GridSpec, t: f64, _dt: f64) -> Result<Option<RealVectorField>> {
        if !self.has_vector() {
            return Ok(None);
        }
        RealVectorField::from_fn(grid, |r| vec3::scale(self.a0, -self.omega_ph * self.argument(r, t).sin())).map(Some)
    }
}

/// `(E + q V, p + q A)` with `q` the elementary charge.
pub fn shift_energy_momentum(
    energy: f64,
    momentum: Vec3,
    v: f64,
    a: Vec3,
    constants: &PhysicalConstants,
) -> (f64, Vec3) {
    let q = constants.elementary_charge;
    (energy + q * v, vec3::add(momentum, vec3::scale(a, q)))
}

/// FM modulation index `e V0 / (hbar w_ph)`.
pub fn modulation_index(v0: f64, omega_ph: f64, constants: &PhysicalConstants) -> f64 {
    constants.elementary_charge * v0 / (constants.hbar * omega_ph)
}

/// First-order sideband to carrier amplitude ratio of pure FM: `J1(b) / J0(b)`.
pub fn bessel_sideband_ratio(index: f64) -> f64 {
    libm::j1(index) / libm::j0(index)
}

/// Bessel function of the first kind `J_n`.
pub fn bessel_j(n: i32, x: f64) -> f64 {
    libm::jn(n, x)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModulationRun {
    pub field: ComplexScalarField,
    /// Probe samples at `times`.
    pub probe: Vec<Complex64>,
    pub times: Vec<f64>,
    pub dt: f64,
}

/// Settings for [`modulate_packet`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModulationSettings {
    pub mass: f64,
    pub duration: f64,
    pub dt: f64,
    /// Flat lattice index sampled every step.
    pub probe: usize,
    pub dispersion: Dispersion,
}

/// Highest angular frequency the probe must resolve: the field energy plus
/// the largest potential energy, and the modulation frequency.
fn max_signal_frequency(
    f: &ComplexScalarField,
    pot: &PotentialField,
    ev: &Evolution,
    constants: &PhysicalConstants,
) -> Result<f64> {
    let free = energy_expectation(f, &PotentialField::zero(), ev, 0.0, constants)?;
    let shift = constants.elementary_charge * (pot.v_static.abs() + pot.v0.abs());
    Ok(((free.abs() + shift) / constants.hbar).max(pot.omega_ph.abs()))
}

/// Evolves `f` under `pot` with the elementary charge as coupling and records
/// the field at the probe point every step.
pub fn modulate_packet(
    f: &ComplexScalarField,
    pot: &PotentialField,
    settings: &ModulationSettings,
    constants: &PhysicalConstants,
) -> Result<ModulationRun> {
    pot.validate(constants)?;
    let ModulationSettings { mass, duration, dt, probe, dispersion } = *settings;
    if !(duration.is_finite() && duration > 0.0 && dt.is_finite() && dt > 0.0) {
        return Err(Error::Sampling(format!("duration {duration} and step {dt} must be positive")));
    }
    if pot.omega_ph != 0.0 && duration < 10.0 * 2.0 * PI / pot.omega_ph.abs() {
        return Err(Error::Sampling(format!("duration {duration:e} covers fewer than 10 modulation periods")));
    }
    let steps = (duration / dt).round() as usize;
    let ev = Evolution::new(mass, constants.elementary_charge, dt, steps).with_dispersion(dispersion);
    let w_max = max_signal_frequency(f, pot, &ev, constants)?;
    if dt > 2.0 * PI / (20.0 * w_max) {
        return Err(Error::Sampling(format!("step {dt:e} exceeds 1/20 of the shortest period {:e}", 2.0 * PI / w_max)));
    }
    let (field, probe) = evolve_with_probe(f, pot, &ev, probe, constants)?;
    let times = (0..=steps).map(|j| j as f64 * dt).collect();
    Ok(ModulationRun { field, probe, times, dt })
}

/// Minimum number of samples accepted by [`sideband_spectrum`].
pub const MIN_SERIES_LEN: usize = 1024;
/// Zero-padding factor of the spectral estimate.
const PAD: usize = 4;
/// Half-width of the Blackman-Harris main lobe in unpadded bins.
const LOBE_BINS: usize = 4;

/// Windowed power spectrum of a uniformly sampled series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerSpectrum {
    /// Angular frequencies, ascending; a component `exp(-i w t)` appears at `+w`.
    pub omega: Vec<f64>,
    /// Power normalized so a unit-amplitude tone integrates to 1 over its main lobe.
    pub power: Vec<f64>,
    /// Resolution of the record, `2 pi / (N dt)`.
    pub bin: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralPeak {
    pub omega: f64,
    /// Squared amplitude of the tone.
    pub power: f64,
}

fn blackman_harris(n: usize) -> Vec<f64> {
    let (a0, a1, a2, a3) = (0.35875, 0.48829, 0.14128, 0.01168);
    (0..n)
        .map(|j| {
            let x = 2.0 * PI * j as f64 / n as f64;
            a0 - a1 * x.cos() + a2 * (2.0 * x).cos() - a3 * (3.0 * x).cos()
        })
        .collect()
}

pub fn power_spectrum(series: &[Complex64], dt: f64) -> Result<PowerSpectrum> {
    if series.len() < MIN_SERIES_LEN {
        return Err(Error::Resolution(format!("series has {} samples, need at least {MIN_SERIES_LEN}", series.len())));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Sampling(format!("sample spacing must be positive, got {dt}")));
    }
    if let Some(index) = series.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::NonFinite { index });
    }
    let n = series.len();
    let m = n * PAD;
    let w = blackman_harris(n);
    let mut buf = vec![Complex64::default(); m];
    for (j, (x, wj)) in series.iter().zip(&w).enumerate() {
        buf[j] = x * wj;
    }
    // sum_j x_j exp(+i w t_j)
    FftPlanner::<f64>::new().plan_fft_inverse(m).process(&mut buf);
    let norm = 1.0 / (m as f64 * w.iter().map(|v| v * v).sum::<f64>());
    let d_omega = 2.0 * PI / (m as f64 * dt);
    let half = m / 2;
    let mut omega = Vec::with_capacity(m);
    let mut power = Vec::with_capacity(m);
    for i in 0..m {
        // ascending order: indices half..m are negative frequencies
        let idx = (i + half) % m;
        let f = if idx >= half { idx as f64 - m as f64 } else { idx as f64 };
        omega.push(f * d_omega);
        power.push(buf[idx].norm_sqr() * norm);
    }
    Ok(PowerSpectrum { omega, power, bin: 2.0 * PI / (n as f64 * dt) })
}

/// Peaks whose lobe power exceeds `threshold` times the strongest one,
/// located by a parabola through the log power of the three top samples.
pub fn sideband_spectrum(series: &[Complex64], dt: f64, threshold: f64) -> Result<Vec<SpectralPeak>> {
    let spec = power_spectrum(series, dt)?;
    Ok(find_peaks(&spec, threshold))
}

pub fn find_peaks(spec: &PowerSpectrum, threshold: f64) -> Vec<SpectralPeak> {
    let p = &spec.power;
    let m = p.len();
    let lobe = LOBE_BINS * PAD;
    let d_omega = spec.omega[1] - spec.omega[0];
    let mut peaks: Vec<(usize, SpectralPeak)> = Vec::new();
    for i in 1..m - 1 {
        if !(p[i] > p[i - 1] && p[i] >= p[i + 1]) {
            continue;
        }
        let lo = i.saturating_sub(lobe);
        let hi = (i + lobe).min(m - 1);
        if p[lo..=hi].iter().any(|&v| v > p[i]) {
            continue;
        }
        let (a, b, c) = (p[i - 1].max(1e-300).ln(), p[i].max(1e-300).ln(), p[i + 1].max(1e-300).ln());
        let denom = a - 2.0 * b + c;
        let offset = if denom < 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
        let power = p[lo..=hi].iter().sum::<f64>();
        peaks.push((i, SpectralPeak { omega: spec.omega[i] + offset * d_omega, power }));
    }
    let max = peaks.iter().map(|(_, pk)| pk.power).fold(0.0_f64, f64::max);
    peaks.retain(|(_, pk)| pk.power >= threshold * max && pk.power > 0.0);
    peaks.into_iter().map(|(_, pk)| pk).collect()
}

/// Strongest peak within `tolerance` of `omega`.
pub fn peak_near(peaks: &[SpectralPeak], omega: f64, tolerance: f64) -> Option<SpectralPeak> {
    peaks.iter().filter(|p| (p.omega - omega).abs() <= tolerance).max_by(|a, b| a.power.total_cmp(&b.power)).copied()
}

/// Energy-momentum bookkeeping for absorbing (`sign = +1`) or emitting (`-1`) a photon.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConservationLedger {
    pub initial: (f64, Vec3),
    /// `(hbar w_ph, hbar k_ph)`.
    pub photon: (f64, Vec3),
    pub sign: i8,
    pub predicted_final: (f64, Vec3),
    pub final_state: (f64, Vec3),
    /// `final - initial - sign * photon`.
    pub residual: (f64, Vec3),
}

pub fn transition_ledger(
    initial: (f64, Vec3),
    photon: (f64, Vec3),
    sign: i8,
    measured_final: Option<(f64, Vec3)>,
    constants: &PhysicalConstants,
) -> Result<ConservationLedger> {
    if sign != 1 && sign != -1 {
        return Err(Error::InvalidInput(format!("transition sign must be +1 or -1, got {sign}")));
    }
    let s = sign as f64;
    let quantum = (constants.hbar * photon.0, vec3::scale(photon.1, constants.hbar));
    let predicted_final = (initial.0 + s * quantum.0, vec3::add(initial.1, vec3::scale(quantum.1, s)));
    let (final_state, residual) = match measured_final {
        Some(m) => {
            (m, (m.0 - initial.0 - s * quantum.0, vec3::sub(vec3::sub(m.1, initial.1), vec3::scale(quantum.1, s))))
        }
        None => (predicted_final, (0.0, [0.0; 3])),
    };
    Ok(ConservationLedger { initial, photon: quantum, sign, predicted_final, final_state, residual })
}

/// Frequency and wavevector of a spectral satellite grown during evolution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SatelliteMeasurement {
    /// Line frequency of the satellite mode amplitude.
    pub omega: f64,
    /// Power-weighted wavevector of the final field within the window.
    pub k: Vec3,
    /// Fraction of the final norm inside the window.
    pub weight: f64,
    pub spectral_bin: f64,
    pub transform_bin: Vec3,
}

/// Evolves `f` under `pot` and measures the satellite near `k_target`:
/// its frequency from the time series of the nearest transform mode, its
/// wavevector from the final field restricted to `window` bins around it.
pub fn measure_satellite(
    f: &ComplexScalarField,
    pot: &PotentialField,
    settings: &ModulationSettings,
    k_target: Vec3,
    window: usize,
    constants: &PhysicalConstants,
) -> Result<SatelliteMeasurement> {
    pot.validate(constants)?;
    let grid = f.grid().clone();
    let spec0 = spectrum(f);
    let bin = spec0.bin;
    let nearest = (0..spec0.wavevectors.len())
        .min_by(|&a, &b| {
            vec3::norm(vec3::sub(spec0.wavevectors[a], k_target))
                .total_cmp(&vec3::norm(vec3::sub(spec0.wavevectors[b], k_target)))
        })
        .ok_or_else(|| Error::InvalidInput("empty lattice".into()))?;
    let steps = (settings.duration / settings.dt).round() as usize;
    let ev = Evolution::new(settings.mass, constants.elementary_charge, settings.dt, steps)
        .with_dispersion(settings.dispersion);
    let mut series = Vec::with_capacity(steps + 1);
    let final_field = evolve_observed(f, pot, &ev, constants, |_, v| {
        let field = ComplexScalarField::new(grid.clone(), v.to_vec()).expect("finite field");
        series.push(spectrum(&field).coefficients[nearest]);
    })?;
    let peaks = sideband_spectrum(&series, settings.dt, 1e-6)?;
    let top = peaks
        .iter()
        .max_by(|a, b| a.power.total_cmp(&b.power))
        .ok_or_else(|| Error::Resolution("no spectral line in the satellite mode".into()))?;
    let spec = spectrum(&final_field);
    let mut acc = [0.0; 3];
    let mut inside = 0.0;
    let total: f64 = spec.coefficients.iter().map(|c| c.norm_sqr()).sum();
    for (k, c) in spec.wavevectors.iter().zip(&spec.coefficients) {
        let close = (0..3).all(|i| bin[i] == 0.0 || ((k[i] - k_target[i]) / bin[i]).abs() <= window as f64 + 0.5);
        if close {
            let w = c.norm_sqr();
            inside += w;
            for i in 0..3 {
                acc[i] += w * k[i];
            }
        }
    }
    if inside == 0.0 {
        return Err(Error::Resolution("satellite window is empty".into()));
    }
    Ok(SatelliteMeasurement {
        omega: top.omega,
        k: vec3::scale(acc, 1.0 / inside),
        weight: inside / total,
        spectral_bin: 2.0 * PI / ((steps + 1) as f64 * settings.dt),
        transform_bin: bin,
    })
}
