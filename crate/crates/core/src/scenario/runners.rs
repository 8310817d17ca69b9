//! One function per scenario. Each works in natural units anchored at its own
//! reference energy and reports quantities in SI.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::*;
use super::dump::DumpUnits;
use super::{Artifact, Check, Gate, Quantity, ScenarioError};
use crate::constants::{electronvolt, NaturalScale, PhysicalConstants};
use crate::electron::{
    box_energy, box_mode, composite_product, de_broglie_wavelength, electron_summarize, energy_expectation,
    evolve_schrodinger, fit_phase_rate, from_complex, make_electron_packet, normalize_to_spin_half, rayleigh_omega,
    rotate_rigid, schrodinger_residual, to_complex, Evolution, StaticPotentials, TimeDerivative,
};
use crate::lattice::{Axis, Boundary, ComplexScalarField, GridSpec, ScalarField};
use crate::lorentz::{boost, boost_electron_carrier, boost_photon_carrier, invariant_phase, BoostParams, FourVector};
use crate::modulation::{
    bessel_sideband_ratio, modulate_packet, modulation_index, peak_near, power_spectrum, sideband_spectrum,
    transition_ledger, ModulationSettings, PotentialField, SpectralPeak,
};
use crate::photon::{
    make_cp_standing_mode, make_cp_traveling_packet, normalize_to_spin, photon_checkpoint, quantized_mode_energy,
    summarize, CheckpointVolume, PhotonScale,
};
use crate::{vec3, Envelope};

pub(super) struct RunResult {
    pub quantities: Vec<Quantity>,
    pub checks: Vec<Check>,
    pub artifacts: Vec<Artifact>,
    pub scale: Option<NaturalScale>,
}

struct Ctx<'a> {
    tolerances: &'a BTreeMap<String, f64>,
    quantities: Vec<Quantity>,
    checks: Vec<Check>,
    artifacts: Vec<Artifact>,
}

impl Ctx<'_> {
    fn tolerance(&self, name: &str, default: f64) -> f64 {
        let base = name.split('[').next().unwrap_or(name);
        self.tolerances.get(base).copied().unwrap_or(default)
    }

    fn check(&mut self, name: String, anchor: &str, measured: f64, expected: f64, tol: f64, gate: Gate) {
        let tol = self.tolerance(&name, tol);
        self.checks.push(Check::new(name, anchor, measured, expected, tol, gate));
    }

    fn relative(&mut self, name: impl Into<String>, anchor: &str, measured: f64, expected: f64, tol: f64) {
        self.check(name.into(), anchor, measured, expected, tol, Gate::Relative);
    }

    fn absolute(&mut self, name: impl Into<String>, anchor: &str, measured: f64, expected: f64, tol: f64) {
        self.check(name.into(), anchor, measured, expected, tol, Gate::Absolute);
    }

    fn quantity(&mut self, name: impl Into<String>, value: f64, unit: &str) {
        self.quantities.push(Quantity { name: name.into(), value, unit: unit.to_string() });
    }
}

fn si() -> PhysicalConstants {
    PhysicalConstants::si()
}

fn nat() -> PhysicalConstants {
    PhysicalConstants::natural()
}

fn physics_err(msg: String) -> ScenarioError {
    ScenarioError::Physics(crate::Error::InvalidInput(msg))
}

fn positive(name: &str, v: f64) -> Result<f64, ScenarioError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(physics_err(format!("{name} must be positive, got {v}")))
    }
}

fn rest_scale(mass: f64) -> Result<NaturalScale, ScenarioError> {
    let c = si().c;
    Ok(NaturalScale::new(positive("mass", mass)? * c * c))
}

fn length_units(scale: &NaturalScale) -> String {
    format!("natural length = {:e} m", scale.length_m())
}

fn time_units(scale: &NaturalScale) -> String {
    format!("natural time = {:e} s", scale.time_s())
}

fn grid(cfg: &Option<GridConfig>) -> &GridConfig {
    cfg.as_ref().expect("grid presence is validated with the schema")
}

/// Line along z spanning `extent` or `periods` carrier wavelengths.
fn carrier_grid(g: &GridConfig, wavelength: Option<f64>, scale: &NaturalScale) -> Result<GridSpec, ScenarioError> {
    let extent = match (g.extent, g.periods) {
        (Some(e), _) => scale.length_to_natural(e.0),
        (None, Some(n)) => match wavelength {
            Some(l) => n as f64 * l,
            None => {
                return Err(ScenarioError::Schema {
                    key: "grid.periods".into(),
                    message: "a carrier at rest has no wavelength; give grid.extent".into(),
                })
            }
        },
        (None, None) => unreachable!("validated with the schema"),
    };
    let boundary = g.boundary.unwrap_or(Boundary::Periodic);
    Ok(GridSpec::line(Axis::new(extent, g.points, boundary))?)
}

fn box_grid(g: &GridConfig, length: f64) -> Result<GridSpec, ScenarioError> {
    Ok(GridSpec::line(Axis::new(length, g.points, Boundary::Dirichlet))?)
}

fn envelope(e: EnvelopeConfig, scale: &NaturalScale) -> Envelope {
    match e {
        EnvelopeConfig::Uniform => Envelope::Uniform,
        EnvelopeConfig::Gaussian { width } => Envelope::gaussian(scale.length_to_natural(width.0)),
    }
}

pub(super) fn run(cfg: &ScenarioConfig) -> Result<RunResult, ScenarioError> {
    let mut ctx =
        Ctx { tolerances: &cfg.tolerances, quantities: Vec::new(), checks: Vec::new(), artifacts: Vec::new() };
    let scale = match &cfg.physics {
        Physics::PhotonPacket(p) => Some(photon_packet(p, grid(&cfg.grid), &mut ctx)?),
        Physics::PhotonBox(p) => Some(photon_box(p, grid(&cfg.grid), &mut ctx)?),
        Physics::ElectronPacket(p) => Some(electron_packet(p, grid(&cfg.grid), &mut ctx)?),
        Physics::ElectronBox(p) => Some(electron_box(p, grid(&cfg.grid), &mut ctx)?),
        Physics::Boost(p) => Some(boost_scenario(p, cfg.seed.expect("validated"), &mut ctx)?),
        Physics::SchrodingerMap(p) => Some(schrodinger_map(p, grid(&cfg.grid), &mut ctx)?),
        Physics::Composite(p) => Some(composite(p, grid(&cfg.grid), &mut ctx)?),
        Physics::Modulate(p) => Some(modulate(p, grid(&cfg.grid), &mut ctx)?),
        Physics::CheckpointTable(p) => {
            checkpoint_table(p, &cfg.input, &mut ctx)?;
            None
        }
    };
    Ok(RunResult { quantities: ctx.quantities, checks: ctx.checks, artifacts: ctx.artifacts, scale })
}

fn photon_packet(p: &PhotonPacketPhysics, g: &GridConfig, ctx: &mut Ctx) -> Result<NaturalScale, ScenarioError> {
    let f = positive("frequency", p.frequency.0)?;
    // hbar w = 1, so w = |k| = 1 and the wavelength is 2 pi
    let scale = NaturalScale::new(si().h() * f);
    let lambda = 2.0 * PI;
    let grid = carrier_grid(g, Some(lambda), &scale)?;
    let env = envelope(p.envelope, &scale);
    let tol = if env == Envelope::Uniform { 1e-10 } else { 2e-2 };
    let packet = make_cp_traveling_packet(1.0, p.helicity, env, &grid, &nat())?.with_cross_section(lambda * lambda);
    let (w_eff, k_eff) = summarize(&packet)?.ratios()?;
    let q = normalize_to_spin(&packet, nat().hbar)?;
    let s = summarize(&q)?;

    ctx.relative("energy-spin-ratio", "U / |S| = w", w_eff, 1.0, tol);
    ctx.relative("momentum-spin-ratio", "|P| / |S| = |k|", k_eff, 1.0, tol);
    ctx.relative("spin-quantum", "|S| = hbar", s.spin_magnitude(), 1.0, 1e-12);
    ctx.relative("photon-energy", "U = hbar w at |S| = hbar", s.total_energy, 1.0, tol);
    ctx.relative("photon-momentum", "|P| = hbar |k| at |S| = hbar", s.momentum_magnitude(), 1.0, tol);

    let c = si().c;
    ctx.quantity("frequency", f, "Hz");
    ctx.quantity("angular_frequency", 2.0 * PI * f, "rad/s");
    ctx.quantity("wavelength", c / f, "m");
    ctx.quantity("energy", scale.energy_to_si(s.total_energy), "J");
    ctx.quantity("energy_ev", scale.energy_to_si(s.total_energy) / electronvolt(), "eV");
    ctx.quantity("momentum", scale.momentum_to_si(s.momentum_magnitude()), "kg m/s");
    ctx.quantity("spin", s.spin_magnitude() * si().hbar, "J s");
    ctx.quantity("spin_sign", s.total_spin[2].signum(), "1");
    ctx.quantity("energy_spin_ratio_deviation", w_eff - 1.0, "1");
    ctx.quantity("peak_field", scale.electric_field_to_si(q.peak_amplitude()), "V/m");
    ctx.artifacts.push(Artifact::Vector {
        file: "photon_e.csv".into(),
        label: "E".into(),
        field: q.e.clone(),
        units: DumpUnits::new(
            length_units(&scale),
            format!("natural field = {:e} V/m", scale.electric_field_v_per_m()),
        ),
    });
    Ok(scale)
}

fn photon_box(p: &PhotonBoxPhysics, g: &GridConfig, ctx: &mut Ctx) -> Result<NaturalScale, ScenarioError> {
    let length = positive("length", p.length.0)?;
    let (s, c) = (si(), si().c);
    // mode 1 has unit energy, so the box spans pi and k_n = n
    let scale = NaturalScale::new(s.hbar * c * PI / length);
    let grid = box_grid(g, PI)?;
    for &n in &p.modes {
        let mode = normalize_to_spin(&make_cp_standing_mode(n, PI, p.helicity, &grid, &nat())?, nat().hbar)?;
        let sum = summarize(&mode)?;
        let expected = quantized_mode_energy(n, PI, &nat())?;
        let tag = format!("[n={n}]");
        ctx.relative(format!("spin-quantum{tag}"), "|S| = hbar", sum.spin_magnitude(), 1.0, 1e-12);
        ctx.relative(format!("mode-energy{tag}"), "U_n = n pi hbar c / L", sum.total_energy, expected, 1e-8);
        ctx.absolute(
            format!("mode-momentum{tag}"),
            "P = 0 for a standing mode",
            sum.momentum_magnitude(),
            0.0,
            1e-10 * n as f64,
        );
        let e_si = scale.energy_to_si(sum.total_energy);
        ctx.quantity(format!("mode_energy{tag}"), e_si, "J");
        ctx.quantity(format!("mode_energy_ev{tag}"), e_si / electronvolt(), "eV");
        ctx.quantity(format!("mode_frequency{tag}"), n as f64 * c / (2.0 * length), "Hz");
        ctx.artifacts.push(Artifact::Vector {
            file: format!("photon_mode_{n}.csv"),
            label: "E".into(),
            field: mode.e.clone(),
            units: DumpUnits::new(
                length_units(&scale),
                format!("natural field = {:e} V/m", scale.electric_field_v_per_m()),
            ),
        });
    }
    Ok(scale)
}

fn electron_packet(p: &ElectronPacketPhysics, g: &GridConfig, ctx: &mut Ctx) -> Result<NaturalScale, ScenarioError> {
    let scale = rest_scale(p.mass.0)?;
    let beta = p.velocity.0;
    let gamma = crate::lorentz::lorentz_factor([0.0, 0.0, beta], 1.0)?;
    let k = gamma * beta;
    let wavelength = (k != 0.0).then(|| 2.0 * PI / k.abs());
    let grid = carrier_grid(g, wavelength, &scale)?;
    let env = envelope(p.envelope, &scale);
    let tol = if env == Envelope::Uniform { 1e-10 } else { 2e-2 };
    let packet = make_electron_packet(1.0, [0.0, 0.0, beta], [0.0, 0.0, 1.0], p.helicity, env, &grid, &nat())?;
    let q = normalize_to_spin_half(&packet)?;
    let s = electron_summarize(&q)?;
    let w = q.carrier_omega;

    ctx.relative("spin-half", "|S| = hbar / 2", s.spin_magnitude(), 0.5, 1e-12);
    ctx.relative("energy-quantum", "E = hbar w", s.total_energy, w, tol);
    ctx.relative("energy-spin-factor", "E / w = 2 |S|", s.total_energy / w, 2.0 * s.spin_magnitude(), tol);
    if k != 0.0 {
        ctx.relative("momentum-quantum", "p = hbar k", s.momentum_magnitude(), k.abs(), tol);
        ctx.relative(
            "momentum-spin-factor",
            "|p| / |k| = 2 |S|",
            s.momentum_magnitude() / k.abs(),
            2.0 * s.spin_magnitude(),
            tol,
        );
        let db = de_broglie_wavelength(1.0, beta.abs(), &nat())?;
        ctx.relative("de-broglie", "lambda = h / (gamma m v)", 2.0 * PI / k.abs(), db.wavelength, 1e-10);
        ctx.quantity("de_broglie_wavelength", scale.length_to_si(db.wavelength), "m");
    } else {
        ctx.absolute("momentum-quantum", "p = 0 at rest", s.momentum_magnitude(), 0.0, 1e-12);
    }
    let h = si().h();
    ctx.quantity("gamma", gamma, "1");
    ctx.quantity("rest_frequency", scale.energy_joule / h, "Hz");
    ctx.quantity("carrier_frequency", scale.angular_frequency_to_si(w) / (2.0 * PI), "Hz");
    ctx.quantity("energy", scale.energy_to_si(s.total_energy), "J");
    ctx.quantity("energy_ev", scale.energy_to_si(s.total_energy) / electronvolt(), "eV");
    ctx.quantity("momentum", scale.momentum_to_si(s.momentum_magnitude()), "kg m/s");
    ctx.quantity("spin", s.spin_magnitude() * si().hbar, "J s");
    ctx.artifacts.push(Artifact::Vector {
        file: "electron_psi.csv".into(),
        label: "Psi".into(),
        field: q.psi.clone(),
        units: DumpUnits::new(length_units(&scale), "natural amplitude"),
    });
    ctx.artifacts.push(Artifact::Complex {
        file: "electron_complex.csv".into(),
        field: to_complex(&q),
        units: DumpUnits::new(length_units(&scale), "natural amplitude"),
    });
    Ok(scale)
}

fn electron_box(p: &ElectronBoxPhysics, g: &GridConfig, ctx: &mut Ctx) -> Result<NaturalScale, ScenarioError> {
    let (m, length) = (p.mass.0, positive("length", p.length.0)?);
    let scale = rest_scale(m)?;
    let l_nat = scale.length_to_natural(length);
    let grid = box_grid(g, l_nat)?;
    let s = si();
    for &n in &p.modes {
        let (mode, e) = box_mode(n, l_nat, 1.0, p.helicity, &grid, &nat())?;
        let f = to_complex(&mode);
        let r = schrodinger_residual(&f, 1.0, None, TimeDerivative::Eigen { omega: e }, &nat())?;
        let w = rayleigh_omega(&f, 1.0, None, &nat())?;
        let e_si = box_energy(n, length, m, &s)?;
        let kin_si = (s.hbar * n as f64 * PI / length).powi(2) / (2.0 * m);
        let tag = format!("[n={n}]");
        ctx.absolute(format!("eigen-residual{tag}"), "i hbar dPsi/dt = H Psi", r, 0.0, 1e-8);
        ctx.relative(
            format!("box-energy{tag}"),
            "E_n = m c^2 + (hbar n pi)^2 / (2 m L^2)",
            scale.energy_to_si(w),
            e_si,
            1e-8,
        );
        ctx.relative(
            format!("kinetic-energy{tag}"),
            "E_n - m c^2 = (hbar n pi)^2 / (2 m L^2)",
            scale.energy_to_si(w - 1.0),
            kin_si,
            1e-8,
        );
        ctx.quantity(format!("energy{tag}"), e_si, "J");
        ctx.quantity(format!("energy_ev{tag}"), e_si / electronvolt(), "eV");
        ctx.quantity(format!("kinetic_energy_ev{tag}"), kin_si / electronvolt(), "eV");
        ctx.quantity(format!("frequency{tag}"), e_si / s.h(), "Hz");
        ctx.artifacts.push(Artifact::Complex {
            file: format!("electron_box_{n}.csv"),
            field: f,
            units: DumpUnits::new(length_units(&scale), "natural amplitude"),
        });
    }
    Ok(scale)
}

fn boost_scenario(p: &BoostPhysics, seed: u64, ctx: &mut Ctx) -> Result<NaturalScale, ScenarioError> {
    let scale = rest_scale(p.electron_mass.0)?;
    let n = nat();
    let f = positive("photon_frequency", p.photon_frequency.0)?;
    let omega = scale.angular_frequency_to_natural(2.0 * PI * f);
    let beta = p.beta.0;
    let b = BoostParams::new([0.0, 0.0, beta])?;
    let (w2, k2) = boost_photon_carrier(omega, [0.0, 0.0, omega], &b, &n);
    let doppler = ((1.0 + beta) / (1.0 - beta)).sqrt();
    ctx.relative("doppler-ratio", "w' / w = sqrt((1 + beta) / (1 - beta))", w2 / omega, doppler, 1e-10);
    ctx.relative("photon-null", "w' = c |k'|", vec3::norm(k2), w2, 1e-10);
    ctx.quantity("boosted_photon_frequency", scale.angular_frequency_to_si(w2) / (2.0 * PI), "Hz");
    ctx.quantity("doppler_factor", w2 / omega, "1");
    ctx.quantity("gamma", b.gamma(), "1");

    let ve = p.electron_velocity.0;
    let to_rest = boost_electron_carrier(1.0, [0.0, 0.0, ve], &BoostParams::new([0.0, 0.0, -ve])?, &n)?;
    ctx.relative("rest-frequency", "w' = m c^2 / hbar at rest", to_rest.omega, 1.0, 1e-10);
    ctx.absolute("rest-wavevector", "k' = 0 at rest", vec3::norm(to_rest.k), 0.0, 1e-10);
    ctx.quantity("rest_frequency", scale.energy_joule / si().h(), "Hz");
    if ve != 0.0 {
        let moving = boost_electron_carrier(1.0, [0.0; 3], &BoostParams::new([0.0, 0.0, ve])?, &n)?;
        let db = de_broglie_wavelength(1.0, ve.abs(), &n)?;
        ctx.relative(
            "de-broglie-after-boost",
            "lambda = h / (gamma m v)",
            2.0 * PI / vec3::norm(moving.k),
            db.wavelength,
            1e-10,
        );
        ctx.quantity("de_broglie_wavelength", scale.length_to_si(db.wavelength), "m");
    }

    if p.samples == 0 {
        return Err(ScenarioError::Schema { key: "physics.samples".into(), message: "at least one sample".into() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for _ in 0..p.samples {
        let m = rng.gen_range(0.1..10.0);
        let pv: [f64; 3] = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
        let p4 = FourVector::new((m * m + vec3::dot(pv, pv)).sqrt(), pv);
        let ev = FourVector::new(
            rng.gen_range(-10.0..10.0),
            [rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)],
        );
        let bv = loop {
            let v: [f64; 3] = [rng.gen_range(-0.9..0.9), rng.gen_range(-0.9..0.9), rng.gen_range(-0.9..0.9)];
            if vec3::norm(v) < 0.9 {
                break v;
            }
        };
        let bp = BoostParams::new(bv)?;
        let (q4, qe) = (boost(&p4, &bp), boost(&ev, &bp));
        let lab = invariant_phase(&p4, &ev, &n);
        let moved = invariant_phase(&q4, &qe, &n);
        // size of the terms the boosted dot product sums
        let terms = (q4.time * qe.time).abs() + vec3::norm(q4.space) * vec3::norm(qe.space);
        worst = worst.max((lab - moved).abs() / terms);
    }
    ctx.absolute("invariant-phase", "(E t - p.r) / hbar is frame independent", worst, 0.0, 1e-12);
    ctx.quantity("phase_samples", p.samples as f64, "1");
    ctx.quantity("worst_phase_deviation", worst, "1");
    Ok(scale)
}

fn schrodinger_map(p: &SchrodingerMapPhysics, g: &GridConfig, ctx: &mut Ctx) -> Result<NaturalScale, ScenarioError> {
    let scale = rest_scale(p.mass.0)?;
    let n = nat();
    let beta = p.velocity.0;
    let gamma = crate::lorentz::lorentz_factor([0.0, 0.0, beta], 1.0)?;
    let k = gamma * beta;
    let grid = carrier_grid(g, (k != 0.0).then(|| 2.0 * PI / k.abs()), &scale)?;
    let dt = scale.time_to_natural(positive("dt", p.dt.0)?);
    if p.steps == 0 {
        return Err(ScenarioError::Schema { key: "physics.steps".into(), message: "at least one step".into() });
    }

    let packet =
        make_electron_packet(1.0, [0.0, 0.0, beta], [0.0, 0.0, 1.0], p.helicity, Envelope::Uniform, &grid, &n)?;
    let rotated = rotate_rigid(&packet, dt);
    let phased = to_complex(&packet).scaled(Complex64::from_polar(1.0, -packet.carrier_omega * dt));
    let back = from_complex(&phased, p.helicity, packet.spin_axis)?;
    let mut dev = 0.0_f64;
    for i in 0..3 {
        for (a, b) in back.component(i).iter().zip(rotated.psi.component(i)) {
            dev = dev.max((a - b).abs());
        }
    }
    ctx.absolute(
        "rotation-vs-phase",
        "rigid rotation of Psi = phase exp(-i w t) of Psi_c",
        dev / packet.psi.max_norm(),
        0.0,
        1e-12,
    );

    let plane = to_complex(&packet);
    let w_nr = 1.0 + 0.5 * k * k;
    let r = schrodinger_residual(&plane, 1.0, None, TimeDerivative::Eigen { omega: w_nr }, &n)?;
    ctx.absolute("plane-wave-residual", "i hbar dPsi/dt = (m c^2 - hbar^2 lap / 2m) Psi", r, 0.0, 1e-10);

    let width = scale.length_to_natural(positive("width", p.width.0)?);
    let center = grid.center()[2];
    let length = grid.axes()[0].extent;
    let f = ComplexScalarField::from_fn(&grid, |r| {
        let z = r[2] - center;
        Complex64::from_polar((-z * z / (2.0 * width * width)).exp(), k * z)
    })?;
    let v0 = scale.potential_to_natural(p.potential.0);
    let pot = StaticPotentials {
        scalar: Some(ScalarField::from_fn(&grid, |r| v0 * (2.0 * PI * r[2] / length).cos())?),
        vector: None,
    };
    let ev = Evolution::new(1.0, n.elementary_charge, dt, 1);
    let h0 = energy_expectation(&f, &pot, &ev, 0.0, &n)?;
    let mut g_field = f.clone();
    let mut worst_step = 0.0_f64;
    for _ in 0..p.steps {
        let before = g_field.norm_sqr();
        g_field = evolve_schrodinger(&g_field, &pot, &ev, &n)?;
        worst_step = worst_step.max((g_field.norm_sqr() / before - 1.0).abs());
    }
    let h1 = energy_expectation(&g_field, &pot, &ev, 0.0, &n)?;
    ctx.absolute("norm-drift-per-step", "split-step evolution is unitary", worst_step, 0.0, 1e-12);
    ctx.relative("energy-drift", "<H> is conserved for a static potential", h1, h0, 1e-8);

    ctx.quantity("carrier_frequency", scale.angular_frequency_to_si(packet.carrier_omega) / (2.0 * PI), "Hz");
    ctx.quantity("nonrelativistic_frequency", scale.angular_frequency_to_si(w_nr) / (2.0 * PI), "Hz");
    ctx.quantity("evolved_time", scale.time_to_si(dt * p.steps as f64), "s");
    ctx.quantity("energy_expectation", scale.energy_to_si(h1), "J");
    ctx.quantity("energy_drift", h1 / h0 - 1.0, "1");
    ctx.quantity("energy_drift_without_rest", (h1 - 1.0) / (h0 - 1.0) - 1.0, "1");
    ctx.quantity("worst_norm_drift_per_step", worst_step, "1");
    ctx.artifacts.push(Artifact::Vector {
        file: "electron_psi.csv".into(),
        label: "Psi".into(),
        field: packet.psi.clone(),
        units: DumpUnits::new(length_units(&scale), "natural amplitude"),
    });
    ctx.artifacts.push(Artifact::Complex {
        file: "evolved.csv".into(),
        field: g_field,
        units: DumpUnits::new(length_units(&scale), "natural amplitude"),
    });
    Ok(scale)
}

fn composite(p: &CompositePhysics, g: &GridConfig, ctx: &mut Ctx) -> Result<NaturalScale, ScenarioError> {
    let (m, length) = (p.mass.0, positive("length", p.length.0)?);
    let scale = rest_scale(m)?;
    let n = nat();
    let l_nat = scale.length_to_natural(length);
    let grid = GridSpec::line(Axis::new(l_nat, g.points, Boundary::Periodic))?;
    let states = p
        .modes
        .iter()
        .map(|&j| {
            let k = 2.0 * PI * j as f64 / l_nat;
            let f = ComplexScalarField::from_fn(&grid, |r| Complex64::from_polar(1.0, k * r[2]))?;
            Ok((f, 1.0 + 0.5 * k * k))
        })
        .collect::<crate::Result<Vec<_>>>()?;
    let state = composite_product(&states)?;
    let total = state.total_energy;
    let periods = positive("periods", p.periods)?;
    if p.samples_per_period < 3 {
        return Err(ScenarioError::Schema {
            key: "physics.samples_per_period".into(),
            message: "need at least 3 samples per period".into(),
        });
    }
    let dt = 2.0 * PI / total / p.samples_per_period as f64;
    let steps = (periods * p.samples_per_period as f64).round() as usize;
    let mut snaps = vec![state.product.clone()];
    let mut times = vec![0.0];
    let mut current = state.clone();
    for j in 1..=steps {
        current = current.evolve(1.0, dt, 1, &n)?;
        snaps.push(current.product.clone());
        times.push(j as f64 * dt);
    }
    let w = fit_phase_rate(&snaps, &times)?;
    let s = si();
    let rest = p.modes.len() as f64;
    let kinetic_si: f64 = p.modes.iter().map(|&j| (2.0 * PI * s.hbar * j as f64 / length).powi(2) / (2.0 * m)).sum();
    ctx.relative("composite-rate", "w = (E_1 + E_2 + ...) / hbar", w, total, 1e-6);
    ctx.relative(
        "composite-kinetic-rate",
        "w - N m c^2 / hbar = sum of (hbar k_j)^2 / 2m / hbar",
        scale.energy_to_si(w - rest),
        kinetic_si,
        1e-6,
    );
    for (j, e) in p.modes.iter().zip(&state.energies) {
        ctx.quantity(format!("component_energy[n={j}]"), scale.energy_to_si(*e), "J");
    }
    ctx.quantity("composite_energy", scale.energy_to_si(total), "J");
    ctx.quantity("fitted_frequency", scale.angular_frequency_to_si(w) / (2.0 * PI), "Hz");
    ctx.artifacts.push(Artifact::Complex {
        file: "composite.csv".into(),
        field: state.product,
        units: DumpUnits::new(length_units(&scale), "natural amplitude"),
    });
    Ok(scale)
}

fn nan_peak() -> SpectralPeak {
    SpectralPeak { omega: f64::NAN, power: f64::NAN }
}

fn strongest(peaks: &[SpectralPeak]) -> SpectralPeak {
    peaks.iter().copied().max_by(|a, b| a.power.total_cmp(&b.power)).unwrap_or_else(nan_peak)
}

fn modulate(p: &ModulatePhysics, g: &GridConfig, ctx: &mut Ctx) -> Result<NaturalScale, ScenarioError> {
    let scale = rest_scale(p.mass.0)?;
    let n = nat();
    let extent = scale.length_to_natural(g.extent.expect("validated").0);
    let grid = GridSpec::line(Axis::new(extent, g.points, Boundary::Periodic))?;
    let k = 2.0 * PI * g.periods.expect("validated") as f64 / extent;
    let f = ComplexScalarField::from_fn(&grid, |r| Complex64::from_polar(1.0, k * r[2]))?;
    let settings = ModulationSettings {
        mass: 1.0,
        duration: scale.time_to_natural(positive("duration", p.duration.0)?),
        dt: scale.time_to_natural(positive("dt", p.dt.0)?),
        probe: 0,
        dispersion: Default::default(),
    };
    let e = n.elementary_charge;
    let freq = |w: f64| scale.angular_frequency_to_si(w);

    let base = modulate_packet(&f, &PotentialField::zero(), &settings, &n)?;
    let bin = 2.0 * PI / (base.probe.len() as f64 * base.dt);
    let w0 = strongest(&sideband_spectrum(&base.probe, base.dt, 1e-6)?).omega;
    ctx.quantity("carrier_angular_frequency", freq(w0), "rad/s");
    ctx.quantity("spectral_bin", freq(bin), "rad/s");

    let vs = scale.potential_to_natural(p.v_static.0);
    if vs != 0.0 {
        let run = modulate_packet(&f, &PotentialField::constant(vs), &settings, &n)?;
        let ws = strongest(&sideband_spectrum(&run.probe, run.dt, 1e-6)?).omega;
        ctx.absolute("static-shift", "w -> w + e V / hbar", ws - w0, e * vs, bin);
        ctx.quantity("static_shift", freq(ws - w0), "rad/s");
    }

    let v0 = scale.potential_to_natural(p.v0.0);
    if v0 != 0.0 {
        let wph = scale.angular_frequency_to_natural(2.0 * PI * positive("photon_frequency", p.photon_frequency.0)?);
        let index = modulation_index(v0, wph, &n);
        let run = modulate_packet(&f, &PotentialField::oscillating(v0, wph, 0.0), &settings, &n)?;
        let peaks = sideband_spectrum(&run.probe, run.dt, 1e-6)?;
        let carrier = peak_near(&peaks, w0, bin).unwrap_or_else(nan_peak);
        let up = peak_near(&peaks, w0 + wph, bin).unwrap_or_else(nan_peak);
        let down = peak_near(&peaks, w0 - wph, bin).unwrap_or_else(nan_peak);
        ctx.absolute("upper-sideband", "w_0 + w_ph", up.omega, w0 + wph, bin);
        ctx.absolute("lower-sideband", "w_0 - w_ph", down.omega, w0 - wph, bin);
        ctx.relative("sideband-symmetry", "|J_1|^2 = |J_-1|^2", up.power, down.power, 1e-2);
        ctx.relative(
            "bessel-ratio",
            "J_1(b) / J_0(b), b = e V0 / (hbar w_ph)",
            (up.power / carrier.power).sqrt(),
            bessel_sideband_ratio(index),
            2e-2,
        );
        for (tag, sign, line) in [("absorb", 1i8, up), ("emit", -1i8, down)] {
            let measured = line.omega.is_finite().then_some((line.omega, [0.0, 0.0, k]));
            let ledger = transition_ledger((w0, [0.0, 0.0, k]), (wph, [0.0; 3]), sign, measured, &n)?;
            let residual = if measured.is_some() { ledger.residual.0 } else { f64::NAN };
            ctx.absolute(format!("ledger-closure[{tag}]"), "E_f - E_i = +/- hbar w_ph", residual, 0.0, 2.0 * bin);
        }
        ctx.quantity("modulation_index", index, "1");
        ctx.quantity("photon_angular_frequency", freq(wph), "rad/s");
        ctx.quantity("carrier_power", carrier.power, "1");
        ctx.quantity("upper_sideband_power", up.power, "1");
        ctx.quantity("lower_sideband_power", down.power, "1");
        let spec = power_spectrum(&run.probe, run.dt)?;
        ctx.artifacts.push(Artifact::Probe {
            file: "probe.csv".into(),
            times: run.times.clone(),
            values: run.probe.clone(),
            time_unit: time_units(&scale),
        });
        ctx.artifacts.push(Artifact::Spectrum {
            file: "spectrum.csv".into(),
            omega: spec.omega,
            power: spec.power,
            frequency_unit: format!("natural angular frequency = {:e} rad/s", freq(1.0)),
        });
        ctx.artifacts.push(Artifact::Complex {
            file: "modulated.csv".into(),
            field: run.field,
            units: DumpUnits::new(length_units(&scale), "natural amplitude"),
        });
    }
    Ok(scale)
}

/// The literal the user wrote for a row, used to label its checks.
fn row_label(input: &serde_json::Value, i: usize) -> String {
    let row = &input["physics"]["rows"][i];
    row["frequency"].as_str().or_else(|| row["energy"].as_str()).map_or_else(|| format!("row {i}"), str::to_string)
}

fn gate_check<Q>(ctx: &mut Ctx, name: String, anchor: &str, measured: f64, e: &Expectation<Q>, value: f64) {
    match (e.rel, e.factor) {
        (Some(r), _) => ctx.check(name, anchor, measured, value, r, Gate::Relative),
        (_, Some(f)) => ctx.check(name, anchor, measured, value, f, Gate::Factor),
        _ => unreachable!("validated with the schema"),
    }
}

fn checkpoint_table(p: &CheckpointTablePhysics, input: &serde_json::Value, ctx: &mut Ctx) -> Result<(), ScenarioError> {
    let s = si();
    for (i, row) in p.rows.iter().enumerate() {
        let scale = match (row.frequency, row.energy) {
            (Some(f), _) => PhotonScale::Frequency(f.0),
            (_, Some(e)) => PhotonScale::Energy(e.0),
            _ => unreachable!("validated with the schema"),
        };
        let cp = photon_checkpoint(scale, CheckpointVolume::CubicWavelength, &s)?;
        let tag = format!("[{}]", row_label(input, i));
        ctx.relative(format!("wavelength-identity{tag}"), "lambda = c / f", cp.wavelength * cp.frequency, s.c, 1e-12);
        ctx.relative(format!("energy-identity{tag}"), "E = h f", cp.energy, s.h() * cp.frequency, 1e-12);
        if let Some(x) = &row.expect {
            if let Some(w) = &x.wavelength {
                gate_check(ctx, format!("expected-wavelength{tag}"), "lambda = c / f", cp.wavelength, w, w.value.0);
            }
            if let Some(en) = &x.energy {
                gate_check(ctx, format!("expected-energy{tag}"), "E = h f", cp.energy, en, en.value.0);
            }
            if let Some(e0) = &x.e0 {
                gate_check(ctx, format!("expected-e0{tag}"), "eps0 E0^2 lambda^3 = h f", cp.e0, e0, e0.value.0);
            }
        }
        ctx.quantity(format!("frequency{tag}"), cp.frequency, "Hz");
        ctx.quantity(format!("wavelength{tag}"), cp.wavelength, "m");
        ctx.quantity(format!("energy{tag}"), cp.energy, "J");
        ctx.quantity(format!("energy_ev{tag}"), cp.energy / electronvolt(), "eV");
        ctx.quantity(format!("volume{tag}"), cp.volume, "m^3");
        ctx.quantity(format!("e0{tag}"), cp.e0, "V/m");
    }
    Ok(())
}
