//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.
//!
//! Scenario criteria run the shipped configs and require every named check to
//! be present, to pass, and to use a tolerance no looser than the bound listed
//! here, so editing a config cannot weaken a criterion.

use std::f64::consts::PI;
use std::process::ExitCode;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spinfield::lattice::{curl, divergence, inverse_curl_coulomb, spectrum};
use spinfield::lorentz::{boost, BoostParams, FourVector};
use spinfield::photon::{make_cp_traveling_packet, normalize_to_spin, summarize};
use spinfield::scenario::{self, parse_config, report_json, Gate, RunReport};
use spinfield::{ComplexScalarField, Envelope, GridSpec, Helicity, PhysicalConstants, RealVectorField};

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn run(text: &str) -> Result<RunReport, String> {
    let cfg = parse_config(text).map_err(|e| e.to_string())?;
    scenario::execute(&cfg).map(|o| o.report).map_err(|e| e.to_string())
}

/// Every check whose base name is in `bounds` must pass with `tolerance <= bound`.
fn require(report: &RunReport, bounds: &[(&str, f64)]) -> Verdict {
    let mut seen = 0;
    for (name, bound) in bounds {
        let matching: Vec<_> = report.checks.iter().filter(|c| c.name.split('[').next() == Some(*name)).collect();
        if matching.is_empty() {
            return Err(format!("{}: check {name} missing", report.scenario));
        }
        for c in matching {
            if c.tolerance > *bound {
                return Err(format!("{}: {} tolerance {:e} exceeds {:e}", report.scenario, c.name, c.tolerance, bound));
            }
            if !c.pass {
                return Err(format!(
                    "{}: {} measured {:e} expected {:e}",
                    report.scenario, c.name, c.measured, c.expected
                ));
            }
            seen += 1;
        }
    }
    Ok(format!("{} {seen} checks", report.scenario))
}

fn scenario_criterion(cases: &[(&str, &[(&str, f64)])]) -> Verdict {
    let mut notes = Vec::new();
    for (text, bounds) in cases {
        notes.push(require(&run(text)?, bounds)?);
    }
    Ok(notes.join("; "))
}

fn quantity(report: &RunReport, name: &str) -> Result<f64, String> {
    report.quantities.iter().find(|q| q.name == name).map(|q| q.value).ok_or_else(|| format!("quantity {name} missing"))
}

const CHECKPOINT: &str = include_str!("../../../configs/checkpoint-table.json");
const PHOTON_PLANE: &str = include_str!("../../../configs/photon-packet.json");
const PHOTON_GAUSSIAN: &str = include_str!("../../../configs/photon-packet-gaussian.json");
const ELECTRON_PACKET: &str = include_str!("../../../configs/electron-packet.json");
const PHOTON_BOX: &str = include_str!("../../../configs/photon-box.json");
const ELECTRON_BOX: &str = include_str!("../../../configs/electron-box.json");
const BOOST: &str = include_str!("../../../configs/boost.json");
const SCHRODINGER: &str = include_str!("../../../configs/schrodinger-map.json");
const COMPOSITE: &str = include_str!("../../../configs/composite.json");
const MODULATE: &str = include_str!("../../../configs/modulate.json");

fn checkpoint_table() -> Verdict {
    let report = run(CHECKPOINT)?;
    let mut note =
        require(&report, &[("wavelength-identity", 1e-12), ("energy-identity", 1e-12), ("expected-wavelength", 0.04)])?;
    // per-row gates: 0.1% on c/f, 1% on the photon energy, factor 2 on E0
    let rows = [
        ("expected-wavelength[1 MHz]", 1e-3),
        ("expected-energy[1 MHz]", 1e-2),
        ("expected-e0[1 MHz]", 2.0),
        ("expected-wavelength[1 keV]", 0.04),
        ("expected-e0[1 keV]", 2.0),
    ];
    for (name, bound) in rows {
        let c = report.checks.iter().find(|c| c.name == name).ok_or(format!("check {name} missing"))?;
        if c.tolerance > bound || !c.pass {
            return Err(format!(
                "{name}: measured {:e} expected {:e} tolerance {:e}",
                c.measured, c.expected, c.tolerance
            ));
        }
    }
    note.push_str(", per-row gates hold");
    Ok(note)
}

fn photon_ladder() -> Verdict {
    let gaussian = run(PHOTON_GAUSSIAN)?;
    let width = gaussian.input["physics"]["envelope"]["gaussian"]["width"].as_str().unwrap_or("");
    let lambda = quantity(&gaussian, "wavelength")?;
    let w = scenario::units::parse_quantity(width, scenario::units::Dimension::Length).map_err(|e| e.to_string())?;
    if (w / lambda - 8.0).abs() > 1e-9 {
        return Err(format!("gaussian width is {} wavelengths, not 8", w / lambda));
    }
    scenario_criterion(&[
        (PHOTON_PLANE, &[("energy-spin-ratio", 1e-10), ("momentum-spin-ratio", 1e-10)]),
        (PHOTON_GAUSSIAN, &[("energy-spin-ratio", 2e-2), ("momentum-spin-ratio", 2e-2)]),
    ])
}

fn electron_ladder() -> Verdict {
    scenario_criterion(&[(
        ELECTRON_PACKET,
        &[
            ("energy-quantum", 1e-10),
            ("momentum-quantum", 1e-10),
            ("energy-spin-factor", 1e-10),
            ("momentum-spin-factor", 1e-10),
            ("spin-half", 1e-10),
        ],
    )])
}

fn box_modes(report: &RunReport) -> Result<(), String> {
    let points = report.input["grid"]["points"].as_u64();
    let modes: Vec<u64> = report.input["physics"]["modes"]
        .as_array()
        .map(|a| a.iter().filter_map(|v| v.as_u64()).collect())
        .unwrap_or_default();
    if points != Some(256) || modes != [1, 2, 3, 4] {
        return Err(format!("{}: expected modes 1..4 on 256 samples", report.scenario));
    }
    Ok(())
}

fn quantized_energies() -> Verdict {
    box_modes(&run(PHOTON_BOX)?)?;
    box_modes(&run(ELECTRON_BOX)?)?;
    scenario_criterion(&[
        (PHOTON_BOX, &[("mode-energy", 1e-8)]),
        (ELECTRON_BOX, &[("box-energy", 1e-8), ("kinetic-energy", 1e-8)]),
    ])
}

fn lorentz_invariance() -> Verdict {
    let report = run(BOOST)?;
    if quantity(&report, "phase_samples")? < 1000.0 {
        return Err("fewer than 1000 phase samples".into());
    }
    require(
        &report,
        &[
            ("invariant-phase", 1e-12),
            ("rest-frequency", 1e-10),
            ("rest-wavevector", 1e-10),
            ("doppler-ratio", 1e-10),
            ("photon-null", 1e-10),
        ],
    )
}

fn schrodinger_mapping() -> Verdict {
    let report = run(SCHRODINGER)?;
    if report.input["physics"]["steps"].as_u64() != Some(1000) {
        return Err("conservation run must cover 1000 steps".into());
    }
    let mut note = require(
        &report,
        &[
            ("rotation-vs-phase", 1e-12),
            ("plane-wave-residual", 1e-8),
            ("norm-drift-per-step", 1e-12),
            ("energy-drift", 1e-8),
        ],
    )?;
    note.push_str("; ");
    note.push_str(&require(&run(ELECTRON_BOX)?, &[("eigen-residual", 1e-8)])?);
    Ok(note)
}

fn composite_rotation() -> Verdict {
    let report = run(COMPOSITE)?;
    if report.input["physics"]["periods"].as_f64().unwrap_or(0.0) < 10.0 {
        return Err("fit must cover 10 carrier periods".into());
    }
    require(&report, &[("composite-rate", 1e-6), ("composite-kinetic-rate", 1e-6)])
}

fn modulation() -> Verdict {
    let report = run(MODULATE)?;
    let scale = report.provenance.natural_scale.as_ref().ok_or("missing natural scale")?;
    let bin = quantity(&report, "spectral_bin")? * scale.time_s;
    let index = quantity(&report, "modulation_index")?;
    if index > 0.1 {
        return Err(format!("modulation index {index} above 0.1"));
    }
    let slack = 1.0 + 1e-12;
    let mut note = require(
        &report,
        &[
            ("static-shift", bin * slack),
            ("upper-sideband", bin * slack),
            ("lower-sideband", bin * slack),
            ("sideband-symmetry", 1e-2),
            ("ledger-closure", 2.0 * bin * slack),
        ],
    )?;
    for c in report.checks.iter().filter(|c| c.name != "sideband-symmetry" && c.name != "bessel-ratio") {
        if c.gate != Gate::Absolute {
            return Err(format!("{} is not gated in frequency", c.name));
        }
    }
    note.push_str(&format!(", index {index:.3}"));
    Ok(note)
}

fn max_diff(a: &RealVectorField, b: &RealVectorField) -> f64 {
    (0..3).flat_map(|i| a.component(i).iter().zip(b.component(i)).map(|(x, y)| (x - y).abs())).fold(0.0, f64::max)
}

fn random_transverse(grid: &GridSpec, rng: &mut ChaCha8Rng, modes: usize) -> RealVectorField {
    let l: Vec<f64> = grid.axes().iter().map(|a| a.extent).collect();
    let terms: Vec<([f64; 3], [f64; 3], f64)> = (0..modes)
        .map(|_| {
            let mut k = [0.0; 3];
            for (i, a) in grid.axes().iter().enumerate() {
                let axis = if grid.dims() == 1 { 2 } else { i };
                let n = rng.gen_range(-3i32..=3) as f64;
                k[axis] = 2.0 * PI * n / l[i];
                let _ = a;
            }
            let pol = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            (k, pol, rng.gen_range(0.0..2.0 * PI))
        })
        .collect();
    RealVectorField::from_fn(grid, |r| {
        let mut v = [0.0; 3];
        for (k, pol, phase) in &terms {
            let s = (k[0] * r[0] + k[1] * r[1] + k[2] * r[2] + phase).cos();
            for i in 0..3 {
                v[i] += pol[i] * s;
            }
        }
        v
    })
    .expect("finite field")
}

fn property_suites() -> Verdict {
    let nat = PhysicalConstants::natural();
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);

    // helicity flip reverses spin and keeps energy and momentum
    for _ in 0..16 {
        let periods = rng.gen_range(12..17) as f64;
        let grid = GridSpec::periodic_line(periods * 2.0 * PI, 256).map_err(|e| e.to_string())?;
        let env =
            if rng.gen_bool(0.5) { Envelope::Uniform } else { Envelope::gaussian(rng.gen_range(1.0..1.3) * 2.0 * PI) };
        let mk = |h| make_cp_traveling_packet(1.0, h, env, &grid, &nat).and_then(|p| summarize(&p));
        let (a, b) =
            (mk(Helicity::Positive).map_err(|e| e.to_string())?, mk(Helicity::Negative).map_err(|e| e.to_string())?);
        let tol = 1e-12 * a.total_energy.abs().max(a.spin_magnitude());
        if (a.total_energy - b.total_energy).abs() > tol
            || (0..3).any(|i| (a.total_spin[i] + b.total_spin[i]).abs() > tol)
            || (0..3).any(|i| (a.total_momentum[i] - b.total_momentum[i]).abs() > tol)
        {
            return Err("helicity flip broke the spin or energy symmetry".into());
        }

        // normalization is idempotent
        let p = make_cp_traveling_packet(1.0, Helicity::Positive, env, &grid, &nat)
            .map_err(|e| e.to_string())?
            .scaled(rng.gen_range(0.1..10.0));
        let once = normalize_to_spin(&p, 1.0).map_err(|e| e.to_string())?;
        let twice = normalize_to_spin(&once, 1.0).map_err(|e| e.to_string())?;
        let (s1, s2) = (summarize(&once).map_err(|e| e.to_string())?, summarize(&twice).map_err(|e| e.to_string())?);
        if (s1.total_energy / s2.total_energy - 1.0).abs() > 1e-12 || (s2.spin_magnitude() - 1.0).abs() > 1e-12 {
            return Err("normalization is not idempotent".into());
        }
    }

    // boost round trips
    for _ in 0..1000 {
        let fv = FourVector::new(rng.gen_range(-10.0..10.0), [0.0; 3].map(|_: f64| rng.gen_range(-10.0..10.0)));
        let dir: [f64; 3] = [0.0; 3].map(|_: f64| rng.gen_range(-1.0..1.0));
        let n = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt().max(1e-3);
        let speed = rng.gen_range(0.0..0.95);
        let bp = BoostParams::new(dir.map(|d| d / n * speed)).map_err(|e| e.to_string())?;
        let back = boost(&boost(&fv, &bp), &bp.inverse());
        let scale = (fv.time.abs() + fv.space.iter().map(|x| x * x).sum::<f64>().sqrt()) * bp.gamma().powi(2);
        if (back.time - fv.time).abs() > 1e-12 * scale
            || (0..3).any(|i| (back.space[i] - fv.space[i]).abs() > 1e-12 * scale)
        {
            return Err("boost round trip drifted".into());
        }
    }

    // curl of the Coulomb-gauge inverse curl is the identity
    for grid in [GridSpec::periodic_line(3.0, 64), GridSpec::periodic_cube(2.0, 16)] {
        let grid = grid.map_err(|e| e.to_string())?;
        for _ in 0..4 {
            let b = curl(&random_transverse(&grid, &mut rng, 6)).map_err(|e| e.to_string())?;
            let a = inverse_curl_coulomb(&b).map_err(|e| e.to_string())?;
            let back = curl(&a).map_err(|e| e.to_string())?;
            if max_diff(&back, &b) > 1e-10 * b.max_norm() {
                return Err("curl of inverse curl differs from the input".into());
            }
            if divergence(&a).map_err(|e| e.to_string())?.max_abs() > 1e-10 * b.max_norm() {
                return Err("inverse curl is not divergence-free".into());
            }
        }
    }

    // Parseval
    for _ in 0..32 {
        let grid = GridSpec::periodic_line(rng.gen_range(0.5..5.0), 128).map_err(|e| e.to_string())?;
        let f =
            ComplexScalarField::from_fn(&grid, |_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .map_err(|e| e.to_string())?;
        let rhs: f64 = spectrum(&f).coefficients.iter().map(|c| c.norm_sqr()).sum();
        if (f.sum_sqr() / rhs - 1.0).abs() > 1e-12 {
            return Err("Parseval identity failed".into());
        }
    }

    // identical inputs give byte-identical reports
    for text in [BOOST, PHOTON_PLANE, CHECKPOINT] {
        let a = report_json(&run(text)?);
        let b = report_json(&run(text)?);
        if a != b {
            return Err("report.json differs between identical runs".into());
        }
    }
    Ok("helicity, normalization, boost, inverse curl, Parseval, determinism".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("1 photon checkpoint table", checkpoint_table),
        ("2 photon energy and momentum ladder", photon_ladder),
        ("3 electron energy and momentum ladder", electron_ladder),
        ("4 quantized box energies", quantized_energies),
        ("5 Lorentz invariance", lorentz_invariance),
        ("6 Schrodinger mapping", schrodinger_mapping),
        ("7 composite rotation rate", composite_rotation),
        ("8 modulation sidebands and ledger", modulation),
        ("9 property suites", property_suites),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match f() {
            Ok(note) => println!("PASS {name}: {note}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
