use std::f64::consts::PI;

use proptest::prelude::*;

use super::*;
use crate::electron::{de_broglie_wavelength, normalize_to_spin_half};
use crate::lattice::GridSpec;
use crate::photon::{make_cp_traveling_packet, normalize_to_spin};
use crate::Helicity;

fn nat() -> PhysicalConstants {
    PhysicalConstants::natural()
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn beta() -> impl Strategy<Value = Vec3> {
    (-0.9f64..0.9, -0.9f64..0.9, -0.9f64..0.9).prop_map(|(x, y, z)| {
        let v = [x, y, z];
        let n = vec3::norm(v);
        if n >= 0.95 {
            vec3::scale(v, 0.95 / n)
        } else {
            v
        }
    })
}

#[test]
fn zero_boost_is_identity() {
    let fv = FourVector::new(3.0, [1.0, -2.0, 0.5]);
    assert_eq!(boost(&fv, &BoostParams::new([0.0; 3]).unwrap()), fv);
    assert_eq!(boost(&fv, &BoostParams::identity()), fv);
}

#[test]
fn invalid_boosts() {
    assert!(matches!(BoostParams::new([1.0, 0.0, 0.0]), Err(Error::InvalidBoost { .. })));
    assert!(matches!(BoostParams::new([0.8, 0.7, 0.0]), Err(Error::InvalidBoost { .. })));
    assert!(BoostParams::new([f64::NAN, 0.0, 0.0]).is_err());
}

#[test]
fn gamma_matches_beta() {
    let b = BoostParams::new([0.6, 0.0, 0.0]).unwrap();
    assert!((b.gamma() - 1.25).abs() < 1e-14);
}

#[test]
fn doppler_factor_two() {
    // active boost by +0.6 along the photon direction blueshifts by sqrt(1.6/0.4) = 2
    let b = BoostParams::new([0.0, 0.0, 0.6]).unwrap();
    let (w, k) = boost_photon_carrier(1.0, [0.0, 0.0, 1.0], &b, &nat());
    assert!((w - 2.0).abs() < 1e-14 && (k[2] - 2.0).abs() < 1e-14);
    let (w, k) = boost_photon_carrier(1.0, [0.0, 0.0, 1.0], &b.inverse(), &nat());
    assert!((w - 0.5).abs() < 1e-14 && (k[2] - 0.5).abs() < 1e-14);
    // matches sqrt((1 + beta)/(1 - beta)) in SI as well
    let si = PhysicalConstants::si();
    let omega = 2.0 * PI * 5e14;
    let (w, k) = boost_photon_carrier(omega, [0.0, 0.0, omega / si.c], &b, &si);
    assert!(rel(w, 2.0 * omega) < 1e-14);
    assert!(rel(si.c * vec3::norm(k), w) < 1e-14);
}

#[test]
fn aberration_angle() {
    let beta = 0.3;
    let b = BoostParams::new([beta, 0.0, 0.0]).unwrap();
    let (w, k) = boost_photon_carrier(1.0, [0.0, 0.0, 1.0], &b, &nat());
    let g = b.gamma();
    assert!(rel(w, g) < 1e-14);
    assert!(rel(k[0].atan2(k[2]), (g * beta).atan()) < 1e-14);
    assert!(rel(vec3::norm(k), w) < 1e-14);
}

#[test]
fn electron_boosted_to_rest() {
    let si = PhysicalConstants::si();
    let m = PhysicalConstants::electron_rest_energy_joule() / (si.c * si.c);
    let v = [0.0, 0.0, 0.37 * si.c];
    let b = BoostParams::new(vec3::scale(v, -1.0 / si.c)).unwrap();
    let c = boost_electron_carrier(m, v, &b, &si).unwrap();
    let rest = m * si.c * si.c / si.hbar;
    assert!(rel(c.omega, rest) < 1e-10);
    assert!(vec3::norm(c.k) < 1e-10 * rest / si.c);
    assert!(vec3::norm(c.velocity) < 1e-10 * si.c);
}

#[test]
fn rest_frame_phase_is_uniform() {
    let p4 = FourVector::momentum(2.0, [0.0; 3], &nat());
    for r in [[0.0, 0.0, 0.0], [1.0, 2.0, 3.0], [-5.0, 0.0, 7.0]] {
        let e = FourVector::event(1.5, r, &nat());
        assert!((invariant_phase(&p4, &e, &nat()) - 3.0).abs() < 1e-15);
    }
    assert_eq!(invariant_phase(&FourVector::new(1.0, [1.0; 3]), &FourVector::new(0.0, [0.0; 3]), &nat()), 0.0);
}

#[test]
fn photon_packet_longitudinal_boost() {
    let grid = GridSpec::periodic_line(8.0 * PI, 128).unwrap();
    let p = make_cp_traveling_packet(1.0, Helicity::Positive, crate::Envelope::Uniform, &grid, &nat()).unwrap();
    let p = normalize_to_spin(&p, 1.0).unwrap();
    let out = boost_photon_packet(&p, &BoostParams::new([0.0, 0.0, 0.6]).unwrap()).unwrap();
    let (w, k) = summarize(&out.packet).unwrap().ratios().unwrap();
    assert!(rel(w, 2.0) < 1e-10 && rel(k, 2.0) < 1e-10);
    assert!(rel(summarize(&out.packet).unwrap().spin_magnitude(), 1.0) < 1e-12);
    assert_eq!(out.packet.helicity, Helicity::Positive);
    // fixed periodic box does not contract, so the rebuilt spin is off by the Doppler factor
    assert!(rel(out.spin_deviation, 1.0) < 1e-10);

    let same = boost_photon_packet(&p, &BoostParams::identity()).unwrap();
    assert!(same.spin_deviation.abs() < 1e-12);
    for i in 0..3 {
        for (a, b) in same.packet.e.component(i).iter().zip(p.e.component(i)) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn gaussian_photon_keeps_spin_under_longitudinal_boost() {
    let sigma = 8.0 * 2.0 * PI;
    let grid = GridSpec::periodic_line(24.0 * sigma, 4096).unwrap();
    let p = make_cp_traveling_packet(1.0, Helicity::Negative, crate::Envelope::gaussian(sigma), &grid, &nat()).unwrap();
    let p = normalize_to_spin(&p, 1.0).unwrap();
    let out = boost_photon_packet(&p, &BoostParams::new([0.0, 0.0, -0.6]).unwrap()).unwrap();
    // amplitude D and width sigma / D leave the integrated spin unchanged
    assert!(out.spin_deviation.abs() < 1e-3, "{}", out.spin_deviation);
    let (w, _) = summarize(&out.packet).unwrap().ratios().unwrap();
    assert!(rel(w, 0.5) < 1e-2);
}

#[test]
fn photon_packet_transverse_boost_tilts_direction() {
    let grid = GridSpec::periodic_cube(32.0, 64).unwrap();
    let omega = 2.0 * PI / 4.0;
    let p = make_cp_traveling_packet(omega, Helicity::Positive, crate::Envelope::gaussian(4.0), &grid, &nat()).unwrap();
    let b = BoostParams::new([0.3, 0.0, 0.0]).unwrap();
    let out = boost_photon_packet(&p, &b).unwrap();
    let s = summarize(&out.packet).unwrap();
    let angle = s.total_momentum[0].atan2(s.total_momentum[2]);
    assert!(rel(angle, (b.gamma() * 0.3).atan()) < 1e-6, "{angle}");
    let k = out.packet.carrier_k;
    assert!(rel(vec3::norm(k), out.packet.carrier_omega) < 1e-14);
    assert!(s.total_spin[0] > 0.0 && s.total_spin[2] > 0.0);
    let line = GridSpec::periodic_line(8.0 * PI, 64).unwrap();
    let q = make_cp_traveling_packet(1.0, Helicity::Positive, crate::Envelope::Uniform, &line, &nat()).unwrap();
    assert!(matches!(boost_photon_packet(&q, &b), Err(Error::UnsupportedGeometry(_))));
}

#[test]
fn electron_packet_boost_to_rest_and_back() {
    let speed = 0.6;
    let k = 0.75;
    let grid = GridSpec::periodic_line(4.0 * 2.0 * PI / k, 64).unwrap();
    let z = [0.0, 0.0, 1.0];
    let p =
        make_electron_packet(1.0, [0.0, 0.0, speed], z, Helicity::Positive, crate::Envelope::Uniform, &grid, &nat())
            .unwrap();
    let p = normalize_to_spin_half(&p).unwrap();
    let rest = boost_electron_packet(&p, &BoostParams::new([0.0, 0.0, -speed]).unwrap()).unwrap();
    assert_eq!(rest.velocity, [0.0; 3]);
    assert!(rel(rest.carrier_omega, 1.0) < 1e-12);
    let s = electron_summarize(&rest).unwrap();
    assert!(rel(s.total_energy, 1.0) < 1e-12 && s.momentum_magnitude() < 1e-12);
    let back = boost_electron_packet(&rest, &BoostParams::new([0.0, 0.0, speed]).unwrap()).unwrap();
    assert!(rel(back.carrier_k[2], k) < 1e-12);
    for i in 0..3 {
        for (a, b) in back.psi.component(i).iter().zip(p.psi.component(i)) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn norm_is_preserved(t in -10.0f64..10.0, x in -10.0f64..10.0, y in -10.0f64..10.0, z in -10.0f64..10.0, b in beta()) {
        let fv = FourVector::new(t, [x, y, z]);
        let q = boost(&fv, &BoostParams::new(b).unwrap());
        let scale = (t * t + x * x + y * y + z * z) * BoostParams::new(b).unwrap().gamma().powi(2);
        prop_assert!((q.minkowski_norm() - fv.minkowski_norm()).abs() <= 1e-13 * scale);
    }

    #[test]
    fn boost_round_trip(t in -10.0f64..10.0, x in -10.0f64..10.0, y in -10.0f64..10.0, z in -10.0f64..10.0, b in beta()) {
        let fv = FourVector::new(t, [x, y, z]);
        let bp = BoostParams::new(b).unwrap();
        let back = boost(&boost(&fv, &bp), &bp.inverse());
        let scale = (t.abs() + vec3::norm(fv.space)) * bp.gamma().powi(2);
        prop_assert!((back.time - t).abs() <= 1e-12 * scale);
        for i in 0..3 {
            prop_assert!((back.space[i] - fv.space[i]).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn phase_is_frame_independent(
        e in 0.1f64..10.0, px in -5.0f64..5.0, py in -5.0f64..5.0, pz in -5.0f64..5.0,
        t in -10.0f64..10.0, x in -10.0f64..10.0, y in -10.0f64..10.0, z in -10.0f64..10.0,
        b in beta(),
    ) {
        let p4 = FourVector::new(e, [px, py, pz]);
        let ev = FourVector::new(t, [x, y, z]);
        let bp = BoostParams::new(b).unwrap();
        let lab = invariant_phase(&p4, &ev, &nat());
        let moved = invariant_phase(&boost(&p4, &bp), &boost(&ev, &bp), &nat());
        let scale = (e * t).abs() + vec3::norm(p4.space) * vec3::norm(ev.space);
        prop_assert!((lab - moved).abs() <= 1e-12 * scale * bp.gamma().powi(2));
    }

    #[test]
    fn photon_dispersion_survives_any_boost(theta in 0.0f64..PI, phi in 0.0f64..(2.0 * PI), w in 0.01f64..100.0, b in beta()) {
        let n = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
        let (w2, k2) = boost_photon_carrier(w, vec3::scale(n, w), &BoostParams::new(b).unwrap(), &nat());
        prop_assert!(w2 > 0.0);
        prop_assert!(rel(vec3::norm(k2), w2) < 1e-12);
    }

    #[test]
    fn electron_frequency_floor(v in beta(), b in beta(), m in 0.1f64..10.0) {
        let c = boost_electron_carrier(m, v, &BoostParams::new(b).unwrap(), &nat()).unwrap();
        prop_assert!(c.omega >= m * (1.0 - 1e-12));
        let inv = c.omega * c.omega - vec3::dot(c.k, c.k);
        prop_assert!(rel(inv, m * m) < 1e-10);
        let speed = vec3::norm(c.velocity);
        if speed > 1e-6 {
            let d = de_broglie_wavelength(m, speed, &nat()).unwrap();
            prop_assert!(rel(2.0 * PI / vec3::norm(c.k), d.wavelength) < 1e-10);
        }
    }
}
