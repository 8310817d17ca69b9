use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::error::Error;

fn line(extent: f64, n: usize) -> GridSpec {
    GridSpec::periodic_line(extent, n).unwrap()
}

/// Composite Simpson on a fine mesh; independent of the lattice sum.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

#[test]
fn integrate_constant() {
    let g = line(2.0, 64);
    let v = vec![1.0; 64];
    assert!((integrate_scalar(&v, &g).unwrap() - 2.0).abs() < 1e-15);
}

#[test]
fn integrate_sin_squared_full_period() {
    let extent = 3.0;
    let g = line(extent, 128);
    let k = 2.0 * PI / extent;
    let v: Vec<f64> = (0..128).map(|j| (k * g.position(j)[2]).sin().powi(2)).collect();
    assert!((integrate_scalar(&v, &g).unwrap() - extent / 2.0).abs() < 1e-14);
}

#[test]
fn integrate_gaussian_against_quadrature() {
    let extent = 16.0;
    let sigma = extent / 16.0;
    let g = line(extent, 256);
    let c = extent / 2.0;
    let f = |z: f64| (-(z - c).powi(2) / (2.0 * sigma * sigma)).exp();
    let v: Vec<f64> = (0..256).map(|j| f(g.position(j)[2])).collect();
    let oracle = simpson(f, 0.0, extent, 200_000);
    assert!((oracle / (sigma * (2.0 * PI).sqrt()) - 1.0).abs() < 1e-12);
    let got = integrate_scalar(&v, &g).unwrap();
    assert!((got / oracle - 1.0).abs() < 1e-10, "{got} vs {oracle}");
}

#[test]
fn integrate_rejects_non_finite_with_index() {
    let g = line(1.0, 8);
    let mut v = vec![0.0; 8];
    v[5] = f64::NAN;
    assert_eq!(integrate_scalar(&v, &g), Err(Error::NonFinite { index: 5 }));
}

#[test]
fn integrate_is_bitwise_deterministic() {
    let g = line(1.0, 1024);
    let v: Vec<f64> = (0..1024).map(|j| ((j * 7919) % 1013) as f64 * 1e-3 + (j as f64).sin()).collect();
    let a = integrate_scalar(&v, &g).unwrap();
    let b = integrate_scalar(&v.clone(), &g).unwrap();
    assert_eq!(a.to_bits(), b.to_bits());
}

fn helical(g: &GridSpec, k: f64) -> RealVectorField {
    RealVectorField::from_fn(g, |r| [(k * r[2]).cos(), (k * r[2]).sin(), 0.0]).unwrap()
}

#[test]
fn curl_of_helix() {
    let g = line(4.0, 64);
    let k = 2.0 * PI * 3.0 / 4.0;
    let f = helical(&g, k);
    let c = curl(&f).unwrap();
    // d/dz acting on (cos kz, sin kz, 0): curl = (-k cos kz, -k sin kz, 0)
    for j in 0..64 {
        let z = g.position(j)[2];
        assert!((c.component(0)[j] + k * (k * z).cos()).abs() < 1e-12);
        assert!((c.component(1)[j] + k * (k * z).sin()).abs() < 1e-12);
        assert!(c.component(2)[j].abs() < 1e-12);
    }
}

#[test]
fn curl_of_uniform_field_is_zero() {
    let g = GridSpec::periodic_cube(1.0, 8).unwrap();
    let f = RealVectorField::from_fn(&g, |_| [1.0, -2.0, 0.5]).unwrap();
    assert!(curl(&f).unwrap().max_norm() < 1e-14);
}

fn random_transverse_field(g: &GridSpec, rng: &mut ChaCha8Rng, modes: usize) -> RealVectorField {
    // sum of plane waves with polarization transverse to k; no Nyquist content
    let ext = g.axes()[0].extent;
    let kmax = (g.axes()[0].points / 4) as i64;
    let mut terms = Vec::new();
    for _ in 0..modes {
        let m: [i64; 3] = if g.dims() == 1 {
            [0, 0, rng.gen_range(1..kmax)]
        } else {
            [rng.gen_range(-kmax..kmax), rng.gen_range(-kmax..kmax), rng.gen_range(1..kmax)]
        };
        let k = [2.0 * PI * m[0] as f64 / ext, 2.0 * PI * m[1] as f64 / ext, 2.0 * PI * m[2] as f64 / ext];
        let (e1, e2) = crate::vec3::transverse_basis(k);
        let (a, b, ph) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.0..2.0 * PI));
        terms.push((k, crate::vec3::add(crate::vec3::scale(e1, a), crate::vec3::scale(e2, b)), ph));
    }
    RealVectorField::from_fn(g, |r| {
        let mut v = [0.0; 3];
        for (k, pol, ph) in &terms {
            let c = (crate::vec3::dot(*k, r) + ph).cos();
            for i in 0..3 {
                v[i] += pol[i] * c;
            }
        }
        v
    })
    .unwrap()
}

fn max_diff(a: &RealVectorField, b: &RealVectorField) -> f64 {
    (0..a.len()).map(|i| crate::vec3::norm(crate::vec3::sub(a.at(i), b.at(i)))).fold(0.0, f64::max)
}

#[test]
fn curl_curl_plus_laplacian_vanishes_for_transverse_fields() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let g = GridSpec::periodic_cube(2.0, 16).unwrap();
    let f = random_transverse_field(&g, &mut rng, 5);
    let cc = curl(&curl(&f).unwrap()).unwrap();
    let mut lap = [vec![], vec![], vec![]];
    for (i, l) in lap.iter_mut().enumerate() {
        let c = ComplexScalarField::new(g.clone(), f.component(i).iter().map(|&v| Complex64::new(v, 0.0)).collect())
            .unwrap();
        *l = laplacian(&c).unwrap().values().iter().map(|v| v.re).collect();
    }
    let lap = RealVectorField::new(g.clone(), lap).unwrap();
    let sum = cc.add(&lap).unwrap();
    assert!(sum.max_norm() < 1e-10 * cc.max_norm());
}

#[test]
fn inverse_curl_of_plane_wave() {
    // CP plane wave: E = (cos kz, sin kz, 0), B = z x E / c, A = E / w shifted by 90 degrees.
    let g = line(2.0 * PI, 64);
    let k = 3.0;
    let e0 = 0.7;
    let b = RealVectorField::from_fn(&g, |r| [-e0 * (k * r[2]).sin(), e0 * (k * r[2]).cos(), 0.0]).unwrap();
    let a = inverse_curl_coulomb(&b).unwrap();
    for j in 0..64 {
        let v = a.at(j);
        assert!((crate::vec3::norm(v) - e0 / k).abs() < 1e-12);
    }
    assert!(max_diff(&curl(&a).unwrap(), &b) < 1e-12);
}

#[test]
fn inverse_curl_of_zero_is_zero() {
    let g = line(1.0, 16);
    let a = inverse_curl_coulomb(&RealVectorField::zeros(&g)).unwrap();
    assert_eq!(a.max_norm(), 0.0);
}

#[test]
fn inverse_curl_rejects_uniform_component() {
    let g = line(1.0, 16);
    let b = RealVectorField::from_fn(&g, |r| [1.0 + (2.0 * PI * r[2]).cos(), 0.0, 0.0]).unwrap();
    assert!(matches!(inverse_curl_coulomb(&b), Err(Error::GaugeAmbiguity { .. })));
}

#[test]
fn inverse_curl_rejects_divergent_field() {
    let g = GridSpec::periodic_cube(1.0, 8).unwrap();
    let b = RealVectorField::from_fn(&g, |r| [(2.0 * PI * r[0]).sin(), 0.0, 0.0]).unwrap();
    assert!(matches!(inverse_curl_coulomb(&b), Err(Error::NotDivergenceFree { .. })));
}

#[test]
fn inverse_curl_round_trip_and_gauge() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for g in [line(3.0, 64), GridSpec::periodic_cube(2.0, 16).unwrap()] {
        for _ in 0..4 {
            let f = random_transverse_field(&g, &mut rng, 6);
            let b = curl(&f).unwrap();
            let a = inverse_curl_coulomb(&b).unwrap();
            let back = curl(&a).unwrap();
            assert!(max_diff(&back, &b) <= 1e-10 * b.max_norm());
            let div = divergence(&a).unwrap();
            assert!(div.max_abs() <= 1e-10 * b.max_norm());
        }
    }
}

#[test]
fn single_mode_curl_is_analytic() {
    let g = GridSpec::periodic_cube(1.0, 16).unwrap();
    let k = [2.0 * PI * 2.0, -2.0 * PI * 3.0, 2.0 * PI];
    let pol = [0.3, -0.2, 0.9];
    let f = RealVectorField::from_fn(&g, |r| crate::vec3::scale(pol, crate::vec3::dot(k, r).cos())).unwrap();
    let c = curl(&f).unwrap();
    let kxp = crate::vec3::cross(k, pol);
    let exact = RealVectorField::from_fn(&g, |r| crate::vec3::scale(kxp, -crate::vec3::dot(k, r).sin())).unwrap();
    assert!(max_diff(&c, &exact) < 1e-12 * crate::vec3::norm(kxp));
}

#[test]
fn open_axis_requires_compact_support() {
    let g = GridSpec::line(Axis::new(10.0, 64, Boundary::Open)).unwrap();
    let wide = RealVectorField::from_fn(&g, |r| [(-(r[2] - 5.0).powi(2) / 2.0).exp(), 0.0, 0.0]).unwrap();
    assert!(matches!(curl(&wide), Err(Error::NotCompact { .. })));
    let narrow = RealVectorField::from_fn(&g, |r| [(-(r[2] - 5.0).powi(2) / 0.5).exp(), 0.0, 0.0]).unwrap();
    assert!(curl(&narrow).is_ok());
}

#[test]
fn dirichlet_curl_and_inverse_curl_of_standing_wave() {
    let l = 1.0;
    let g = GridSpec::line(Axis::new(l, 64, Boundary::Dirichlet)).unwrap();
    for n in 1..5 {
        let k = n as f64 * PI / l;
        let a = RealVectorField::from_fn(&g, |r| [0.0, (k * r[2]).sin(), 0.0]).unwrap();
        let b = curl(&a).unwrap();
        assert_eq!(b.parity()[0], Parity::Even);
        for j in 0..64 {
            let z = g.position(j)[2];
            assert!((b.component(0)[j] + k * (k * z).cos()).abs() < 1e-11);
        }
        let back = inverse_curl_coulomb(&b).unwrap();
        assert!(max_diff(&back, &a) < 1e-12);
    }
}

#[test]
fn dirichlet_laplacian_of_sine_modes() {
    let l = 2.0;
    let g = GridSpec::line(Axis::new(l, 32, Boundary::Dirichlet)).unwrap();
    for n in 1..8 {
        let k = n as f64 * PI / l;
        let f = ComplexScalarField::from_fn(&g, |r| Complex64::new((k * r[2]).sin(), 0.0)).unwrap();
        let lap = laplacian(&f).unwrap();
        for (a, b) in lap.values().iter().zip(f.values()) {
            assert!((a + b * k * k).norm() < 1e-11 * k * k);
        }
    }
}

#[test]
fn propagate_identity_at_zero_time() {
    let g = line(1.0, 16);
    let f = ComplexScalarField::from_fn(&g, |r| Complex64::new(r[2], 1.0)).unwrap();
    assert_eq!(spectral_propagate(&f, |k| k[2].abs(), 0.0).unwrap(), f);
}

#[test]
fn propagate_full_period_is_identity() {
    let g = line(1.0, 32);
    let k1 = 2.0 * PI * 3.0;
    let f = ComplexScalarField::from_fn(&g, |r| Complex64::from_polar(1.0, k1 * r[2])).unwrap();
    let w1 = k1;
    let out = spectral_propagate(&f, crate::vec3::norm, 2.0 * PI / w1).unwrap();
    for (a, b) in out.values().iter().zip(f.values()) {
        assert!((a - b).norm() < 1e-12);
    }
}

#[test]
fn propagate_rejects_non_periodic() {
    let g = GridSpec::line(Axis::new(1.0, 16, Boundary::Open)).unwrap();
    let f = ComplexScalarField::zeros(&g);
    assert!(matches!(spectral_propagate(&f, |_| 0.0, 1.0), Err(Error::UnsupportedGeometry(_))));
}

#[test]
fn propagate_gaussian_matches_closed_form() {
    // free dispersion w = k^2 / 2m with hbar = 1
    let (extent, n, m, s0) = (80.0, 512, 1.0, 1.5);
    let g = line(extent, n);
    let z0 = extent / 2.0;
    let f = ComplexScalarField::from_fn(&g, |r| Complex64::new((-(r[2] - z0).powi(2) / (4.0 * s0 * s0)).exp(), 0.0))
        .unwrap();
    let t = 6.0;
    let out = spectral_propagate(&f, |k| crate::vec3::dot(k, k) / (2.0 * m), t).unwrap();
    let a = Complex64::new(1.0, t / (2.0 * m * s0 * s0));
    let exact =
        ComplexScalarField::from_fn(&g, |r| (-(r[2] - z0).powi(2) / (4.0 * s0 * s0 * a)).exp() / a.sqrt()).unwrap();
    for (x, y) in out.values().iter().zip(exact.values()) {
        assert!((x - y).norm() < 1e-8);
    }
    let width = |f: &ComplexScalarField| {
        let w: Vec<f64> = f.values().iter().map(|v| v.norm_sqr()).collect();
        let tot: f64 = w.iter().sum();
        let var: f64 = w.iter().enumerate().map(|(j, p)| p * (g.position(j)[2] - z0).powi(2)).sum::<f64>() / tot;
        var.sqrt()
    };
    let expected = s0 * (1.0 + (t / (2.0 * m * s0 * s0)).powi(2)).sqrt();
    assert!((width(&out) / expected - 1.0).abs() < 1e-8);
}

#[test]
fn parseval_holds_for_orthonormal_spectrum() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for g in [
        line(1.0, 128),
        GridSpec::periodic_cube(1.0, 8).unwrap(),
        GridSpec::line(Axis::new(1.0, 64, Boundary::Dirichlet)).unwrap(),
    ] {
        let f = ComplexScalarField::from_fn(&g, |_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .unwrap();
        let s = spectrum(&f);
        let lhs = f.sum_sqr();
        let rhs: f64 = s.coefficients.iter().map(|c| c.norm_sqr()).sum();
        assert!((lhs / rhs - 1.0).abs() < 1e-12);
    }
}

proptest! {
    #[test]
    fn propagation_is_unitary(seed in 0u64..1000, t in -50.0f64..50.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = line(5.0, 64);
        let f = ComplexScalarField::from_fn(&g, |_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).unwrap();
        let out = spectral_propagate(&f, |k| 0.5 * crate::vec3::dot(k, k) + 1.0, t).unwrap();
        prop_assert!((out.norm_sqr() / f.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn parseval_random_lines(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = line(2.0, 256);
        let f = ComplexScalarField::from_fn(&g, |_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0)).unwrap();
        let s = spectrum(&f);
        let rhs: f64 = s.coefficients.iter().map(|c| c.norm_sqr()).sum();
        prop_assert!((f.sum_sqr() / rhs - 1.0).abs() < 1e-12);
    }
}
