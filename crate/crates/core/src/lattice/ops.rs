use num_complex::Complex64;

use super::field::{ComplexScalarField, Parity, RealVectorField, ScalarField};
use super::grid::{Boundary, GridSpec};
use super::transform::Transform;
use crate::error::{Error, Result};
use crate::vec3::{cross, dot};

/// Edge amplitude allowed on open axes, relative to the field maximum.
pub const SUPPORT_TOLERANCE: f64 = 1e-10;
/// Relative size of the `k = 0` component that counts as a gauge ambiguity.
pub const ZERO_MODE_TOLERANCE: f64 = 1e-10;
/// Relative divergence accepted by the Coulomb-gauge inverse curl.
pub const DIVERGENCE_TOLERANCE: f64 = 1e-10;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Fixed-order pairwise summation.
pub(crate) fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

/// `sum_j f_j h^dims` with a deterministic tree reduction.
pub fn integrate_scalar(f: &[f64], grid: &GridSpec) -> Result<f64> {
    if f.len() != grid.len() {
        return Err(Error::InvalidInput(format!("expected {} samples, got {}", grid.len(), f.len())));
    }
    if let Some(index) = f.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    Ok(pairwise_sum(f) * grid.cell_volume())
}

/// Open axes must carry fields that vanish (relative to the maximum) within
/// two samples of either edge.
pub(crate) fn check_support(grid: &GridSpec, comps: &[&[f64]]) -> Result<()> {
    let max = comps.iter().flat_map(|c| c.iter()).fold(0.0_f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        return Ok(());
    }
    for (axis, a) in grid.axes().iter().enumerate() {
        if a.boundary != Boundary::Open {
            continue;
        }
        let n = a.points;
        let mut edge = 0.0_f64;
        for flat in 0..grid.len() {
            let j = grid.unravel(flat)[axis];
            if j < 2 || j + 2 >= n {
                for c in comps {
                    edge = edge.max(c[flat].abs());
                }
            }
        }
        let ratio = edge / max;
        if ratio >= SUPPORT_TOLERANCE {
            return Err(Error::NotCompact { axis, ratio });
        }
    }
    Ok(())
}

fn spectral_vector(t: &Transform, f: &RealVectorField) -> [Vec<Complex64>; 3] {
    let p = f.parity();
    [t.forward_real(f.component(0), p[0]), t.forward_real(f.component(1), p[1]), t.forward_real(f.component(2), p[2])]
}

fn vector_parity_after_curl(grid: &GridSpec, p: [Parity; 3]) -> [Parity; 3] {
    if grid.dims() == 1 {
        // only d/dz acts: (curl F)_x = -dF_y/dz, (curl F)_y = dF_x/dz
        [p[1].flip(), p[0].flip(), Parity::Odd]
    } else {
        p
    }
}

/// Spectral curl `i k x F(k)`; exact for band-limited fields.
pub fn curl(f: &RealVectorField) -> Result<RealVectorField> {
    let grid = f.grid();
    check_support(grid, &[f.component(0), f.component(1), f.component(2)])?;
    let t = Transform::new(grid);
    let spec = spectral_vector(&t, f);
    let mut out =
        [vec![Complex64::default(); t.len()], vec![Complex64::default(); t.len()], vec![Complex64::default(); t.len()]];
    for q in 0..t.len() {
        if t.is_nyquist(q) {
            continue;
        }
        let k = t.wavevector(q);
        let v = [spec[0][q], spec[1][q], spec[2][q]];
        let c = [I * (k[1] * v[2] - k[2] * v[1]), I * (k[2] * v[0] - k[0] * v[2]), I * (k[0] * v[1] - k[1] * v[0])];
        for i in 0..3 {
            out[i][q] = c[i];
        }
    }
    let [x, y, z] = out;
    RealVectorField::with_parity(
        grid.clone(),
        [t.inverse_real(x), t.inverse_real(y), t.inverse_real(z)],
        vector_parity_after_curl(grid, f.parity()),
    )
}

/// Spectral divergence `i k . F(k)`.
pub fn divergence(f: &RealVectorField) -> Result<ScalarField> {
    let grid = f.grid();
    check_support(grid, &[f.component(0), f.component(1), f.component(2)])?;
    let t = Transform::new(grid);
    let spec = spectral_vector(&t, f);
    let out: Vec<Complex64> = (0..t.len())
        .map(|q| {
            if t.is_nyquist(q) {
                return Complex64::default();
            }
            let k = t.wavevector(q);
            I * (k[0] * spec[0][q] + k[1] * spec[1][q] + k[2] * spec[2][q])
        })
        .collect();
    ScalarField::new(grid.clone(), t.inverse_real(out))
}

/// Spectral gradient of a complex field (Nyquist modes dropped).
pub fn gradient(f: &ComplexScalarField) -> Result<[ComplexScalarField; 3]> {
    let grid = f.grid();
    let t = Transform::new(grid);
    let spec = t.forward(f.values(), Parity::Odd);
    let mut parts = Vec::with_capacity(3);
    for dir in 0..3 {
        let d: Vec<Complex64> = (0..t.len())
            .map(|q| if t.is_nyquist(q) { Complex64::default() } else { I * t.wavevector(q)[dir] * spec[q] })
            .collect();
        parts.push(ComplexScalarField::new(grid.clone(), t.inverse(d))?);
    }
    let z = parts.pop().unwrap();
    let y = parts.pop().unwrap();
    let x = parts.pop().unwrap();
    Ok([x, y, z])
}

/// Coulomb-gauge vector potential: `A(k) = i k x B(k) / |k|^2`.
///
/// Returns `A` with `curl A = B` and `div A = 0`. Rejects fields with a
/// non-zero `k = 0` component (the uniform part of `A` is not fixed by `B`)
/// and fields that are not divergence-free.
pub fn inverse_curl_coulomb(b: &RealVectorField) -> Result<RealVectorField> {
    let grid = b.grid();
    check_support(grid, &[b.component(0), b.component(1), b.component(2)])?;
    let t = Transform::new(grid);
    let spec = spectral_vector(&t, b);
    let scale = (0..t.len())
        .map(|q| (spec[0][q].norm_sqr() + spec[1][q].norm_sqr() + spec[2][q].norm_sqr()).sqrt())
        .fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(RealVectorField::zeros(grid).set_parity(vector_parity_after_curl(grid, b.parity())));
    }
    let zero = (spec[0][0].norm_sqr() + spec[1][0].norm_sqr() + spec[2][0].norm_sqr()).sqrt() / scale;
    if zero > ZERO_MODE_TOLERANCE {
        return Err(Error::GaugeAmbiguity { relative: zero });
    }
    let mut div_max = 0.0_f64;
    let mut kb_max = 0.0_f64;
    for q in 1..t.len() {
        if t.is_nyquist(q) {
            continue;
        }
        let k = t.wavevector(q);
        let div = k[0] * spec[0][q] + k[1] * spec[1][q] + k[2] * spec[2][q];
        let kn = dot(k, k).sqrt();
        let bn = (spec[0][q].norm_sqr() + spec[1][q].norm_sqr() + spec[2][q].norm_sqr()).sqrt();
        div_max = div_max.max(div.norm());
        kb_max = kb_max.max(kn * bn);
    }
    if kb_max > 0.0 && div_max / kb_max > DIVERGENCE_TOLERANCE {
        return Err(Error::NotDivergenceFree { relative: div_max / kb_max });
    }
    let mut out =
        [vec![Complex64::default(); t.len()], vec![Complex64::default(); t.len()], vec![Complex64::default(); t.len()]];
    for q in 1..t.len() {
        if t.is_nyquist(q) {
            continue;
        }
        let k = t.wavevector(q);
        let k2 = dot(k, k);
        // i k x B / k^2, split into real and imaginary parts of B
        let re = cross(k, [spec[0][q].re, spec[1][q].re, spec[2][q].re]);
        let im = cross(k, [spec[0][q].im, spec[1][q].im, spec[2][q].im]);
        for i in 0..3 {
            out[i][q] = I * Complex64::new(re[i], im[i]) / k2;
        }
    }
    let [x, y, z] = out;
    RealVectorField::with_parity(
        grid.clone(),
        [t.inverse_real(x), t.inverse_real(y), t.inverse_real(z)],
        vector_parity_after_curl(grid, b.parity()),
    )
}

/// Spectral Laplacian `-|k|^2 f(k)`; on reflecting axes the field is taken to vanish at the walls.
pub fn laplacian(f: &ComplexScalarField) -> Result<ComplexScalarField> {
    let grid = f.grid();
    let re: Vec<f64> = f.values().iter().map(|v| v.re).collect();
    let im: Vec<f64> = f.values().iter().map(|v| v.im).collect();
    check_support(grid, &[&re, &im])?;
    let t = Transform::new(grid);
    let mut spec = t.forward(f.values(), Parity::Odd);
    for (q, v) in spec.iter_mut().enumerate() {
        let k = t.wavevector(q);
        *v *= -dot(k, k);
    }
    ComplexScalarField::new(grid.clone(), t.inverse(spec))
}

/// Exact free evolution: every transform mode is multiplied by `exp(-i w(k) t)`.
pub fn spectral_propagate(
    f: &ComplexScalarField,
    dispersion: impl Fn([f64; 3]) -> f64,
    time: f64,
) -> Result<ComplexScalarField> {
    let grid = f.grid();
    if !grid.all(Boundary::Periodic) {
        return Err(Error::UnsupportedGeometry("spectral propagation needs a periodic lattice".into()));
    }
    if time == 0.0 {
        return Ok(f.clone());
    }
    let t = Transform::new(grid);
    let mut spec = t.forward(f.values(), Parity::Odd);
    for (q, v) in spec.iter_mut().enumerate() {
        *v *= Complex64::from_polar(1.0, -dispersion(t.wavevector(q)) * time);
    }
    ComplexScalarField::new(grid.clone(), t.inverse(spec))
}

/// Orthonormal transform coefficients with their wavevectors.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub wavevectors: Vec<[f64; 3]>,
    /// Normalized so that `sum |c|^2` equals the lattice sum `sum |f_j|^2`.
    pub coefficients: Vec<Complex64>,
    /// Modes on a Nyquist plane; their wavevector sign is ambiguous.
    pub nyquist: Vec<bool>,
    /// Transform-space spacing along each Cartesian direction (0 where unresolved).
    pub bin: [f64; 3],
}

impl Spectrum {
    /// Power-weighted mean wavevector (Nyquist modes excluded).
    pub fn centroid(&self) -> [f64; 3] {
        let mut acc = [0.0; 3];
        let mut total = 0.0;
        for ((k, c), _) in self.wavevectors.iter().zip(&self.coefficients).zip(&self.nyquist).filter(|(_, &n)| !n) {
            let w = c.norm_sqr();
            total += w;
            for i in 0..3 {
                acc[i] += w * k[i];
            }
        }
        if total == 0.0 {
            return [0.0; 3];
        }
        [acc[0] / total, acc[1] / total, acc[2] / total]
    }
}

pub fn spectrum(f: &ComplexScalarField) -> Spectrum {
    let grid = f.grid();
    let t = Transform::new(grid);
    let raw = t.forward(f.values(), Parity::Odd);
    let norm = 1.0 / (t.len() as f64 * t.extension_factor()).sqrt();
    let wavevectors = (0..t.len()).map(|q| t.wavevector(q)).collect();
    let nyquist = (0..t.len()).map(|q| t.is_nyquist(q)).collect();
    let coefficients = raw.into_iter().map(|v| v * norm).collect();
    let mut bin = [0.0; 3];
    for i in 0..grid.dims() {
        let a = grid.axes()[i];
        let n = if a.boundary == Boundary::Dirichlet { 2 * a.points } else { a.points };
        bin[grid.cartesian_axis(i)] = 2.0 * std::f64::consts::PI / (n as f64 * a.spacing());
    }
    Spectrum { wavevectors, coefficients, nyquist, bin }
}
