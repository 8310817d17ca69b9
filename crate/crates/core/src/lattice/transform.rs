//! Multi-dimensional discrete Fourier transform over a lattice, with mirror
//! extension for reflecting axes.

use std::f64::consts::PI;

use num_complex::Complex64;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use super::field::Parity;
use super::grid::{Boundary, GridSpec};

pub(crate) struct Transform {
    /// Shape of the (possibly mirror-extended) transform.
    shape: Vec<usize>,
    /// Wavenumbers per lattice axis, in FFT order.
    wavenumbers: Vec<Vec<f64>>,
    cartesian: Vec<usize>,
    mirrored: bool,
    original_len: usize,
    /// Forward and inverse plans per axis.
    plans: Vec<PlanPair>,
}

type PlanPair = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

fn fft_wavenumbers(n: usize, spacing: f64) -> Vec<f64> {
    (0..n)
        .map(|j| {
            let m = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
            2.0 * PI * m / (n as f64 * spacing)
        })
        .collect()
}

impl Transform {
    pub fn new(grid: &GridSpec) -> Self {
        let mirrored = grid.has_dirichlet();
        let shape: Vec<usize> = grid
            .axes()
            .iter()
            .map(|a| if a.boundary == Boundary::Dirichlet { 2 * a.points } else { a.points })
            .collect();
        let wavenumbers = grid.axes().iter().zip(&shape).map(|(a, &n)| fft_wavenumbers(n, a.spacing())).collect();
        let cartesian = (0..grid.dims()).map(|i| grid.cartesian_axis(i)).collect();
        let mut planner = FftPlanner::<f64>::new();
        let plans = shape.iter().map(|&n| (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))).collect();
        Self { shape, wavenumbers, cartesian, mirrored, original_len: grid.len(), plans }
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    /// Factor by which the mirror extension multiplies lattice sums.
    pub fn extension_factor(&self) -> f64 {
        if self.mirrored {
            2.0
        } else {
            1.0
        }
    }

    fn unravel(&self, mut flat: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        for i in (0..self.shape.len()).rev() {
            idx[i] = flat % self.shape[i];
            flat /= self.shape[i];
        }
        idx
    }

    /// Cartesian wavevector of transform-space index `flat`.
    pub fn wavevector(&self, flat: usize) -> [f64; 3] {
        let idx = self.unravel(flat);
        let mut k = [0.0; 3];
        for (i, &c) in self.cartesian.iter().enumerate() {
            k[c] = self.wavenumbers[i][idx[i]];
        }
        k
    }

    /// Whether `flat` sits on the Nyquist plane of any axis.
    pub fn is_nyquist(&self, flat: usize) -> bool {
        let idx = self.unravel(flat);
        self.shape.iter().enumerate().any(|(i, &n)| idx[i] == n / 2)
    }

    fn extend(&self, data: &[Complex64], parity: Parity) -> Vec<Complex64> {
        if !self.mirrored {
            return data.to_vec();
        }
        // mirror only exists on one-dimensional lattices
        let n = data.len();
        let sign = match parity {
            Parity::Odd => -1.0,
            Parity::Even => 1.0,
        };
        let mut out = Vec::with_capacity(2 * n);
        out.extend_from_slice(data);
        out.extend(data.iter().rev().map(|v| v * sign));
        out
    }

    fn fft_in_place(&self, data: &mut [Complex64], inverse: bool) {
        let dims = self.shape.len();
        for axis in 0..dims {
            let n = self.shape[axis];
            let stride: usize = self.shape[axis + 1..].iter().product();
            let outer: usize = self.shape[..axis].iter().product();
            let fft = if inverse { &self.plans[axis].1 } else { &self.plans[axis].0 };
            let mut line = vec![Complex64::new(0.0, 0.0); n];
            for o in 0..outer {
                for s in 0..stride {
                    let base = o * n * stride + s;
                    for (j, v) in line.iter_mut().enumerate() {
                        *v = data[base + j * stride];
                    }
                    fft.process(&mut line);
                    for (j, v) in line.iter().enumerate() {
                        data[base + j * stride] = *v;
                    }
                }
            }
        }
    }

    /// Unnormalized forward transform of lattice data.
    pub fn forward(&self, data: &[Complex64], parity: Parity) -> Vec<Complex64> {
        let mut ext = self.extend(data, parity);
        self.fft_in_place(&mut ext, false);
        ext
    }

    pub fn forward_real(&self, data: &[f64], parity: Parity) -> Vec<Complex64> {
        let c: Vec<Complex64> = data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward(&c, parity)
    }

    /// Inverse transform (normalized by the transform length), restricted to
    /// the original lattice.
    pub fn inverse(&self, mut spectrum: Vec<Complex64>) -> Vec<Complex64> {
        self.fft_in_place(&mut spectrum, true);
        let norm = 1.0 / self.len() as f64;
        spectrum.truncate(self.original_len);
        spectrum.iter_mut().for_each(|v| *v *= norm);
        spectrum
    }

    pub fn inverse_real(&self, spectrum: Vec<Complex64>) -> Vec<f64> {
        self.inverse(spectrum).into_iter().map(|v| v.re).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::grid::Axis;

    #[test]
    fn round_trip_3d() {
        let g = GridSpec::cube([Axis::periodic(1.0, 8), Axis::periodic(2.0, 16), Axis::periodic(1.0, 8)]).unwrap();
        let t = Transform::new(&g);
        let data: Vec<Complex64> =
            (0..g.len()).map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
        let back = t.inverse(t.forward(&data, Parity::Odd));
        for (a, b) in data.iter().zip(&back) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn single_mode_lands_on_its_wavevector() {
        let g = GridSpec::periodic_line(2.0, 16).unwrap();
        let t = Transform::new(&g);
        let k = 2.0 * PI * 3.0 / 2.0;
        let data: Vec<Complex64> = (0..16).map(|j| Complex64::from_polar(1.0, k * g.position(j)[2])).collect();
        let spec = t.forward(&data, Parity::Odd);
        let peak = spec.iter().enumerate().max_by(|a, b| a.1.norm().total_cmp(&b.1.norm())).unwrap().0;
        assert!((t.wavevector(peak)[2] - k).abs() < 1e-12);
    }
}
