use num_complex::Complex64;

use super::grid::GridSpec;
use super::ops::integrate_scalar;
use crate::error::{Error, Result};
use crate::vec3::Vec3;

/// Reflection parity of a component about the walls of a reflecting axis.
///
/// Only consulted on [`Boundary::Dirichlet`](super::Boundary::Dirichlet)
/// axes, where spectral operators act on the mirror-extended field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Parity {
    /// Vanishes at the walls (sine series).
    Odd,
    /// Zero normal derivative at the walls (cosine series).
    Even,
}

impl Parity {
    pub fn flip(self) -> Self {
        match self {
            Parity::Odd => Parity::Even,
            Parity::Even => Parity::Odd,
        }
    }

    pub fn product(self, other: Parity) -> Self {
        if self == other {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

fn first_non_finite<'a>(values: impl Iterator<Item = &'a f64>) -> Option<usize> {
    values.enumerate().find(|(_, v)| !v.is_finite()).map(|(i, _)| i)
}

fn check_len(grid: &GridSpec, len: usize) -> Result<()> {
    if grid.len() != len {
        return Err(Error::InvalidInput(format!("lattice holds {} samples, data has {len}", grid.len())));
    }
    Ok(())
}

/// Real scalar lattice (densities, potentials).
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        check_len(&grid, values.len())?;
        if let Some(index) = first_non_finite(values.iter()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: &GridSpec) -> Self {
        Self { grid: grid.clone(), values: vec![0.0; grid.len()] }
    }

    pub fn from_fn(grid: &GridSpec, mut f: impl FnMut([f64; 3]) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(grid.position(i))).collect();
        Self::new(grid.clone(), values)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn integrate(&self) -> Result<f64> {
        integrate_scalar(&self.values, &self.grid)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Real 3-vector field on a lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct RealVectorField {
    grid: GridSpec,
    components: [Vec<f64>; 3],
    parity: [Parity; 3],
}

impl RealVectorField {
    pub fn new(grid: GridSpec, components: [Vec<f64>; 3]) -> Result<Self> {
        Self::with_parity(grid, components, [Parity::Odd; 3])
    }

    pub fn with_parity(grid: GridSpec, components: [Vec<f64>; 3], parity: [Parity; 3]) -> Result<Self> {
        let mut offset = 0;
        for c in &components {
            check_len(&grid, c.len())?;
            if let Some(index) = first_non_finite(c.iter()) {
                return Err(Error::NonFinite { index: offset + index });
            }
            offset += c.len();
        }
        Ok(Self { grid, components, parity })
    }

    pub fn zeros(grid: &GridSpec) -> Self {
        let n = grid.len();
        Self { grid: grid.clone(), components: [vec![0.0; n], vec![0.0; n], vec![0.0; n]], parity: [Parity::Odd; 3] }
    }

    /// Samples `f` at every lattice position.
    pub fn from_fn(grid: &GridSpec, mut f: impl FnMut([f64; 3]) -> Vec3) -> Result<Self> {
        let n = grid.len();
        let mut comps = [Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n)];
        for i in 0..n {
            let v = f(grid.position(i));
            for (c, x) in comps.iter_mut().zip(v) {
                c.push(x);
            }
        }
        Self::new(grid.clone(), comps)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn component(&self, i: usize) -> &[f64] {
        &self.components[i]
    }

    pub fn components(&self) -> &[Vec<f64>; 3] {
        &self.components
    }

    pub fn parity(&self) -> [Parity; 3] {
        self.parity
    }

    pub fn set_parity(mut self, parity: [Parity; 3]) -> Self {
        self.parity = parity;
        self
    }

    pub fn at(&self, flat: usize) -> Vec3 {
        [self.components[0][flat], self.components[1][flat], self.components[2][flat]]
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.components.iter_mut().for_each(|c| c.iter_mut().for_each(|v| *v *= s));
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let mut out = self.clone();
        for (c, o) in out.components.iter_mut().zip(&other.components) {
            c.iter_mut().zip(o).for_each(|(a, b)| *a += b);
        }
        Ok(out)
    }

    /// Pointwise map over the vector at each site.
    pub fn map(&self, f: impl Fn(Vec3) -> Vec3) -> Self {
        let n = self.len();
        let mut comps = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for i in 0..n {
            let v = f(self.at(i));
            for k in 0..3 {
                comps[k][i] = v[k];
            }
        }
        Self { grid: self.grid.clone(), components: comps, parity: self.parity }
    }

    pub fn dot(&self, other: &Self) -> Result<ScalarField> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = (0..self.len()).map(|i| crate::vec3::dot(self.at(i), other.at(i))).collect();
        ScalarField::new(self.grid.clone(), values)
    }

    pub fn cross(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let n = self.len();
        let mut comps = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for i in 0..n {
            let v = crate::vec3::cross(self.at(i), other.at(i));
            for k in 0..3 {
                comps[k][i] = v[k];
            }
        }
        let (p, q) = (self.parity, other.parity);
        let parity = [p[1].product(q[2]), p[2].product(q[0]), p[0].product(q[1])];
        Self::with_parity(self.grid.clone(), comps, parity)
    }

    pub fn norm_sqr(&self) -> ScalarField {
        let values = (0..self.len()).map(|i| crate::vec3::dot(self.at(i), self.at(i))).collect();
        ScalarField { grid: self.grid.clone(), values }
    }

    /// Integral of each component.
    pub fn integrate(&self) -> Result<Vec3> {
        Ok([
            integrate_scalar(&self.components[0], &self.grid)?,
            integrate_scalar(&self.components[1], &self.grid)?,
            integrate_scalar(&self.components[2], &self.grid)?,
        ])
    }

    pub fn max_norm(&self) -> f64 {
        (0..self.len()).map(|i| crate::vec3::norm(self.at(i))).fold(0.0, f64::max)
    }
}

/// Complex scalar field on a lattice (the Schrödinger-side representation).
///
/// On reflecting axes the field is taken to vanish at the walls.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexScalarField {
    grid: GridSpec,
    values: Vec<Complex64>,
}

impl ComplexScalarField {
    pub fn new(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        check_len(&grid, values.len())?;
        if let Some(index) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: &GridSpec) -> Self {
        Self { grid: grid.clone(), values: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    pub fn from_fn(grid: &GridSpec, mut f: impl FnMut([f64; 3]) -> Complex64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(grid.position(i))).collect();
        Self::new(grid.clone(), values)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| v * s).collect() }
    }

    pub fn conj(&self) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| v.conj()).collect() }
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Ok(Self { grid: self.grid.clone(), values })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(Self { grid: self.grid.clone(), values })
    }

    /// `sum_j conj(a_j) b_j` times the cell volume.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let re: Vec<f64> = self.values.iter().zip(&other.values).map(|(a, b)| (a.conj() * b).re).collect();
        let im: Vec<f64> = self.values.iter().zip(&other.values).map(|(a, b)| (a.conj() * b).im).collect();
        Ok(Complex64::new(integrate_scalar(&re, &self.grid)?, integrate_scalar(&im, &self.grid)?))
    }

    /// `integral |f|^2 dV`.
    pub fn norm_sqr(&self) -> f64 {
        let v: Vec<f64> = self.values.iter().map(|c| c.norm_sqr()).collect();
        integrate_scalar(&v, &self.grid).expect("finite by construction")
    }

    /// Plain lattice sum `sum_j |f_j|^2` (no volume element).
    pub fn sum_sqr(&self) -> f64 {
        let v: Vec<f64> = self.values.iter().map(|c| c.norm_sqr()).collect();
        super::ops::pairwise_sum(&v)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}
