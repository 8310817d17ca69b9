use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Boundary treatment of one lattice axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    /// Periodic; samples at `j h` on `[0, extent)`.
    Periodic,
    /// Free space with compactly supported fields; treated as periodic by the
    /// spectral operators after a support check.
    Open,
    /// Perfectly reflecting walls at `0` and `extent`. Samples sit at cell
    /// centres `(j + 1/2) h`; spectral operators act on the mirror extension.
    Dirichlet,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub extent: f64,
    pub points: usize,
    pub boundary: Boundary,
}

impl Axis {
    pub fn new(extent: f64, points: usize, boundary: Boundary) -> Self {
        Self { extent, points, boundary }
    }

    pub fn periodic(extent: f64, points: usize) -> Self {
        Self::new(extent, points, Boundary::Periodic)
    }

    pub fn spacing(&self) -> f64 {
        self.extent / self.points as f64
    }

    pub fn coordinate(&self, j: usize) -> f64 {
        match self.boundary {
            Boundary::Dirichlet => (j as f64 + 0.5) * self.spacing(),
            Boundary::Periodic | Boundary::Open => j as f64 * self.spacing(),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.extent.is_finite() && self.extent > 0.0) {
            return Err(Error::InvalidGrid(format!("extent must be positive, got {}", self.extent)));
        }
        if self.points < 8 || !self.points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be a power of two >= 8, got {}",
                self.points
            )));
        }
        Ok(())
    }
}

/// Uniform lattice: either a single z axis carrying 3-component vectors, or a
/// full x, y, z box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    axes: Vec<Axis>,
}

impl GridSpec {
    /// One-dimensional lattice along z.
    pub fn line(axis: Axis) -> Result<Self> {
        axis.validate()?;
        Ok(Self { axes: vec![axis] })
    }

    pub fn periodic_line(extent: f64, points: usize) -> Result<Self> {
        Self::line(Axis::periodic(extent, points))
    }

    /// Three-dimensional lattice with axes ordered x, y, z.
    pub fn cube(axes: [Axis; 3]) -> Result<Self> {
        for a in &axes {
            a.validate()?;
            if a.boundary == Boundary::Dirichlet {
                return Err(Error::UnsupportedGeometry(
                    "reflecting walls are only supported on one-dimensional lattices".into(),
                ));
            }
        }
        Ok(Self { axes: axes.to_vec() })
    }

    pub fn periodic_cube(extent: f64, points: usize) -> Result<Self> {
        let a = Axis::periodic(extent, points);
        Self::cube([a, a, a])
    }

    pub fn dims(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.points).collect()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.points).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cartesian direction (0 = x, 1 = y, 2 = z) of lattice axis `i`.
    pub fn cartesian_axis(&self, i: usize) -> usize {
        if self.dims() == 1 {
            2
        } else {
            i
        }
    }

    pub fn spacing(&self, i: usize) -> f64 {
        self.axes[i].spacing()
    }

    /// `spacing^dims`.
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(Axis::spacing).product()
    }

    pub fn all(&self, boundary: Boundary) -> bool {
        self.axes.iter().all(|a| a.boundary == boundary)
    }

    pub fn has_dirichlet(&self) -> bool {
        self.axes.iter().any(|a| a.boundary == Boundary::Dirichlet)
    }

    /// Lattice indices of flat index `flat` (row-major, last axis fastest).
    pub fn unravel(&self, mut flat: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        for i in (0..self.dims()).rev() {
            let n = self.axes[i].points;
            idx[i] = flat % n;
            flat /= n;
        }
        idx
    }

    /// Cartesian position of flat index `flat`; one-dimensional lattices sit on the z axis.
    pub fn position(&self, flat: usize) -> [f64; 3] {
        let idx = self.unravel(flat);
        let mut r = [0.0; 3];
        for i in 0..self.dims() {
            r[self.cartesian_axis(i)] = self.axes[i].coordinate(idx[i]);
        }
        r
    }

    /// Geometric centre of the lattice domain.
    pub fn center(&self) -> [f64; 3] {
        let mut c = [0.0; 3];
        for i in 0..self.dims() {
            c[self.cartesian_axis(i)] = 0.5 * self.axes[i].extent;
        }
        c
    }

    /// Extent along each Cartesian direction (`None` when the lattice does not
    /// resolve that direction).
    pub fn cartesian_extent(&self, dir: usize) -> Option<&Axis> {
        (0..self.dims()).find(|&i| self.cartesian_axis(i) == dir).map(|i| &self.axes[i])
    }

    /// Whether the lattice resolves variation along Cartesian direction `dir`.
    pub fn resolves(&self, dir: usize) -> bool {
        self.cartesian_extent(dir).is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_point_counts() {
        assert!(GridSpec::periodic_line(1.0, 4).is_err());
        assert!(GridSpec::periodic_line(1.0, 12).is_err());
        assert!(GridSpec::periodic_line(0.0, 16).is_err());
        assert!(GridSpec::periodic_line(1.0, 16).is_ok());
    }

    #[test]
    fn dirichlet_only_on_lines() {
        let d = Axis::new(1.0, 16, Boundary::Dirichlet);
        let p = Axis::periodic(1.0, 16);
        assert!(GridSpec::cube([p, p, d]).is_err());
        assert!(GridSpec::line(d).is_ok());
    }

    #[test]
    fn positions_and_unravel() {
        let g = GridSpec::cube([Axis::periodic(1.0, 8), Axis::periodic(2.0, 16), Axis::periodic(4.0, 32)]).unwrap();
        let flat = (3 * 16 + 5) * 32 + 7;
        assert_eq!(g.unravel(flat), [3, 5, 7]);
        assert_eq!(g.position(flat), [3.0 / 8.0, 5.0 / 8.0, 7.0 / 8.0]);
        let line = GridSpec::line(Axis::new(1.0, 8, Boundary::Dirichlet)).unwrap();
        assert_eq!(line.position(0), [0.0, 0.0, 1.0 / 16.0]);
    }
}
