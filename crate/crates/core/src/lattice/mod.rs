//! Uniform lattices, field storage and spectral differential operators.

mod field;
mod grid;
mod ops;
mod transform;

pub use field::{ComplexScalarField, Parity, RealVectorField, ScalarField};
pub use grid::{Axis, Boundary, GridSpec};
pub use ops::{
    curl, divergence, gradient, integrate_scalar, inverse_curl_coulomb, laplacian, spectral_propagate, spectrum,
    Spectrum,
};
pub(crate) use transform::Transform;

#[cfg(test)]
mod tests;
