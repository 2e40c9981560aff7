//! Multibody lattice energies with vanishing lattice spacing: evaluation,
//! structural hypothesis checks, cell problems with affine boundary layers and
//! estimates of the homogenized energy density `f_hom(M)`.

pub mod cellsolver;
pub mod error;
pub mod homogenize;
pub mod hypotheses;
pub mod lattice;
pub mod matrix;
pub mod potentials;
pub mod scalar;

pub use error::{LathomError, Result};
pub use matrix::Mat;
pub use scalar::Scalar;

pub type Domain64 = lattice::LatticeDomain<f64>;
pub type Field64 = lattice::LatticeField<f64>;
pub type Mat64 = matrix::Mat<f64>;
pub type Domain32 = lattice::LatticeDomain<f32>;
pub type Field32 = lattice::LatticeField<f32>;
