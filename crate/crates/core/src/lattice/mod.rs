//! Lattice geometry and discrete fields.
//!
//! A [`LatticeDomain`] is the site set `εZ^N ∩ A` of an axis-aligned box `A`,
//! enumerated lexicographically. Fields store one `R^n` value per site and are
//! read through a [`Probe`], which resolves sites outside the domain according
//! to an explicit [`Extension`] policy.

mod cutoff;
mod domain;
mod embedding;
mod field;
mod quotient;

pub use cutoff::{blend, CutoffFunction};
pub use domain::{site_from, LatticeDomain, Site, MAX_DIM};
pub use embedding::{piecewise_constant_embedding, Embedding};
pub use field::{AffineProbe, Extension, FieldProbe, LatticeField, Probe, ShiftedProbe};
pub use quotient::{
    build_path, difference_quotient, path_constant, path_power_inequality_gap, DirectionOffset, LatticePath, Step,
};

pub(crate) use field::{check_slope, NudgedProbe};
pub(crate) use quotient::quotient_into;
