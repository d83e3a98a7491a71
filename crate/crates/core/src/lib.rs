//! Greedy disc packings of the unit disc and the countable annihilating
//! measure they define: construction, identity checks, an `l1`
//! independence LP and SVG/JSON output.
//!
//! Geometry, measures and checks are generic over [`Scalar`] (`f32`, `f64`);
//! the aliases below fix the usual `f64` instantiation.

pub mod independence;
pub mod io;
pub mod measure;
pub mod packing;
pub mod render;
pub mod scalar;
pub mod summation;
pub mod verify;

pub use measure::{wolff_measure, AnnihilatingMeasure, Atom, MeasureError};
pub use packing::{pack_greedy, Disc, Packing, PackingError, StopRule};
pub use num_complex::Complex;
pub use scalar::Scalar;

pub type Disc64 = Disc<f64>;
pub type Packing64 = Packing<f64>;
pub type Measure64 = AnnihilatingMeasure<f64>;
pub type Disc32 = Disc<f32>;
pub type Packing32 = Packing<f32>;
pub type Measure32 = AnnihilatingMeasure<f32>;
