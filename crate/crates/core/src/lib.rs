//! Exact arithmetic for rational maps on elliptic curves: branch loci and
//! ramification, Euler characteristics of fiber-product curves, torsion
//! image intersections, Mordell-Weil box experiments, and a numerical value
//! distribution lab over the complex points.

pub mod bipoly;
pub mod curve;
pub mod error;
pub mod expr;
pub mod factor;
pub mod fiberprod;
pub mod field;
pub mod meet;
pub mod nevanlinna;
pub mod numfield;
pub mod poly;
pub mod ramify;
pub mod ratfunc;
pub mod series;

pub use error::{Error, Result};
pub use field::{Rational, Rationals};
pub use poly::{Poly, QPoly};
