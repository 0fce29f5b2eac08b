//! Exact symbolic algebra for BV-infinity quantization of (-1)-shifted
//! derived Poisson manifolds.

pub mod error;
pub mod hbar;
pub mod linalg;
pub mod linfty;
pub mod operator;
pub mod polyvector;
pub mod quantizer;
pub mod ring;

pub use error::{Error, Result};
pub use hbar::{HbarOp, HbarSymbol};

pub use operator::HalfDensityOp;
pub use polyvector::{poisson_bracket, PoissonStructure, PolyVector};
pub use ring::{Coordinate, GradedPoly, Monomial, Rational, Ring, TruncationBounds};
