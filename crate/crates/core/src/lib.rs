//! Certified numerics for the area expansion of Lawson minimal surfaces.

pub mod area;
pub mod cdisc;
pub mod error;
pub mod ift;
pub mod genus2;
pub mod mpl;
pub mod mzv_symbolic;
pub mod omega;
pub mod optim;
pub mod real;
pub mod series;
pub mod wiener;

pub use cdisc::{CertifiedComplex, Ctx};
pub use error::{Error, Result};
