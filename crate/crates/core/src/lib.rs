//! Constructive deep tree networks for approximating radial functions on the
//! unit ball, together with the tooling needed to audit them: exact parameter
//! counts, weight bounds, covering bounds, hard instances for lower bounds and
//! a Monte Carlo harness for learning rates.

pub mod activation;
pub mod error;
pub mod hard;
pub mod learning;
pub mod numeric;
pub mod document;
pub mod poly;
pub mod radial;
pub mod target;
pub mod tree;
pub mod univariate;

pub use error::{Error, Result};
pub use numeric::{Precision, Real};
