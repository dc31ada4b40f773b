//! Linear-growth functionals on BV functions against general Radon measures:
//! measures and their decompositions, BV functions with explicit jump sets,
//! integrands and their recession functions, generalized Young measures, and
//! a catalog of reproducible scenarios.

pub mod error;
pub mod expr;
pub mod linalg;
pub mod bv;
pub mod measures;
pub mod quadrature;
pub mod integrands;
pub mod functional;
pub mod young;
pub mod scenarios;

pub use error::{Error, Result};
pub use linalg::{Mat, Point};
