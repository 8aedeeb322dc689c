//! Computational toolkit for approximately convex functions.

pub mod defect;
pub mod envelope;
pub mod error;
pub mod gallery;
pub mod grid;
pub mod homogenization;
pub mod lp;
pub mod report;

pub use error::{Error, Result};
