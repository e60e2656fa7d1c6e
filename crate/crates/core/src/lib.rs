//! Influence matrices of Floquet-trotterized XXZ circuits.
//!
//! The influence matrix (IM) of a bath is built three ways: by contracting the
//! circuit, as the ε → 0 limit of a Bethe vector, and at the free-fermion point
//! from Jordan-block occupations. The crate also checks the integrable structure
//! of the temporal transfer matrices and counts their Jordan blocks.

pub mod ap;
pub mod basis;
pub mod bethe;
pub mod circuit;
pub mod combinatorics;
pub mod error;
pub mod exact;
pub mod fermion;
pub mod linalg;
pub mod params;
pub mod state;
pub mod transfer;
pub mod xxz;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub use params::ModelParams;
