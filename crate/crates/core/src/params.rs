//! Model parameters shared by every construction.

use crate::error::{Error, Result};
use num_complex::Complex64 as C64;
use std::f64::consts::FRAC_PI_2;

/// Below this modulus a `sinh` in a denominator counts as a pole.
pub const POLE_TOL: f64 = 1e-14;

/// Tolerance for recognising the free-fermion point η = iπ/2.
pub const FREE_FERMION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub eta: C64,
    pub u: C64,
    /// Bath weight q > 0; the bath state is diag(q, 1/q)/(q + 1/q).
    pub q_weight: f64,
    /// N: the circuit has 2N time steps and 4N temporal legs.
    pub n_half: usize,
    pub epsilon: C64,
    pub precision_digits: u32,
}

impl ModelParams {
    pub fn new(eta: C64, u: C64, q_weight: f64, n_half: usize) -> Result<Self> {
        let p = ModelParams {
            eta,
            u,
            q_weight,
            n_half,
            epsilon: C64::new(1e-3, 0.0),
            precision_digits: 60,
        };
        p.validate()?;
        Ok(p)
    }

    /// The XX point η = iπ/2 with the given gate parameter and bath weight.
    pub fn free_fermion(u: f64, q_weight: f64, n_half: usize) -> Result<Self> {
        Self::new(C64::new(0.0, FRAC_PI_2), C64::new(u, 0.0), q_weight, n_half)
    }

    pub fn with_epsilon(mut self, eps: C64) -> Self {
        self.epsilon = eps;
        self
    }

    pub fn with_digits(mut self, digits: u32) -> Self {
        self.precision_digits = digits;
        self
    }

    pub fn with_n_half(&self, n_half: usize) -> Self {
        let mut p = self.clone();
        p.n_half = n_half;
        p
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q_weight.is_finite() && self.q_weight > 0.0) {
            return Err(Error::InvalidParams(format!("q must be positive, got {}", self.q_weight)));
        }
        if self.n_half == 0 {
            return Err(Error::InvalidParams("N must be at least 1".into()));
        }
        if self.eta.sinh().norm() < POLE_TOL {
            return Err(Error::Pole("sinh(eta) = 0".into()));
        }
        if (self.u + self.eta).sinh().norm() < POLE_TOL {
            return Err(Error::Pole("sinh(u + eta) = 0".into()));
        }
        Ok(())
    }

    pub fn is_free_fermion(&self) -> bool {
        (self.eta - C64::new(0.0, FRAC_PI_2)).norm() < FREE_FERMION_TOL
    }

    /// Number of temporal legs, 4N.
    pub fn legs(&self) -> usize {
        4 * self.n_half
    }

    /// Bath single-site state diag(q, 1/q)/(q + 1/q), index 0 = up.
    pub fn bath_weights(&self) -> [f64; 2] {
        thermal_weights(self.q_weight)
    }

    pub(crate) fn require_free_fermion(&self) -> Result<()> {
        if self.is_free_fermion() {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!("needs eta = i*pi/2, got {}", self.eta)))
        }
    }
}

pub fn thermal_weights(q: f64) -> [f64; 2] {
    let z = q + 1.0 / q;
    [q / z, 1.0 / (q * z)]
}

/// sinh(z), failing when it is too small to divide by.
pub(crate) fn sinh_nonzero(z: C64, what: &str) -> Result<C64> {
    let s = z.sinh();
    if s.norm() < POLE_TOL {
        Err(Error::Pole(format!("sinh({what}) = 0 at {what} = {z}")))
    } else {
        Ok(s)
    }
}
