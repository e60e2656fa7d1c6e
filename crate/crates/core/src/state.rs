//! Dense state vectors and the auxiliary-space threading engine.
//!
//! Sites are numbered 1..=n; site 1 is the slowest-varying bit of the index and
//! |↑⟩ is bit value 0.

use crate::error::{Error, Result};
use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64 as C64;

/// Environment variable overriding the dense-vector cap (in qubits).
pub const CAP_ENV: &str = "IM_CAP_QUBITS";
pub const DEFAULT_CAP_QUBITS: usize = 20;

pub fn cap_qubits() -> usize {
    std::env::var(CAP_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_CAP_QUBITS)
}

pub fn check_capacity(qubits: usize) -> Result<()> {
    let cap = cap_qubits();
    if qubits > cap {
        Err(Error::Capacity { needed: qubits, cap })
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub amps: Vec<C64>,
    pub n_sites: usize,
}

impl StateVector {
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::Dimension { expected: len.next_power_of_two(), got: len });
        }
        let n_sites = len.trailing_zeros() as usize;
        check_capacity(n_sites)?;
        Ok(StateVector { amps, n_sites })
    }

    pub fn zeros(n_sites: usize) -> Result<Self> {
        check_capacity(n_sites)?;
        Ok(StateVector { amps: vec![C64::new(0.0, 0.0); 1 << n_sites], n_sites })
    }

    /// |↑…↑⟩.
    pub fn all_up(n_sites: usize) -> Result<Self> {
        let mut s = Self::zeros(n_sites)?;
        s.amps[0] = C64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn require_sites(&self, n: usize) -> Result<()> {
        if self.n_sites != n {
            Err(Error::Dimension { expected: 1 << n, got: self.dim() })
        } else {
            Ok(())
        }
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.amps)
    }
}

pub fn max_abs(v: &[C64]) -> f64 {
    v.iter().fold(0.0, |m, z| m.max(z.norm()))
}

pub fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).norm()))
}

/// Bit mask of site k (1-based) in an n-site index.
#[inline]
pub fn site_mask(n: usize, k: usize) -> usize {
    1 << (n - k)
}

/// Number of down spins in a basis index.
#[inline]
pub fn flips(i: usize) -> u32 {
    i.count_ones()
}

/// One factor of an auxiliary-space chain, in acting order.
#[derive(Debug, Clone, Copy)]
pub enum Factor {
    /// 4×4 operator on (aux, site) with the auxiliary space as first factor.
    Site(usize, Matrix4<C64>),
    /// 2×2 operator on the auxiliary space alone.
    Aux(Matrix2<C64>),
}

/// Working vector holding the auxiliary qubit as the slowest index.
struct AuxBuffer {
    w: Vec<C64>,
    n: usize,
}

impl AuxBuffer {
    fn start(x: &[C64], n: usize, aux: usize) -> Self {
        let dim = x.len();
        let mut w = vec![C64::new(0.0, 0.0); 2 * dim];
        w[aux * dim..(aux + 1) * dim].copy_from_slice(x);
        AuxBuffer { w, n }
    }

    fn apply(&mut self, f: &Factor) {
        let dim = 1usize << self.n;
        match f {
            Factor::Site(k, g) => {
                let mask = site_mask(self.n, *k);
                let (lo, hi) = self.w.split_at_mut(dim);
                for i in 0..dim {
                    if i & mask != 0 {
                        continue;
                    }
                    let j = i | mask;
                    let old = [lo[i], lo[j], hi[i], hi[j]];
                    let mut new = [C64::new(0.0, 0.0); 4];
                    for (r, slot) in new.iter_mut().enumerate() {
                        for (c, o) in old.iter().enumerate() {
                            let e = g[(r, c)];
                            if e.re != 0.0 || e.im != 0.0 {
                                *slot += e * o;
                            }
                        }
                    }
                    lo[i] = new[0];
                    lo[j] = new[1];
                    hi[i] = new[2];
                    hi[j] = new[3];
                }
            }
            Factor::Aux(g) => {
                let (lo, hi) = self.w.split_at_mut(dim);
                for i in 0..dim {
                    let (a, b) = (lo[i], hi[i]);
                    lo[i] = g[(0, 0)] * a + g[(0, 1)] * b;
                    hi[i] = g[(1, 0)] * a + g[(1, 1)] * b;
                }
            }
        }
    }

    fn component(&self, aux: usize) -> &[C64] {
        let dim = 1usize << self.n;
        &self.w[aux * dim..(aux + 1) * dim]
    }
}

/// ⟨out| F_K ⋯ F_1 |in⟩_aux applied to x, never forming the full matrix.
pub fn aux_element(factors: &[Factor], x: &[C64], n: usize, out_aux: usize, in_aux: usize) -> Vec<C64> {
    let mut buf = AuxBuffer::start(x, n, in_aux);
    for f in factors {
        buf.apply(f);
    }
    buf.component(out_aux).to_vec()
}

/// tr_aux(F_K ⋯ F_1) applied to x.
pub fn trace_aux(factors: &[Factor], x: &[C64], n: usize) -> Vec<C64> {
    let mut y = aux_element(factors, x, n, 0, 0);
    let z = aux_element(factors, x, n, 1, 1);
    for (a, b) in y.iter_mut().zip(z) {
        *a += b;
    }
    y
}

/// Dense matrix of a linear map on n sites, column by column.
pub fn assemble_dense<F>(n: usize, mut apply: F) -> Result<nalgebra::DMatrix<C64>>
where
    F: FnMut(&[C64]) -> Result<Vec<C64>>,
{
    let dim = 1usize << n;
    let mut m = nalgebra::DMatrix::zeros(dim, dim);
    let mut e = vec![C64::new(0.0, 0.0); dim];
    for c in 0..dim {
        e[c] = C64::new(1.0, 0.0);
        let col = apply(&e)?;
        for (r, v) in col.into_iter().enumerate() {
            m[(r, c)] = v;
        }
        e[c] = C64::new(0.0, 0.0);
    }
    Ok(m)
}
