//! Dense linear-algebra helpers on top of nalgebra.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Numerical rank: singular values above `rel_tol · scale` (scale defaults to σ_max).
pub fn numerical_rank(m: &DMatrix<C64>, rel_tol: f64, scale: Option<f64>) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().singular_values();
    let smax = scale.unwrap_or_else(|| sv.iter().cloned().fold(0.0, f64::max));
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// Complex Givens rotation: [c s; −s̄ c]·[f; g] = [r; 0].
fn givens(f: C64, g: C64) -> (f64, C64) {
    if g.norm() == 0.0 {
        return (1.0, C64::new(0.0, 0.0));
    }
    if f.norm() == 0.0 {
        return (0.0, g.conj() / g.norm());
    }
    let n = (f.norm_sqr() + g.norm_sqr()).sqrt();
    (f.norm() / n, (f / f.norm()) * g.conj() / n)
}

/// Complex Schur form A = Q T Q† with a chosen set of eigenvalues moved to the
/// leading diagonal positions.
#[derive(Clone)]
pub struct ReorderedSchur {
    pub q: DMatrix<C64>,
    pub t: DMatrix<C64>,
    /// Original diagonal position of each current diagonal entry.
    pub origin: Vec<usize>,
}

pub fn schur(a: &DMatrix<C64>) -> ReorderedSchur {
    let (q, t) = a.clone().schur().unpack();
    let origin = (0..t.nrows()).collect();
    ReorderedSchur { q, t, origin }
}

impl ReorderedSchur {
    /// Swap diagonal entries k and k+1, keeping the form upper triangular.
    pub fn swap(&mut self, k: usize) {
        let n = self.t.nrows();
        let (t11, t22) = (self.t[(k, k)], self.t[(k + 1, k + 1)]);
        let (c, s) = givens(self.t[(k, k + 1)], t22 - t11);
        for j in k + 2..n {
            let (x, y) = (self.t[(k, j)], self.t[(k + 1, j)]);
            self.t[(k, j)] = x * c + s * y;
            self.t[(k + 1, j)] = y * c - s.conj() * x;
        }
        for i in 0..k {
            let (x, y) = (self.t[(i, k)], self.t[(i, k + 1)]);
            self.t[(i, k)] = x * c + s.conj() * y;
            self.t[(i, k + 1)] = y * c - s * x;
        }
        self.t[(k, k)] = t22;
        self.t[(k + 1, k + 1)] = t11;
        self.t[(k + 1, k)] = C64::new(0.0, 0.0);
        self.origin.swap(k, k + 1);
        for i in 0..n {
            let (x, y) = (self.q[(i, k)], self.q[(i, k + 1)]);
            self.q[(i, k)] = x * c + s.conj() * y;
            self.q[(i, k + 1)] = y * c - s * x;
        }
    }

    /// Move every diagonal entry selected by `pick` to the top; returns their count.
    pub fn bring_to_front<F: Fn(C64) -> bool>(&mut self, pick: F) -> usize {
        let chosen: Vec<usize> = (0..self.t.nrows()).filter(|&i| pick(self.t[(i, i)])).map(|i| self.origin[i]).collect();
        self.bring_origins_to_front(&chosen)
    }

    /// Move the entries that started at the given diagonal positions to the top.
    pub fn bring_origins_to_front(&mut self, origins: &[usize]) -> usize {
        let n = self.t.nrows();
        let mut front = 0;
        for i in 0..n {
            if origins.contains(&self.origin[i]) {
                let mut k = i;
                while k > front {
                    self.swap(k - 1);
                    k -= 1;
                }
                front += 1;
            }
        }
        front
    }
}

/// Determinant by LU.
pub fn det(m: &DMatrix<C64>) -> C64 {
    if m.nrows() == 0 {
        return C64::new(1.0, 0.0);
    }
    m.clone().lu().determinant()
}

/// Principal square root of an upper-triangular matrix (column recurrence).
fn sqrtm_upper(t: &DMatrix<C64>) -> DMatrix<C64> {
    let n = t.nrows();
    let mut r = DMatrix::<C64>::zeros(n, n);
    for j in 0..n {
        r[(j, j)] = t[(j, j)].sqrt();
        for i in (0..j).rev() {
            let mut s = t[(i, j)];
            for k in i + 1..j {
                s -= r[(i, k)] * r[(k, j)];
            }
            r[(i, j)] = s / (r[(i, i)] + r[(j, j)]);
        }
    }
    r
}

/// Principal logarithm of an upper-triangular matrix, defective or not, by
/// inverse scaling and squaring. Eigenvalues on the closed negative real axis
/// have no principal logarithm.
pub fn logm_upper_triangular(t: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let n = t.nrows();
    for i in 0..n {
        let z = t[(i, i)];
        if z.norm() == 0.0 || (z.re < 0.0 && z.im.abs() <= 1e-12 * z.norm()) {
            return Err(Error::LogBranch(format!("eigenvalue {z} on the branch cut")));
        }
        for j in 0..i {
            if t[(i, j)].norm() != 0.0 {
                return Err(Error::Range("matrix is not upper triangular".into()));
            }
        }
    }
    let id = DMatrix::<C64>::identity(n, n);
    let mut r = t.clone();
    let mut squarings = 0;
    while max_abs(&(&r - &id)) > 0.1 {
        if squarings == 64 {
            return Err(Error::Convergence("square-root iteration did not approach identity".into()));
        }
        r = sqrtm_upper(&r);
        squarings += 1;
    }
    // log(1 + X) = X − X²/2 + …, ‖X‖ ≤ 0.1 so 40 terms reach rounding.
    let x = &r - &id;
    let mut term = x.clone();
    let mut sum = x.clone();
    for k in 2..=40 {
        term = &term * &x;
        let c = if k % 2 == 0 { -1.0 } else { 1.0 } / k as f64;
        sum += &term * C64::new(c, 0.0);
    }
    Ok(sum * C64::new(2f64.powi(squarings), 0.0))
}
