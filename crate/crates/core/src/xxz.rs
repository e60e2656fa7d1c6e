//! The XXZ R-matrix, the circuit gate and the local identities behind integrability.
//!
//! Two-site basis order is |↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩ with |↑⟩ = index 0; the first
//! tensor factor is the slower index.

use crate::error::Result;
use crate::params::{sinh_nonzero, ModelParams};
use nalgebra::{Matrix2, Matrix4, SMatrix};
use num_complex::Complex64 as C64;

pub type Mat8 = SMatrix<C64, 8, 8>;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSiteOperator(pub Matrix4<C64>);

impl TwoSiteOperator {
    pub fn identity() -> Self {
        TwoSiteOperator(Matrix4::identity())
    }

    pub fn swap() -> Self {
        let mut m = Matrix4::zeros();
        m[(0, 0)] = ONE;
        m[(1, 2)] = ONE;
        m[(2, 1)] = ONE;
        m[(3, 3)] = ONE;
        TwoSiteOperator(m)
    }

    /// Entry ⟨a b| X |c d⟩, first factor a/c.
    #[inline]
    pub fn elem(&self, a: usize, b: usize, c: usize, d: usize) -> C64 {
        self.0[(2 * a + b, 2 * c + d)]
    }

    /// Transpose on the second tensor factor.
    pub fn transpose_second(&self) -> Self {
        let mut m = Matrix4::zeros();
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    for d in 0..2 {
                        m[(2 * a + b, 2 * c + d)] = self.elem(a, d, c, b);
                    }
                }
            }
        }
        TwoSiteOperator(m)
    }

    /// Transpose on the first tensor factor.
    pub fn transpose_first(&self) -> Self {
        let mut m = Matrix4::zeros();
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    for d in 0..2 {
                        m[(2 * a + b, 2 * c + d)] = self.elem(c, b, a, d);
                    }
                }
            }
        }
        TwoSiteOperator(m)
    }

    /// Exchange the roles of the two factors: P X P.
    pub fn flipped(&self) -> Self {
        let p = Self::swap().0;
        TwoSiteOperator(p * self.0 * p)
    }

    pub fn mul(&self, other: &Self) -> Self {
        TwoSiteOperator(self.0 * other.0)
    }

    /// True when no entry couples different total-Sᶻ sectors.
    pub fn conserves_magnetization(&self) -> bool {
        let mag = |i: usize| (i >> 1) + (i & 1);
        (0..4).all(|i| (0..4).all(|j| mag(i) == mag(j) || self.0[(i, j)] == ZERO))
    }
}

/// R(w): corners 1, middle block [[sinh w, sinh η], [sinh η, sinh w]] / sinh(w+η).
pub fn r_matrix(p: &ModelParams, w: C64) -> Result<TwoSiteOperator> {
    r_matrix_eta(p.eta, w)
}

pub(crate) fn r_matrix_eta(eta: C64, w: C64) -> Result<TwoSiteOperator> {
    let den = sinh_nonzero(w + eta, "w+eta")?;
    Ok(TwoSiteOperator(r_unnormalized(eta, w).0 / den))
}

/// sinh(w+η)·R(w), finite everywhere.
fn r_unnormalized(eta: C64, w: C64) -> TwoSiteOperator {
    let (a, b, c) = (w.sinh(), eta.sinh(), (w + eta).sinh());
    let mut m = Matrix4::zeros();
    m[(0, 0)] = c;
    m[(1, 1)] = a;
    m[(1, 2)] = b;
    m[(2, 1)] = b;
    m[(2, 2)] = a;
    m[(3, 3)] = c;
    TwoSiteOperator(m)
}

/// The circuit gate Ř(w) = P·R(w).
pub fn r_check(p: &ModelParams, w: C64) -> Result<TwoSiteOperator> {
    Ok(TwoSiteOperator::swap().mul(&r_matrix(p, w)?))
}

pub fn sigma_y() -> Matrix2<C64> {
    Matrix2::new(ZERO, C64::new(0.0, -1.0), C64::new(0.0, 1.0), ZERO)
}

pub fn sigma_z() -> Matrix2<C64> {
    Matrix2::new(ONE, ZERO, ZERO, -ONE)
}

pub fn sigma_x() -> Matrix2<C64> {
    Matrix2::new(ZERO, ONE, ONE, ZERO)
}

/// Embed a two-site operator on sites (i, j) of three sites, i ≠ j; its first factor acts on i.
pub fn embed3(x: &TwoSiteOperator, i: usize, j: usize) -> Mat8 {
    assert!(i < 3 && j < 3 && i != j);
    let bit = |idx: usize, site: usize| (idx >> (2 - site)) & 1;
    let mut m = Mat8::zeros();
    for col in 0..8 {
        for row in 0..8 {
            let spectator = (0..3).filter(|&s| s != i && s != j).all(|s| bit(row, s) == bit(col, s));
            if spectator {
                m[(row, col)] = x.elem(bit(row, i), bit(row, j), bit(col, i), bit(col, j));
            }
        }
    }
    m
}

fn embed3_single(g: &Matrix2<C64>, site: usize) -> Mat8 {
    let mut m = Mat8::zeros();
    for col in 0..8 {
        for row in 0..8 {
            let others = (0..3).filter(|&s| s != site).all(|s| ((row ^ col) >> (2 - s)) & 1 == 0);
            if others {
                let r = (row >> (2 - site)) & 1;
                let c = (col >> (2 - site)) & 1;
                m[(row, col)] = g[(r, c)];
            }
        }
    }
    m
}

fn max_abs<const R: usize, const C: usize>(m: &SMatrix<C64, R, C>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Residual of the Yang-Baxter relation and of its version with site 3 transposed.
pub fn yang_baxter_residual(p: &ModelParams, v1: C64, v2: C64, v3: C64) -> Result<f64> {
    let r12 = embed3(&r_matrix(p, v1 - v2)?, 0, 1);
    let r13x = r_matrix(p, v1 - v3)?;
    let r23x = r_matrix(p, v2 - v3)?;
    let r13 = embed3(&r13x, 0, 2);
    let r23 = embed3(&r23x, 1, 2);
    let plain = max_abs(&(r12 * r13 * r23 - r23 * r13 * r12));
    let r13t = embed3(&r13x.transpose_second(), 0, 2);
    let r23t = embed3(&r23x.transpose_second(), 1, 2);
    let transposed = max_abs(&(r12 * r23t * r13t - r13t * r23t * r12));
    Ok(plain.max(transposed))
}

/// Residual of R^{t_k}_{k,0}(−v) = sinh v / sinh(v−η) · σʸ_k R_{0,k}(v−η) σʸ_k.
pub fn crossing_residual(p: &ModelParams, v: C64) -> Result<f64> {
    let pref = v.sinh() / sinh_nonzero(v - p.eta, "v-eta")?;
    // Ordering (k, 0); R is symmetric under exchanging its factors.
    let lhs = r_matrix(p, -v)?.transpose_first().0;
    let sy = sigma_y().kronecker(&Matrix2::identity());
    let rhs = sy * r_matrix(p, v - p.eta)?.0 * sy * pref;
    Ok(max_abs(&(lhs - rhs)))
}

/// Residual of the fusion identities on sites (0, 1, 2): R₁₂(η) intertwines the
/// two orderings of R₀₁(v)R₀₂(v−η), the singlet on (1, 2) is invariant under
/// R₀₁(v)R₀₂(v−η) and the symmetric subspace under R₀₂(v−η)R₀₁(v).
/// R₁₂(η) enters unnormalized since sinh 2η vanishes at the free-fermion point.
pub fn degeneracy_projector_check(p: &ModelParams, v: C64) -> Result<f64> {
    let r12 = embed3(&r_unnormalized(p.eta, p.eta), 1, 2);
    let r01 = embed3(&r_matrix(p, v)?, 0, 1);
    let r02 = embed3(&r_matrix(p, v - p.eta)?, 0, 2);
    let intertwine = max_abs(&(r12 * r01 * r02 - r02 * r01 * r12));
    let singlet = (Mat8::identity() - embed3(&TwoSiteOperator::swap(), 1, 2)) * C64::new(0.5, 0.0);
    let sym = Mat8::identity() - singlet;
    let singlet_inv = max_abs(&(sym * r01 * r02 * singlet));
    let sym_inv = max_abs(&(singlet * r02 * r01 * sym));
    Ok(intertwine.max(singlet_inv).max(sym_inv))
}

/// ‖R(w)R(−w) − 1‖, plus ‖Ř Ř† − 1‖ when the gate should be unitary (η imaginary, w real).
pub fn unitarity_residual(p: &ModelParams, w: C64) -> Result<f64> {
    let r = r_matrix(p, w)?.0 * r_matrix(p, -w)?.0 - Matrix4::identity();
    let mut res = max_abs(&r);
    if p.eta.re.abs() < 1e-15 && w.im.abs() < 1e-15 {
        let g = r_check(p, w)?.0;
        res = res.max(max_abs(&(g * g.adjoint() - Matrix4::identity())));
    }
    Ok(res)
}

/// Conjugate a three-site operator by σʸ on one site; used by crossing-type checks.
pub fn conj_sigma_y(m: &Mat8, site: usize) -> Mat8 {
    let s = embed3_single(&sigma_y(), site);
    s * m * s
}
