//! The XX point η = iπ/2: Jordan-Wigner fermions, the Gaussian form of the
//! transfer matrix, single-particle matrices M and h, and the Slater-determinant
//! construction of the influence matrix.
//!
//! Fermions: c†_i = (∏_{j<i} σᶻ_j) σ⁻_i, so an occupied site is a down spin and
//! c†_{i₁}⋯c†_{i_k}|Ω⟩ with i₁ < ⋯ < i_k is +1 times the computational state.
//! The transfer matrix used throughout is the transposition-free T̃(v); its
//! spectrum and Jordan structure coincide with those of T(v).

use crate::basis::jacobi_rows;
use crate::circuit::{InfluenceMatrix, Method};
use crate::error::{Error, Result};
use crate::exact::{det_fp, Field, Fp, FpMatrix};
use crate::linalg::{self, logm_upper_triangular};
use crate::params::{ModelParams, POLE_TOL};
use crate::state::{check_capacity, StateVector};
use crate::transfer::{apply_transfer, block_sizes, sigma_y_odd, TransferSpec, TransferVariant};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sector {
    Cl,
    Q,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    L,
    R,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(particles: usize) -> Self {
        if particles % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OperatorKind {
    M(C64),
    H(Side),
    BasisChange(Parity),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingleParticleOperator {
    pub entries: DMatrix<C64>,
    pub sector: Sector,
    pub kind: OperatorKind,
}

/// sinh and cosh of v and of w = u − v, the only data entering M(v).
#[derive(Debug, Clone, PartialEq)]
pub struct HyperbolicPoint<F> {
    pub shv: F,
    pub chv: F,
    pub shw: F,
    pub chw: F,
}

impl HyperbolicPoint<C64> {
    pub fn new(u: C64, v: C64) -> Self {
        let w = u - v;
        HyperbolicPoint { shv: v.sinh(), chv: v.cosh(), shw: w.sinh(), chw: w.cosh() }
    }
}

impl HyperbolicPoint<Fp> {
    /// A point with rational hyperbolic values: tanh v = 3/5, tanh(u − v) = 5/13,
    /// hence cosh u = 5/3 and sech u = 3/5.
    pub fn rational() -> Self {
        HyperbolicPoint { shv: Fp::ratio(3, 4), chv: Fp::ratio(5, 4), shw: Fp::ratio(5, 12), chw: Fp::ratio(13, 12) }
    }

    /// sech u at [`HyperbolicPoint::rational`].
    pub fn rational_sech_u() -> Fp {
        Fp::ratio(3, 5)
    }
}

fn pole<F>(x: Option<F>, what: &str) -> Result<F> {
    x.ok_or_else(|| Error::Pole(format!("{what} vanishes")))
}

/// Entries of M(v)/i; cl is lower and q upper triangular, 2N × 2N.
pub fn m_over_i<F: Field>(n_half: usize, pt: &HyperbolicPoint<F>, sector: Sector) -> Result<Vec<Vec<F>>> {
    let n = 2 * n_half;
    let zero = pt.shv.zero_like();
    let tv = pole(pt.shv.div(&pt.chv), "cosh v")?;
    let tw = pole(pt.shw.div(&pt.chw), "cosh(u-v)")?;
    let inv = |x: &F, what: &str| pole(x.inv(), what);
    let (lam, diag_odd, diag_even, even_odd, even_even, odd) = match sector {
        Sector::Cl => {
            let lam = tv.mul(&inv(&tw, "tanh(u-v)")?);
            let d_odd = inv(&tw, "tanh(u-v)")?.neg();
            let e_odd = tv.mul(&inv(&pt.shw.mul(&pt.shw), "sinh(u-v)")?).neg();
            let e_even = inv(&tw.mul(&pt.chv).mul(&pt.chv), "tanh(u-v)")?.neg();
            let o = inv(&pt.chv.mul(&pt.shw), "sinh(u-v)")?.neg();
            (lam, d_odd, tv.clone(), e_odd, e_even, o)
        }
        Sector::Q => {
            let lam = tw.mul(&inv(&tv, "tanh v")?);
            let d_even = inv(&tv, "tanh v")?;
            let e_odd = inv(&tv.mul(&pt.chw).mul(&pt.chw), "tanh v")?;
            let e_even = tw.mul(&inv(&pt.shv.mul(&pt.shv), "sinh v")?);
            // Odd-distance entries carry +1/(sinh v cosh(u−v)) in the (−1)^i-gauged
            // q modes; this is the sign for which [M^q, h^q] = 0.
            let o = inv(&pt.shv.mul(&pt.chw), "sinh v")?;
            (lam, tw.neg(), d_even, e_odd, e_even, o)
        }
    };
    let mut pw = vec![zero.int_like(1)];
    for k in 1..n {
        pw.push(pw[k - 1].mul(&lam));
    }
    let mut m = vec![vec![zero.clone(); n]; n];
    for a in 1..=n {
        for b in 1..=n {
            // (row, col) = (a, b) for cl; q entries mirror across the diagonal.
            let (d, lead) = match sector {
                Sector::Cl if a >= b => (a - b, b),
                Sector::Q if b >= a => (b - a, a),
                _ => continue,
            };
            m[a - 1][b - 1] = if d == 0 {
                if a % 2 == 1 {
                    diag_odd.clone()
                } else {
                    diag_even.clone()
                }
            } else if d % 2 == 0 {
                let base = if lead % 2 == 1 { &even_odd } else { &even_even };
                pw[d / 2 - 1].mul(base)
            } else {
                pw[(d + 1) / 2 - 1].mul(&odd)
            };
        }
    }
    Ok(m)
}

/// Banded entries of h_{l/r}^{cl/q} with s = sech u.
pub fn h_entries<F: Field>(n_half: usize, s: &F, side: Side, sector: Sector) -> Vec<Vec<F>> {
    let n = 2 * n_half;
    let one = s.int_like(1);
    let mut h = vec![vec![s.zero_like(); n]; n];
    // Diagonal ones sit on even 1-based sites for l, odd ones for r.
    let first = if side == Side::L { 1 } else { 0 };
    for i in (first..n).step_by(2) {
        h[i][i] = one.clone();
    }
    let band = match (side, sector) {
        (Side::L, Sector::Q) | (Side::R, Sector::Cl) => s.clone(),
        _ => s.neg(),
    };
    for i in 0..n - 1 {
        match sector {
            Sector::Cl => h[i + 1][i] = band.clone(),
            Sector::Q => h[i][i + 1] = band.clone(),
        }
    }
    // Next-nearest hops link the sites without a diagonal one.
    let start = if side == Side::L { 0 } else { 1 };
    for i in (start..n.saturating_sub(2)).step_by(2) {
        match sector {
            Sector::Cl => h[i + 2][i] = one.clone(),
            Sector::Q => h[i][i + 2] = one.clone(),
        }
    }
    h
}

pub fn to_dmatrix<F: Field>(rows: &[Vec<F>], conv: impl Fn(&F) -> C64) -> DMatrix<C64> {
    let n = rows.len();
    let w = rows.first().map_or(0, |r| r.len());
    DMatrix::from_fn(n, w, |i, j| conv(&rows[i][j]))
}

pub fn to_fp_matrix(rows: &[Vec<Fp>]) -> FpMatrix {
    FpMatrix::from_fn(rows.len(), |i, j| rows[i][j])
}

fn check_pole(z: C64, what: &str) -> Result<()> {
    if z.norm() < POLE_TOL {
        return Err(Error::Pole(format!("{what} = 0")));
    }
    Ok(())
}

pub fn build_m(p: &ModelParams, v: C64, sector: Sector) -> Result<SingleParticleOperator> {
    p.require_free_fermion()?;
    let pt = HyperbolicPoint::new(p.u, v);
    for (z, what) in [(pt.shv, "sinh v"), (pt.chv, "cosh v"), (pt.shw, "sinh(u-v)"), (pt.chw, "cosh(u-v)")] {
        check_pole(z, what)?;
    }
    let rows = m_over_i(p.n_half, &pt, sector)?;
    Ok(SingleParticleOperator { entries: to_dmatrix(&rows, |x| I * x), sector, kind: OperatorKind::M(v) })
}

pub fn build_h(p: &ModelParams, side: Side, sector: Sector) -> Result<SingleParticleOperator> {
    let ch = p.u.cosh();
    check_pole(ch, "cosh u")?;
    let rows = h_entries(p.n_half, &(1.0 / ch), side, sector);
    Ok(SingleParticleOperator { entries: to_dmatrix(&rows, |x| *x), sector, kind: OperatorKind::H(side) })
}

/// Block-diagonal M(v) = M^{cl} ⊕ M^{q} acting on (cl modes, q modes).
pub fn m_block_diagonal(p: &ModelParams, v: C64) -> Result<DMatrix<C64>> {
    let n = 2 * p.n_half;
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    out.view_mut((0, 0), (n, n)).copy_from(&build_m(p, v, Sector::Cl)?.entries);
    out.view_mut((n, n), (n, n)).copy_from(&build_m(p, v, Sector::Q)?.entries);
    Ok(out)
}

/// Creation matrix A (column a is the new creation operator in terms of c†_i,
/// cl modes first) and annihilation matrix A^{−T}. Mode i < 2N pairs leg i
/// with leg 4N−1−i; the odd-parity pair is singular at q = 1.
pub fn clq_transform(n_half: usize, q: f64, parity: Parity) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    let n = 4 * n_half;
    let m = 2 * n_half;
    let q_sign = if parity == Parity::Odd { 1.0 } else { -1.0 };
    if parity == Parity::Odd && (q * q - 1.0).abs() < 1e-12 {
        return Err(Error::Degenerate("odd-parity cl and q modes coincide at q = 1".into()));
    }
    let mut a = DMatrix::<C64>::zeros(n, n);
    for i in 0..m {
        let g = if i % 2 == 0 { 1.0 } else { -1.0 };
        a[(i, i)] = C64::new(g, 0.0);
        a[(n - 1 - i, i)] = C64::new(g / (q * q), 0.0);
        a[(i, m + i)] = C64::new(g, 0.0);
        a[(n - 1 - i, m + i)] = C64::new(q_sign * g, 0.0);
    }
    let inv = a.clone().try_inverse().ok_or_else(|| Error::Degenerate("basis change is singular".into()))?;
    Ok((a, inv.transpose()))
}

/// Single-particle action of T̃(v) in the c basis for one parity sector.
pub fn one_body_transfer(p: &ModelParams, v: C64, parity: Parity) -> Result<DMatrix<C64>> {
    let (a, ann) = clq_transform(p.n_half, p.q_weight, parity)?;
    Ok(&a * m_block_diagonal(p, v)? * ann.transpose())
}

/// Pseudovacuum eigenvalue a(v) = (tanh v tanh(u − v))^N.
pub fn vacuum_eigenvalue(p: &ModelParams, v: C64) -> C64 {
    (v.tanh() * (p.u - v).tanh()).powu(p.n_half as u32)
}

/// Prefactor multiplying a(v) in each parity sector.
pub fn parity_prefactor(q: f64, parity: Parity) -> f64 {
    match parity {
        Parity::Even => 1.0,
        Parity::Odd => (q * q - 1.0) / (q * q + 1.0),
    }
}

/// Jordan chain v₁…v_m of `a` at λ with (A − λ)v_k = v_{k−1}, from the Taylor
/// coefficients F_j of adj(λ + t − A) = Σ F_j t^j, which satisfy
/// (A − λ)F_j = F_{j−1} below the algebraic multiplicity. Coefficients are
/// produced by Faddeev-LeVerrier, so floating-point use is limited to small sizes.
pub fn jordan_chain<F: Field>(a: &[Vec<F>], lambda: &F, rel_tol: f64) -> Result<Vec<Vec<F>>> {
    let n = a.len();
    if n == 0 {
        return Err(Error::NotEigenvalue("empty matrix".into()));
    }
    let zero = lambda.zero_like();
    let one = lambda.int_like(1);
    let matmul = |x: &[Vec<F>], y: &[Vec<F>]| -> Vec<Vec<F>> {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).fold(zero.clone(), |s, k| s.add(&x[i][k].mul(&y[k][j]))))
                    .collect()
            })
            .collect()
    };
    // adj(μ − A) = Σ_k μ^{n−1−k} B_k, det(μ − A) = Σ_k c_k μ^{n−k}.
    let ident: Vec<Vec<F>> = (0..n).map(|i| (0..n).map(|j| if i == j { one.clone() } else { zero.clone() }).collect()).collect();
    let mut bs = vec![ident.clone()];
    let mut cs = vec![one.clone()];
    for k in 1..=n {
        let ab = matmul(a, &bs[k - 1]);
        let tr = (0..n).fold(zero.clone(), |s, i| s.add(&ab[i][i]));
        let c = tr.neg().div(&lambda.int_like(k as i64)).expect("k ≠ 0");
        cs.push(c.clone());
        if k < n {
            let mut b = ab;
            for (i, row) in b.iter_mut().enumerate() {
                row[i] = row[i].add(&c);
            }
            bs.push(b);
        }
    }
    let binom = |m: usize, j: usize| -> F {
        let mut x = one.clone();
        for t in 0..j {
            x = x.mul(&lambda.int_like((m - t) as i64)).div(&lambda.int_like(t as i64 + 1)).expect("nonzero");
        }
        x
    };
    // p(λ + t) = Σ_j p_j t^j; the multiplicity is the order of the zero at t = 0.
    let scale = cs.iter().map(|c| c.magnitude()).fold(0.0, f64::max) * (1.0 + lambda.magnitude()).powi(n as i32);
    let mut mult = 0;
    for j in 0..=n {
        let mut pj = zero.clone();
        for (k, c) in cs.iter().enumerate() {
            let deg = n - k;
            if deg >= j {
                pj = pj.add(&c.mul(&binom(deg, j)).mul(&pole(lambda.powi((deg - j) as i64), "λ")?));
            }
        }
        if pj.magnitude() > rel_tol * scale {
            break;
        }
        mult += 1;
    }
    if mult == 0 {
        return Err(Error::NotEigenvalue(format!("λ with |λ| = {}", lambda.magnitude())));
    }
    let coeff = |j: usize| -> Result<Vec<Vec<F>>> {
        let mut f = vec![vec![zero.clone(); n]; n];
        for (k, b) in bs.iter().enumerate() {
            let deg = n - 1 - k;
            if deg < j {
                continue;
            }
            let w = binom(deg, j).mul(&pole(lambda.powi((deg - j) as i64), "λ")?);
            for i in 0..n {
                for l in 0..n {
                    f[i][l] = f[i][l].add(&w.mul(&b[i][l]));
                }
            }
        }
        Ok(f)
    };
    let f0 = coeff(0)?;
    // Seed with the unit vector whose image under F₀ is largest, so v₁ ≠ 0.
    let seed = (0..n)
        .max_by(|&x, &y| {
            let nx: f64 = (0..n).map(|i| f0[i][x].magnitude()).sum();
            let ny: f64 = (0..n).map(|i| f0[i][y].magnitude()).sum();
            nx.partial_cmp(&ny).unwrap_or(std::cmp::Ordering::Equal)
        })
        .expect("n > 0");
    // The chain has the length of the largest block; rank tests decide the rest.
    let mut chain = Vec::new();
    for j in 0..mult {
        let f = if j == 0 { f0.clone() } else { coeff(j)? };
        let col: Vec<F> = (0..n).map(|i| f[i][seed].clone()).collect();
        chain.push(col);
    }
    // Truncate where the chain relation stops holding (several blocks at λ).
    let mut len = 1;
    let norm = |x: &[F]| x.iter().map(|z| z.magnitude()).fold(0.0, f64::max);
    while len < chain.len() {
        let v = &chain[len];
        let prev = &chain[len - 1];
        let mut bad = 0.0f64;
        for i in 0..n {
            let mut s = zero.clone();
            for k in 0..n {
                s = s.add(&a[i][k].mul(&v[k]));
            }
            s = s.sub(&lambda.mul(&v[i])).sub(&prev[i]);
            bad = bad.max(s.magnitude());
        }
        if bad > rel_tol.sqrt() * norm(v).max(norm(prev)) {
            break;
        }
        len += 1;
    }
    chain.truncate(len);
    Ok(chain)
}

/// Jordan chain of a single-particle operator through the adjugate derivatives.
pub fn jordan_chain_single(op: &SingleParticleOperator, lambda: C64) -> Result<Vec<DVector<C64>>> {
    let n = op.entries.nrows();
    let rows: Vec<Vec<C64>> = (0..n).map(|i| (0..n).map(|j| op.entries[(i, j)]).collect()).collect();
    let chain = jordan_chain(&rows, &lambda, 1e-9)?;
    Ok(chain.into_iter().map(DVector::from_vec).collect())
}

/// Largest ‖(A − λ)v_m − v_{m−1}‖∞ relative to max_m ‖v_m‖∞.
pub fn chain_residual(a: &DMatrix<C64>, lambda: C64, chain: &[DVector<C64>]) -> f64 {
    let scale = chain.iter().map(|v| v.camax()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut worst = 0.0f64;
    for (m, v) in chain.iter().enumerate() {
        let mut r = a * v - v * lambda;
        if m > 0 {
            r -= &chain[m - 1];
        }
        worst = worst.max(r.camax());
    }
    worst / scale
}

/// Exact Jordan block sizes of an F_p matrix at λ from its rank sequence.
pub fn exact_block_sizes(a: &FpMatrix, lambda: Fp) -> Vec<usize> {
    let ranks = a.rank_sequence(lambda, a.n + 1);
    block_sizes(a.n, &ranks)
}

/// Single-particle operators at the rational point with their two eigenvalues.
pub fn rational_operators(n_half: usize) -> Vec<(String, FpMatrix, [Fp; 2])> {
    let pt = HyperbolicPoint::<Fp>::rational();
    let s = HyperbolicPoint::<Fp>::rational_sech_u();
    let tv = pt.shv.div(&pt.chv).unwrap();
    let tw = pt.shw.div(&pt.chw).unwrap();
    let mut out = vec![
        ("M/i cl".to_string(), to_fp_matrix(&m_over_i(n_half, &pt, Sector::Cl).unwrap()), [tw.inv().unwrap().neg(), tv]),
        ("M/i q".to_string(), to_fp_matrix(&m_over_i(n_half, &pt, Sector::Q).unwrap()), [tw.neg(), tv.inv().unwrap()]),
    ];
    for side in [Side::L, Side::R] {
        for sector in [Sector::Cl, Sector::Q] {
            let name = format!("h_{} {}", if side == Side::L { "l" } else { "r" }, if sector == Sector::Cl { "cl" } else { "q" });
            out.push((name, to_fp_matrix(&h_entries(n_half, &s, side, sector)), [Fp(0), Fp(1)]));
        }
    }
    out
}

/// Jordan block sizes, largest first, of the many-body free-fermion transfer
/// matrix at the rational point. On k particles T̃ is a scalar times a matrix
/// similar to the k-th exterior power of M_cl ⊕ M_q, so its blocks are those
/// of the compounds, computed exactly.
pub fn many_body_blocks_exact(n_half: usize) -> Result<Vec<usize>> {
    let legs = 4 * n_half;
    if legs > 12 {
        return Err(Error::Capacity { needed: legs, cap: 12 });
    }
    let ops = rational_operators(n_half);
    let m = 2 * n_half;
    let x = FpMatrix::from_fn(legs, |i, j| match (i < m, j < m) {
        (true, true) => ops[0].1.get(i, j),
        (false, false) => ops[1].1.get(i - m, j - m),
        _ => Fp(0),
    });
    let mut out = Vec::new();
    for k in 0..=legs {
        let sets: Vec<Vec<usize>> = patterns(legs, k).into_iter().map(|p| occupied(legs, p)).collect();
        let c = FpMatrix::from_fn(sets.len(), |i, j| {
            let data = sets[i].iter().flat_map(|&r| sets[j].iter().map(move |&c| (r, c))).map(|(r, c)| x.get(r, c).0).collect();
            det_fp(data, k)
        });
        // Principal minors of the triangular blocks are diagonal products, so
        // the diagonal lists the eigenvalues.
        let mut eigs: Vec<u64> = (0..c.n).map(|i| c.get(i, i).0).collect();
        eigs.sort_unstable();
        eigs.dedup();
        for lambda in eigs {
            out.extend(exact_block_sizes(&c, Fp(lambda)));
        }
    }
    out.sort_unstable_by(|a, b| b.cmp(a));
    Ok(out)
}

/// Largest entry of [M, h] relative to ‖M‖∞‖h‖∞ for one pairing.
pub fn commutator_norm(m: &DMatrix<C64>, h: &DMatrix<C64>) -> f64 {
    let c = m * h - h * m;
    linalg::max_abs(&c) / (linalg::max_abs(m) * linalg::max_abs(h)).max(f64::MIN_POSITIVE)
}

/// Occupation patterns of `k` particles on `n` sites in increasing index order.
fn patterns(n: usize, k: usize) -> Vec<usize> {
    if k > n {
        return Vec::new();
    }
    if k == 0 {
        return vec![0];
    }
    let mut out = Vec::new();
    let mut x: usize = (1 << k) - 1;
    while x < 1 << n {
        out.push(x);
        let c = x & x.wrapping_neg();
        let r = x + c;
        x = (((r ^ x) >> 2) / c) | r;
    }
    out
}

/// Occupied sites (0-based, slowest first) of a basis index on n sites.
fn occupied(n: usize, idx: usize) -> Vec<usize> {
    (0..n).filter(|&j| idx & (1 << (n - 1 - j)) != 0).collect()
}

fn minor_det(m: &DMatrix<C64>, rows: &[usize], cols: &[usize]) -> C64 {
    let k = rows.len();
    linalg::det(&DMatrix::from_fn(k, k, |i, j| m[(rows[i], cols[j])]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianReport {
    /// Per particle number k: max |T̃_k − a·pref·C_k(e^Q)| / max |T̃_k|.
    pub sector_deviation: Vec<f64>,
    /// |⟨Ω|T̃|Ω⟩ − a(v)|.
    pub vacuum_deviation: f64,
    /// Measured odd/even prefactor ratio, from the one-particle sector.
    pub odd_ratio: C64,
}

impl GaussianReport {
    pub fn max_deviation(&self) -> f64 {
        self.sector_deviation.iter().copied().fold(self.vacuum_deviation, f64::max)
    }
}

/// Q^± = A_± (log M^{cl} ⊕ log M^{q}) A_±^{−1} on the principal branch.
pub fn gaussian_exponent(p: &ModelParams, v: C64, parity: Parity) -> Result<DMatrix<C64>> {
    let n = 2 * p.n_half;
    let mcl = build_m(p, v, Sector::Cl)?.entries;
    let mq = build_m(p, v, Sector::Q)?.entries;
    let lcl = logm_upper_triangular(&mcl.transpose())?.transpose();
    let lq = logm_upper_triangular(&mq)?;
    let mut l = DMatrix::zeros(2 * n, 2 * n);
    l.view_mut((0, 0), (n, n)).copy_from(&lcl);
    l.view_mut((n, n), (n, n)).copy_from(&lq);
    let (a, ann) = clq_transform(p.n_half, p.q_weight, parity)?;
    Ok(&a * l * ann.transpose())
}

/// Dense check of T̃(v) = a(v)·pref·exp(Σ Q_ij c†_i c_j) in every particle-number
/// sector (particle number is conserved, so parity sectors split further).
pub fn gaussian_form_check(p: &ModelParams, v: C64) -> Result<GaussianReport> {
    p.require_free_fermion()?;
    let legs = p.legs();
    if legs > 12 {
        return Err(Error::Capacity { needed: 2 * legs, cap: 24 });
    }
    check_capacity(legs + 1)?;
    let spec = TransferSpec::new(TransferVariant::Tilde, v, p);
    let a = vacuum_eigenvalue(p, v);
    let mut exps = Vec::new();
    for parity in [Parity::Even, Parity::Odd] {
        exps.push(match gaussian_exponent(p, v, parity) {
            Ok(q) => Some(q.exp()),
            Err(Error::Degenerate(_)) => None,
            Err(e) => return Err(e),
        });
    }
    let mut dev = Vec::with_capacity(legs + 1);
    let mut vac = 0.0;
    let mut odd_ratio = C64::new(f64::NAN, f64::NAN);
    for k in 0..=legs {
        let states = patterns(legs, k);
        let mut block = DMatrix::<C64>::zeros(states.len(), states.len());
        for (c, &s) in states.iter().enumerate() {
            let mut x = StateVector::zeros(legs)?;
            x.amps[s] = C64::new(1.0, 0.0);
            let y = apply_transfer(&spec, &x)?;
            for (r, &t) in states.iter().enumerate() {
                block[(r, c)] = y.amps[t];
            }
        }
        if k == 0 {
            vac = (block[(0, 0)] - a).norm();
            dev.push(vac / a.norm().max(f64::MIN_POSITIVE));
            continue;
        }
        let parity = Parity::of(k);
        let Some(e) = &exps[if parity == Parity::Even { 0 } else { 1 }] else {
            dev.push(f64::NAN);
            continue;
        };
        let pref = a * parity_prefactor(p.q_weight, parity);
        let occ: Vec<Vec<usize>> = states.iter().map(|&s| occupied(legs, s)).collect();
        let scale = linalg::max_abs(&block);
        let mut worst = 0.0f64;
        for (r, ro) in occ.iter().enumerate() {
            for (c, co) in occ.iter().enumerate() {
                worst = worst.max((block[(r, c)] - pref * minor_det(e, ro, co)).norm());
            }
        }
        if k == 1 {
            // Trace ratio of the measured block to a·(unit-prefactor Gaussian).
            let tr_b: C64 = (0..block.nrows()).map(|i| block[(i, i)]).sum();
            let tr_g: C64 = (0..e.nrows()).map(|i| e[(i, i)]).sum();
            odd_ratio = tr_b / (a * tr_g);
        }
        dev.push(if scale > 0.0 { worst / scale } else { worst });
    }
    Ok(GaussianReport { sector_deviation: dev, vacuum_deviation: vac, odd_ratio })
}

/// Slater determinant ∏_i Ψ†_{q,i}Ψ†_{cl,i}|Ω⟩ from orbital rows (N × 2N per
/// sector), before the σʸ rotation.
pub fn slater_state(p: &ModelParams, cl_rows: &DMatrix<C64>, q_rows: &DMatrix<C64>) -> Result<Vec<C64>> {
    let n = p.n_half;
    let legs = 4 * n;
    check_capacity(legs)?;
    if cl_rows.shape() != (n, 2 * n) || q_rows.shape() != (n, 2 * n) {
        return Err(Error::Dimension { expected: 2 * n * n, got: cl_rows.len().min(q_rows.len()) });
    }
    let (a, _) = clq_transform(n, p.q_weight, Parity::Even)?;
    let a_cl = a.columns(0, 2 * n);
    let a_q = a.columns(2 * n, 2 * n);
    let mut phi = DMatrix::<C64>::zeros(legs, 2 * n);
    for i in 0..n {
        phi.set_column(2 * i, &(a_q * q_rows.row(i).transpose()));
        phi.set_column(2 * i + 1, &(a_cl * cl_rows.row(i).transpose()));
    }
    let mut psi = vec![C64::new(0.0, 0.0); 1 << legs];
    let cols: Vec<usize> = (0..2 * n).collect();
    for s in patterns(legs, 2 * n) {
        psi[s] = minor_det(&phi, &occupied(legs, s), &cols);
    }
    Ok(psi)
}

/// Jacobi orbital rows at s = sech u.
pub fn jacobi_orbitals(p: &ModelParams, sector: Sector) -> DMatrix<C64> {
    let s = 1.0 / p.u.cosh();
    to_dmatrix(&jacobi_rows(p.n_half, &s, sector), |x| *x)
}

/// The IM at η = iπ/2 as the Slater determinant filling the eigenvalue-0 cl
/// block and the eigenvalue-1 q block of h_l, rotated by σʸ on odd legs and
/// normalised by the constant (1 + q^{−2})^N fixed by the Jacobi orbitals.
pub fn build_im_fermionic(p: &ModelParams) -> Result<InfluenceMatrix> {
    p.require_free_fermion()?;
    let cl = jacobi_orbitals(p, Sector::Cl);
    let q = jacobi_orbitals(p, Sector::Q);
    let psi = slater_state(p, &cl, &q)?;
    let norm = (1.0 + p.q_weight.powi(-2)).powi(p.n_half as i32);
    let amps: Vec<C64> = sigma_y_odd(&psi, p.legs()).into_iter().map(|z| z / norm).collect();
    InfluenceMatrix::new(amps, p.n_half, Method::Fermion, Some(p.clone()))
}

/// Second-quantised Σ_ab (h)_ab ψ†_a ψ_b for the chosen parity's modes, acting
/// on one basis state; returns (index, amplitude) pairs.
fn one_body_action(k: &DMatrix<C64>, legs: usize, idx: usize) -> Vec<(usize, C64)> {
    let mut out = Vec::new();
    let occ = occupied(legs, idx);
    for &j in &occ {
        let mj = 1 << (legs - 1 - j);
        let sign_j = if (idx >> (legs - j)).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        let after = idx ^ mj;
        for i in 0..legs {
            let kij = k[(i, j)];
            if kij.norm() == 0.0 {
                continue;
            }
            let mi = 1 << (legs - 1 - i);
            if after & mi != 0 {
                continue;
            }
            let sign_i = if (after >> (legs - i)).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            out.push((after | mi, kij * (sign_i * sign_j)));
        }
    }
    out
}

/// Dense local Hamiltonian H_{side}^{sector} on the given parity sector (zero
/// on the other one).
pub fn many_body_h(p: &ModelParams, side: Side, sector: Sector, parity: Parity) -> Result<DMatrix<C64>> {
    let legs = p.legs();
    check_capacity(2 * legs)?;
    let n = 2 * p.n_half;
    let h = build_h(p, side, sector)?.entries;
    let mut emb = DMatrix::<C64>::zeros(2 * n, 2 * n);
    let off = if sector == Sector::Cl { 0 } else { n };
    emb.view_mut((off, off), (n, n)).copy_from(&h);
    let (a, ann) = clq_transform(p.n_half, p.q_weight, parity)?;
    let k = &a * emb * ann.transpose();
    let dim = 1usize << legs;
    let mut out = DMatrix::zeros(dim, dim);
    for idx in 0..dim {
        if Parity::of(idx.count_ones() as usize) != parity {
            continue;
        }
        for (r, z) in one_body_action(&k, legs, idx) {
            out[(r, idx)] += z;
        }
    }
    Ok(out)
}
