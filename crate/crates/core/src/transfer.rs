//! Auxiliary (temporal) transfer matrices acting on 4N-leg vectors.
//!
//! T(v) contains partially transposed R-matrices and ρ₀(q); T̃(v) is the
//! transposition-free form obtained by crossing, similar to T(v) through σʸ on
//! the odd legs, with ρ₀(1/q). T̃_ε(v) shifts the even inhomogeneities by ε.

use crate::error::{Error, Result};
use crate::params::{sinh_nonzero, thermal_weights, ModelParams};
use crate::state::{assemble_dense, check_capacity, max_abs, trace_aux, Factor, StateVector};
use crate::linalg;
use crate::xxz::r_matrix;
use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransferVariant {
    Original,
    Tilde,
    TildeEpsilon,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransferSpec {
    pub variant: TransferVariant,
    pub v: C64,
    pub params: ModelParams,
}

impl TransferSpec {
    pub fn new(variant: TransferVariant, v: C64, params: &ModelParams) -> Self {
        TransferSpec { variant, v, params: params.clone() }
    }
}

pub(crate) fn rho_aux(q: f64) -> Matrix2<C64> {
    let w = thermal_weights(q);
    Matrix2::new(C64::new(w[0], 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(w[1], 0.0))
}

/// Factors of the chain in acting order plus the scalar prefactor.
pub fn transfer_factors(spec: &TransferSpec) -> Result<(Vec<Factor>, C64)> {
    let p = &spec.params;
    let (n, v, u, eta) = (p.n_half, spec.v, p.u, p.eta);
    let r = |w: C64| r_matrix(p, w).map(|m| m.0);
    let rt = |w: C64| r_matrix(p, w).map(|m| m.transpose_second().0);
    let mut fs = Vec::with_capacity(4 * n + 1);
    match spec.variant {
        TransferVariant::Original => {
            for j in 1..=n {
                fs.push(Factor::Site(2 * j - 1, rt(v - u)?));
                fs.push(Factor::Site(2 * j, r(-v)?));
            }
            fs.push(Factor::Aux(rho_aux(p.q_weight)));
            for j in 1..=n {
                fs.push(Factor::Site(2 * n + 2 * j - 1, rt(v)?));
                fs.push(Factor::Site(2 * n + 2 * j, r(u - v)?));
            }
            Ok((fs, C64::new(1.0, 0.0)))
        }
        TransferVariant::Tilde | TransferVariant::TildeEpsilon => {
            let shift = if spec.variant == TransferVariant::Tilde { eta } else { eta + p.epsilon };
            // Written order R₀₁ R₀₂ … ρ₀ … R₀,₄N: the rightmost factor acts first.
            for j in (1..=n).rev() {
                fs.push(Factor::Site(2 * n + 2 * j, r(v - u - shift)?));
                fs.push(Factor::Site(2 * n + 2 * j - 1, r(v)?));
            }
            fs.push(Factor::Aux(rho_aux(1.0 / p.q_weight)));
            for j in (1..=n).rev() {
                fs.push(Factor::Site(2 * j, r(v - shift)?));
                fs.push(Factor::Site(2 * j - 1, r(v - u)?));
            }
            let a = v.sinh() / sinh_nonzero(v - eta, "v-eta")?;
            let b = (v - u).sinh() / sinh_nonzero(v - u - eta, "v-u-eta")?;
            Ok((fs, (a * b).powu(n as u32)))
        }
    }
}

pub fn apply_transfer(spec: &TransferSpec, x: &StateVector) -> Result<StateVector> {
    let legs = spec.params.legs();
    x.require_sites(legs)?;
    let (fs, pref) = transfer_factors(spec)?;
    let mut y = trace_aux(&fs, &x.amps, legs);
    for a in y.iter_mut() {
        *a *= pref;
    }
    Ok(StateVector { amps: y, n_sites: legs })
}

/// ∏ σʸ on the odd legs; maps eigenvectors of T(v) to eigenvectors of T̃(v).
pub fn sigma_y_odd(x: &[C64], legs: usize) -> Vec<C64> {
    let mut odd_mask = 0usize;
    for k in (1..=legs).step_by(2) {
        odd_mask |= 1 << (legs - k);
    }
    let n_odd = legs.div_ceil(2) as u32;
    let mut y = vec![C64::new(0.0, 0.0); x.len()];
    for (i, a) in x.iter().enumerate() {
        // σʸ|↑⟩ = i|↓⟩, σʸ|↓⟩ = −i|↑⟩: phase iⁿ⁽↑⁾(−i)ⁿ⁽↓⁾ over odd legs.
        let downs = (i & odd_mask).count_ones();
        let ups = n_odd - downs;
        let k = (ups + 3 * downs) % 4;
        let phase = [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(0.0, -1.0)][k as usize];
        y[i ^ odd_mask] = phase * a;
    }
    y
}

/// max over random x of ‖T(v₁)T(v₂)x − T(v₂)T(v₁)x‖∞ / ‖x‖∞.
pub fn commutator_residual(
    p: &ModelParams,
    variant: TransferVariant,
    v1: C64,
    v2: C64,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let legs = p.legs();
    check_capacity(legs + 1)?;
    let t1 = TransferSpec::new(variant, v1, p);
    let t2 = TransferSpec::new(variant, v2, p);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let amps: Vec<C64> =
            (0..1usize << legs).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let x = StateVector { amps, n_sites: legs };
        let a = apply_transfer(&t1, &apply_transfer(&t2, &x)?)?;
        let b = apply_transfer(&t2, &apply_transfer(&t1, &x)?)?;
        let diff = crate::state::max_abs_diff(&a.amps, &b.amps);
        worst = worst.max(diff / x.max_abs());
    }
    Ok(worst)
}

pub fn dense_transfer(spec: &TransferSpec) -> Result<DMatrix<C64>> {
    let legs = spec.params.legs();
    check_capacity(2 * legs)?;
    assemble_dense(legs, |e| {
        let x = StateVector { amps: e.to_vec(), n_sites: legs };
        Ok(apply_transfer(spec, &x)?.amps)
    })
}

/// Thresholds of the Jordan-structure probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JordanProbeConfig {
    /// Eigenvalues closer than this relative distance form one cluster.
    pub cluster_rel_tol: f64,
    /// Singular values below this times σ_max count as zero.
    pub rank_rel_tol: f64,
}

impl Default for JordanProbeConfig {
    fn default() -> Self {
        JordanProbeConfig { cluster_rel_tol: 1e-7, rank_rel_tol: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenCluster {
    /// Number of down spins of the magnetization block, when the probe splits by Sᶻ.
    pub sector: Option<usize>,
    pub lambda: C64,
    pub algebraic: usize,
    pub geometric: usize,
    /// rank((T − λ)^k) on the analysed block for k = 1, 2, … until it reaches the floor.
    pub ranks: Vec<usize>,
    /// Jordan block sizes, largest first.
    pub blocks: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JordanReport {
    pub dim: usize,
    pub clusters: Vec<EigenCluster>,
    pub config: JordanProbeConfig,
}

impl JordanReport {
    pub fn largest_block(&self) -> usize {
        self.clusters.iter().flat_map(|c| c.blocks.iter().copied()).max().unwrap_or(0)
    }

    pub fn is_diagonalizable(&self) -> bool {
        self.clusters.iter().all(|c| c.algebraic == c.geometric)
    }

    pub fn cluster_near(&self, lambda: C64) -> Option<&EigenCluster> {
        self.clusters.iter().min_by(|a, b| (a.lambda - lambda).norm().total_cmp(&(b.lambda - lambda).norm()))
    }
}

/// Group eigenvalues by single linkage: λ, μ merge when |λ − μ| < rel_tol·max(|λ|, |μ|, floor).
/// Returns (centroid, member indices), largest modulus first.
pub fn cluster_eigenvalues(eigs: &[C64], rel_tol: f64, floor: f64) -> Vec<(C64, Vec<usize>)> {
    let n = eigs.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(l: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while l[r] != r {
            r = l[r];
        }
        l[i] = r;
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            let scale = eigs[i].norm().max(eigs[j].norm()).max(floor);
            if (eigs[i] - eigs[j]).norm() < rel_tol * scale {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                label[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for i in 0..n {
        let r = find(&mut label, i);
        match groups.iter_mut().find(|g| g.0 == r) {
            Some(g) => g.1.push(i),
            None => groups.push((r, vec![i])),
        }
    }
    let mut out: Vec<(C64, Vec<usize>)> = groups
        .into_iter()
        .map(|(_, m)| (m.iter().map(|&i| eigs[i]).sum::<C64>() / m.len() as f64, m))
        .collect();
    out.sort_by(|a, b| b.0.norm().total_cmp(&a.0.norm()).then(a.0.re.total_cmp(&b.0.re)).then(a.0.im.total_cmp(&b.0.im)));
    out
}

/// Rank sequences of (A − λ)^k for every eigenvalue cluster of a dense matrix.
///
/// Each cluster is first isolated by reordering the Schur form, so the ranks are
/// taken on the m×m block N = T₁₁ − λ̄ alone; a singular value of N^k counts as
/// zero below `rank_rel_tol·‖N‖^k`, and N is treated as zero when
/// ‖N‖ < rank_rel_tol·‖A‖.
pub fn jordan_structure(a: &DMatrix<C64>, cfg: JordanProbeConfig) -> Result<Vec<EigenCluster>> {
    let n = a.nrows();
    let base = linalg::schur(a);
    let eigs: Vec<C64> = (0..n).map(|i| base.t[(i, i)]).collect();
    let norm_a = a.norm();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let floor = 1e-12 * norm_a;
    for (lambda, members) in cluster_eigenvalues(&eigs, cfg.cluster_rel_tol, floor) {
        let alg = members.len();
        let mut s = base.clone();
        let m = s.bring_origins_to_front(&members);
        let nil = s.t.view((0, 0), (m, m)) - DMatrix::<C64>::identity(m, m) * lambda;
        let norm_n = nil.norm();
        let mut ranks = Vec::new();
        if norm_n < cfg.rank_rel_tol * norm_a {
            ranks.push(0);
        } else {
            let mut pow = nil.clone();
            let mut k = 1;
            loop {
                let r = linalg::numerical_rank(&pow, cfg.rank_rel_tol, Some(norm_n.powi(k)));
                ranks.push(r);
                if r == 0 || ranks.len() > m {
                    break;
                }
                pow = &pow * &nil;
                k += 1;
            }
        }
        // Ranks on the full space add the n − m dimensions outside the cluster.
        let full: Vec<usize> = ranks.iter().map(|r| r + n - m).collect();
        let geometric = m - ranks[0];
        let blocks = block_sizes(m, &ranks);
        out.push(EigenCluster { sector: None, lambda, algebraic: alg, geometric, ranks: full, blocks });
    }
    Ok(out)
}

/// Jordan block sizes from r_k = rank((A−λ)^k), with r_0 = n.
pub fn block_sizes(n: usize, ranks: &[usize]) -> Vec<usize> {
    let mut r = vec![n];
    r.extend_from_slice(ranks);
    // at_least[k] = number of blocks of size ≥ k+1
    let at_least: Vec<usize> = r.windows(2).map(|w| w[0].saturating_sub(w[1])).collect();
    let mut sizes = Vec::new();
    for k in 0..at_least.len() {
        let next = at_least.get(k + 1).copied().unwrap_or(0);
        for _ in 0..at_least[k].saturating_sub(next) {
            sizes.push(k + 1);
        }
    }
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    sizes
}

/// Dense Jordan probe of T̃(v) (or T̃_ε(v) when `deformed`), 4N ≤ 12.
///
/// T̃ conserves Sᶻ, so each magnetization block is analysed on its own.
pub fn jordan_probe(p: &ModelParams, v: C64, deformed: bool, cfg: JordanProbeConfig) -> Result<JordanReport> {
    let legs = p.legs();
    if legs > 12 {
        return Err(Error::Capacity { needed: legs, cap: 12 });
    }
    let variant = if deformed { TransferVariant::TildeEpsilon } else { TransferVariant::Tilde };
    let t = dense_transfer(&TransferSpec::new(variant, v, p))?;
    let mut clusters = Vec::new();
    for downs in 0..=legs {
        let idx: Vec<usize> = (0..t.nrows()).filter(|i| i.count_ones() as usize == downs).collect();
        let block = DMatrix::from_fn(idx.len(), idx.len(), |r, c| t[(idx[r], idx[c])]);
        for mut c in jordan_structure(&block, cfg)? {
            c.sector = Some(downs);
            clusters.push(c);
        }
    }
    Ok(JordanReport { dim: t.nrows(), clusters, config: cfg })
}

/// ‖T x − x‖∞ for the given variant.
pub fn eigen_residual(spec: &TransferSpec, x: &StateVector) -> Result<f64> {
    let y = apply_transfer(spec, x)?;
    Ok(crate::state::max_abs_diff(&y.amps, &x.amps) / max_abs(&x.amps).max(f64::MIN_POSITIVE))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ff(n: usize) -> ModelParams {
        ModelParams::free_fermion(0.6, 1.7, n).unwrap()
    }

    #[test]
    fn pseudovacuum_eigenvalue() {
        let p = ff(2);
        let v = C64::new(0.23, 0.0);
        let x = StateVector::all_up(8).unwrap();
        let y = apply_transfer(&TransferSpec::new(TransferVariant::Tilde, v, &p), &x).unwrap();
        let a = (v.tanh() * (p.u - v).tanh()).powu(2);
        assert!((y.amps[0] - a).norm() < 1e-13);
        assert!(y.amps[1..].iter().all(|z| z.norm() < 1e-13));
    }

    #[test]
    fn sigma_y_odd_is_involution() {
        let x: Vec<C64> = (0..16).map(|i| C64::new(i as f64, -(i as f64) * 0.5)).collect();
        let y = sigma_y_odd(&sigma_y_odd(&x, 4), 4);
        assert!(crate::state::max_abs_diff(&x, &y) < 1e-15);
    }

    #[test]
    fn tilde_is_conjugate_of_original() {
        let p = ModelParams::new(C64::new(0.1, 0.8), C64::new(0.35, 0.1), 1.4, 1).unwrap();
        let v = C64::new(0.27, -0.15);
        let t = dense_transfer(&TransferSpec::new(TransferVariant::Original, v, &p)).unwrap();
        let tt = dense_transfer(&TransferSpec::new(TransferVariant::Tilde, v, &p)).unwrap();
        let s = assemble_dense(4, |e| Ok(sigma_y_odd(e, 4))).unwrap();
        let d = (&s * t * &s - tt).iter().fold(0.0f64, |m, z| m.max(z.norm()));
        assert!(d < 1e-12, "{d}");
    }

    #[test]
    fn commuting_family() {
        let p = ModelParams::new(C64::new(0.2, 0.9), C64::new(0.4, 0.0), 1.3, 1).unwrap().with_epsilon(C64::new(1e-3, 0.0));
        for variant in [TransferVariant::Original, TransferVariant::Tilde, TransferVariant::TildeEpsilon] {
            let r = commutator_residual(&p, variant, C64::new(0.3, 0.1), C64::new(-0.2, 0.4), 3, 7).unwrap();
            assert!(r < 1e-10, "{variant:?} {r}");
            let r0 = commutator_residual(&p, variant, C64::new(0.3, 0.1), C64::new(0.3, 0.1), 1, 7).unwrap();
            assert!(r0 < 1e-14);
        }
    }

    #[test]
    fn block_sizes_from_ranks() {
        // one block of size 3 and one of size 1 (n = 4): ranks 2, 1, 0
        assert_eq!(block_sizes(4, &[2, 1, 0]), vec![3, 1]);
        assert_eq!(block_sizes(3, &[0]), vec![1, 1, 1]);
    }

    #[test]
    fn n1_has_no_jordan_blocks() {
        // Single-particle chains have length N, so N = 1 is diagonalizable.
        let p = ff(1);
        let rep = jordan_probe(&p, C64::new(0.31, 0.0), false, JordanProbeConfig::default()).unwrap();
        assert!(rep.is_diagonalizable(), "{:?}", rep.clusters);
        let one = rep.cluster_near(C64::new(1.0, 0.0)).unwrap();
        assert!((one.lambda - 1.0).norm() < 1e-8);
        assert_eq!(one.geometric, 1);
        let total: usize = rep.clusters.iter().map(|c| c.algebraic).sum();
        assert_eq!(total, 16);
    }

    #[test]
    fn n2_free_fermion_has_jordan_blocks() {
        let p = ff(2);
        let cfg = JordanProbeConfig { cluster_rel_tol: 1e-3, rank_rel_tol: 1e-8 };
        let rep = jordan_probe(&p, C64::new(0.31, 0.0), false, cfg).unwrap();
        assert!(rep.largest_block() >= 2);
        for c in &rep.clusters {
            assert_eq!(c.blocks.iter().sum::<usize>(), c.algebraic, "{c:?}");
        }
        let total: usize = rep.clusters.iter().map(|c| c.algebraic).sum();
        assert_eq!(total, 256);
        let one = rep.cluster_near(C64::new(1.0, 0.0)).unwrap();
        assert_eq!((one.algebraic, one.geometric), (1, 1));
    }

    #[test]
    fn deformation_lifts_jordan_blocks() {
        let p = ff(1).with_epsilon(C64::new(0.1, 0.0));
        let rep = jordan_probe(&p, C64::new(0.31, 0.0), true, JordanProbeConfig::default()).unwrap();
        assert!(rep.is_diagonalizable(), "{:?}", rep.clusters);
    }
}
