//! The IM as the ε → 0 limit of a Bethe vector with explicit roots.
//!
//! States are stored in a single magnetization sector: with d flipped spins out
//! of n sites the amplitudes are indexed by the colex rank of the bit pattern.
//! B(x) maps the d-flip sector to the (d+1)-flip sector.

use crate::ap::{bits_for_digits, ApComplex};
use crate::circuit::{InfluenceMatrix, Method};
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::state::check_capacity;
use crate::transfer::sigma_y_odd;
use num_complex::Complex64 as C64;
use rug::Float;

/// Relative agreement required between the last two extrapolants.
pub const EXTRAPOLATION_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct BetheRoots {
    pub roots: Vec<ApComplex>,
    pub epsilon: ApComplex,
}

impl BetheRoots {
    pub fn to_c64(&self) -> Vec<C64> {
        self.roots.iter().map(|r| r.to_c64()).collect()
    }
}

/// Decimal digits needed to absorb the (ε/sinh η)^{N²} cancellation.
pub fn digits_policy(n_half: usize, eps_abs: f64) -> u32 {
    let n = n_half as f64;
    30 + (n * n * (1.0 / eps_abs).log10().max(0.0)).ceil() as u32 + 10 * n_half as u32
}

fn binomial_table(n: usize) -> Vec<Vec<usize>> {
    let mut t = vec![vec![0usize; n + 2]; n + 2];
    for i in 0..=n + 1 {
        t[i][0] = 1;
        for j in 1..=i {
            t[i][j] = t[i - 1][j - 1] + if j < i { t[i - 1][j] } else { 0 };
        }
    }
    t
}

/// Bit patterns with `d` ones out of `n`, in increasing order (= colex order).
fn patterns(n: usize, d: usize) -> Vec<usize> {
    if d > n {
        return Vec::new();
    }
    if d == 0 {
        return vec![0];
    }
    let mut out = Vec::new();
    let mut x: usize = (1 << d) - 1;
    while x < (1 << n) {
        out.push(x);
        let c = x & x.wrapping_neg();
        let r = x + c;
        x = (((r ^ x) >> 2) / c) | r;
    }
    out
}

fn colex_rank(x: usize, binom: &[Vec<usize>]) -> usize {
    let mut rank = 0;
    let mut j = 0;
    let mut y = x;
    while y != 0 {
        let pos = y.trailing_zeros() as usize;
        j += 1;
        rank += binom[pos][j];
        y &= y - 1;
    }
    rank
}

/// Arbitrary-precision state with a fixed number of down spins.
#[derive(Debug, Clone)]
pub struct ApStateVector {
    pub n_sites: usize,
    pub downs: usize,
    pub amps: Vec<ApComplex>,
    pub digits: u32,
}

impl ApStateVector {
    pub fn all_up(n_sites: usize, digits: u32) -> Self {
        let prec = bits_for_digits(digits);
        ApStateVector { n_sites, downs: 0, amps: vec![ApComplex::one(prec)], digits }
    }

    pub fn from_sector(n_sites: usize, downs: usize, amps: &[C64], digits: u32) -> Result<Self> {
        let expected = patterns(n_sites, downs).len();
        if amps.len() != expected {
            return Err(Error::Dimension { expected, got: amps.len() });
        }
        let prec = bits_for_digits(digits);
        Ok(ApStateVector { n_sites, downs, amps: amps.iter().map(|z| ApComplex::from_c64(*z, prec)).collect(), digits })
    }

    pub fn prec(&self) -> u32 {
        bits_for_digits(self.digits)
    }

    /// Basis indices of the stored amplitudes, site 1 as the slowest bit.
    pub fn indices(&self) -> Vec<usize> {
        patterns(self.n_sites, self.downs)
    }

    pub fn to_dense(&self) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); 1 << self.n_sites];
        for (i, a) in self.indices().into_iter().zip(&self.amps) {
            v[i] = a.to_c64();
        }
        v
    }

    pub fn scale(&mut self, s: &ApComplex) {
        for a in self.amps.iter_mut() {
            *a = a.mul(s);
        }
    }
}

/// Inhomogeneities ξ_k of the deformed monodromy, k = 1..4N.
fn inhomogeneities(p: &ModelParams, eps: &ApComplex) -> Vec<ApComplex> {
    let prec = eps.prec();
    let u = ApComplex::from_c64(p.u, prec);
    let eta = ApComplex::from_c64(p.eta, prec);
    let eta_eps = eta.add(eps);
    let zero = ApComplex::zero(prec);
    let mut xi = Vec::with_capacity(p.legs());
    for _ in 0..p.n_half {
        xi.push(u.clone());
        xi.push(eta_eps.clone());
    }
    for _ in 0..p.n_half {
        xi.push(zero.clone());
        xi.push(u.add(&eta_eps));
    }
    xi
}

fn roots_at(p: &ModelParams, eps: C64, prec: u32) -> Result<BetheRoots> {
    if eps.norm() == 0.0 {
        return Err(Error::InvalidParams("epsilon must be nonzero".into()));
    }
    let n = p.n_half;
    let e = ApComplex::from_c64(eps, prec);
    let u = ApComplex::from_c64(p.u, prec);
    let modulus = (Float::with_val(prec, p.q_weight) * p.q_weight).root(n as u32);
    let one = ApComplex::one(prec);
    let mut fam = Vec::with_capacity(n);
    for k in 1..=n {
        let w = ApComplex::unit_pi_fraction(2 * k as i64 - 1, n as i64, prec).scale(&modulus);
        let den = one.sub(&w);
        if den.abs() < Float::with_val(prec, 1e-30) {
            return Err(Error::Degenerate(format!("root denominator vanishes at k={k}")));
        }
        fam.push(e.div(&den));
    }
    let mut roots: Vec<ApComplex> = fam.iter().map(|z| u.add(z)).collect();
    roots.extend(fam);
    Ok(BetheRoots { roots, epsilon: e })
}

/// x_k = u + ε/(1−w_k) for k ≤ N and ε/(1−w_{k−N}) after, w_k = q^{2/N}e^{iπ(2k−1)/N}.
pub fn bethe_roots_exact(p: &ModelParams) -> Result<BetheRoots> {
    p.validate()?;
    let digits = p.precision_digits.max(digits_policy(p.n_half, p.epsilon.norm()));
    roots_at(p, p.epsilon, bits_for_digits(digits))
}

fn small(z: &ApComplex) -> bool {
    let prec = z.prec();
    z.abs() < Float::with_val(prec, Float::i_exp(1, -(prec as i32) / 2))
}

/// (a, b) of R(w) = [[1,0,0,0],[0,a,b,0],[0,b,a,0],[0,0,0,1]].
fn r_weights(w: &ApComplex, eta: &ApComplex) -> Result<(ApComplex, ApComplex)> {
    let den = w.add(eta).sinh();
    if small(&den) {
        return Err(Error::Pole(format!("R-matrix pole at w = {}", w.to_c64())));
    }
    let inv = den.recip();
    Ok((w.sinh().mul(&inv), eta.sinh().mul(&inv)))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Chain {
    /// ⟨↑|·|↓⟩ of the monodromy acting to the right.
    B,
    /// ⟨↓|·|↑⟩ acting to the left, realised as the transposed chain.
    C,
}

fn apply_chain(p: &ModelParams, x: &ApComplex, eps: &ApComplex, state: &ApStateVector, chain: Chain) -> Result<ApStateVector> {
    let n = p.legs();
    if state.n_sites != n {
        return Err(Error::Dimension { expected: n, got: state.n_sites });
    }
    let prec = state.prec();
    let d = state.downs;
    if d >= n {
        return Ok(ApStateVector { n_sites: n, downs: d + 1, amps: Vec::new(), digits: state.digits });
    }
    let binom = binomial_table(n);
    let lower = patterns(n, d);
    let eta = ApComplex::from_c64(p.eta, prec);
    let xi = inhomogeneities(p, eps);
    let q2 = Float::with_val(prec, p.q_weight) * p.q_weight;
    let z = Float::with_val(prec, &q2 + 1u32);
    let rho_up = Float::with_val(prec, z.clone().recip());
    let rho_down = Float::with_val(prec, &q2 / &z);

    // Aux down: sites in the d-flip sector; aux up: sites in the (d+1)-flip sector.
    let mut psi_d = state.amps.clone();
    let mut psi_u = vec![ApComplex::zero(prec); binom[n][d + 1]];

    let half = n / 2;
    let order: Vec<usize> = match chain {
        Chain::B => (1..=n).rev().collect(),
        Chain::C => (1..=n).collect(),
    };
    for &k in &order {
        let (a, b) = r_weights(&x.sub(&xi[k - 1]), &eta)?;
        let bit = 1usize << (n - k);
        for (rx, &pat) in lower.iter().enumerate() {
            if pat & bit != 0 {
                continue;
            }
            let ry = colex_rank(pat | bit, &binom);
            let (pu, pd) = (&psi_u[ry], &psi_d[rx]);
            let nu = a.mul(pu).add(&b.mul(pd));
            let nd = b.mul(pu).add(&a.mul(pd));
            psi_u[ry] = nu;
            psi_d[rx] = nd;
        }
        // The bath weight sits between legs 2N and 2N+1.
        let boundary = match chain {
            Chain::B => k == half + 1,
            Chain::C => k == half,
        };
        if boundary {
            psi_u.iter_mut().for_each(|v| *v = v.scale(&rho_up));
            psi_d.iter_mut().for_each(|v| *v = v.scale(&rho_down));
        }
    }
    Ok(ApStateVector { n_sites: n, downs: d + 1, amps: psi_u, digits: state.digits })
}

/// B_ε(x) applied to a sector state; lowers the magnetization by one.
pub fn apply_b_operator(p: &ModelParams, x: &ApComplex, eps: &ApComplex, state: &ApStateVector) -> Result<ApStateVector> {
    apply_chain(p, x, eps, state, Chain::B)
}

/// Transpose of C_ε(x), i.e. the row vector r ↦ r·C_ε(x).
pub fn apply_c_operator(p: &ModelParams, x: &ApComplex, eps: &ApComplex, state: &ApStateVector) -> Result<ApStateVector> {
    apply_chain(p, x, eps, state, Chain::C)
}

/// (ε/sinh η)^{N²} ∏_k B(x_k)|⇑⟩ (or the dual product) at a single ε.
fn bethe_vector(p: &ModelParams, eps: C64, digits: u32, chain: Chain) -> Result<ApStateVector> {
    let prec = bits_for_digits(digits);
    let roots = roots_at(p, eps, prec)?;
    let mut st = ApStateVector::all_up(p.legs(), digits);
    for x in &roots.roots {
        st = apply_chain(p, x, &roots.epsilon, &st, chain)?;
    }
    let eta = ApComplex::from_c64(p.eta, prec);
    let pref = roots.epsilon.div(&eta.sinh()).powi((p.n_half * p.n_half) as u32);
    st.scale(&pref);
    Ok(st)
}

/// Ladder length that meets the agreement tolerance up to 4N = 16.
pub const DEFAULT_LADDER_LEN: usize = 5;

/// ε₀·2^{−j}, j = 0..len.
pub fn default_ladder(p: &ModelParams, len: usize) -> Vec<C64> {
    (0..len).map(|j| p.epsilon * 0.5f64.powi(j as i32)).collect()
}

fn ladder_ratio(ladder: &[C64]) -> Result<C64> {
    if ladder.len() < 2 {
        return Err(Error::InvalidParams("epsilon ladder needs at least two entries".into()));
    }
    let r = ladder[1] / ladder[0];
    for w in ladder.windows(2) {
        if (w[1] / w[0] - r).norm() > 1e-12 * r.norm() || w[0].norm() == 0.0 {
            return Err(Error::InvalidParams("epsilon ladder must be geometric and nonzero".into()));
        }
    }
    if r.norm() >= 1.0 {
        return Err(Error::InvalidParams("epsilon ladder must decrease".into()));
    }
    Ok(r)
}

#[derive(Debug, Clone)]
pub struct Extrapolation {
    pub limit: Vec<C64>,
    pub error_estimate: f64,
    pub digits: u32,
}

/// Bethe vectors along the ladder, Richardson-extrapolated to ε = 0 in the
/// dense 4N-site basis (before the normalization constant and σʸ map).
fn extrapolate(p: &ModelParams, ladder: &[C64], chain: Chain) -> Result<Extrapolation> {
    p.validate()?;
    check_capacity(p.legs())?;
    let r = ladder_ratio(ladder)?;
    let eps_min = ladder.iter().map(|e| e.norm()).fold(f64::INFINITY, f64::min);
    let digits = p.precision_digits.max(digits_policy(p.n_half, eps_min));
    let prec = bits_for_digits(digits);

    let vectors: Vec<Result<ApStateVector>> = std::thread::scope(|s| {
        let handles: Vec<_> = ladder.iter().map(|&e| s.spawn(move || bethe_vector(p, e, digits, chain))).collect();
        handles.into_iter().map(|h| h.join().expect("ladder worker panicked")).collect()
    });
    let mut row: Vec<Vec<ApComplex>> = Vec::with_capacity(ladder.len());
    for v in vectors {
        row.push(v?.amps);
    }
    let indices = patterns(p.legs(), 2 * p.n_half);

    // Tableau diagonal: diag[k] = R_{k,k}.
    let r_ap = ApComplex::from_c64(r, prec);
    let one = ApComplex::one(prec);
    let mut diag = vec![row[0].clone()];
    let mut prev = row.clone();
    for k in 1..ladder.len() {
        let rk = r_ap.powi(k as u32);
        let inv = one.sub(&rk).recip();
        let next: Vec<Vec<ApComplex>> = (k..ladder.len())
            .map(|j| {
                prev[j - k + 1]
                    .iter()
                    .zip(&prev[j - k])
                    .map(|(hi, lo)| hi.sub(&rk.mul(lo)).mul(&inv))
                    .collect()
            })
            .collect();
        diag.push(next[0].clone());
        prev = next;
    }
    let to_dense = |amps: &[ApComplex]| {
        let mut v = vec![C64::new(0.0, 0.0); 1 << p.legs()];
        for (i, a) in indices.iter().zip(amps) {
            v[*i] = a.to_c64();
        }
        v
    };
    let last = to_dense(&diag[diag.len() - 1]);
    let before = to_dense(&diag[diag.len() - 2]);
    let scale = crate::state::max_abs(&last);
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::Precision("Bethe vector vanished or overflowed".into()));
    }
    let err = crate::state::max_abs_diff(&last, &before) / scale;
    Ok(Extrapolation { limit: last, error_estimate: err, digits })
}

fn b_ratio(p: &ModelParams) -> C64 {
    (p.u + p.eta).sinh() * (p.u - p.eta).sinh() / p.u.sinh().powi(2)
}

fn normalization(p: &ModelParams, b_power: i32) -> C64 {
    let n = p.n_half as i32;
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    b_ratio(p).powi(-b_power) * sign * p.q_weight.powi(2 * n)
}

fn finish(p: &ModelParams, ex: Extrapolation, b_power: i32) -> Result<InfluenceMatrix> {
    if ex.error_estimate > EXTRAPOLATION_TOL {
        return Err(Error::Precision(format!(
            "last two extrapolants differ by {:.3e} > {:.0e}",
            ex.error_estimate, EXTRAPOLATION_TOL
        )));
    }
    let k = normalization(p, b_power);
    let scaled: Vec<C64> = ex.limit.iter().map(|z| z * k).collect();
    let amps = sigma_y_odd(&scaled, p.legs());
    let mut im = InfluenceMatrix::new(amps, p.n_half, Method::Bethe, Some(p.clone()))?;
    im.error_estimate = Some(ex.error_estimate);
    im.digits = Some(ex.digits);
    Ok(im)
}

/// The IM from the Bethe vector, extrapolated to ε = 0 along `ladder`.
pub fn im_bethe_limit(p: &ModelParams, ladder: &[C64]) -> Result<InfluenceMatrix> {
    let n = p.n_half as i32;
    let ex = extrapolate(p, ladder, Chain::B)?;
    let mut im = finish(p, ex, n * (n + 1) / 2)?;
    im.epsilon_ladder = Some(ladder.to_vec());
    Ok(im)
}

/// The dual IM ⟨I| from the left Bethe vector, in the same leg ordering.
pub fn dual_im_bethe(p: &ModelParams, ladder: &[C64]) -> Result<InfluenceMatrix> {
    let n = p.n_half as i32;
    let ex = extrapolate(p, ladder, Chain::C)?;
    let mut im = finish(p, ex, n * (n - 1) / 2)?;
    im.epsilon_ladder = Some(ladder.to_vec());
    Ok(im)
}

/// |d(x_i)/RHS_i − 1| for every root, with d(x) = ∏_ξ sinh(x−ξ)/sinh(x−ξ+η) and
/// RHS_i = q^{−2} ∏_{j≠i} sinh(x_i−x_j−η)/sinh(x_i−x_j+η).
pub fn bae_residual(p: &ModelParams, roots: &BetheRoots) -> Result<Vec<f64>> {
    let prec = roots.epsilon.prec();
    let eta = ApComplex::from_c64(p.eta, prec);
    let xi = inhomogeneities(p, &roots.epsilon);
    let q2 = ApComplex::from_f64(p.q_weight * p.q_weight, prec);
    let mut out = Vec::with_capacity(roots.roots.len());
    for (i, x) in roots.roots.iter().enumerate() {
        let mut lhs = ApComplex::one(prec);
        for z in &xi {
            let w = x.sub(z);
            let den = w.add(&eta).sinh();
            if small(&den) {
                return Err(Error::Pole(format!("root {i} hits an inhomogeneity pole")));
            }
            lhs = lhs.mul(&w.sinh()).div(&den);
        }
        let mut rhs = q2.recip();
        for (j, y) in roots.roots.iter().enumerate() {
            if i == j {
                continue;
            }
            let w = x.sub(y);
            let den = w.add(&eta).sinh();
            if small(&den) {
                return Err(Error::Pole(format!("roots {i} and {j} differ by -eta")));
            }
            rhs = rhs.mul(&w.sub(&eta).sinh()).div(&den);
        }
        if small(&rhs) {
            return Err(Error::Pole(format!("roots {i} differ by +eta from another root")));
        }
        let ratio = lhs.div(&rhs).sub(&ApComplex::one(prec));
        out.push(ratio.abs().to_f64());
    }
    Ok(out)
}
