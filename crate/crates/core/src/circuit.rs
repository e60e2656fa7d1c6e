//! Influence matrices from the brick-wall circuit, their physicality checks and
//! the one-point correlator.
//!
//! Amplitude ordering: the 4N legs are (s̄_{2N}, …, s̄_1, s_1, …, s_{2N}) from the
//! slowest to the fastest index bit. Legs (2m−1, 2m) are the input and output of
//! the boundary spin at the m-th gate acting on it.

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::state::{check_capacity, max_abs_diff, trace_aux, Factor, StateVector};
use crate::transfer::rho_aux;
use crate::xxz::{r_check, TwoSiteOperator};
use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64 as C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Circuit,
    Bethe,
    Fermion,
    /// Read from a file; no construction metadata.
    External,
}

impl Method {
    pub fn tag(&self) -> &'static str {
        match self {
            Method::Circuit => "circuit",
            Method::Bethe => "bethe",
            Method::Fermion => "fermion",
            Method::External => "external",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceMatrix {
    pub amps: Vec<C64>,
    pub n_half: usize,
    pub method: Method,
    pub params: Option<ModelParams>,
    /// Estimated error of an extrapolated construction.
    pub error_estimate: Option<f64>,
    /// Working decimal digits and ε ladder of an arbitrary-precision construction.
    pub digits: Option<u32>,
    pub epsilon_ladder: Option<Vec<C64>>,
}

impl InfluenceMatrix {
    pub fn new(amps: Vec<C64>, n_half: usize, method: Method, params: Option<ModelParams>) -> Result<Self> {
        let expected = 1usize << (4 * n_half);
        if amps.len() != expected {
            return Err(Error::Dimension { expected, got: amps.len() });
        }
        Ok(InfluenceMatrix { amps, n_half, method, params, error_estimate: None, digits: None, epsilon_ladder: None })
    }

    pub fn legs(&self) -> usize {
        4 * self.n_half
    }

    pub fn state(&self) -> StateVector {
        StateVector { amps: self.amps.clone(), n_sites: self.legs() }
    }

    /// Amplitude I(s_1..s_{2N}; s̄_1..s̄_{2N}), spins as 0 = up, 1 = down.
    pub fn get(&self, s: &[usize], sbar: &[usize]) -> C64 {
        self.amps[leg_index(s, sbar)]
    }

    /// ∞-norm distance after dividing each by its largest amplitude in modulus.
    pub fn normalized_distance(&self, other: &Self) -> Result<f64> {
        if self.amps.len() != other.amps.len() {
            return Err(Error::Dimension { expected: self.amps.len(), got: other.amps.len() });
        }
        Ok(max_abs_diff(&self.amps, &other.amps) / crate::state::max_abs(&self.amps).max(f64::MIN_POSITIVE))
    }
}

/// Index of (s_1..s_n; s̄_1..s̄_n) in the leg ordering.
pub fn leg_index(s: &[usize], sbar: &[usize]) -> usize {
    let mut idx = 0;
    for &b in sbar.iter().rev() {
        idx = (idx << 1) | b;
    }
    for &b in s {
        idx = (idx << 1) | b;
    }
    idx
}

/// Vector site (1-based) of leg j on the forward branch, out of 4N sites.
pub fn forward_site(n_half: usize, j: usize) -> usize {
    2 * n_half + j
}

/// Vector site (1-based) of leg j on the backward branch.
pub fn backward_site(n_half: usize, j: usize) -> usize {
    2 * n_half + 1 - j
}

/// The IM of an empty bath: every boundary gate is the identity channel.
pub fn identity_channel(n_half: usize) -> Vec<C64> {
    let legs = 4 * n_half;
    let mut v = vec![C64::new(0.0, 0.0); 1 << legs];
    for (i, a) in v.iter_mut().enumerate() {
        let bit = |site: usize| (i >> (legs - site)) & 1;
        let ok = (1..=n_half).all(|k| {
            let (a1, a2) = (forward_site(n_half, 2 * k - 1), forward_site(n_half, 2 * k));
            let (b1, b2) = (backward_site(n_half, 2 * k - 1), backward_site(n_half, 2 * k));
            bit(a1) == bit(a2) && bit(b1) == bit(b2)
        });
        if ok {
            *a = C64::new(1.0, 0.0);
        }
    }
    v
}

/// Factors of one spatial column of the rotated circuit in acting order: the
/// backward gates U⁻¹ (legs 2N..1), the bath site's ρ_b, then the forward gates U.
fn column_factors(p: &ModelParams) -> Result<Vec<Factor>> {
    let n = p.n_half;
    let u = r_check(p, p.u)?;
    let uinv = TwoSiteOperator(
        u.0.try_inverse().ok_or_else(|| Error::Pole("gate not invertible".into()))?,
    );
    let swap = TwoSiteOperator::swap();
    // The bath spin is the auxiliary space; each leg pair meets it once per layer.
    let back_in = uinv.mul(&swap).transpose_second().0;
    let back_out = swap.0;
    let fwd_in = swap.transpose_second().0;
    let fwd_out = swap.mul(&u).0;
    let mut fs = Vec::with_capacity(4 * n + 1);
    for j in 1..=n {
        fs.push(Factor::Site(2 * j - 1, back_in));
        fs.push(Factor::Site(2 * j, back_out));
    }
    fs.push(Factor::Aux(rho_aux(p.q_weight)));
    for j in 1..=n {
        fs.push(Factor::Site(2 * n + 2 * j - 1, fwd_in));
        fs.push(Factor::Site(2 * n + 2 * j, fwd_out));
    }
    Ok(fs)
}

/// One spatial column 𝒯 of the dual circuit: adds one bath site to the IM.
pub fn apply_temporal_tm(p: &ModelParams, x: &StateVector) -> Result<StateVector> {
    let legs = p.legs();
    x.require_sites(legs)?;
    let fs = column_factors(p)?;
    Ok(StateVector { amps: trace_aux(&fs, &x.amps, legs), n_sites: legs })
}

/// IM with an explicit bath length; causality makes every length ≥ 2N equivalent.
pub fn build_im_circuit_with_bath(p: &ModelParams, bath: usize) -> Result<InfluenceMatrix> {
    p.validate()?;
    let legs = p.legs();
    check_capacity(legs)?;
    let fs = column_factors(p)?;
    let mut v = identity_channel(p.n_half);
    for _ in 0..bath {
        v = trace_aux(&fs, &v, legs);
    }
    InfluenceMatrix::new(v, p.n_half, Method::Circuit, Some(p.clone()))
}

/// The IM of the 2N-site light cone.
pub fn build_im_circuit(p: &ModelParams) -> Result<InfluenceMatrix> {
    build_im_circuit_with_bath(p, 2 * p.n_half)
}

/// Σ over s_n = s̄_n of the outermost leg pair (sites 1 and last).
fn trace_outer_pair(v: &[C64]) -> Vec<C64> {
    let sites = v.len().trailing_zeros() as usize;
    let inner = sites - 2;
    let top = 1usize << (sites - 1);
    (0..1usize << inner).map(|i| v[i << 1] + v[top | (i << 1) | 1]).collect()
}

/// Split R(a, rest, b) over the outermost pair into δ_ab·X plus the deviation.
fn split_delta(r: &[C64]) -> (Vec<C64>, f64) {
    let sites = r.len().trailing_zeros() as usize;
    let top = 1usize << (sites - 1);
    let mut x = Vec::with_capacity(r.len() / 4);
    let mut dev = 0.0f64;
    for i in 0..r.len() / 4 {
        let (uu, ud, du, dd) = (r[i << 1], r[(i << 1) | 1], r[top | (i << 1)], r[top | (i << 1) | 1]);
        let mean = (uu + dd) * 0.5;
        dev = dev.max(ud.norm()).max(du.norm()).max((uu - mean).norm());
        x.push(mean);
    }
    (x, dev)
}

/// The m-step IM obtained from a longer one by tracing later gates; m ≤ N.
pub fn reduced_im(im: &InfluenceMatrix, m: usize) -> Result<Vec<C64>> {
    if m > im.n_half {
        return Err(Error::Range(format!("cannot reduce N={} to {m}", im.n_half)));
    }
    let mut v = im.amps.clone();
    for _ in m..im.n_half {
        let r = trace_outer_pair(&v);
        v = split_delta(&r).0;
    }
    Ok(v)
}

/// Reduction residual at leg n: tracing s_{2m} = s̄_{2m} of the m-step IM must leave
/// δ_{s_{2m−1} s̄_{2m−1}} times an (m−1)-step IM, m = ⌈n/2⌉. Odd legs belong to the
/// same gate as the following even leg and are checked through it.
pub fn check_reduction(im: &InfluenceMatrix, n: usize) -> Result<f64> {
    if n == 0 || n > 2 * im.n_half {
        return Err(Error::Range(format!("leg {n} outside 1..={}", 2 * im.n_half)));
    }
    let m = n.div_ceil(2);
    let v = reduced_im(im, m)?;
    let (_, dev) = split_delta(&trace_outer_pair(&v));
    Ok(dev)
}

/// The composed reduction: ½ Σ over both legs of every gate, from the last gate down.
pub fn full_reduction(im: &InfluenceMatrix) -> C64 {
    let mut v = im.amps.clone();
    while v.len() > 1 {
        let r = trace_outer_pair(&v);
        let half = trace_outer_pair(&r);
        v = half.into_iter().map(|z| z * 0.5).collect();
    }
    v[0]
}

/// Dual IM L(s; s̄) = δ_{s_1 s̄_1} ρ_b[s_1] Σ_x I(s_2..s_{2N}, x; s̄_2..s̄_{2N}, x): the left
/// eigenvector of the temporal transfer matrix with ⟨L|I⟩ = 1.
pub fn dual_im_circuit(im: &InfluenceMatrix, q_weight: f64) -> Result<InfluenceMatrix> {
    let n2 = 2 * im.n_half;
    if n2 == 0 {
        return Err(Error::Range("dual IM needs at least one gate".into()));
    }
    let rho = crate::params::thermal_weights(q_weight);
    let mut out = vec![C64::new(0.0, 0.0); im.amps.len()];
    let hi = n2 - 1;
    for s in 0..1usize << n2 {
        for sb in 0..1usize << n2 {
            if (s >> hi) != (sb >> hi) {
                continue;
            }
            let (rest, rest_b) = (s & ((1 << hi) - 1), sb & ((1 << hi) - 1));
            let sum: C64 = (0..2).map(|x| im.amps[pack((rest << 1) | x, (rest_b << 1) | x, n2)]).sum();
            out[pack(s, sb, n2)] = sum * rho[s >> hi];
        }
    }
    InfluenceMatrix::new(out, im.n_half, im.method, im.params.clone())
}

/// Bilinear pairing Σ L(s; s̄) I(s; s̄).
pub fn pairing(l: &InfluenceMatrix, r: &InfluenceMatrix) -> C64 {
    l.amps.iter().zip(&r.amps).map(|(a, b)| a * b).sum()
}

/// ρ^I[s, s̄] = 2^{−N} I(s; s̄), rows and columns ordered with leg 1 slowest.
pub fn choi_matrix(im: &InfluenceMatrix) -> DMatrix<C64> {
    let half = 2 * im.n_half;
    let dim = 1usize << half;
    let norm = 0.5f64.powi(im.n_half as i32);
    let rev = |x: usize| x.reverse_bits() >> (usize::BITS as usize - half);
    DMatrix::from_fn(dim, dim, |s, sb| {
        let idx = if half == 0 { 0 } else { (rev(sb) << half) | s };
        im.amps[idx] * norm
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChoiReport {
    pub hermiticity: f64,
    pub min_eigenvalue: f64,
    pub trace: C64,
}

pub fn choi_report(im: &InfluenceMatrix) -> ChoiReport {
    let rho = choi_matrix(im);
    let herm = crate::linalg::max_abs(&(&rho - rho.adjoint()));
    let sym = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
    let ev = sym.symmetric_eigenvalues();
    let min = ev.iter().cloned().fold(f64::INFINITY, f64::min);
    ChoiReport { hermiticity: herm, min_eigenvalue: min, trace: rho.trace() }
}

/// One-point function: im_r on legs 1..2N, im_l on legs 2..2N+1, ρ on leg 1 and
/// the observable on leg 2N+1.
pub fn correlator_one_point(
    im_l: &InfluenceMatrix,
    im_r: &InfluenceMatrix,
    rho1: &Matrix2<C64>,
    obs: &Matrix2<C64>,
) -> Result<C64> {
    if im_l.n_half != im_r.n_half {
        return Err(Error::Dimension { expected: im_r.amps.len(), got: im_l.amps.len() });
    }
    let n2 = 2 * im_l.n_half;
    let mask = (1usize << n2) - 1;
    let mut total = C64::new(0.0, 0.0);
    // s and s̄ over legs 1..2N+1, leg 1 as the most significant bit.
    for s in 0..1usize << (n2 + 1) {
        for sb in 0..1usize << (n2 + 1) {
            let first = (s >> n2, sb >> n2);
            let last = (s & 1, sb & 1);
            let w = rho1[(first.0, first.1)] * obs[(last.1, last.0)];
            if w.norm() == 0.0 {
                continue;
            }
            let r = im_r.amps[pack(s >> 1, sb >> 1, n2)];
            let l = im_l.amps[pack(s & mask, sb & mask, n2)];
            total += w * r * l;
        }
    }
    Ok(total)
}

/// Leg ordering index from forward and backward bit strings (leg 1 most significant).
fn pack(s: usize, sb: usize, n2: usize) -> usize {
    let rev = if n2 == 0 { 0 } else { sb.reverse_bits() >> (usize::BITS as usize - n2) };
    (rev << n2) | s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn generic(n: usize) -> ModelParams {
        ModelParams::new(C64::new(0.15, 0.8), C64::new(0.45, 0.0), 1.6, n).unwrap()
    }

    #[test]
    fn leg_index_matches_site_helpers() {
        let n = 1;
        let s = [1, 0];
        let sb = [0, 1];
        let idx = leg_index(&s, &sb);
        let bit = |site: usize| (idx >> (4 - site)) & 1;
        assert_eq!(bit(forward_site(n, 1)), 1);
        assert_eq!(bit(forward_site(n, 2)), 0);
        assert_eq!(bit(backward_site(n, 1)), 0);
        assert_eq!(bit(backward_site(n, 2)), 1);
    }

    #[test]
    fn trivial_bath_is_identity_channel() {
        let p = generic(2);
        let im = build_im_circuit_with_bath(&p, 0).unwrap();
        assert!((full_reduction(&im) - 1.0).norm() < 1e-15);
        for n in 1..=4 {
            assert!(check_reduction(&im, n).unwrap() < 1e-15);
        }
    }

    #[test]
    fn fixed_point_and_light_cone() {
        let p = generic(2);
        let im = build_im_circuit(&p).unwrap();
        let next = apply_temporal_tm(&p, &im.state()).unwrap();
        assert!(max_abs_diff(&next.amps, &im.amps) < 1e-12);
        let longer = build_im_circuit_with_bath(&p, 6).unwrap();
        assert!(max_abs_diff(&longer.amps, &im.amps) < 1e-12);
        assert!((full_reduction(&im) - 1.0).norm() < 1e-12);
    }

    #[test]
    fn infinite_temperature_n1_reduces_to_one() {
        let p = ModelParams::new(C64::new(0.0, 0.9), C64::new(0.7, 0.0), 1.0, 1).unwrap();
        let im = build_im_circuit(&p).unwrap();
        assert!((full_reduction(&im) - 1.0).norm() < 1e-13);
    }

    #[test]
    fn random_vector_fails_reduction() {
        let p = generic(1);
        let mut im = build_im_circuit(&p).unwrap();
        for (i, a) in im.amps.iter_mut().enumerate() {
            *a = C64::new((i as f64 * 0.77).sin(), (i as f64 * 1.3).cos());
        }
        assert!(check_reduction(&im, 2).unwrap() > 1e-2);
    }

    #[test]
    fn choi_is_a_state() {
        let p = ModelParams::free_fermion(0.5, 2.0, 2).unwrap();
        let im = build_im_circuit(&p).unwrap();
        let rep = choi_report(&im);
        assert!(rep.hermiticity < 1e-12);
        assert!(rep.min_eigenvalue > -1e-10);
        assert!((rep.trace - 1.0).norm() < 1e-10);
    }

    #[test]
    fn dual_pairs_to_one() {
        let p = generic(2);
        let im = build_im_circuit(&p).unwrap();
        let dual = dual_im_circuit(&im, p.q_weight).unwrap();
        assert!((pairing(&dual, &im) - 1.0).norm() < 1e-12);
    }

    #[test]
    fn correlator_identity_is_one() {
        let p = generic(2);
        let im = build_im_circuit(&p).unwrap();
        let rho = Matrix2::new(C64::new(0.7, 0.0), C64::new(0.1, 0.2), C64::new(0.1, -0.2), C64::new(0.3, 0.0));
        let c = correlator_one_point(&im, &im, &rho, &Matrix2::identity()).unwrap();
        assert!((c - 1.0).norm() < 1e-12, "{c}");
    }

    #[test]
    fn infinite_temperature_sz_vanishes() {
        let p = ModelParams::free_fermion(0.4, 1.0, 2).unwrap();
        let im = build_im_circuit(&p).unwrap();
        let rho = Matrix2::identity() * C64::new(0.5, 0.0);
        let c = correlator_one_point(&im, &im, &rho, &crate::xxz::sigma_z()).unwrap();
        assert!(c.norm() < 1e-12);
    }
}
