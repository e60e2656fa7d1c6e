//! Jordan-block counting for sums of four nilpotent shift operators H_α, one per
//! occupation sector, in exact big-integer arithmetic, and its saddle-point
//! approximation.
//!
//! Mult^D is the number of Jordan blocks of size D of Σ_α H_α restricted to
//! occupations (n₁..n₄) of N modes each.

use crate::error::{Error, Result};
use crate::exact::{rank_rect, PRIME};
use crate::transfer::block_sizes;
use num_bigint::{BigInt, BigUint};
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaussianBinomial {
    pub m: usize,
    pub n: usize,
    /// V^{[r]} for r = 0..=n(M−n).
    pub coefficients: Vec<BigUint>,
}

impl GaussianBinomial {
    pub fn coefficient(&self, r: i64) -> BigUint {
        usize::try_from(r).ok().and_then(|r| self.coefficients.get(r).cloned()).unwrap_or_default()
    }
}

/// [M n]_q by [M n] = [M−1 n] + q^{M−n}[M−1 n−1].
pub fn gauss_binomial(m: usize, n: usize) -> Result<GaussianBinomial> {
    if n > m {
        return Err(Error::Range(format!("need n ≤ M, got M = {m}, n = {n}")));
    }
    // row[k] holds [j k]_q for the current j.
    let mut row: Vec<Vec<BigUint>> = vec![vec![BigUint::one()]];
    for j in 1..=m {
        let mut next = Vec::with_capacity(j + 1);
        for k in 0..=j.min(n) {
            let deg = k * (j - k);
            let mut c = vec![BigUint::zero(); deg + 1];
            if k < j {
                for (r, x) in row[k].iter().enumerate() {
                    c[r] += x;
                }
            }
            if k > 0 {
                for (r, x) in row[k - 1].iter().enumerate() {
                    c[r + j - k] += x;
                }
            }
            next.push(c);
        }
        row = next;
    }
    Ok(GaussianBinomial { m, n, coefficients: row.swap_remove(n) })
}

/// 𝒩ⁿ_d: blocks of size d of one shift operator on the n-particle sector.
pub fn block_count_sector(n_modes: usize, n: usize, d: usize) -> Result<BigUint> {
    if d == 0 {
        return Err(Error::Range("block size must be positive".into()));
    }
    let g = gauss_binomial(n_modes, n)?;
    Ok(block_count_from(&g, d))
}

fn block_count_from(g: &GaussianBinomial, d: usize) -> BigUint {
    let top = (g.n * (g.m - g.n)) as i64;
    let d = d as i64;
    if (top - d).rem_euclid(2) == 0 {
        return BigUint::zero();
    }
    // r = top/2 − (d−1)/2, an integer because top − d is odd.
    let r = (top - d + 1) / 2;
    let hi = g.coefficient(r);
    let lo = g.coefficient(r - 1);
    if hi >= lo {
        hi - lo
    } else {
        BigUint::zero()
    }
}

/// Nonzero (d, 𝒩^d) pairs of one sector.
pub fn sector_blocks(n_modes: usize, n: usize) -> Result<Vec<(usize, BigUint)>> {
    let g = gauss_binomial(n_modes, n)?;
    let top = n * (n_modes - n);
    Ok((1..=top + 1).map(|d| (d, block_count_from(&g, d))).filter(|(_, c)| !c.is_zero()).collect())
}

/// Decomposition of an SU(2) tensor product: dimension → multiplicity.
fn cg_product(a: &BTreeMap<usize, BigUint>, d: usize, weight: &BigUint) -> BTreeMap<usize, BigUint> {
    let mut out = BTreeMap::new();
    for (&da, ca) in a {
        let c = ca * weight;
        let lo = da.abs_diff(d) + 1;
        for dd in (lo..da + d).step_by(2) {
            *out.entry(dd).or_insert_with(BigUint::zero) += &c;
        }
    }
    out
}

/// C^D_{d⃗} for all D by iterated Clebsch-Gordan dimension convolution.
pub fn su2_decomposition(ds: &[usize]) -> Result<BTreeMap<usize, BigUint>> {
    if ds.iter().any(|&d| d == 0) {
        return Err(Error::Range("representation dimensions must be positive".into()));
    }
    let mut acc = BTreeMap::from([(1usize, BigUint::one())]);
    for &d in ds {
        acc = cg_product(&acc, d, &BigUint::one());
    }
    Ok(acc)
}

pub fn su2_multiplicity(big_d: usize, ds: &[usize; 4]) -> Result<BigUint> {
    if big_d == 0 {
        return Err(Error::Range("D must be positive".into()));
    }
    Ok(su2_decomposition(ds)?.remove(&big_d).unwrap_or_default())
}

fn check_occupations(n_modes: usize, occ: &[usize; 4]) -> Result<()> {
    if occ.iter().any(|&n| n > n_modes) {
        return Err(Error::Range(format!("occupations {occ:?} exceed N = {n_modes}")));
    }
    Ok(())
}

/// Mult^D for every D, as Σ_{d⃗} C^D_{d⃗} ∏_α 𝒩^{d_α}_{n_α}; the sum over d⃗ is
/// folded into successive weighted Clebsch-Gordan products.
pub fn multiplicity_table(n_modes: usize, occ: &[usize; 4]) -> Result<BTreeMap<usize, BigUint>> {
    check_occupations(n_modes, occ)?;
    let mut acc = BTreeMap::from([(1usize, BigUint::one())]);
    for &n in occ {
        let mut next: BTreeMap<usize, BigUint> = BTreeMap::new();
        for (d, w) in sector_blocks(n_modes, n)? {
            for (k, v) in cg_product(&acc, d, &w) {
                *next.entry(k).or_insert_with(BigUint::zero) += v;
            }
        }
        acc = next;
    }
    acc.retain(|_, v| !v.is_zero());
    Ok(acc)
}

pub fn total_multiplicity(n_modes: usize, occ: &[usize; 4], big_d: usize) -> Result<BigUint> {
    if big_d == 0 {
        return Err(Error::Range("D must be positive".into()));
    }
    Ok(multiplicity_table(n_modes, occ)?.remove(&big_d).unwrap_or_default())
}

/// Coefficients of ∏_α [N n_α]_q.
pub fn qbinomial_product(n_modes: usize, occ: &[usize; 4]) -> Result<Vec<BigUint>> {
    check_occupations(n_modes, occ)?;
    let mut acc = vec![BigUint::one()];
    for &n in occ {
        let g = gauss_binomial(n_modes, n)?;
        let mut next = vec![BigUint::zero(); acc.len() + g.coefficients.len() - 1];
        for (i, a) in acc.iter().enumerate() {
            for (j, b) in g.coefficients.iter().enumerate() {
                next[i + j] += a * b;
            }
        }
        acc = next;
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// Σ_α n_α(N − n_α).
pub fn total_degree(n_modes: usize, occ: &[usize; 4]) -> usize {
    occ.iter().map(|&n| n * (n_modes - n)).sum()
}

/// V^{±,D}: coefficient of q^{(S + D ∓ 1)/2} in ∏_α [N n_α]_q, zero when the
/// exponent is not an integer or out of range.
pub fn v_integral(n_modes: usize, occ: &[usize; 4], big_d: usize, sign: Sign) -> Result<BigUint> {
    let poly = qbinomial_product(n_modes, occ)?;
    Ok(v_from_poly(&poly, total_degree(n_modes, occ), big_d, sign))
}

fn v_from_poly(poly: &[BigUint], s: usize, big_d: usize, sign: Sign) -> BigUint {
    let e = match sign {
        Sign::Plus => (s + big_d) as i64 - 1,
        Sign::Minus => (s + big_d) as i64 + 1,
    };
    if e % 2 != 0 {
        return BigUint::zero();
    }
    usize::try_from(e / 2).ok().and_then(|k| poly.get(k).cloned()).unwrap_or_default()
}

/// Mult^D = V⁺ − V⁻ for every D ≥ 1 with a nonzero value.
pub fn multiplicity_table_by_coefficients(n_modes: usize, occ: &[usize; 4]) -> Result<BTreeMap<usize, BigUint>> {
    let poly = qbinomial_product(n_modes, occ)?;
    let s = total_degree(n_modes, occ);
    let mut out = BTreeMap::new();
    for d in 1..=s + 1 {
        let p = BigInt::from(v_from_poly(&poly, s, d, Sign::Plus));
        let m = BigInt::from(v_from_poly(&poly, s, d, Sign::Minus));
        let diff = p - m;
        if diff.sign() == num_bigint::Sign::Minus {
            return Err(Error::Range(format!("negative multiplicity at D = {d}")));
        }
        if !diff.is_zero() {
            out.insert(d, diff.to_biguint().expect("non-negative"));
        }
    }
    Ok(out)
}

/// Σ_D D·Mult^D.
pub fn dimension_sum(table: &BTreeMap<usize, BigUint>) -> BigUint {
    table.iter().map(|(&d, m)| m * BigUint::from(d)).sum()
}

pub fn binomial_product(n_modes: usize, occ: &[usize; 4]) -> BigUint {
    occ.iter().map(|&n| binomial(BigUint::from(n_modes), BigUint::from(n))).product()
}

// ---------------------------------------------------------------------------
// Brute-force oracle

/// Occupation patterns of n particles in N modes, bit i = mode i.
fn subsets(n_modes: usize, n: usize) -> Vec<u32> {
    (0u32..1 << n_modes).filter(|x| x.count_ones() as usize == n).collect()
}

/// Σ of occupied mode indices: H_α raises it by exactly one.
fn grade(x: u32) -> usize {
    (0..32).filter(|i| x >> i & 1 == 1).sum()
}

/// Jordan block sizes of Σ_α H_α on the occupation sector, by exact ranks of
/// its powers over F_p. The operator raises the total grade by one, so powers
/// are products of rectangular grade-to-grade blocks.
pub fn brute_force_blocks(n_modes: usize, occ: &[usize; 4]) -> Result<Vec<usize>> {
    check_occupations(n_modes, occ)?;
    if n_modes > 8 {
        return Err(Error::Range("brute-force oracle is limited to N ≤ 8".into()));
    }
    let sets: Vec<Vec<u32>> = occ.iter().map(|&n| subsets(n_modes, n)).collect();
    let mut states: Vec<[u32; 4]> = Vec::new();
    for &a in &sets[0] {
        for &b in &sets[1] {
            for &c in &sets[2] {
                for &d in &sets[3] {
                    states.push([a, b, c, d]);
                }
            }
        }
    }
    let dim = states.len();
    let g = |s: &[u32; 4]| s.iter().map(|&x| grade(x)).sum::<usize>();
    let max_grade = states.iter().map(g).max().unwrap_or(0);
    let mut by_grade: Vec<Vec<usize>> = vec![Vec::new(); max_grade + 1];
    let mut pos = vec![0usize; dim];
    for (i, s) in states.iter().enumerate() {
        let gr = g(s);
        pos[i] = by_grade[gr].len();
        by_grade[gr].push(i);
    }
    let index: std::collections::HashMap<[u32; 4], usize> = states.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    // step[r]: matrix from grade r to r+1, rows = grade r+1 states.
    let step = |r: usize| -> Vec<u64> {
        let (src, dst) = (&by_grade[r], &by_grade[r + 1]);
        let mut m = vec![0u64; dst.len() * src.len()];
        for (c, &i) in src.iter().enumerate() {
            let s = states[i];
            for alpha in 0..4 {
                for k in 0..n_modes.saturating_sub(1) {
                    if s[alpha] >> k & 1 == 1 && s[alpha] >> (k + 1) & 1 == 0 {
                        let mut t = s;
                        t[alpha] ^= (1 << k) | (1 << (k + 1));
                        let row = pos[index[&t]];
                        m[row * src.len() + c] = (m[row * src.len() + c] + 1) % PRIME;
                    }
                }
            }
        }
        m
    };
    let steps: Vec<Vec<u64>> = (0..max_grade).map(step).collect();
    // ranks[k−1] = rank(H^k) = Σ_r rank(H_{r+k−1}⋯H_r).
    let mut ranks = vec![0usize; max_grade + 1];
    for r in 0..max_grade {
        let mut prod: Vec<u64> = steps[r].clone();
        let cols = by_grade[r].len();
        for k in 1..=max_grade - r {
            let rows = by_grade[r + k].len();
            ranks[k - 1] += rank_rect(prod.clone(), rows, cols);
            if r + k < max_grade {
                let next_rows = by_grade[r + k + 1].len();
                let s = &steps[r + k];
                let mut np = vec![0u64; next_rows * cols];
                for i in 0..next_rows {
                    for j in 0..rows {
                        let a = s[i * rows + j];
                        if a == 0 {
                            continue;
                        }
                        for c in 0..cols {
                            np[i * cols + c] = (np[i * cols + c] + a * prod[j * cols + c]) % PRIME;
                        }
                    }
                }
                prod = np;
            }
        }
    }
    let mut blocks = block_sizes(dim, &ranks);
    blocks.sort_unstable();
    Ok(blocks)
}

/// Expands a table into the sorted multiset of block sizes.
pub fn table_to_blocks(table: &BTreeMap<usize, BigUint>) -> Vec<usize> {
    let mut out = Vec::new();
    for (&d, m) in table {
        let m = m.to_usize().expect("small multiplicity");
        out.extend(std::iter::repeat_n(d, m));
    }
    out
}

// ---------------------------------------------------------------------------
// Saddle point

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SaddleOrder {
    Leading,
    Numeric,
}

/// Leading-order Gaussian in D:
/// ∏binom · (π^{1/3} K/6)^{−3/2} · D · exp(−3D²/(2K)), K = S(N+1).
pub fn saddle_leading(n_modes: usize, occ: &[usize; 4], big_d: usize) -> f64 {
    let k = (total_degree(n_modes, occ) * (n_modes + 1)) as f64;
    let p = binomial_product(n_modes, occ).to_f64().unwrap_or(f64::INFINITY);
    let d = big_d as f64;
    p * (PI.cbrt() * k / 6.0).powf(-1.5) * d * (-1.5 * d * d / k).exp()
}

/// Tangent numbers T_1..=T_n (1, 2, 16, 272, ...), exact in 128-bit for n ≤ 25.
fn tangent_numbers(n: usize) -> Vec<u128> {
    let mut t = vec![0u128; n + 1];
    if n == 0 {
        return t;
    }
    t[1] = 1;
    for k in 2..=n {
        t[k] = (k as u128 - 1) * t[k - 1];
    }
    for k in 2..=n {
        for j in k..=n {
            t[j] = (j - k) as u128 * t[j - 1] + (j - k + 2) as u128 * t[j];
        }
    }
    t
}

/// ζ(2s): exact through |B_2s| = 2s·T_s/(4^s(4^s − 1)) for small s, a direct sum
/// beyond, where 100^{1−2s} is below rounding.
fn zeta_even(s: usize) -> f64 {
    if s <= 10 {
        let t = tangent_numbers(s)[s] as f64;
        let fact: f64 = (1..=2 * s).map(|k| k as f64).product();
        return s as f64 * t * PI.powi(2 * s as i32) / ((4f64.powi(s as i32) - 1.0) * fact);
    }
    (1..=100).rev().map(|k| (k as f64).powi(-2 * s as i32)).sum()
}

/// Σ_{j=1}^{m} j^p.
fn power_sum(m: usize, p: u32) -> BigInt {
    (1..=m).map(|j| BigInt::from(j).pow(p)).sum()
}

/// Truncated series of ln ∏[N n_α]_q around q = 1 in x, q = e^{2πx/(N+1)},
/// after removing ln ∏binom and the linear term: coefficients
/// c_s = (−1)^{s+1} ζ(2s) A^{(s)}/(s(2s+1)) of x^{2s}, where
/// A^{(s)} = Σ_α [B_{2s+1}(N+1) − B_{2s+1}(N−n_α+1) − B_{2s+1}(n_α+1)]/(N+1)^{2s}.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleSeries {
    pub coeffs: Vec<f64>,
}

/// Series length; terms decay like x^{2s} with |x| < 1.
pub const SADDLE_MAX_TERMS: usize = 200;

/// A^{(s)} exactly, using B_{2s+1}(m+1) = (2s+1)·Σ_{j≤m} j^{2s} for s ≥ 1.
pub fn bernoulli_combination(n_modes: usize, occ: &[usize; 4], s: usize) -> BigRational {
    let p = 2 * s as u32;
    let mut num = BigInt::zero();
    for &n in occ {
        num += power_sum(n_modes, p) - power_sum(n_modes - n, p) - power_sum(n, p);
    }
    num *= BigInt::from(2 * s + 1);
    BigRational::new(num, BigInt::from(n_modes + 1).pow(p))
}

pub fn saddle_series(n_modes: usize, occ: &[usize; 4]) -> SaddleSeries {
    let coeffs = (1..=SADDLE_MAX_TERMS)
        .map(|s| {
            let a = bernoulli_combination(n_modes, occ, s).to_f64().unwrap_or(f64::NAN);
            let sign = if s % 2 == 1 { 1.0 } else { -1.0 };
            sign * zeta_even(s) * a / (s as f64 * (2 * s + 1) as f64)
        })
        .collect();
    SaddleSeries { coeffs }
}

impl SaddleSeries {
    /// (f'(x), f''(x)) of f(x) = Σ c_s x^{2s}, truncated once terms drop below
    /// 1e-14 of the partial sum.
    fn derivatives(&self, x: f64) -> Result<(f64, f64)> {
        if x.abs() >= 1.0 {
            return Err(Error::Convergence(format!("saddle point x = {x} outside the unit radius")));
        }
        let (mut d1, mut d2) = (0.0, 0.0);
        for (i, c) in self.coeffs.iter().enumerate() {
            let s = (i + 1) as f64;
            let t1 = 2.0 * s * c * x.powi(2 * i as i32 + 1);
            let t2 = 2.0 * s * (2.0 * s - 1.0) * c * x.powi(2 * i as i32);
            d1 += t1;
            d2 += t2;
            if i > 0 && t1.abs() <= 1e-14 * d1.abs() && t2.abs() <= 1e-14 * d2.abs() {
                return Ok((d1, d2));
            }
        }
        if x == 0.0 {
            return Ok((d1, d2));
        }
        Err(Error::Convergence("series did not reach its truncation threshold".into()))
    }

    /// Solves f'(x) = π(D ∓ 1)/(N+1) by bisection refined with Newton steps.
    fn solve(&self, target: f64) -> Result<f64> {
        if target == 0.0 {
            return Ok(0.0);
        }
        // f' is increasing on [0, 1); grow the bracket until it covers the target.
        let (mut lo, mut hi) = (0.0f64, 0.05f64);
        while self.derivatives(hi)?.0 < target {
            lo = hi;
            hi += 0.05;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let (f, df) = self.derivatives(mid)?;
            // One Newton step from mid if it stays in the bracket.
            let nx = mid - (f - target) / df;
            let probe = if nx > lo && nx < hi { nx } else { mid };
            let fp = self.derivatives(probe)?.0;
            if fp < target {
                lo = probe;
            } else {
                hi = probe;
            }
            if hi - lo < 1e-15 {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// ln [M n]_q at q = e^t, stable near t = 0.
fn ln_qbinomial(m: usize, n: usize, t: f64) -> f64 {
    // [k]_q = (e^{kt} − 1)/(e^t − 1); write each as k·φ(kt)/φ(t), φ(y) = expm1(y)/y.
    let phi = |y: f64| if y == 0.0 { 0.0 } else { (y.exp_m1() / y).ln() };
    let mut s = 0.0;
    for i in 1..=n {
        let top = m - n + i;
        s += (top as f64).ln() + phi(top as f64 * t) - (i as f64).ln() - phi(i as f64 * t);
    }
    s
}

/// Saddle-point estimate of Mult^D as V⁺ − V⁻, each evaluated with the exact
/// q-binomial product at the numerically solved saddle.
pub fn saddle_numeric(n_modes: usize, occ: &[usize; 4], big_d: usize, series: &SaddleSeries) -> Result<f64> {
    let s = total_degree(n_modes, occ) as f64;
    let m1 = (n_modes + 1) as f64;
    let mut v = [0.0f64; 2];
    for (slot, shift) in v.iter_mut().zip([-1.0, 1.0]) {
        let e = (s + big_d as f64 + shift) / 2.0;
        let x = series.solve(PI * (big_d as f64 + shift) / m1)?;
        let t = 2.0 * PI * x / m1;
        let (_, d2x) = series.derivatives(x)?;
        let ln_f: f64 = occ.iter().map(|&n| ln_qbinomial(n_modes, n, t)).sum();
        // Second derivative in t of ln f − e t.
        let g2 = d2x * (m1 / (2.0 * PI)).powi(2);
        *slot = (ln_f - e * t).exp() / (2.0 * PI * g2).sqrt();
    }
    Ok(v[0] - v[1])
}

pub fn saddle_multiplicity(n_modes: usize, occ: &[usize; 4], big_d: usize, order: SaddleOrder) -> Result<f64> {
    check_occupations(n_modes, occ)?;
    if n_modes < 4 || occ.iter().any(|&n| n == 0 || n == n_modes) {
        return Err(Error::Range("saddle point needs N ≥ 4 and 0 < n_α < N".into()));
    }
    match order {
        SaddleOrder::Leading => Ok(saddle_leading(n_modes, occ, big_d)),
        SaddleOrder::Numeric => saddle_numeric(n_modes, occ, big_d, &saddle_series(n_modes, occ)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiplicityRow {
    pub d: usize,
    pub exact: BigUint,
    pub saddle_leading: Option<f64>,
    pub saddle_numeric: Option<f64>,
}

impl MultiplicityRow {
    /// |saddle/exact − 1| for the preferred available estimate.
    pub fn rel_err(&self) -> Option<f64> {
        let exact = self.exact.to_f64()?;
        let est = self.saddle_numeric.or(self.saddle_leading)?;
        (exact > 0.0).then(|| (est / exact - 1.0).abs())
    }
}

/// Exact table for all D of the allowed parity up to S + 1, with optional saddle columns.
pub fn multiplicity_rows(n_modes: usize, occ: &[usize; 4], leading: bool, numeric: bool) -> Result<Vec<MultiplicityRow>> {
    let table = multiplicity_table(n_modes, occ)?;
    let s = total_degree(n_modes, occ);
    let saddle_ok = n_modes >= 4 && occ.iter().all(|&n| n > 0 && n < n_modes);
    if (leading || numeric) && !saddle_ok {
        return Err(Error::Range("saddle point needs N ≥ 4 and 0 < n_α < N".into()));
    }
    let series = if numeric { Some(saddle_series(n_modes, occ)) } else { None };
    let mut rows = Vec::new();
    // Mult^D vanishes unless S + D is odd.
    for d in ((1 + s % 2)..=s + 1).step_by(2) {
        let exact = table.get(&d).cloned().unwrap_or_default();
        let sl = leading.then(|| saddle_leading(n_modes, occ, d));
        // Far tails put the saddle outside the series' reach; those cells stay empty.
        let sn = match &series {
            Some(se) => match saddle_numeric(n_modes, occ, d, se) {
                Ok(v) => Some(v),
                Err(Error::Convergence(_)) => None,
                Err(e) => return Err(e),
            },
            None => None,
        };
        rows.push(MultiplicityRow { d, exact, saddle_leading: sl, saddle_numeric: sn });
    }
    Ok(rows)
}

/// D-range holding the central fraction of the block-count distribution Mult^D.
pub fn central_range(rows: &[MultiplicityRow], fraction: f64) -> (usize, usize) {
    let w: Vec<f64> = rows.iter().map(|r| r.exact.to_f64().unwrap_or(0.0)).collect();
    let total: f64 = w.iter().sum();
    let lo_q = (1.0 - fraction) / 2.0 * total;
    let hi_q = (1.0 + fraction) / 2.0 * total;
    let (mut acc, mut lo, mut hi) = (0.0, rows[0].d, rows[rows.len() - 1].d);
    let mut lo_set = false;
    for (r, x) in rows.iter().zip(&w) {
        acc += x;
        if !lo_set && acc >= lo_q {
            lo = r.d;
            lo_set = true;
        }
        if acc >= hi_q {
            hi = r.d;
            break;
        }
    }
    (lo, hi)
}
