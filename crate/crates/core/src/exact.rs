//! Scalar fields shared by closed-form matrix builders, and exact ranks over F_p.
//!
//! Closed forms are written once against [`Field`] and evaluated in doubles,
//! in MPFR floats or modulo a prime. Ranks of high matrix powers are meaningless
//! in floating point once Jordan chains get long; modulo p they are exact.

use num_complex::Complex64 as C64;
use rug::Float;

pub trait Field: Clone {
    fn zero_like(&self) -> Self;
    fn int_like(&self, x: i64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn inv(&self) -> Option<Self>;
    /// Size used for zero tests; exact fields report 0 or 1.
    fn magnitude(&self) -> f64;

    fn neg(&self) -> Self {
        self.zero_like().sub(self)
    }

    fn div(&self, o: &Self) -> Option<Self> {
        o.inv().map(|i| self.mul(&i))
    }

    fn powi(&self, n: i64) -> Option<Self> {
        let base = if n < 0 { self.inv()? } else { self.clone() };
        let mut out = self.int_like(1);
        for _ in 0..n.unsigned_abs() {
            out = out.mul(&base);
        }
        Some(out)
    }
}

impl Field for C64 {
    fn zero_like(&self) -> Self {
        C64::new(0.0, 0.0)
    }
    fn int_like(&self, x: i64) -> Self {
        C64::new(x as f64, 0.0)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn inv(&self) -> Option<Self> {
        (self.norm() != 0.0).then(|| 1.0 / self)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

impl Field for Float {
    fn zero_like(&self) -> Self {
        Float::new(self.prec())
    }
    fn int_like(&self, x: i64) -> Self {
        Float::with_val(self.prec(), x)
    }
    fn add(&self, o: &Self) -> Self {
        Float::with_val(self.prec(), self + o)
    }
    fn sub(&self, o: &Self) -> Self {
        Float::with_val(self.prec(), self - o)
    }
    fn mul(&self, o: &Self) -> Self {
        Float::with_val(self.prec(), self * o)
    }
    fn inv(&self) -> Option<Self> {
        (!self.is_zero()).then(|| Float::with_val(self.prec(), self.recip_ref()))
    }
    fn magnitude(&self) -> f64 {
        self.to_f64().abs()
    }
}

/// The largest prime below 2^28; products of two residues fit in 56 bits.
pub const PRIME: u64 = (1 << 28) - 57;

/// Residue modulo [`PRIME`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fp(pub u64);

impl Fp {
    pub fn new(x: i64) -> Self {
        Fp(x.rem_euclid(PRIME as i64) as u64)
    }

    /// a/b, panicking if b ≡ 0.
    pub fn ratio(a: i64, b: i64) -> Self {
        Fp::new(a).div(&Fp::new(b)).expect("denominator divisible by the prime")
    }

    fn pow(self, mut e: u64) -> Self {
        let mut base = self.0;
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % PRIME;
            }
            base = base * base % PRIME;
            e >>= 1;
        }
        Fp(acc)
    }
}

impl Field for Fp {
    fn zero_like(&self) -> Self {
        Fp(0)
    }
    fn int_like(&self, x: i64) -> Self {
        Fp::new(x)
    }
    fn add(&self, o: &Self) -> Self {
        Fp((self.0 + o.0) % PRIME)
    }
    fn sub(&self, o: &Self) -> Self {
        Fp((self.0 + PRIME - o.0) % PRIME)
    }
    fn mul(&self, o: &Self) -> Self {
        Fp(self.0 * o.0 % PRIME)
    }
    fn inv(&self) -> Option<Self> {
        (self.0 != 0).then(|| self.pow(PRIME - 2))
    }
    fn magnitude(&self) -> f64 {
        if self.0 == 0 {
            0.0
        } else {
            1.0
        }
    }
}

/// Dense square matrix over F_p, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FpMatrix {
    pub n: usize,
    pub data: Vec<u64>,
}

impl FpMatrix {
    pub fn zeros(n: usize) -> Self {
        FpMatrix { n, data: vec![0; n * n] }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Fp) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j).0;
            }
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> Fp {
        Fp(self.data[i * self.n + j])
    }

    pub fn set(&mut self, i: usize, j: usize, x: Fp) {
        self.data[i * self.n + j] = x.0;
    }

    pub fn shifted(&self, lambda: Fp) -> Self {
        let mut m = self.clone();
        for i in 0..self.n {
            m.set(i, i, m.get(i, i).sub(&lambda));
        }
        m
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = self.n;
        let mut out = vec![0u64; n * n];
        // Residues < 2^28, so 256 products accumulate without overflow.
        for i in 0..n {
            let acc = &mut out[i * n..(i + 1) * n];
            let mut pending = 0;
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0 {
                    continue;
                }
                for (x, &b) in acc.iter_mut().zip(&o.data[k * n..(k + 1) * n]) {
                    *x += a * b;
                }
                pending += 1;
                if pending == 255 {
                    acc.iter_mut().for_each(|x| *x %= PRIME);
                    pending = 0;
                }
            }
            acc.iter_mut().for_each(|x| *x %= PRIME);
        }
        FpMatrix { n, data: out }
    }

    pub fn rank(&self) -> usize {
        rank_rect(self.data.clone(), self.n, self.n)
    }

    /// rank((A − λ)^k) for k = 1..=kmax; once two consecutive ranks agree the
    /// sequence is constant, so the remaining powers are skipped. Only a row
    /// basis of (A − λ)^{k−1} is carried: its rows times A − λ span the rows of the k-th power.
    pub fn rank_sequence(&self, lambda: Fp, kmax: usize) -> Vec<usize> {
        let b = self.shifted(lambda);
        let n = self.n;
        let mut rows = b.data.clone();
        let mut out = Vec::with_capacity(kmax);
        for k in 1..=kmax {
            if k > 1 {
                rows = mul_rows(&rows, &b);
            }
            let r = echelon(&mut rows, n);
            rows.truncate(r * n);
            let stable = out.last() == Some(&r) || r == 0;
            out.push(r);
            if stable {
                out.resize(kmax, r);
                break;
            }
        }
        out
    }
}

/// (rows.len()/n)×n row-major residues times an n×n matrix.
fn mul_rows(a: &[u64], b: &FpMatrix) -> Vec<u64> {
    let n = b.n;
    let mut out = vec![0u64; a.len()];
    for (src, acc) in a.chunks(n).zip(out.chunks_mut(n)) {
        // Residues < 2^28, so 255 products accumulate without overflow.
        let mut pending = 0;
        for (k, &x) in src.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (y, &z) in acc.iter_mut().zip(&b.data[k * n..(k + 1) * n]) {
                *y += x * z;
            }
            pending += 1;
            if pending == 255 {
                acc.iter_mut().for_each(|y| *y %= PRIME);
                pending = 0;
            }
        }
        acc.iter_mut().for_each(|y| *y %= PRIME);
    }
    out
}

/// Row echelon form in place; the first `rank` rows then span the row space.
fn echelon(a: &mut [u64], cols: usize) -> usize {
    if cols == 0 {
        return 0;
    }
    let rows = a.len() / cols;
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows).find(|&r| a[r * cols + c] != 0) else {
            continue;
        };
        if piv != rank {
            for j in 0..cols {
                a.swap(piv * cols + j, rank * cols + j);
            }
        }
        let inv = Fp(a[rank * cols + c]).inv().expect("nonzero pivot").0;
        let (head, tail) = a.split_at_mut((rank + 1) * cols);
        let pivot_row = &head[rank * cols..];
        for row in tail.chunks_mut(cols) {
            if row[c] == 0 {
                continue;
            }
            let g = PRIME - row[c] * inv % PRIME;
            for (x, &y) in row[c..].iter_mut().zip(&pivot_row[c..]) {
                *x = (*x + g * y) % PRIME;
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// Rank of a rows×cols row-major matrix of residues by Gaussian elimination.
pub fn rank_rect(mut a: Vec<u64>, rows: usize, cols: usize) -> usize {
    debug_assert_eq!(a.len(), rows * cols);
    echelon(&mut a, cols)
}

/// Determinant of a k×k row-major matrix of residues.
pub fn det_fp(mut a: Vec<u64>, k: usize) -> Fp {
    let mut det = Fp(1);
    for c in 0..k {
        let Some(piv) = (c..k).find(|&r| a[r * k + c] != 0) else {
            return Fp(0);
        };
        if piv != c {
            for j in 0..k {
                a.swap(piv * k + j, c * k + j);
            }
            det = det.neg();
        }
        let p = Fp(a[c * k + c]);
        det = det.mul(&p);
        let inv = p.inv().expect("nonzero pivot").0;
        for r in c + 1..k {
            let f = a[r * k + c] * inv % PRIME;
            if f == 0 {
                continue;
            }
            for j in c..k {
                let sub = f * a[c * k + j] % PRIME;
                a[r * k + j] = (a[r * k + j] + PRIME - sub) % PRIME;
            }
        }
    }
    det
}
