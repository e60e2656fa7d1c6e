//! Arbitrary-precision complex numbers over MPFR floats.

use num_complex::Complex64 as C64;
use rug::float::Constant;
use rug::Float;

/// Bits needed for `digits` decimal digits.
pub fn bits_for_digits(digits: u32) -> u32 {
    (digits as f64 * std::f64::consts::LOG2_10).ceil() as u32 + 8
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApComplex {
    pub re: Float,
    pub im: Float,
}

impl ApComplex {
    pub fn zero(prec: u32) -> Self {
        ApComplex { re: Float::new(prec), im: Float::new(prec) }
    }

    pub fn one(prec: u32) -> Self {
        Self::from_f64(1.0, prec)
    }

    pub fn from_f64(x: f64, prec: u32) -> Self {
        ApComplex { re: Float::with_val(prec, x), im: Float::new(prec) }
    }

    pub fn from_c64(z: C64, prec: u32) -> Self {
        ApComplex { re: Float::with_val(prec, z.re), im: Float::with_val(prec, z.im) }
    }

    /// e^{iθ} for θ = π·num/den, exact in the argument.
    pub fn unit_pi_fraction(num: i64, den: i64, prec: u32) -> Self {
        let theta = Float::with_val(prec, Constant::Pi) * num / den;
        let (s, c) = theta.sin_cos(Float::new(prec));
        ApComplex { re: c, im: s }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    pub fn to_c64(&self) -> C64 {
        C64::new(self.re.to_f64(), self.im.to_f64())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn abs(&self) -> Float {
        self.re.clone().hypot(&self.im)
    }

    pub fn add(&self, o: &Self) -> Self {
        let p = self.prec();
        ApComplex { re: Float::with_val(p, &self.re + &o.re), im: Float::with_val(p, &self.im + &o.im) }
    }

    pub fn sub(&self, o: &Self) -> Self {
        let p = self.prec();
        ApComplex { re: Float::with_val(p, &self.re - &o.re), im: Float::with_val(p, &self.im - &o.im) }
    }

    pub fn neg(&self) -> Self {
        ApComplex { re: -self.re.clone(), im: -self.im.clone() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let p = self.prec();
        let rr = Float::with_val(p, &self.re * &o.re);
        let ii = Float::with_val(p, &self.im * &o.im);
        let ri = Float::with_val(p, &self.re * &o.im);
        let ir = Float::with_val(p, &self.im * &o.re);
        ApComplex { re: rr - ii, im: ri + ir }
    }

    pub fn scale(&self, x: &Float) -> Self {
        let p = self.prec();
        ApComplex { re: Float::with_val(p, &self.re * x), im: Float::with_val(p, &self.im * x) }
    }

    pub fn recip(&self) -> Self {
        let p = self.prec();
        let den = Float::with_val(p, self.re.clone().square() + self.im.clone().square());
        ApComplex { re: Float::with_val(p, &self.re / &den), im: -Float::with_val(p, &self.im / &den) }
    }

    pub fn div(&self, o: &Self) -> Self {
        self.mul(&o.recip())
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut out = Self::one(self.prec());
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                out = out.mul(&base);
            }
            base = base.mul(&base);
            k >>= 1;
        }
        out
    }

    /// sinh(a + ib) = sinh a cos b + i cosh a sin b.
    pub fn sinh(&self) -> Self {
        let p = self.prec();
        let (sh, ch) = self.re.clone().sinh_cosh(Float::new(p));
        let (s, c) = self.im.clone().sin_cos(Float::new(p));
        ApComplex { re: sh * c, im: ch * s }
    }
}
