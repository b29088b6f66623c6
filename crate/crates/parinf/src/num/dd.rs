//! Double-double arithmetic (~32 significant digits).
//!
//! The exponentially small Fourier modes of the restricted 4-body Melnikov
//! potential sit as low as 1e-28 relative to the integrand, far below what a
//! plain f64 accumulation can resolve. This module provides an unevaluated
//! hi+lo pair with error-free products (via FMA) and enough transcendental
//! support (sin/cos after exact range reduction) for those quadratures.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    // requires |a| >= |b|
    let s = a + b;
    let err = b - (s - a);
    (s, err)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = f64::mul_add(a, b, -p);
    (p, err)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };
    pub const PI: Dd = Dd {
        hi: 3.141592653589793,
        lo: 1.2246467991473532e-16,
    };
    pub const TWO_PI: Dd = Dd {
        hi: 6.283185307179586,
        lo: 2.4492935982947064e-16,
    };

    #[inline]
    pub fn new(hi: f64, lo: f64) -> Self {
        let (s, e) = quick_two_sum(hi, lo);
        Dd { hi: s, lo: e }
    }

    #[inline]
    pub fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    pub fn recip(self) -> Self {
        Dd::ONE / self
    }

    pub fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Dd::ONE;
        }
        let mut base = if n < 0 { self.recip() } else { self };
        let mut e = n.unsigned_abs();
        let mut acc = Dd::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    pub fn sqrt(self) -> Self {
        if self.hi == 0.0 {
            return Dd::ZERO;
        }
        // one Newton step on a f64 seed doubles the working digits
        let x = 1.0 / self.hi.sqrt();
        let ax = self.hi * x;
        let ax_dd = Dd::from_f64(ax);
        let err = (self - ax_dd * ax_dd).hi;
        ax_dd + Dd::from_f64(err * (x * 0.5))
    }

    /// Reduce modulo 2π into [-π, π], keeping dd accuracy for huge arguments.
    pub fn mod_two_pi(self) -> Self {
        let k = (self.to_f64() / Dd::TWO_PI.to_f64()).round();
        if k == 0.0 {
            return self;
        }
        // k fits exactly in f64 for all arguments arising here (|k| < 2^52)
        let mut r = self - Dd::TWO_PI * Dd::from_f64(k);
        while r.to_f64() > Dd::PI.to_f64() {
            r = r - Dd::TWO_PI;
        }
        while r.to_f64() < -Dd::PI.to_f64() {
            r = r + Dd::TWO_PI;
        }
        r
    }

    /// sin and cos, accurate to ~1e-30 absolute.
    pub fn sin_cos(self) -> (Dd, Dd) {
        let r = self.mod_two_pi();
        // nearest multiple of π/16
        let seg = (r.to_f64() / FRAC_PI_16.to_f64()).round();
        let k = seg as i64;
        let x = r - FRAC_PI_16 * Dd::from_f64(seg);
        // |x| <= π/32; Taylor series in dd
        let (sx, cx) = sin_cos_taylor(x);
        let idx = (k.rem_euclid(32)) as usize;
        let (sk, ck) = SIN_COS_PI_16[idx];
        let sk = Dd::new(sk.0, sk.1);
        let ck = Dd::new(ck.0, ck.1);
        (sx * ck + cx * sk, cx * ck - sx * sk)
    }

    pub fn sin(self) -> Dd {
        self.sin_cos().0
    }

    pub fn cos(self) -> Dd {
        self.sin_cos().1
    }
}

fn sin_cos_taylor(x: Dd) -> (Dd, Dd) {
    let x2 = x * x;
    // sin: x (1 - x^2/3! + x^4/5! - ... ), through x^15 (|x| <= 0.1 => 1e-31)
    let mut s = Dd::ZERO;
    let mut c = Dd::ZERO;
    const INV_FACT: [(u64, f64); 8] = [
        (1, 1.0),
        (6, 6.0),
        (120, 120.0),
        (5040, 5040.0),
        (362880, 362880.0),
        (39916800, 39916800.0),
        (6227020800, 6227020800.0),
        (1307674368000, 1307674368000.0),
    ];
    // Horner in x^2, alternating signs
    for i in (0..8).rev() {
        let term = Dd::ONE / Dd::from_f64(INV_FACT[i].1);
        let term = if i % 2 == 0 { term } else { -term };
        s = s * x2 + term;
    }
    s = s * x;
    const INV_FACT_C: [f64; 8] = [
        1.0,
        2.0,
        24.0,
        720.0,
        40320.0,
        3628800.0,
        479001600.0,
        87178291200.0,
    ];
    for i in (0..8).rev() {
        let term = Dd::ONE / Dd::from_f64(INV_FACT_C[i]);
        let term = if i % 2 == 0 { term } else { -term };
        c = c * x2 + term;
    }
    (s, c)
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, rhs: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, rhs.hi);
        let e = e + self.lo + rhs.lo;
        let (hi, lo) = quick_two_sum(s, e);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, rhs: Dd) -> Dd {
        self + (-rhs)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, rhs: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, rhs.hi);
        let e = e + self.hi * rhs.lo + self.lo * rhs.hi;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, rhs: Dd) -> Dd {
        let q1 = self.hi / rhs.hi;
        let r = self - rhs * Dd::from_f64(q1);
        let q2 = r.hi / rhs.hi;
        let r2 = r - rhs * Dd::from_f64(q2);
        let q3 = r2.hi / rhs.hi;
        Dd::new(q1, q2) + Dd::from_f64(q3)
    }
}

impl Mul<f64> for Dd {
    type Output = Dd;
    fn mul(self, rhs: f64) -> Dd {
        self * Dd::from_f64(rhs)
    }
}

impl Add<f64> for Dd {
    type Output = Dd;
    fn add(self, rhs: f64) -> Dd {
        self + Dd::from_f64(rhs)
    }
}

const FRAC_PI_16: Dd = Dd {
    hi: 0.19634954084936207,
    lo: 7.654042494670958e-18,
};

/// (sin, cos) of k·π/16 for k = 0..31, as (hi, lo) pairs.
#[allow(clippy::excessive_precision)]
const SIN_COS_PI_16: [((f64, f64), (f64, f64)); 32] = [
    ((0.0, 0.0), (1.0, 0.0)),
    ((0.19509032201612828, -7.991079068461731e-18), (0.9807852804032304, 1.8546939997825006e-17)),
    ((0.3826834323650898, -1.0050772696461588e-17), (0.9238795325112867, 1.7645047084336677e-17)),
    ((0.5555702330196022, 4.709410940561677e-17), (0.8314696123025452, 1.4073856984728024e-18)),
    ((0.7071067811865476, -4.833646656726457e-17), (0.7071067811865476, -4.833646656726457e-17)),
    ((0.8314696123025452, 1.4073856984728024e-18), (0.5555702330196022, 4.709410940561677e-17)),
    ((0.9238795325112867, 1.7645047084336677e-17), (0.3826834323650898, -1.0050772696461588e-17)),
    ((0.9807852804032304, 1.8546939997825006e-17), (0.19509032201612828, -7.991079068461731e-18)),
    ((1.0, 0.0), (0.0, 0.0)),
    ((0.9807852804032304, 1.8546939997825006e-17), (-0.19509032201612828, 7.991079068461731e-18)),
    ((0.9238795325112867, 1.7645047084336677e-17), (-0.3826834323650898, 1.0050772696461588e-17)),
    ((0.8314696123025452, 1.4073856984728024e-18), (-0.5555702330196022, -4.709410940561677e-17)),
    ((0.7071067811865476, -4.833646656726457e-17), (-0.7071067811865476, 4.833646656726457e-17)),
    ((0.5555702330196022, 4.709410940561677e-17), (-0.8314696123025452, -1.4073856984728024e-18)),
    ((0.3826834323650898, -1.0050772696461588e-17), (-0.9238795325112867, -1.7645047084336677e-17)),
    ((0.19509032201612828, -7.991079068461731e-18), (-0.9807852804032304, -1.8546939997825006e-17)),
    ((0.0, 0.0), (-1.0, 0.0)),
    ((-0.19509032201612828, 7.991079068461731e-18), (-0.9807852804032304, -1.8546939997825006e-17)),
    ((-0.3826834323650898, 1.0050772696461588e-17), (-0.9238795325112867, -1.7645047084336677e-17)),
    ((-0.5555702330196022, -4.709410940561677e-17), (-0.8314696123025452, -1.4073856984728024e-18)),
    ((-0.7071067811865476, 4.833646656726457e-17), (-0.7071067811865476, 4.833646656726457e-17)),
    ((-0.8314696123025452, -1.4073856984728024e-18), (-0.5555702330196022, -4.709410940561677e-17)),
    ((-0.9238795325112867, -1.7645047084336677e-17), (-0.3826834323650898, 1.0050772696461588e-17)),
    ((-0.9807852804032304, -1.8546939997825006e-17), (-0.19509032201612828, 7.991079068461731e-18)),
    ((-1.0, 0.0), (0.0, 0.0)),
    ((-0.9807852804032304, -1.8546939997825006e-17), (0.19509032201612828, -7.991079068461731e-18)),
    ((-0.9238795325112867, -1.7645047084336677e-17), (0.3826834323650898, -1.0050772696461588e-17)),
    ((-0.8314696123025452, -1.4073856984728024e-18), (0.5555702330196022, 4.709410940561677e-17)),
    ((-0.7071067811865476, 4.833646656726457e-17), (0.7071067811865476, -4.833646656726457e-17)),
    ((-0.5555702330196022, -4.709410940561677e-17), (0.8314696123025452, 1.4073856984728024e-18)),
    ((-0.3826834323650898, 1.0050772696461588e-17), (0.9238795325112867, 1.7645047084336677e-17)),
    ((-0.19509032201612828, 7.991079068461731e-18), (0.9807852804032304, 1.8546939997825006e-17)),
];

/// 16-point Gauss-Legendre rule on [-1, 1], nodes and weights in dd.
#[allow(clippy::excessive_precision)]
pub const GL16: [((f64, f64), (f64, f64)); 16] = [
    ((-0.9894009349916499, 5.914095566469922e-18), (0.027152459411754096, -1.56154670271636e-18)),
    ((-0.9445750230732326, 2.4190068142444825e-17), (0.062253523938647894, -7.690264522605704e-19)),
    ((-0.8656312023878318, 1.1315677979849837e-17), (0.09515851168249279, -8.783003597087393e-19)),
    ((-0.755404408355003, -3.5241085894430354e-17), (0.12462897125553388, -4.841529802320495e-18)),
    ((-0.6178762444026438, 2.2123521973463665e-17), (0.14959598881657674, -3.887619883741701e-18)),
    ((-0.45801677765722737, -1.6662404170959257e-17), (0.16915651939500254, 2.323299329564479e-18)),
    ((-0.2816035507792589, 2.1958791252592132e-18), (0.18260341504492358, 5.090226510905207e-18)),
    ((-0.09501250983763744, 3.275947755433097e-19), (0.1894506104550685, -5.883843495582664e-18)),
    ((0.09501250983763744, -3.275947755433097e-19), (0.1894506104550685, -5.883843495582664e-18)),
    ((0.2816035507792589, -2.1958791252592132e-18), (0.18260341504492358, 5.090226510905207e-18)),
    ((0.45801677765722737, 1.6662404170959257e-17), (0.16915651939500254, 2.323299329564479e-18)),
    ((0.6178762444026438, -2.2123521973463665e-17), (0.14959598881657674, -3.887619883741701e-18)),
    ((0.755404408355003, 3.5241085894430354e-17), (0.12462897125553388, -4.841529802320495e-18)),
    ((0.8656312023878318, -1.1315677979849837e-17), (0.09515851168249279, -8.783003597087393e-19)),
    ((0.9445750230732326, -2.4190068142444825e-17), (0.062253523938647894, -7.690264522605704e-19)),
    ((0.9894009349916499, -5.914095566469922e-18), (0.027152459411754096, -1.56154670271636e-18)),
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mul_div_roundtrip() {
        let a = Dd::from_f64(1.0) / Dd::from_f64(3.0);
        let b = a * Dd::from_f64(3.0);
        assert!((b - Dd::ONE).to_f64().abs() < 1e-31);
    }

    #[test]
    fn sqrt_of_two() {
        let r = Dd::from_f64(2.0).sqrt();
        let back = r * r - Dd::from_f64(2.0);
        assert!(back.to_f64().abs() < 1e-30);
    }

    #[test]
    fn sin_cos_identities() {
        for k in 0..200 {
            let x = Dd::from_f64(k as f64 * 0.37 - 20.0);
            let (s, c) = x.sin_cos();
            let one = s * s + c * c;
            assert!((one - Dd::ONE).to_f64().abs() < 1e-29);
            assert!((s.to_f64() - x.to_f64().sin()).abs() < 1e-13);
        }
    }

    #[test]
    fn sin_accurate_for_large_argument() {
        // exact range reduction: sin(1e6 + π/6)-style arguments
        let x = Dd::from_f64(123456.0) * Dd::PI + Dd::PI * Dd::from_f64(1.0 / 6.0);
        let s = x.sin().abs();
        assert!((s.to_f64() - 0.5).abs() < 1e-25);
    }
}
