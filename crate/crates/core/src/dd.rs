//! Double-double arithmetic.
//!
//! A value is the unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`, giving
//! roughly 32 significant decimal digits. Only the operations needed by the
//! real-axis Laplace inversion are provided: the alternating Stehfest sums
//! cancel about 15 digits at the orders used there, so the transform has to
//! be evaluated beyond `f64` precision.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd)]
pub struct Dd {
    hi: f64,
    lo: f64,
}

pub const LN2: Dd = Dd {
    hi: std::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    #[inline]
    pub const fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn hi(self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn lo(self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite()
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    #[inline]
    pub fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        let e = e + self.lo * b;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    /// Multiplication by an exact power of two.
    #[inline]
    fn scale(self, s: f64) -> Self {
        Dd {
            hi: self.hi * s,
            lo: self.lo * s,
        }
    }

    pub fn sqr(self) -> Self {
        self * self
    }

    pub fn recip(self) -> Self {
        Dd::ONE / self
    }

    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return if self.hi == 0.0 {
                Dd::ZERO
            } else {
                Dd::from_f64(f64::NAN)
            };
        }
        let y = self.hi.sqrt();
        let yy = Dd::from_f64(y);
        // one Newton step on y^2 = x from an f64 seed
        yy + (self - yy.sqr()) / yy.scale(2.0)
    }

    /// `exp(x) - 1` for `|x| <= 0.5`, accurate in the relative sense.
    fn expm1_small(self) -> Self {
        const HALVINGS: i32 = 4;
        let r = self.scale(1.0 / 16.0);
        // Taylor series of expm1 at the reduced argument |r| < 0.032
        let mut term = r;
        let mut sum = r;
        for n in 2..=19 {
            term = term * r / Dd::from_f64(n as f64);
            sum = sum + term;
        }
        // expm1(2r) = expm1(r) * (expm1(r) + 2)
        for _ in 0..HALVINGS {
            sum = sum * (sum + Dd::from_f64(2.0));
        }
        sum
    }

    pub fn exp(self) -> Self {
        if self.hi > 709.7 {
            return Dd::from_f64(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Dd::ZERO;
        }
        if self.hi.abs() <= 0.5 {
            return self.expm1_small() + Dd::ONE;
        }
        let k = (self.hi / std::f64::consts::LN_2).round();
        let r = self - LN2.mul_f64(k);
        let e = r.expm1_small() + Dd::ONE;
        let ki = k as i32;
        // split the power of two so that neither factor overflows
        let half = ki / 2;
        e.scale(2f64.powi(half)).scale(2f64.powi(ki - half))
    }

    pub fn exp_m1(self) -> Self {
        if self.hi.abs() <= 0.5 {
            self.expm1_small()
        } else {
            self.exp() - Dd::ONE
        }
    }

    pub fn ln(self) -> Self {
        if self.hi <= 0.0 {
            return Dd::from_f64(if self.hi == 0.0 {
                f64::NEG_INFINITY
            } else {
                f64::NAN
            });
        }
        if !self.hi.is_finite() {
            return self;
        }
        let y = Dd::from_f64(self.hi.ln());
        // Newton on exp(y) = x
        y + self * (-y).exp() - Dd::ONE
    }

    /// `ln(1 + self)`, keeping relative accuracy for tiny arguments.
    pub fn ln_1p(self) -> Self {
        if self.hi.abs() > 0.5 {
            return (Dd::ONE + self).ln();
        }
        let y = Dd::from_f64(self.hi.ln_1p());
        // residual (1+x)e^{-y} - 1 evaluated without forming 1 + x
        let em = (-y).exp_m1();
        y + self + em + self * em
    }

    pub fn powf(self, a: f64) -> Self {
        if a == 0.0 {
            return Dd::ONE;
        }
        (self.ln().mul_f64(a)).exp()
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd::from_f64(x)
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, b: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let s2 = s2 + t1;
        let (s1, s2) = quick_two_sum(s1, s2);
        let s2 = s2 + t2;
        let (hi, lo) = quick_two_sum(s1, s2);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    #[inline]
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::from_f64(q3)
    }
}
