//! Extended-precision helpers: a double-double scalar used for frequency
//! arithmetic and a Neumaier compensated accumulator.

use std::cmp::Ordering;

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

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`, roughly 106 bits of
/// significand.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Ext {
    pub hi: f64,
    pub lo: f64,
}

impl Ext {
    pub const ONE: Ext = Ext { hi: 1.0, lo: 0.0 };

    pub fn new(x: f64) -> Self {
        Ext { hi: x, lo: 0.0 }
    }

    pub fn from_u128(v: u128) -> Self {
        let hi = v as f64;
        // hi is v rounded to nearest; the residual fits in an i128 and is exact
        // in f64 whenever v < 2^106.
        let lo = (v as i128 - hi as i128) as f64;
        let (hi, lo) = quick_two_sum(hi, lo);
        Ext { hi, lo }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn add(self, other: Ext) -> Ext {
        let (s, e) = two_sum(self.hi, other.hi);
        let (t, f) = two_sum(self.lo, other.lo);
        let e = e + t;
        let (s, e) = quick_two_sum(s, e);
        let e = e + f;
        let (hi, lo) = quick_two_sum(s, e);
        Ext { hi, lo }
    }

    pub fn mul(self, other: Ext) -> Ext {
        let (p, e) = two_prod(self.hi, other.hi);
        let e = e + (self.hi * other.lo + self.lo * other.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Ext { hi, lo }
    }

    pub fn mul_f64(self, x: f64) -> Ext {
        let (p, e) = two_prod(self.hi, x);
        let e = e + self.lo * x;
        let (hi, lo) = quick_two_sum(p, e);
        Ext { hi, lo }
    }

    pub fn div_f64(self, d: f64) -> Ext {
        let q1 = self.hi / d;
        let (p, e) = two_prod(q1, d);
        let r = ((self.hi - p) - e + self.lo) / d;
        let (hi, lo) = quick_two_sum(q1, r);
        Ext { hi, lo }
    }

    pub fn neg(self) -> Ext {
        Ext { hi: -self.hi, lo: -self.lo }
    }

    pub fn recip(self) -> Ext {
        // One Newton step on top of the f64 reciprocal.
        let y = 1.0 / self.hi;
        let r = Ext::ONE.add(self.mul_f64(-y));
        Ext::new(y).add(Ext::new(r.hi * y))
    }

    /// `base^k` by binary powering in double-double.
    pub fn powi(base: Ext, mut k: u32) -> Ext {
        let mut acc = Ext::ONE;
        let mut b = base;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(b);
            }
            b = b.mul(b);
            k >>= 1;
        }
        acc
    }

    /// Fractional part of `self * x` in `[0, 1)`, carried out so that the
    /// integer part of a large product does not swallow the fraction.
    #[inline]
    pub fn frac_mul(self, x: f64) -> f64 {
        let (p, e) = two_prod(self.hi, x);
        let fp = p - p.floor();
        let t = fp + (e + self.lo * x);
        let t = t - t.floor();
        // t can round up to exactly 1.0
        if t >= 1.0 {
            0.0
        } else {
            t
        }
    }

    pub fn total_cmp(&self, other: &Ext) -> Ordering {
        self.hi
            .total_cmp(&other.hi)
            .then_with(|| self.lo.total_cmp(&other.lo))
    }
}

/// Kahan-Babuska-Neumaier running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    s: f64,
    c: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }

    pub fn sum(&self) -> f64 {
        self.s + self.c
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<NeumaierSum>().sum()
}
