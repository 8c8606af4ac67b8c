//! Minimal double-double (two-f64) arithmetic.
//!
//! The worst-case-error pair sums cancel almost completely: the summands are
//! O(1) while the result can be ~1e-13, so plain f64 accumulation loses the
//! answer entirely. Each kernel term is therefore evaluated and accumulated
//! as an unevaluated sum `hi + lo` of two doubles, giving ~106 bits through
//! the cancellation. Only the standard error-free transformations are used;
//! products use Dekker splitting so no FMA hardware is assumed.

/// Unevaluated sum of two doubles, |lo| <= ulp(hi)/2 after renormalization.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

/// Knuth two-sum: s + e == a + b exactly.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Fast two-sum; requires |a| >= |b| or a == 0.
#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

/// Dekker split into 26 + 27 significand bits.
#[inline]
fn split(a: f64) -> (f64, f64) {
    const SPLITTER: f64 = 134_217_729.0; // 2^27 + 1
    let t = SPLITTER * a;
    let hi = t - (t - a);
    (hi, a - hi)
}

/// Dekker two-product: p + e == a * b exactly (barring overflow).
#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    let e = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
    (p, e)
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    #[inline]
    pub fn from_f64(a: f64) -> Dd {
        Dd { hi: a, lo: 0.0 }
    }

    /// Correctly-rounded-to-dd quotient n/d of two exact doubles.
    #[inline]
    pub fn from_div(n: f64, d: f64) -> Dd {
        let q1 = n / d;
        let (p, e) = two_prod(q1, d);
        let q2 = ((n - p) - e) / d;
        quick_two_sum(q1, q2).into()
    }

    #[inline]
    pub fn add(self, o: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, o.hi);
        let (t1, t2) = two_sum(self.lo, o.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        quick_two_sum(s1, s2 + t2).into()
    }

    #[inline]
    pub fn add_f64(self, b: f64) -> Dd {
        let (s1, s2) = two_sum(self.hi, b);
        quick_two_sum(s1, s2 + self.lo).into()
    }

    #[inline]
    pub fn sub(self, o: Dd) -> Dd {
        self.add(o.neg())
    }

    #[inline]
    pub fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    #[inline]
    pub fn mul(self, o: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, o.hi);
        quick_two_sum(p1, p2 + (self.hi * o.lo + self.lo * o.hi)).into()
    }

    #[inline]
    pub fn mul_f64(self, b: f64) -> Dd {
        let (p1, p2) = two_prod(self.hi, b);
        quick_two_sum(p1, p2 + self.lo * b).into()
    }

    /// Exact product of two doubles, kept in full.
    #[inline]
    pub fn prod(a: f64, b: f64) -> Dd {
        two_prod(a, b).into()
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

impl From<(f64, f64)> for Dd {
    #[inline]
    fn from((hi, lo): (f64, f64)) -> Dd {
        Dd { hi, lo }
    }
}
