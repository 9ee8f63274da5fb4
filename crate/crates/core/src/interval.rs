//! Directed-rounding interval arithmetic on `f64`.
//!
//! Endpoints are computed in round-to-nearest and corrected outward using
//! error-free transformations (two-sum for addition, an FMA residual for
//! multiplication and division). When the nearest result is exact the
//! endpoint is kept bit-exact, otherwise it is moved one ulp outward, so
//! every operation encloses the exact real result.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Closed real interval `[lo, hi]` with `lo <= hi`. Empty intervals are
/// unrepresentable; constructors panic on NaN or inverted endpoints.
#[derive(Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e},{:e}]", self.lo, self.hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.lo, self.hi)
    }
}

#[inline]
fn norm_zero(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

/// Lower bound for `a + b`.
#[inline]
pub fn add_lo(a: f64, b: f64) -> f64 {
    let s = a + b;
    if s.is_infinite() {
        return if s > 0.0 { f64::MAX } else { f64::NEG_INFINITY };
    }
    // two-sum residual; exact for all finite inputs
    let bv = s - a;
    let err = (a - (s - bv)) + (b - bv);
    if err >= 0.0 {
        s
    } else {
        s.next_down()
    }
}

/// Upper bound for `a + b`.
#[inline]
pub fn add_hi(a: f64, b: f64) -> f64 {
    let s = a + b;
    if s.is_infinite() {
        return if s > 0.0 { f64::INFINITY } else { f64::MIN };
    }
    let bv = s - a;
    let err = (a - (s - bv)) + (b - bv);
    if err <= 0.0 {
        s
    } else {
        s.next_up()
    }
}

/// Lower bound for `a * b`.
#[inline]
pub fn mul_lo(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if p.is_infinite() {
        return if p > 0.0 { f64::MAX } else { f64::NEG_INFINITY };
    }
    // In the subnormal range the FMA residual may itself be rounded, so
    // the sign test is unreliable; widen unconditionally there.
    if p.abs() < f64::MIN_POSITIVE {
        return p.next_down();
    }
    let r = f64::mul_add(a, b, -p);
    if r >= 0.0 {
        p
    } else {
        p.next_down()
    }
}

/// Upper bound for `a * b`.
#[inline]
pub fn mul_hi(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if p.is_infinite() {
        return if p > 0.0 { f64::INFINITY } else { f64::MIN };
    }
    if p.abs() < f64::MIN_POSITIVE {
        return p.next_up();
    }
    let r = f64::mul_add(a, b, -p);
    if r <= 0.0 {
        p
    } else {
        p.next_up()
    }
}

/// Lower bound for `a / b`, `b != 0`.
#[inline]
pub fn div_lo(a: f64, b: f64) -> f64 {
    debug_assert!(b != 0.0);
    if a == 0.0 {
        return 0.0;
    }
    let q = a / b;
    if q.is_infinite() {
        return if q > 0.0 { f64::MAX } else { f64::NEG_INFINITY };
    }
    if q.abs() < f64::MIN_POSITIVE || q == 0.0 {
        return q.next_down();
    }
    // a/b - q = (a - q*b)/b = r/b with r the exact FMA residual
    let r = f64::mul_add(-q, b, a);
    let err_pos = (r > 0.0) == (b > 0.0);
    if r == 0.0 || !err_pos {
        // exact, or true quotient below q
        if r == 0.0 {
            q
        } else {
            q.next_down()
        }
    } else {
        q
    }
}

/// Upper bound for `a / b`, `b != 0`.
#[inline]
pub fn div_hi(a: f64, b: f64) -> f64 {
    debug_assert!(b != 0.0);
    if a == 0.0 {
        return 0.0;
    }
    let q = a / b;
    if q.is_infinite() {
        return if q > 0.0 { f64::INFINITY } else { f64::MIN };
    }
    if q.abs() < f64::MIN_POSITIVE || q == 0.0 {
        return q.next_up();
    }
    let r = f64::mul_add(-q, b, a);
    let err_pos = (r > 0.0) == (b > 0.0);
    if r == 0.0 {
        q
    } else if err_pos {
        q.next_up()
    } else {
        q
    }
}

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };

    /// Enclosure of pi; the f64 nearest to pi lies strictly below it.
    pub const PI: Interval = Interval {
        lo: 3.141592653589793,
        hi: 3.1415926535897936,
    };

    #[inline]
    pub fn new(lo: f64, hi: f64) -> Interval {
        assert!(lo <= hi, "inverted interval [{lo},{hi}]");
        assert!(lo.is_finite() || lo == f64::NEG_INFINITY);
        assert!(hi.is_finite() || hi == f64::INFINITY);
        Interval {
            lo: norm_zero(lo),
            hi: norm_zero(hi),
        }
    }

    #[inline]
    pub fn point(x: f64) -> Interval {
        assert!(!x.is_nan());
        Interval {
            lo: norm_zero(x),
            hi: norm_zero(x),
        }
    }

    /// Symmetric interval `[-r, r]`.
    #[inline]
    pub fn sym(r: f64) -> Interval {
        assert!(r >= 0.0);
        Interval { lo: -r, hi: r }
    }

    #[inline]
    pub fn lo(&self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn hi(&self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.lo == 0.0 && self.hi == 0.0
    }

    /// Maximal absolute value of points in the interval (exact).
    #[inline]
    pub fn max_abs(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// Minimal absolute value of points in the interval (exact).
    #[inline]
    pub fn min_abs(&self) -> f64 {
        if self.lo > 0.0 {
            self.lo
        } else if self.hi < 0.0 {
            -self.hi
        } else {
            0.0
        }
    }

    #[inline]
    pub fn mid(&self) -> f64 {
        if self.lo == self.hi {
            return self.lo;
        }
        let m = 0.5 * self.lo + 0.5 * self.hi;
        if m.is_finite() {
            m
        } else {
            0.0
        }
    }

    /// Upper bound on the radius about `mid()`.
    #[inline]
    pub fn rad(&self) -> f64 {
        let m = self.mid();
        let a = add_hi(m, -self.lo);
        let b = add_hi(self.hi, -m);
        a.max(b)
    }

    #[inline]
    pub fn width(&self) -> f64 {
        add_hi(self.hi, -self.lo)
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    #[inline]
    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    #[inline]
    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        if lo <= hi {
            Some(Interval { lo, hi })
        } else {
            None
        }
    }

    /// Tight enclosure of `{x^2 : x in self}`; lower endpoint is 0 whenever
    /// the interval contains 0.
    #[inline]
    pub fn square(&self) -> Interval {
        if self.lo >= 0.0 {
            Interval {
                lo: mul_lo(self.lo, self.lo),
                hi: mul_hi(self.hi, self.hi),
            }
        } else if self.hi <= 0.0 {
            Interval {
                lo: mul_lo(self.hi, self.hi),
                hi: mul_hi(self.lo, self.lo),
            }
        } else {
            let m = self.max_abs();
            Interval {
                lo: 0.0,
                hi: mul_hi(m, m),
            }
        }
    }

    /// Multiply by a point value.
    #[inline]
    pub fn mul_f64(&self, c: f64) -> Interval {
        if c >= 0.0 {
            Interval {
                lo: mul_lo(self.lo, c),
                hi: mul_hi(self.hi, c),
            }
        } else {
            Interval {
                lo: mul_lo(self.hi, c),
                hi: mul_hi(self.lo, c),
            }
        }
    }

    /// Exact scaling by a power of two.
    #[inline]
    pub fn mul_pow2(&self, e: i32) -> Interval {
        let c = (2.0f64).powi(e);
        // powers of two scale exactly except at range boundaries
        Interval {
            lo: mul_lo(self.lo, c),
            hi: mul_hi(self.hi, c),
        }
    }

    /// Division; panics if `other` contains zero.
    pub fn div(&self, other: &Interval) -> Interval {
        assert!(
            other.lo > 0.0 || other.hi < 0.0,
            "interval division by {:?} containing zero",
            other
        );
        let (a, b) = (self.lo, self.hi);
        let (c, d) = (other.lo, other.hi);
        if c > 0.0 {
            if a >= 0.0 {
                Interval::new(div_lo(a, d), div_hi(b, c))
            } else if b <= 0.0 {
                Interval::new(div_lo(a, c), div_hi(b, d))
            } else {
                Interval::new(div_lo(a, c), div_hi(b, c))
            }
        } else if a >= 0.0 {
            Interval::new(div_lo(b, d), div_hi(a, c))
        } else if b <= 0.0 {
            Interval::new(div_lo(b, c), div_hi(a, d))
        } else {
            Interval::new(div_lo(b, d), div_hi(a, d))
        }
    }

    pub fn recip(&self) -> Interval {
        Interval::ONE.div(self)
    }

    /// Enclosure of `k^e` for integer `k` (exact while within 2^53).
    pub fn int_pow(k: i64, e: u32) -> Interval {
        let mut r = Interval::ONE;
        let base = Interval::point(k as f64);
        for _ in 0..e {
            r = r * base;
        }
        r
    }

    /// Inflate outward: multiply the radius by `factor` and add `abs` on
    /// both sides. Exact zero intervals stay zero only if `abs == 0`.
    pub fn inflate(&self, factor: f64, abs: f64) -> Interval {
        let m = self.mid();
        let r = self.rad();
        let r2 = add_hi(mul_hi(r, factor), abs);
        Interval::new(add_lo(m, -r2), add_hi(m, r2))
    }
}

impl Add for Interval {
    type Output = Interval;
    #[inline]
    fn add(self, rhs: Interval) -> Interval {
        Interval {
            lo: add_lo(self.lo, rhs.lo),
            hi: add_hi(self.hi, rhs.hi),
        }
    }
}

impl Sub for Interval {
    type Output = Interval;
    #[inline]
    fn sub(self, rhs: Interval) -> Interval {
        Interval {
            lo: add_lo(self.lo, -rhs.hi),
            hi: add_hi(self.hi, -rhs.lo),
        }
    }
}

impl Neg for Interval {
    type Output = Interval;
    #[inline]
    fn neg(self) -> Interval {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl Mul for Interval {
    type Output = Interval;
    #[inline]
    fn mul(self, rhs: Interval) -> Interval {
        let (a, b) = (self.lo, self.hi);
        let (c, d) = (rhs.lo, rhs.hi);
        if a >= 0.0 {
            if c >= 0.0 {
                Interval {
                    lo: mul_lo(a, c),
                    hi: mul_hi(b, d),
                }
            } else if d <= 0.0 {
                Interval {
                    lo: mul_lo(b, c),
                    hi: mul_hi(a, d),
                }
            } else {
                Interval {
                    lo: mul_lo(b, c),
                    hi: mul_hi(b, d),
                }
            }
        } else if b <= 0.0 {
            if c >= 0.0 {
                Interval {
                    lo: mul_lo(a, d),
                    hi: mul_hi(b, c),
                }
            } else if d <= 0.0 {
                Interval {
                    lo: mul_lo(b, d),
                    hi: mul_hi(a, c),
                }
            } else {
                Interval {
                    lo: mul_lo(a, d),
                    hi: mul_hi(a, c),
                }
            }
        } else if c >= 0.0 {
            Interval {
                lo: mul_lo(a, d),
                hi: mul_hi(b, d),
            }
        } else if d <= 0.0 {
            Interval {
                lo: mul_lo(b, c),
                hi: mul_hi(a, c),
            }
        } else {
            Interval {
                lo: mul_lo(a, d).min(mul_lo(b, c)),
                hi: mul_hi(a, c).max(mul_hi(b, d)),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_examples() {
        let r = Interval::new(1.0, 2.0) + Interval::new(3.0, 4.0);
        assert_eq!(r, Interval::new(4.0, 6.0));
        let r = Interval::ZERO + Interval::new(-1.0, 5.0);
        assert_eq!(r, Interval::new(-1.0, 5.0));
        let r = Interval::new(-1.0, 1.0) + Interval::new(-1.0, 1.0);
        assert_eq!(r, Interval::new(-2.0, 2.0));
    }

    #[test]
    fn mul_examples() {
        let r = Interval::new(1.0, 2.0) * Interval::new(-3.0, 4.0);
        assert_eq!(r, Interval::new(-6.0, 8.0));
        let r = Interval::ZERO * Interval::new(-9.0, 9.0);
        assert_eq!(r, Interval::ZERO);
        let r = Interval::new(-2.0, -1.0) * Interval::new(-2.0, -1.0);
        assert_eq!(r, Interval::new(1.0, 4.0));
    }

    #[test]
    fn max_abs_examples() {
        assert_eq!(Interval::new(-3.0, 2.0).max_abs(), 3.0);
        assert_eq!(Interval::ZERO.max_abs(), 0.0);
        assert_eq!(Interval::new(1.0, 5.0).max_abs(), 5.0);
        // exact for representable symmetric intervals
        let a = 0.1f64;
        assert_eq!(Interval::sym(a).max_abs(), a);
    }

    #[test]
    fn outward_rounding_is_sound() {
        let x = Interval::point(0.1) + Interval::point(0.2);
        assert!(x.lo() < 0.3 + 1e-16 && x.hi() > 0.3 - 1e-16);
        assert!(x.lo() <= x.hi());
        // 0.1 + 0.2 is inexact in binary; the enclosure must be widened
        assert!(x.hi() - x.lo() > 0.0);
    }

    #[test]
    fn exact_zero_preserved() {
        let z = Interval::ZERO;
        let a = Interval::new(-0.7, 0.3);
        assert!((z * a).is_zero());
        assert!((z + z).is_zero());
        assert_eq!(z + a, a);
    }

    #[test]
    fn division_encloses() {
        let x = Interval::new(1.0, 2.0);
        let y = Interval::new(3.0, 4.0);
        let q = x.div(&y);
        assert!(q.lo() <= 0.25 && q.hi() >= 2.0 / 3.0);
        let q2 = x.div(&Interval::new(-4.0, -3.0));
        assert!(q2.contains(-0.5));
    }

    #[test]
    #[should_panic]
    fn inverted_interval_panics() {
        let _ = Interval::new(2.0, 1.0);
    }

    #[test]
    fn subnormal_products_enclose() {
        let tiny = 1e-310;
        let r = Interval::point(tiny) * Interval::point(0.5);
        assert!(r.lo() <= tiny * 0.5 && r.hi() >= tiny * 0.5);
        assert!(r.lo() < r.hi() || r.lo() == tiny * 0.5);
    }
}
