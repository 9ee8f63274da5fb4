//! Verified elementary functions used by the integrator and the FFT
//! twiddle tables: exp, the phi-function (e^z - 1)/z, and sine/cosine of
//! rational multiples of pi. All are Taylor series with explicit interval
//! remainder terms; no libm calls enter any verified path.

use crate::interval::Interval;

fn factorial(n: u32) -> f64 {
    // exact in f64 up to 18!
    let mut f = 1.0f64;
    for i in 2..=n as u64 {
        f *= i as f64;
    }
    f
}

/// Series enclosure of e^x for |x| <= 0.5.
fn exp_small(x: Interval) -> Interval {
    debug_assert!(x.max_abs() <= 0.5 + 1e-12);
    const TERMS: u32 = 17;
    let mut sum = Interval::ZERO;
    // Horner from the highest kept order
    for i in (0..=TERMS).rev() {
        sum = sum * x + Interval::ONE.div(&Interval::point(factorial(i)));
    }
    // |R| <= |x|^(T+1)/(T+1)! * 1/(1 - |x|/(T+2))
    let m = x.max_abs();
    let mut pow = Interval::point(1.0);
    let mi = Interval::point(m);
    for _ in 0..=TERMS {
        pow = pow * mi;
    }
    let denom = Interval::point(factorial(TERMS + 1))
        * (Interval::ONE - mi.mul_f64(1.0 / (TERMS as f64 + 2.0)));
    let rem = pow.div(&denom).max_abs();
    sum + Interval::sym(rem)
}

/// Enclosure of e^x via argument halving and repeated squaring.
pub fn exp(x: Interval) -> Interval {
    // e^x is monotone: evaluate at both endpoints
    let lo = exp_point(x.lo()).lo();
    let hi = exp_point(x.hi()).hi();
    Interval::new(lo.max(0.0), hi)
}

fn exp_point(x: f64) -> Interval {
    let mut k = 0;
    let mut ax = x.abs();
    while ax > 0.5 {
        ax *= 0.5;
        k += 1;
    }
    let base = exp_small(Interval::point(x).mul_pow2(-k));
    let mut r = base;
    for _ in 0..k {
        r = r.square();
    }
    // e^x > 0 always; the upper chain rounds up so r.hi() stays positive
    Interval::new(r.lo().max(0.0), r.hi())
}

/// Enclosure of phi(z) = (e^z - 1)/z, with phi(0) = 1.
///
/// phi(z) = integral of e^{zt} over t in [0,1], whose derivative
/// integral(t e^{zt}) is positive, so phi is increasing on R; endpoint
/// evaluation is rigorous.
pub fn phi(z: Interval) -> Interval {
    let lo = phi_point(z.lo()).lo();
    let hi = phi_point(z.hi()).hi();
    Interval::new(lo.max(0.0), hi)
}

fn phi_point(z: f64) -> Interval {
    if z.abs() <= 0.5 {
        // sum z^i/(i+1)! with remainder
        const TERMS: u32 = 15;
        let zi = Interval::point(z);
        let mut sum = Interval::ZERO;
        for i in (0..=TERMS).rev() {
            sum = sum * zi + Interval::ONE.div(&Interval::point(factorial(i + 1)));
        }
        let m = z.abs();
        let mut pow = 1.0f64;
        for _ in 0..=TERMS {
            pow = crate::interval::mul_hi(pow, m);
        }
        let rem = crate::interval::div_hi(pow, factorial(TERMS + 2)) * 2.0;
        sum + Interval::sym(rem)
    } else {
        let zi = Interval::point(z);
        (exp(zi) - Interval::ONE).div(&zi)
    }
}

/// Factorial enclosure; exact below 19!, a one-ulp interval beyond.
fn fact_enclosure(n: u32) -> Interval {
    let mut f = Interval::ONE;
    for i in 2..=n as u64 {
        f = f * Interval::point(i as f64);
    }
    f
}

/// Sine and cosine series, valid for |x| <= 3.2 (covers twiddle angles).
fn sincos_series(x: Interval) -> (Interval, Interval) {
    assert!(x.max_abs() <= 3.2);
    const TERMS: u32 = 13; // up to x^26 / x^27
    let x2 = x.square();
    // cos: sum_{i} (-1)^i x^(2i)/(2i)!  -- Horner in x^2
    let mut c = Interval::ZERO;
    let mut s = Interval::ZERO;
    for i in (0..=TERMS).rev() {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let c_coeff = Interval::point(sign).div(&fact_enclosure(2 * i));
        let s_coeff = Interval::point(sign).div(&fact_enclosure(2 * i + 1));
        c = c * x2 + c_coeff;
        s = s * x2 + s_coeff;
    }
    s = s * x;
    // remainder: |x|^(2T+2)/(2T+2)! * e^{|x|} covers both series
    let m = x.max_abs();
    let mut pow = 1.0f64;
    for _ in 0..(2 * TERMS + 2) {
        pow = crate::interval::mul_hi(pow, m);
    }
    let rem = crate::interval::mul_hi(
        crate::interval::div_hi(pow, fact_enclosure(2 * TERMS + 2).lo()),
        27.0,
    );
    (s + Interval::sym(rem), c + Interval::sym(rem))
}

/// Enclosures of (sin, cos) of `num * pi / den`.
pub fn sincos_pi_frac(num: i64, den: i64) -> (Interval, Interval) {
    assert!(den > 0);
    // reduce num*pi/den into [-pi, pi] by exact integer arithmetic
    let two_den = 2 * den;
    let mut r = num.rem_euclid(two_den); // in [0, 2den)
    let mut flip = 1.0;
    if r > den {
        r -= two_den; // now in (-den, 0]
    }
    // |r/den| <= 1 so |angle| <= pi; split once more to stay within series range
    let mut half = false;
    if r.abs() * 2 > den {
        // use angle - pi (or + pi), flipping both signs
        r = if r > 0 { r - den } else { r + den };
        flip = -1.0;
        half = true;
    }
    let _ = half;
    let angle = Interval::PI.mul_f64(r as f64).div(&Interval::point(den as f64));
    let (s, c) = sincos_series(angle);
    (s.mul_f64(flip), c.mul_f64(flip))
}

/// atan via its alternating series; only used by the pi self-check test.
pub fn atan_small(x: Interval) -> Interval {
    assert!(x.max_abs() < 0.25);
    const TERMS: u32 = 12;
    let x2 = x.square();
    let mut sum = Interval::ZERO;
    for i in (0..=TERMS).rev() {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let coeff = Interval::point(sign).div(&Interval::point((2 * i + 1) as f64));
        sum = sum * x2 + coeff;
    }
    sum = sum * x;
    let m = x.max_abs();
    let mut pow = 1.0f64;
    for _ in 0..(2 * TERMS + 3) {
        pow = crate::interval::mul_hi(pow, m);
    }
    sum + Interval::sym(pow)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_at_known_points() {
        let e1 = exp(Interval::point(1.0));
        assert!(e1.contains(std::f64::consts::E));
        assert!(e1.width() < 1e-13);
        let em = exp(Interval::point(-5.88));
        assert!(em.contains((-5.88f64).exp()));
        assert!(em.width() / em.lo() < 1e-12);
        // deep underflow stays a valid enclosure
        let tiny = exp(Interval::point(-2.0e5));
        assert!(tiny.lo() >= 0.0 && tiny.hi() <= f64::MIN_POSITIVE);
    }

    #[test]
    fn phi_matches_reference() {
        for &z in &[-20.0, -5.88, -0.3, -1e-9, 0.0, 0.2] {
            let p = phi(Interval::point(z));
            let reference = if z == 0.0 { 1.0 } else { z.exp_m1() / z };
            assert!(
                p.lo() <= reference + 1e-12 && p.hi() >= reference - 1e-12,
                "phi({z}) = {p:?} vs {reference}"
            );
        }
        // increasing in z
        assert!(phi(Interval::point(-3.0)).hi() < phi(Interval::point(0.0)).lo());
    }

    #[test]
    fn pi_enclosure_via_machin() {
        // 16 atan(1/5) - 4 atan(1/239) encloses pi independently
        let a5 = atan_small(Interval::point(1.0).div(&Interval::point(5.0)));
        let a239 = atan_small(Interval::point(1.0).div(&Interval::point(239.0)));
        let pi = a5.mul_f64(16.0) - a239.mul_f64(4.0);
        assert!(pi.lo() <= Interval::PI.lo() && Interval::PI.hi() <= pi.hi() + 1e-15);
        assert!(pi.intersect(&Interval::PI).is_some());
        // the hard-coded constant really contains the Machin value
        assert!(Interval::PI.lo() <= pi.hi() && pi.lo() <= Interval::PI.hi());
    }

    #[test]
    fn twiddle_angles() {
        let (s, c) = sincos_pi_frac(1, 2);
        assert!(s.contains(1.0) && c.contains(0.0));
        let (s, c) = sincos_pi_frac(1, 4);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!(s.contains(r) && c.contains(r));
        let (s, c) = sincos_pi_frac(0, 16);
        assert!(s.contains(0.0) && c.contains(1.0));
        let (s, c) = sincos_pi_frac(33, 16); // wraps past 2 pi
        let ang = std::f64::consts::PI / 16.0;
        assert!(s.contains(ang.sin()) && c.contains(ang.cos()));
        // the f64 oracle itself carries argument rounding, so compare with
        // a small tolerance after exact integer angle reduction
        for k in -40i64..40 {
            let (s, c) = sincos_pi_frac(k, 16);
            let kr = k.rem_euclid(32);
            let ang = kr as f64 * std::f64::consts::PI / 16.0;
            assert!(
                s.lo() - 5e-15 <= ang.sin() && ang.sin() <= s.hi() + 5e-15,
                "sin {k}pi/16"
            );
            assert!(
                c.lo() - 5e-15 <= ang.cos() && ang.cos() <= c.hi() + 5e-15,
                "cos {k}pi/16"
            );
            assert!(s.width() < 1e-14 && c.width() < 1e-14);
        }
    }
}
