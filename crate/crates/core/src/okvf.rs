//! The Ohta-Kawasaki vector field in cosine-Fourier coordinates:
//!
//!   da_k/dt = mu_k a_k - lambda k^2 (pi/L)^2 (a*a*a)_k,
//!   mu_k    = -k^4 (pi/L)^4 + lambda k^2 (pi/L)^2 - lambda sigma,
//!
//! with zero mass (a_0 = 0) and cosine symmetry (a_{-k} = a_k). Provides
//! linear eigenvalues, the Galerkin right-hand side on interval vectors,
//! convolution-range bounds, Jacobian enclosures, and the Galerkin-error
//! perturbation used by the differential inclusion.

use crate::interval::{add_hi, div_hi, mul_hi, Interval};
use crate::linalg::{IMatrix, IVector};
use crate::profile::MagProfile;
use crate::scb::{pow_int_lo, ScbSet};
use crate::Error;

/// Domain length, kept symbolic for the canonical 2*pi case so that
/// (pi/L)^2 = 1/4 is exact and the dominant linear term carries no
/// avoidable interval growth.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DomainLen {
    TwoPi,
    Numeric(f64),
}

impl DomainLen {
    pub fn approx(&self) -> f64 {
        match self {
            DomainLen::TwoPi => 2.0 * std::f64::consts::PI,
            DomainLen::Numeric(l) => *l,
        }
    }
}

#[derive(Clone, Debug)]
pub struct OkParams {
    pub lambda: Interval,
    pub sigma: Interval,
    pub domain_len: DomainLen,
    /// Total mass; fixed to zero in this artifact.
    pub mu_mass: f64,
    /// Test hook: disable the cubic term to expose the pure linear flow.
    pub cubic_enabled: bool,
    pi2_l2: Interval,
    pi4_l4: Interval,
    lam_pi2_l2: Interval,
    lam_sigma: Interval,
}

impl OkParams {
    pub fn new(lambda: Interval, sigma: Interval, domain_len: DomainLen) -> Result<OkParams, Error> {
        if lambda.lo() <= 0.0 {
            return Err(Error::Invalid("lambda must be positive".into()));
        }
        if sigma.lo() < 0.0 {
            return Err(Error::Invalid("sigma must be nonnegative".into()));
        }
        let pi2_l2 = match domain_len {
            DomainLen::TwoPi => Interval::point(0.25),
            DomainLen::Numeric(l) => {
                if l <= 0.0 {
                    return Err(Error::Invalid("domain length must be positive".into()));
                }
                Interval::PI.div(&Interval::point(l)).square()
            }
        };
        let pi4_l4 = pi2_l2.square();
        Ok(OkParams {
            lambda,
            sigma,
            domain_len,
            mu_mass: 0.0,
            cubic_enabled: true,
            pi2_l2,
            pi4_l4,
            lam_pi2_l2: lambda * pi2_l2,
            lam_sigma: lambda * sigma,
        })
    }

    /// The proof instance: lambda = 4, sigma = 4/pi^2, L = 2*pi, obtained
    /// by rescaling (16 pi^2, 16) from the unit domain.
    pub fn canonical() -> OkParams {
        let sigma = Interval::point(4.0).div(&Interval::PI.square());
        OkParams::new(Interval::point(4.0), sigma, DomainLen::TwoPi).unwrap()
    }

    #[inline]
    pub fn pi2_l2(&self) -> Interval {
        self.pi2_l2
    }

    #[inline]
    pub fn lam_pi2_l2(&self) -> Interval {
        self.lam_pi2_l2
    }

    /// Coefficient of the cubic term in F_k: lambda k^2 (pi/L)^2.
    #[inline]
    pub fn cubic_coeff(&self, k: usize) -> Interval {
        self.lam_pi2_l2.mul_f64((k * k) as f64)
    }

    pub fn without_cubic(&self) -> OkParams {
        let mut p = self.clone();
        p.cubic_enabled = false;
        p
    }
}

/// Rescale parameters from the unit domain to length `l`:
/// lambda = lambda0 / l^2, sigma = sigma0 / l^2.
pub fn rescale_params(
    lambda0: Interval,
    sigma0: Interval,
    l: Interval,
) -> Result<(Interval, Interval), Error> {
    if lambda0.lo() <= 0.0 || sigma0.lo() < 0.0 || l.lo() <= 0.0 {
        return Err(Error::Invalid("rescale inputs must be positive".into()));
    }
    let l2 = l.square();
    Ok((lambda0.div(&l2), sigma0.div(&l2)))
}

/// Enclosure of mu_k = -k^4 (pi/L)^4 + lambda k^2 (pi/L)^2 - lambda sigma.
pub fn linear_eigenvalue(k: usize, p: &OkParams) -> Interval {
    assert!(k >= 1, "mode index must be at least 1");
    let k2 = (k * k) as f64;
    let k4 = Interval::point(k2).square();
    -(k4 * p.pi4_l4) + p.lam_pi2_l2.mul_f64(k2) - p.lam_sigma
}

/// Table of mu_1..mu_n.
pub fn eigenvalue_table(n: usize, p: &OkParams) -> Vec<Interval> {
    (1..=n).map(|k| linear_eigenvalue(k, p)).collect()
}

/// Cubic convolution (a*a*a)_k of a finite symmetric coefficient vector,
/// for k = 1..=out_len, by two pairwise stages. Interval dependency is
/// handled with explicit squares so that same-index products stay
/// nonnegative.
pub fn cube_direct(a: &[Interval], out_len: usize) -> Vec<Interval> {
    let m = a.len() as i64; // modes 1..=m
    let pair = pair_conv(a);
    let mode = |j: i64| -> Interval {
        let aj = j.abs();
        if aj == 0 || aj > m {
            Interval::ZERO
        } else {
            a[(aj - 1) as usize]
        }
    };
    let pair_at = |j: i64| -> Interval {
        let aj = j.abs() as usize;
        if aj < pair.len() {
            pair[aj]
        } else {
            Interval::ZERO
        }
    };
    (1..=out_len as i64)
        .map(|k| {
            let mut acc = Interval::ZERO;
            for j in -m..=m {
                if j == 0 {
                    continue;
                }
                let s = pair_at(k - j);
                if s.is_zero() {
                    continue;
                }
                acc = acc + mode(j) * s;
            }
            acc
        })
        .collect()
}

/// Pairwise convolution table s_n = (a*a)_n for n = 0..=2m. Same-index
/// products (i = j, and i = -j at n = 0) go through interval squares so
/// the result respects the sign correlation of a set convolved with
/// itself.
pub fn pair_conv(a: &[Interval]) -> Vec<Interval> {
    let m = a.len() as i64;
    let mode = |j: i64| -> Interval {
        let aj = j.abs();
        if aj == 0 || aj > m {
            Interval::ZERO
        } else {
            a[(aj - 1) as usize]
        }
    };
    (0..=2 * m)
        .map(|n| {
            let mut acc = Interval::ZERO;
            if n == 0 {
                // (a*a)_0 = 2 sum_{i>=1} a_i^2
                for i in 1..=m {
                    acc = acc + mode(i).square().mul_pow2(1);
                }
                return acc;
            }
            let lo = (n - m).max(-m);
            let hi = n.div_euclid(2);
            for i in lo..=hi {
                let j = n - i;
                if i == j {
                    acc = acc + mode(i).square();
                } else {
                    let t = mode(i) * mode(j);
                    if !t.is_zero() {
                        acc = acc + t.mul_pow2(1);
                    }
                }
            }
            acc
        })
        .collect()
}

/// Galerkin right-hand side F_k for k = 1..=m on an interval vector.
pub fn rhs_galerkin(a: &IVector, p: &OkParams) -> IVector {
    let m = a.len();
    let cube = if p.cubic_enabled {
        cube_direct(&a.0, m)
    } else {
        vec![Interval::ZERO; m]
    };
    let mut out = IVector::zeros(m);
    for k in 1..=m {
        let lin = linear_eigenvalue(k, p) * a.0[k - 1];
        out.0[k - 1] = lin - p.cubic_coeff(k) * cube[k - 1];
    }
    out
}

/// Entrywise enclosure of all self-convolutions (x*x)_k, x in `set`,
/// explicit for k = 0..=2M with a decaying bound beyond.
#[derive(Clone, Debug)]
pub struct ConvBounds {
    pub entries: Vec<Interval>,
    pub tail_c: f64,
}

impl ConvBounds {
    pub fn at(&self, idx: i64) -> Interval {
        let a = idx.unsigned_abs() as usize;
        if a < self.entries.len() {
            self.entries[a]
        } else {
            Interval::sym(div_hi(self.tail_c, pow_int_lo(a, crate::scb::TAIL_EXPONENT)))
        }
    }

    pub fn max_abs_at(&self, idx: i64) -> f64 {
        self.at(idx).max_abs()
    }
}

pub fn conv_bounds(set: &ScbSet) -> ConvBounds {
    let m = set.explicit_len() as i64;
    let tail = set.tail;
    let mode = |j: i64| -> Interval {
        if j == 0 {
            Interval::ZERO
        } else {
            set.mode(j.unsigned_abs() as usize)
        }
    };
    // l1 bound: 2 * (sum of finite mags + tail sum), rounded up
    let mut l1 = 0.0f64;
    for k in 1..=m {
        l1 = add_hi(l1, set.mode(k as usize).max_abs());
    }
    let tail_sum = div_hi(tail.c, mul_hi(5.0, pow_int_lo(m as usize, 5)));
    l1 = mul_hi(2.0, add_hi(l1, tail_sum));
    // contributions with an index beyond M, uniform over k
    let cross_tail = mul_hi(2.0, mul_hi(tail_sum, l1));
    let pad = Interval::sym(cross_tail);

    let entries: Vec<Interval> = (0..=2 * m)
        .map(|n| {
            let mut acc = Interval::ZERO;
            if n == 0 {
                for i in 1..=m {
                    acc = acc + mode(i).square().mul_pow2(1);
                }
                return acc + pad;
            }
            let lo = n - m;
            let hi = n.div_euclid(2);
            for i in lo.max(-m)..=hi {
                let j = n - i;
                if i == j {
                    acc = acc + mode(i).square();
                } else {
                    let t = mode(i) * mode(j);
                    if !t.is_zero() {
                        acc = acc + t.mul_pow2(1);
                    }
                }
            }
            acc + pad
        })
        .collect();
    // beyond 2M one factor has index > k/2 > M: |(x*x)_k| <= 2 l1 C 64/k^6
    let tail_c = mul_hi(128.0, mul_hi(l1, tail.c));
    ConvBounds { entries, tail_c }
}

/// Enclosure of the Jacobian block (DF)_{k,l} for k,l = 1..=m:
/// delta_{kl} mu_k - 3 lambda k^2 (pi/L)^2 (C_{k-l} + C_{k+l}).
pub fn jacobian_enclosure(cb: &ConvBounds, p: &OkParams, m: usize) -> IMatrix {
    let mut out = IMatrix::zeros(m, m);
    for k in 1..=m {
        let coeff = p.cubic_coeff(k).mul_f64(3.0);
        for l in 1..=m {
            let conv = cb.at(k as i64 - l as i64) + cb.at((k + l) as i64);
            let mut e = -(coeff * conv);
            if k == l {
                e = e + linear_eigenvalue(k, p);
            }
            out[(k - 1, l - 1)] = e;
        }
    }
    out
}

/// Single Jacobian entry, for indices beyond a precomputed block.
pub fn df_entry(k: usize, l: usize, cb: &ConvBounds, p: &OkParams) -> Interval {
    let conv = cb.at(k as i64 - l as i64) + cb.at((k + l) as i64);
    let mut e = -(p.cubic_coeff(k).mul_f64(3.0) * conv);
    if k == l {
        e = e + linear_eigenvalue(k, p);
    }
    e
}

/// Interval enclosure of the self-convolution cube (x*x*x)_k for
/// k = 1..=out over a set with explicit interval modes 1..=M and a
/// decaying tail; couplings through tail indices enter as symmetric pads.
/// Unlike magnitude bounds this keeps signs, which is what makes slaved
/// stiff modes tight.
pub fn cube_extended(
    x: &[Interval],
    tail: &crate::scb::TailBound,
    out: usize,
    sym_class: Option<usize>,
) -> Vec<Interval> {
    let m = x.len() as i64;
    assert!(out <= x.len());
    assert_eq!(tail.start, x.len() + 1);
    let pair = pair_conv(x);
    // magnitude data for the tail pads
    let mut l1 = 0.0f64;
    let mut sup = 0.0f64;
    for v in x {
        l1 = add_hi(l1, v.max_abs());
        sup = sup.max(v.max_abs());
    }
    let tail_mass = div_hi(tail.c, mul_hi(5.0, pow_int_lo(x.len(), 5)));
    let tail_top = if tail.c == 0.0 { 0.0 } else { tail.value_at(tail.start) };
    sup = sup.max(tail_top);
    l1 = mul_hi(2.0, add_hi(l1, tail_mass));
    let pair_pad = mul_hi(2.0, mul_hi(tail_mass, sup));
    let mut pair_sup = pair_pad;
    for v in &pair {
        pair_sup = pair_sup.max(add_hi(v.max_abs(), pair_pad));
    }
    // the fallback beyond the pair table is nonincreasing; cover its
    // boundary value too
    pair_sup = pair_sup.max(mul_hi(
        2.0,
        mul_hi(l1, div_hi(tail.c, pow_int_lo(tail.start, 6))),
    ));
    let cube_pad = Interval::sym(mul_hi(2.0, mul_hi(tail_mass, pair_sup)));
    let pair_pad = Interval::sym(pair_pad);
    // pair entries of a class state are supported on multiples of q
    let in_class = |j: i64| -> bool {
        sym_class
            .map(|q| j.rem_euclid(q as i64) == 0)
            .unwrap_or(true)
    };
    let pair_at = |j: i64| -> Interval {
        if !in_class(j) {
            return Interval::ZERO;
        }
        let a = j.unsigned_abs() as usize;
        if a < pair.len() {
            if pair_pad.is_zero() {
                pair[a]
            } else {
                pair[a] + pair_pad
            }
        } else {
            // |(x*x)_j| <= 2 l1 sup_{>=j/2} for j beyond the table
            Interval::sym(mul_hi(
                2.0,
                mul_hi(l1, div_hi(tail.c, pow_int_lo(a.div_ceil(2).max(tail.start), 6))),
            ))
        }
    };
    (1..=out as i64)
        .map(|k| {
            // inside a verified invariant class, couplings into non-class
            // modes vanish identically
            let class_zero = sym_class
                .map(|q| (k as usize) % q != 0)
                .unwrap_or(false);
            let mut acc = Interval::ZERO;
            for j in -m..=m {
                if j == 0 {
                    continue;
                }
                let xv = x[(j.abs() - 1) as usize];
                if xv.is_zero() {
                    continue;
                }
                let pv = pair_at(k - j);
                if !pv.is_zero() {
                    acc = acc + xv * pv;
                }
            }
            if tail.c == 0.0 || class_zero {
                acc
            } else {
                acc + cube_pad
            }
        })
        .collect()
}

/// Galerkin-error perturbation: [delta]_k encloses F_k(full set) minus
/// F_k(first m modes) for k = 1..=m. Symmetric about zero by magnitude
/// bookkeeping: |delta_k| <= lambda k^2 (pi/L)^2 * (3 llh + 3 lhh + hhh)_k
/// where l is the low-mode profile and h the mid-zone/tail profile.
pub fn galerkin_perturbation(
    profile: &MagProfile,
    p: &OkParams,
    m: usize,
    sym_class: Option<usize>,
) -> IVector {
    let d = profile.cube_high_part(m);
    let mut out = IVector::zeros(m);
    for k in 1..=m {
        if sym_class.map(|q| k % q != 0).unwrap_or(false) {
            continue;
        }
        let bound = mul_hi(p.cubic_coeff(k).max_abs(), d[k - 1]);
        out.0[k - 1] = Interval::sym(bound);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_parameters() {
        let p = OkParams::canonical();
        // sigma = 4/pi^2 ~ 0.405284735
        assert!((p.sigma.mid() - 0.405284735).abs() < 1e-9);
        let pi = std::f64::consts::PI;
        assert!((p.sigma.mid() - 4.0 / (pi * pi)).abs() < 1e-15);
        assert!(p.sigma.width() < 1e-15);
        assert_eq!(p.pi2_l2, Interval::point(0.25));
        assert_eq!(p.lam_pi2_l2, Interval::point(1.0));
    }

    #[test]
    fn rescale_examples() {
        let pi2 = Interval::PI.square();
        let two_pi = Interval::PI.mul_pow2(1);
        // (16 pi^2, 16, 2 pi) -> (4, 4/pi^2)
        let (lam, sig) = rescale_params(
            pi2.mul_f64(16.0),
            Interval::point(16.0),
            two_pi,
        )
        .unwrap();
        assert!(lam.contains(4.0) && lam.width() < 1e-13);
        assert!(sig.contains(0.4052847345693511) && sig.width() < 1e-14);
        // identity rescale
        let (lam, sig) =
            rescale_params(Interval::point(7.0), Interval::point(3.0), Interval::ONE).unwrap();
        assert_eq!(lam, Interval::point(7.0));
        assert_eq!(sig, Interval::point(3.0));
        // (4 pi^2, 9, 2 pi) -> (1, 9/(4 pi^2))
        let (lam, sig) =
            rescale_params(pi2.mul_f64(4.0), Interval::point(9.0), two_pi).unwrap();
        assert!(lam.contains(1.0));
        assert!(sig.contains(9.0 / (4.0 * std::f64::consts::PI * std::f64::consts::PI)));
        assert!(rescale_params(Interval::point(-1.0), Interval::ONE, Interval::ONE).is_err());
    }

    #[test]
    fn eigenvalue_sign_pattern() {
        let p = OkParams::canonical();
        // derived: mu_k = -k^4/16 + k^2 - 16/pi^2
        let pi = std::f64::consts::PI;
        let ls = 16.0 / (pi * pi);
        let mu1 = linear_eigenvalue(1, &p);
        let mu2 = linear_eigenvalue(2, &p);
        let mu3 = linear_eigenvalue(3, &p);
        assert!((mu1.mid() - (0.9375 - ls)).abs() < 1e-13, "{mu1:?}");
        assert!((mu2.mid() - (3.0 - ls)).abs() < 1e-13, "{mu2:?}");
        assert!((mu3.mid() - (3.9375 - ls)).abs() < 1e-13, "{mu3:?}");
        // five-decimal values
        assert!((mu1.mid() + 0.68364).abs() < 1e-5);
        assert!((mu2.mid() - 1.37886).abs() < 1e-5);
        assert!((mu3.mid() - 2.31636).abs() < 1e-5);
        for k in 1..=60 {
            let mu = linear_eigenvalue(k, &p);
            if k == 2 || k == 3 {
                assert!(mu.lo() > 0.0, "mu_{k} should be positive");
            } else {
                assert!(mu.hi() < 0.0, "mu_{k} should be negative");
            }
        }
        // monotone decrease beyond k = 4
        let mut prev = linear_eigenvalue(4, &p).hi();
        for k in 5..=60 {
            let cur = linear_eigenvalue(k, &p).hi();
            assert!(cur < prev);
            prev = cur;
        }
    }

    #[test]
    fn rhs_zero_is_equilibrium() {
        let p = OkParams::canonical();
        let f = rhs_galerkin(&IVector::zeros(10), &p);
        assert!(f.0.iter().all(|x| x.is_zero()));
    }

    #[test]
    fn rhs_single_mode_example() {
        // a_3 = 0.1: F_3 = mu_3 * 0.1 - 9 * 3 * 0.001, F_9 = -81 * 0.001
        let p = OkParams::canonical();
        let mut a = IVector::zeros(9);
        a.0[2] = Interval::point(0.1);
        let f = rhs_galerkin(&a, &p);
        let expect3 = linear_eigenvalue(3, &p).mid() * 0.1 - 9.0 * 0.003;
        assert!((f.0[2].mid() - expect3).abs() < 1e-15, "{:?} vs {}", f.0[2], expect3);
        assert!((f.0[2].mid() - 0.204636).abs() < 1e-6);
        assert!(f.0[2].width() < 1e-13);
        assert!((f.0[8].mid() + 0.081).abs() < 1e-15);
        assert!(f.0[8].width() < 1e-13);
        for k in [1usize, 2, 4, 5, 6, 7, 8] {
            assert!(f.0[k - 1].is_zero(), "mode {k} must stay exactly zero");
        }
    }

    #[test]
    fn rhs_preserves_symmetry_class() {
        let p = OkParams::canonical();
        let mut a = IVector::zeros(12);
        a.0[2] = Interval::new(0.05, 0.75);
        a.0[5] = Interval::new(-0.3, 0.1);
        a.0[8] = Interval::sym(0.2);
        let f = rhs_galerkin(&a, &p);
        for k in 1..=12usize {
            if k % 3 != 0 {
                assert!(f.0[k - 1].is_zero(), "mode {k} must stay exactly zero");
            }
        }
    }

    #[test]
    fn conv_bounds_single_mode() {
        // a_3 in [-t, t]: C_0 in [0, 2t^2], C_6 = [0, t^2] by square awareness
        let t = 0.075;
        let mut set = ScbSet::zero(10);
        set.finite.0[2] = Interval::sym(t);
        let cb = conv_bounds(&set);
        assert!(cb.at(0).lo() >= 0.0);
        assert!((cb.at(0).hi() - 2.0 * t * t).abs() < 1e-17);
        assert!(cb.at(6).lo() >= 0.0);
        assert!((cb.at(6).hi() - t * t).abs() < 1e-17);
        assert!(cb.at(1).is_zero() || cb.at(1).max_abs() < 1e-30);
        assert_eq!(cb.tail_c, 0.0);
    }

    #[test]
    fn conv_bounds_monotone() {
        let mut small = ScbSet::zero(8);
        small.finite.0[1] = Interval::sym(0.05);
        small.finite.0[4] = Interval::new(-0.01, 0.02);
        let mut big = ScbSet::zero(8);
        big.finite.0[1] = Interval::sym(0.1);
        big.finite.0[4] = Interval::new(-0.02, 0.04);
        let cs = conv_bounds(&small);
        let cbg = conv_bounds(&big);
        for n in 0..cs.entries.len() {
            assert!(
                cbg.entries[n].contains_interval(&cs.entries[n]),
                "entry {n}"
            );
        }
    }

    #[test]
    fn jacobian_at_zero_is_diagonal() {
        let p = OkParams::canonical();
        let set = ScbSet::zero(6);
        let cb = conv_bounds(&set);
        let j = jacobian_enclosure(&cb, &p, 6);
        for k in 1..=6usize {
            for l in 1..=6usize {
                if k == l {
                    let mu = linear_eigenvalue(k, &p);
                    assert!(j[(k - 1, l - 1)].contains(mu.mid()));
                } else {
                    assert!(j[(k - 1, l - 1)].is_zero());
                }
            }
        }
        assert!((j[(1, 1)].mid() - 1.37886).abs() < 1e-5);
    }
}
