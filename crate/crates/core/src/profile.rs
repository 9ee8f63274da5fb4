//! Magnitude profiles: componentwise upper bounds |a_k| <= p_k for a full
//! phase-space set (explicit part plus algebraic tail), with upward-rounded
//! convolution bounds. These power the Galerkin-error perturbation, the
//! mid-zone right-hand-side bounds, and the tail-isolation inequalities.

use crate::interval::{add_hi, div_hi, mul_hi};
use crate::scb::{pow_int_hi, pow_int_lo, ScbSet, TAIL_EXPONENT};

/// Nonnegative magnitude bounds for modes 1..=M plus `tail_c / k^6` beyond.
#[derive(Clone, Debug)]
pub struct MagProfile {
    pub fin: Vec<f64>,
    pub tail_c: f64,
}

impl MagProfile {
    pub fn from_set(set: &ScbSet) -> MagProfile {
        MagProfile {
            fin: set.magnitudes(set.explicit_len()),
            tail_c: set.tail.c,
        }
    }

    pub fn explicit_len(&self) -> usize {
        self.fin.len()
    }

    /// Magnitude bound at any integer index (0 at the zero mode).
    pub fn at(&self, j: i64) -> f64 {
        let a = j.unsigned_abs() as usize;
        if a == 0 {
            0.0
        } else if a <= self.fin.len() {
            self.fin[a - 1]
        } else {
            div_hi(self.tail_c, pow_int_lo(a, TAIL_EXPONENT))
        }
    }

    /// Upper bound on the tail mass beyond the explicit part:
    /// sum_{k > M} tail_c/k^6 <= tail_c / (5 M^5).
    pub fn tail_mass(&self) -> f64 {
        let m = self.fin.len();
        div_hi(self.tail_c, mul_hi(5.0, pow_int_lo(m, 5)))
    }

    /// l1 bound over all signed indices: 2 * (finite sum + tail mass).
    pub fn l1(&self) -> f64 {
        let mut s = 0.0;
        for &v in &self.fin {
            s = add_hi(s, v);
        }
        mul_hi(2.0, add_hi(s, self.tail_mass()))
    }

    pub fn max(&self) -> f64 {
        let tail_top = if self.tail_c == 0.0 {
            0.0
        } else {
            self.at(self.fin.len() as i64 + 1)
        };
        self.fin.iter().cloned().fold(tail_top, f64::max)
    }

    /// Dense table of profile values at indices 0..=up_to.
    pub fn dense(&self, up_to: usize) -> Vec<f64> {
        (0..=up_to as i64).map(|j| self.at(j)).collect()
    }

    /// sup over |i| >= j of the profile.
    pub fn sup_from(&self, j: usize) -> f64 {
        let m = self.fin.len();
        if j > m {
            return if self.tail_c == 0.0 {
                0.0
            } else {
                div_hi(self.tail_c, pow_int_lo(j, TAIL_EXPONENT))
            };
        }
        let mut best = self.at(m as i64 + 1);
        for k in (j.max(1)..=m).rev() {
            best = best.max(self.fin[k - 1]);
        }
        best
    }

    /// Table of pair-convolution bounds (p*p)_n for n = 0..=up_to, plus
    /// everything needed to bound entries beyond the table.
    ///
    /// The part with an index beyond the explicit range M is corrected
    /// index by index: splitting on which factor carries |.| >= n/2,
    ///   sum_{|i|>M} p_i p_{n-i} <= sup_{|i|>=max(M+1,n/2)} p * l1
    ///                            + sup_{|j|>=n/2} p * (2 tail mass),
    /// which keeps the correction decaying in n instead of flat.
    pub fn pair_table(&self, up_to: usize) -> PairTable {
        let m = self.fin.len() as i64;
        let l1 = self.l1();
        let two_tail = mul_hi(2.0, self.tail_mass());
        // dense source values and suffix maxima avoid per-entry rescans
        let src = self.dense(up_to + self.fin.len() + 1);
        let mut src_suffix = vec![0.0f64; src.len() + 1];
        src_suffix[src.len()] = self.sup_from(src.len());
        for i in (1..src.len()).rev() {
            src_suffix[i] = src[i].max(src_suffix[i + 1]);
        }
        src_suffix[0] = src_suffix[1];
        let sup_from_fast = |j: usize| -> f64 {
            if j < src_suffix.len() {
                src_suffix[j.max(1)]
            } else {
                self.sup_from(j)
            }
        };
        let vals: Vec<f64> = (0..=up_to as i64)
            .map(|n| {
                let mut s = 0.0f64;
                for i in -m..=m {
                    if i == 0 {
                        continue;
                    }
                    let a = src[i.unsigned_abs() as usize];
                    if a == 0.0 {
                        continue;
                    }
                    s = add_hi(s, mul_hi(a, src[(n - i).unsigned_abs() as usize]));
                }
                let half = ((n as usize) + 1) / 2;
                let corr = add_hi(
                    mul_hi(sup_from_fast(half.max(self.fin.len() + 1)), l1),
                    mul_hi(sup_from_fast(half.max(1)), two_tail),
                );
                add_hi(s, corr)
            })
            .collect();
        // suffix maxima for sup queries over |n| >= x
        let beyond = mul_hi(
            2.0,
            mul_hi(l1, self.sup_from((vals.len() + 1) / 2)),
        );
        let mut suffix = vec![0.0f64; vals.len() + 1];
        suffix[vals.len()] = beyond;
        for i in (0..vals.len()).rev() {
            suffix[i] = vals[i].max(suffix[i + 1]);
        }
        PairTable {
            vals,
            suffix,
            l1: mul_hi(l1, l1),
            half_sup: Box::new({
                let p = self.clone();
                move |x: usize| p.sup_from(x)
            }),
            src_l1: l1,
        }
    }

    /// Cubic convolution bounds (p*p*p)_j for j = 1..=out_to, with the
    /// same index-aware correction for convolution indices beyond M.
    pub fn cube_table(&self, out_to: usize) -> Vec<f64> {
        let m = self.fin.len() as i64;
        let pair = self.pair_table(out_to + self.fin.len());
        let l1sq = pair.l1();
        let two_tail = mul_hi(2.0, self.tail_mass());
        let src = self.dense(self.fin.len() + 1);
        let mut sig_suffix = vec![0.0f64; src.len() + 1];
        sig_suffix[src.len()] = self.sup_from(src.len());
        for i in (1..src.len()).rev() {
            sig_suffix[i] = src[i].max(sig_suffix[i + 1]);
        }
        (1..=out_to as i64)
            .map(|j| {
                let mut s = 0.0f64;
                for i in -m..=m {
                    if i == 0 {
                        continue;
                    }
                    let a = src[i.unsigned_abs() as usize];
                    if a == 0.0 {
                        continue;
                    }
                    s = add_hi(s, mul_hi(a, pair.at(j - i)));
                }
                let half = ((j as usize) + 1) / 2;
                let sig_sup = {
                    let idx = half.max(self.fin.len() + 1);
                    if idx < sig_suffix.len() {
                        sig_suffix[idx]
                    } else {
                        self.sup_from(idx)
                    }
                };
                let corr = add_hi(
                    mul_hi(sig_sup, l1sq),
                    mul_hi(pair.sup_from(half), two_tail),
                );
                add_hi(s, corr)
            })
            .collect()
    }

    /// Constant K3 with (p*p*p)_k <= K3 / k^6 for all k > `beyond`
    /// (requires `beyond >= fin.len()`).
    ///
    /// Explicit per-index maxima cover `beyond < k <= 6*beyond`. Past
    /// that, split p = e + t into the explicit part and the tail: e^3 has
    /// support 3M < k, so only tail-carrying combinations remain, each
    /// with an index far enough out that the decay ratio stays below
    /// (3/2)^6.
    pub fn cube_tail_majorant(&self, beyond: usize) -> f64 {
        self.cube_tail_majorant_zone(beyond, 6 * beyond)
    }

    /// Cheaper variant with a shorter explicit zone (cruder far constant);
    /// always an upper bound for the same quantity.
    pub fn cube_tail_majorant_fast(&self, beyond: usize) -> f64 {
        self.cube_tail_majorant_zone(beyond, 3 * beyond)
    }

    fn cube_tail_majorant_zone(&self, beyond: usize, far_start: usize) -> f64 {
        let m = self.fin.len();
        assert!(beyond >= m);
        assert!(far_start >= 3 * m, "far zone must clear the cube support");
        let explicit = self.cube_table(far_start);
        let mut k3 = 0.0f64;
        let mut argmax = 0usize;
        for k in (beyond + 1)..=far_start {
            let v = mul_hi(explicit[k - 1], pow_int_hi(k, TAIL_EXPONENT));
            if v > k3 {
                k3 = v;
                argmax = k;
            }
        }
        if std::env::var_os("OKHET_DEBUG_K3").is_some() && argmax > 0 {
            let pair = self.pair_table(argmax + m);
            let mut s = 0.0f64;
            let mut arg_i = 0i64;
            for i in -(m as i64)..=(m as i64) {
                if i == 0 {
                    continue;
                }
                let v = mul_hi(self.at(i), pair.at(argmax as i64 - i));
                if v > s {
                    s = v;
                    arg_i = i;
                }
            }
            let half = (argmax + 1) / 2;
            eprintln!(
                "k3 argmax k={argmax} cube={:e} k3={k3:e} tail_c={:e} | top term i={arg_i} ({:e} * pair {:e}); ccorr parts {:e} {:e}",
                explicit[argmax - 1],
                self.tail_c,
                self.at(arg_i),
                pair.at(argmax as i64 - arg_i),
                mul_hi(self.sup_from(half.max(m + 1)), pair.l1()),
                mul_hi(pair.sup_from(half), mul_hi(2.0, self.tail_mass())),
            );
        }
        if self.tail_c == 0.0 {
            return k3;
        }
        // far zone k > 6*beyond
        let mut l1e = 0.0f64;
        for &v in &self.fin {
            l1e = add_hi(l1e, v);
        }
        l1e = mul_hi(2.0, l1e);
        let tl1 = mul_hi(2.0, self.tail_mass());
        let pow6_hi = |x: f64| {
            let mut r = 1.0f64;
            for _ in 0..6 {
                r = mul_hi(r, x);
            }
            r
        };
        let kf = (far_start + 1) as f64;
        // 3 (e e t): tail index >= k - 2m, ratio (k/(k-2m))^6
        let r_eet = pow6_hi(div_hi(kf, (far_start + 1 - 2 * m) as f64));
        let eet = mul_hi(3.0, mul_hi(r_eet, mul_hi(self.tail_c, mul_hi(l1e, l1e))));
        // 3 (e t t): (t*t)_n <= 128 tl1 C / n^6 at n >= k - m
        let r_ett = pow6_hi(div_hi(kf, (far_start + 1 - m) as f64));
        let ett = mul_hi(
            3.0,
            mul_hi(l1e, mul_hi(128.0, mul_hi(r_ett, mul_hi(tl1, self.tail_c)))),
        );
        // (t t t): <= tl1 * 128 tl1 C * 2^6 / k^6
        let ttt = mul_hi(tl1, mul_hi(8192.0, mul_hi(tl1, self.tail_c)));
        k3.max(add_hi(add_hi(eet, ett), ttt))
    }

    /// Bounds for the part of (p*p*p)_k, k = 1..=m, where at least one
    /// convolution index lies beyond m: 3(llh) + 3(lhh) + (hhh) with
    /// l = modes <= m, h = modes > m (mid-zone and tail).
    pub fn cube_high_part(&self, m: usize) -> Vec<f64> {
        assert!(m <= self.fin.len());
        let big_m = self.fin.len() as i64;
        let low = MagProfile {
            fin: self.fin[..m].to_vec(),
            tail_c: 0.0,
        };
        let high_at = |j: i64| -> f64 {
            if j.unsigned_abs() as usize <= m {
                0.0
            } else {
                self.at(j)
            }
        };
        // high l1 and sup
        let mut h_l1 = 0.0f64;
        for j in (m + 1)..=self.fin.len() {
            h_l1 = add_hi(h_l1, self.fin[j - 1]);
        }
        h_l1 = mul_hi(2.0, add_hi(h_l1, self.tail_mass()));
        let h_max = self.sup_from(m + 1);

        // ll: exact pair table of the low part (support <= 2m)
        let ll = low.pair_table(2 * m);
        // hh(x) for |x| <= 2m: both factors beyond m
        let hh: Vec<f64> = (0..=2 * m as i64)
            .map(|x| {
                let mut s = 0.0f64;
                for i in -(big_m)..=big_m {
                    let a = high_at(i);
                    if a == 0.0 {
                        continue;
                    }
                    s = add_hi(s, mul_hi(a, high_at(x - i)));
                }
                // indices beyond the explicit range on either side
                add_hi(s, mul_hi(2.0, mul_hi(self.tail_mass(), h_max)))
            })
            .collect();
        let hhh_bound = mul_hi(h_l1, mul_hi(h_l1, h_max));

        (1..=m as i64)
            .map(|k| {
                // 3 * sum_{|q|>m} h(q) ll(k-q), support of ll truncates q
                let mut llh = 0.0f64;
                for q in (k - 2 * m as i64)..=(k + 2 * m as i64) {
                    let a = high_at(q);
                    if a == 0.0 {
                        continue;
                    }
                    llh = add_hi(llh, mul_hi(a, ll.at(k - q)));
                }
                // 3 * sum_{0<|q|<=m} l(q) hh(k-q); |k-q| <= 2m stays in table
                let mut lhh = 0.0f64;
                for q in -(m as i64)..=(m as i64) {
                    if q == 0 {
                        continue;
                    }
                    let idx = (k - q).unsigned_abs() as usize;
                    lhh = add_hi(lhh, mul_hi(low.at(q), hh[idx]));
                }
                add_hi(
                    add_hi(mul_hi(3.0, llh), mul_hi(3.0, lhh)),
                    hhh_bound,
                )
            })
            .collect()
    }
}

/// Pair-convolution bound table with a rigorous fallback beyond its range.
pub struct PairTable {
    vals: Vec<f64>,
    suffix: Vec<f64>,
    l1: f64,
    half_sup: Box<dyn Fn(usize) -> f64>,
    src_l1: f64,
}

impl PairTable {
    pub fn at(&self, n: i64) -> f64 {
        let a = n.unsigned_abs() as usize;
        if a < self.vals.len() {
            self.vals[a]
        } else {
            // one factor index is at least a/2
            mul_hi(2.0, mul_hi(self.src_l1, (self.half_sup)(a.div_ceil(2))))
        }
    }

    /// sup over |n| >= x of the pair bounds (suffix maxima inside the
    /// table, the decaying fallback beyond; the fallback is nonincreasing
    /// so its value at the boundary dominates).
    pub fn sup_from(&self, x: usize) -> f64 {
        if x < self.suffix.len() {
            self.suffix[x]
        } else {
            mul_hi(2.0, mul_hi(self.src_l1, (self.half_sup)(x.div_ceil(2))))
        }
    }

    pub fn max(&self) -> f64 {
        self.suffix[0]
    }

    /// l1 bound of the pair convolution: (l1 of the source)^2.
    pub fn l1(&self) -> f64 {
        self.l1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::Interval;
    use crate::linalg::IVector;
    use crate::scb::TailBound;

    fn brute_cube(p: &MagProfile, k: i64, cutoff: i64) -> f64 {
        let mut s = 0.0;
        for i in -cutoff..=cutoff {
            for j in -cutoff..=cutoff {
                let l = k - i - j;
                if l.abs() > cutoff {
                    continue;
                }
                s += p.at(i) * p.at(j) * p.at(l);
            }
        }
        s
    }

    #[test]
    fn cube_table_dominates_brute_force() {
        let mut fin = vec![0.0; 20];
        fin[2] = 0.3;
        fin[8] = 0.01;
        fin[15] = 1e-4;
        let p = MagProfile {
            fin,
            tail_c: 1e-8,
        };
        let table = p.cube_table(30);
        for k in 1..=30i64 {
            let brute = brute_cube(&p, k, 400);
            assert!(
                table[(k - 1) as usize] >= brute * (1.0 - 1e-12),
                "k={k}: {} < {brute}",
                table[(k - 1) as usize]
            );
        }
    }

    #[test]
    fn cube_tail_majorant_dominates() {
        let mut fin = vec![0.0; 12];
        fin[2] = 0.2;
        fin[10] = 1e-6;
        let p = MagProfile {
            fin,
            tail_c: 1e-9,
        };
        let k3 = p.cube_tail_majorant(12);
        for k in 13..=60i64 {
            let brute = brute_cube(&p, k, 500);
            let bound = k3 / pow_int_lo(k as usize, 6);
            assert!(bound >= brute * (1.0 - 1e-12), "k={k}");
        }
    }

    #[test]
    fn high_part_matches_difference() {
        // the high-involving cube bound must dominate cube(full) - cube(low)
        let mut fin = vec![0.0; 25];
        fin[2] = 0.25;
        fin[17] = 1e-5;
        fin[22] = 3e-6;
        let p = MagProfile {
            fin: fin.clone(),
            tail_c: 1e-10,
        };
        let m = 15;
        let d = p.cube_high_part(m);
        let low = MagProfile {
            fin: fin[..m].to_vec(),
            tail_c: 0.0,
        };
        for k in 1..=m as i64 {
            let diff = brute_cube(&p, k, 300) - brute_cube(&low, k, 300);
            assert!(
                d[(k - 1) as usize] >= diff.max(0.0) * (1.0 - 1e-12),
                "k={k}: {} < {diff}",
                d[(k - 1) as usize]
            );
        }
    }

    #[test]
    fn galerkin_perturbation_scaling() {
        // zero tail and zero mid-zone -> zero perturbation; doubling the
        // tail constant of a pure-tail profile scales the cubic-only bound
        // by 8
        let p = crate::okvf::OkParams::canonical();
        let mut set = ScbSet::zero(20);
        set.finite.0[2] = Interval::sym(0.1);
        let prof = MagProfile::from_set(&set);
        let d = crate::okvf::galerkin_perturbation(&prof, &p, 15, None);
        assert!(d.0.iter().all(|x| x.is_zero()));

        let tail1 = ScbSet::new(IVector::zeros(20), TailBound::new(1e-6, 6, 21));
        let tail2 = ScbSet::new(IVector::zeros(20), TailBound::new(2e-6, 6, 21));
        let d1 = crate::okvf::galerkin_perturbation(&MagProfile::from_set(&tail1), &p, 15, None);
        let d2 = crate::okvf::galerkin_perturbation(&MagProfile::from_set(&tail2), &p, 15, None);
        for k in 0..15 {
            if d1.0[k].max_abs() > 0.0 {
                let ratio = d2.0[k].max_abs() / d1.0[k].max_abs();
                assert!((ratio - 8.0).abs() < 1e-6, "mode {k}: ratio {ratio}");
            }
        }
    }
}
