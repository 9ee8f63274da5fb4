//! Validated fast Fourier transforms on complex rectangles (pairs of real
//! intervals), sized for the cubic convolution of cosine data.
//!
//! Aliasing control: the cubic of m modes has true support up to 3m, which
//! a grid of size N in (2m, 3m] cannot hold. We therefore evaluate on two
//! grids, plain and half-cell shifted. Cyclic images at offset +-N pick up
//! a factor (-1) on the shifted grid and cancel in the average, while
//! images at +-2N vanish outright once 2N > 3m + m_out. This keeps the
//! paper-sized N = 2m grids rigorous with two transforms per array, and
//! real data is packed in pairs so each transform serves two arrays.

use crate::interval::Interval;
use crate::transcend::sincos_pi_frac;

#[derive(Clone, Copy, Debug)]
pub struct Cplx {
    pub re: Interval,
    pub im: Interval,
}

impl Cplx {
    pub const ZERO: Cplx = Cplx {
        re: Interval::ZERO,
        im: Interval::ZERO,
    };

    #[inline]
    pub fn new(re: Interval, im: Interval) -> Cplx {
        Cplx { re, im }
    }

    #[inline]
    pub fn add(self, o: Cplx) -> Cplx {
        Cplx {
            re: self.re + o.re,
            im: self.im + o.im,
        }
    }

    #[inline]
    pub fn sub(self, o: Cplx) -> Cplx {
        Cplx {
            re: self.re - o.re,
            im: self.im - o.im,
        }
    }

    #[inline]
    pub fn mul(self, o: Cplx) -> Cplx {
        Cplx {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }

    #[inline]
    pub fn conj(self) -> Cplx {
        Cplx {
            re: self.re,
            im: -self.im,
        }
    }

    #[inline]
    pub fn half(self) -> Cplx {
        Cplx {
            re: self.re.mul_pow2(-1),
            im: self.im.mul_pow2(-1),
        }
    }
}

/// Twiddle factor with the exactly representable cases tagged, so the
/// butterflies for 1, -1, +-i are rounding-free.
#[derive(Clone, Copy, Debug)]
enum Tw {
    One,
    NegOne,
    I,
    NegI,
    Gen(Cplx),
}

impl Tw {
    #[inline]
    fn apply(self, b: Cplx) -> Cplx {
        match self {
            Tw::One => b,
            Tw::NegOne => Cplx {
                re: -b.re,
                im: -b.im,
            },
            Tw::I => Cplx {
                re: -b.im,
                im: b.re,
            },
            Tw::NegI => Cplx {
                re: b.im,
                im: -b.re,
            },
            Tw::Gen(w) => w.mul(b),
        }
    }
}

fn twiddle(num: i64, den: i64) -> Tw {
    // e^{i * num * pi / den}, tagging exact quarter turns
    let r = num.rem_euclid(2 * den);
    if r == 0 {
        return Tw::One;
    }
    if 2 * r == den {
        return Tw::I;
    }
    if r == den {
        return Tw::NegOne;
    }
    if 2 * r == 3 * den {
        return Tw::NegI;
    }
    let (s, c) = sincos_pi_frac(num, den);
    Tw::Gen(Cplx::new(c, s))
}

/// Direction of the transform: `Synthesis` uses e^{+2 pi i t j / N},
/// `Analysis` uses the conjugate kernel (no 1/N factor).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Dir {
    Synthesis,
    Analysis,
}

pub struct FftPlan {
    pub n: usize,
    tw_syn: Vec<Tw>,
    tw_ana: Vec<Tw>,
    /// e^{+ pi i t / N} for the shifted-grid synthesis
    shift_syn: Vec<Cplx>,
    /// e^{- pi i k / N} for the shifted-grid analysis
    shift_ana: Vec<Cplx>,
}

impl FftPlan {
    pub fn new(n: usize) -> FftPlan {
        assert!(n.is_power_of_two() && n >= 4, "FFT size must be a power of two");
        let half = n / 2;
        let tw_syn = (0..half).map(|j| twiddle(2 * j as i64, n as i64)).collect();
        let tw_ana = (0..half)
            .map(|j| twiddle(-2 * (j as i64), n as i64))
            .collect();
        let cplx_of = |t: Tw| match t {
            Tw::One => Cplx::new(Interval::ONE, Interval::ZERO),
            Tw::NegOne => Cplx::new(-Interval::ONE, Interval::ZERO),
            Tw::I => Cplx::new(Interval::ZERO, Interval::ONE),
            Tw::NegI => Cplx::new(Interval::ZERO, -Interval::ONE),
            Tw::Gen(c) => c,
        };
        // the half-cell shift phases use the signed frequency of each
        // slot: slot t > N/2 holds mode t - N
        let shift_syn = (0..n)
            .map(|t| {
                let signed = if t <= n / 2 { t as i64 } else { t as i64 - n as i64 };
                cplx_of(twiddle(signed, n as i64))
            })
            .collect();
        let shift_ana = (0..n)
            .map(|k| cplx_of(twiddle(-(k as i64), n as i64)))
            .collect();
        FftPlan {
            n,
            tw_syn,
            tw_ana,
            shift_syn,
            shift_ana,
        }
    }

    /// In-place radix-2 transform.
    pub fn fft(&self, data: &mut [Cplx], dir: Dir) {
        let n = self.n;
        assert_eq!(data.len(), n);
        // bit reversal
        let bits = n.trailing_zeros();
        for i in 0..n {
            let j = (i.reverse_bits() >> (usize::BITS - bits)) & (n - 1);
            if j > i {
                data.swap(i, j);
            }
        }
        let tw = match dir {
            Dir::Synthesis => &self.tw_syn,
            Dir::Analysis => &self.tw_ana,
        };
        let mut len = 2;
        while len <= n {
            let step = n / len;
            for base in (0..n).step_by(len) {
                for j in 0..len / 2 {
                    let w = tw[j * step];
                    let t = w.apply(data[base + j + len / 2]);
                    let u = data[base + j];
                    data[base + j] = u.add(t);
                    data[base + j + len / 2] = u.sub(t);
                }
            }
            len <<= 1;
        }
    }

    /// Symmetric embedding of cosine coefficients (modes 1..=m) into a
    /// length-N complex array, packing a second array into the imaginary
    /// part.
    fn embed(&self, a: &[Interval], b: Option<&[Interval]>) -> Vec<Cplx> {
        let n = self.n;
        let m = a.len();
        assert!(2 * m < n, "coefficient count must be below N/2");
        let mut z = vec![Cplx::ZERO; n];
        for (t, &av) in a.iter().enumerate() {
            let bv = b.map(|b| b[t]).unwrap_or(Interval::ZERO);
            let c = Cplx::new(av, bv);
            z[t + 1] = c;
            z[n - 1 - t] = c;
        }
        z
    }

    /// Real grid values of up to two coefficient arrays on the plain and
    /// half-shifted grids: returns ([a on grid0, a on grid1/2], same for b).
    pub fn synth_pair(
        &self,
        a: &[Interval],
        b: Option<&[Interval]>,
    ) -> ([Vec<Interval>; 2], [Vec<Interval>; 2]) {
        let n = self.n;
        let z0 = self.embed(a, b);
        let mut zs: Vec<Cplx> = z0
            .iter()
            .enumerate()
            .map(|(t, c)| c.mul(self.shift_syn[t]))
            .collect();
        let mut z0 = z0;
        self.fft(&mut z0, Dir::Synthesis);
        self.fft(&mut zs, Dir::Synthesis);
        let ga = [
            z0.iter().map(|c| c.re).collect::<Vec<_>>(),
            zs.iter().map(|c| c.re).collect::<Vec<_>>(),
        ];
        let gb = [
            z0.iter().map(|c| c.im).collect::<Vec<_>>(),
            zs.iter().map(|c| c.im).collect::<Vec<_>>(),
        ];
        let _ = n;
        (ga, gb)
    }

    /// Coefficient enclosures (modes 1..=m_out) of two real grid-value
    /// arrays, each given on both grids; averaging the two grids cancels
    /// the odd cyclic images.
    pub fn extract_pair(
        &self,
        ga: &[Vec<Interval>; 2],
        gb: Option<&[Vec<Interval>; 2]>,
        m_out: usize,
    ) -> (Vec<Interval>, Vec<Interval>) {
        let n = self.n;
        assert!(m_out < n / 2);
        let mut out_a = vec![Interval::ZERO; m_out];
        let mut out_b = vec![Interval::ZERO; m_out];
        for grid in 0..2 {
            let mut z: Vec<Cplx> = (0..n)
                .map(|j| {
                    Cplx::new(
                        ga[grid][j],
                        gb.map(|g| g[grid][j]).unwrap_or(Interval::ZERO),
                    )
                })
                .collect();
            self.fft(&mut z, Dir::Analysis);
            for k in 1..=m_out {
                let zk = z[k];
                let zn = z[n - k].conj();
                let u = zk.add(zn).half();
                let w = zk.sub(zn).half();
                let v = Cplx::new(w.im, -w.re); // w / i
                let (u, v) = if grid == 0 {
                    (u, v)
                } else {
                    (u.mul(self.shift_ana[k]), v.mul(self.shift_ana[k]))
                };
                // 1/(2N): half for the grid average, 1/N normalization
                let scale = -1 - (n.trailing_zeros() as i32);
                out_a[k - 1] = out_a[k - 1] + u.re.mul_pow2(scale);
                out_b[k - 1] = out_b[k - 1] + v.re.mul_pow2(scale);
            }
        }
        (out_a, out_b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(x: &[(f64, f64)], sign: f64) -> Vec<(f64, f64)> {
        let n = x.len();
        (0..n)
            .map(|k| {
                let mut re = 0.0;
                let mut im = 0.0;
                for (t, &(a, b)) in x.iter().enumerate() {
                    let ang = sign * 2.0 * std::f64::consts::PI * (t * k) as f64 / n as f64;
                    re += a * ang.cos() - b * ang.sin();
                    im += a * ang.sin() + b * ang.cos();
                }
                (re, im)
            })
            .collect()
    }

    #[test]
    fn fft_matches_naive_dft() {
        let plan = FftPlan::new(16);
        let mut xs = Vec::new();
        let mut seed = 0x12345u64;
        for _ in 0..16 {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let a = ((seed >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let b = ((seed >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
            xs.push((a, b));
        }
        let mut data: Vec<Cplx> = xs
            .iter()
            .map(|&(a, b)| Cplx::new(Interval::point(a), Interval::point(b)))
            .collect();
        plan.fft(&mut data, Dir::Synthesis);
        let reference = naive_dft(&xs, 1.0);
        for (c, &(re, im)) in data.iter().zip(&reference) {
            assert!(c.re.contains(re) || (c.re.lo() - re).abs() < 1e-10);
            assert!((c.re.mid() - re).abs() < 1e-10);
            assert!((c.im.mid() - im).abs() < 1e-10);
            assert!(c.re.width() < 1e-12);
        }
        // zero in, zero out (exactly)
        let mut z = vec![Cplx::ZERO; 16];
        plan.fft(&mut z, Dir::Analysis);
        assert!(z.iter().all(|c| c.re.is_zero() && c.im.is_zero()));
    }

    #[test]
    fn synth_extract_roundtrip() {
        // extracting right after synthesis recovers the coefficients
        let plan = FftPlan::new(32);
        let m = 15;
        let mut a = vec![Interval::ZERO; m];
        let mut b = vec![Interval::ZERO; m];
        a[2] = Interval::point(0.075);
        a[8] = Interval::point(-0.3);
        a[14] = Interval::point(1e-4);
        b[0] = Interval::point(0.5);
        b[9] = Interval::point(0.25);
        let (ga, gb) = plan.synth_pair(&a, Some(&b));
        let (ra, rb) = plan.extract_pair(&ga, Some(&gb), m);
        for k in 0..m {
            assert!(ra[k].contains(a[k].mid()), "a mode {}", k + 1);
            assert!(rb[k].contains(b[k].mid()), "b mode {}", k + 1);
            assert!(ra[k].width() < 1e-13);
            assert!(rb[k].width() < 1e-13);
        }
    }

    #[test]
    fn grid_values_are_function_values() {
        let plan = FftPlan::new(32);
        let m = 10;
        let mut a = vec![Interval::ZERO; m];
        a[1] = Interval::point(0.4);
        a[6] = Interval::point(-0.05);
        let (ga, _) = plan.synth_pair(&a, None);
        for (grid, offset) in [(0usize, 0.0f64), (1, 0.5)] {
            for j in 0..32 {
                let th = 2.0 * std::f64::consts::PI * (j as f64 + offset) / 32.0;
                let expect = 2.0 * (0.4 * (2.0 * th).cos() - 0.05 * (7.0 * th).cos());
                assert!(
                    (ga[grid][j].mid() - expect).abs() < 1e-12,
                    "grid {grid} node {j}"
                );
            }
        }
    }
}
