//! The cubic convolution of jet Taylor coefficients, two interchangeable
//! ways: direct summation staged through pairwise tables, and the
//! validated-FFT pipeline with cached grid values (the L-coefficients).
//! Both enclose the exact truncated convolution; they differ in cost and
//! in enclosure width only.

use crate::fft::FftPlan;
use crate::interval::Interval;
use crate::jets::{CubeBackend, JetOrder};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BackendKind {
    Direct,
    Fft,
}

impl std::str::FromStr for BackendKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "direct" => Ok(BackendKind::Direct),
            "fft" => Ok(BackendKind::Fft),
            other => Err(format!("unknown convolution backend '{other}'")),
        }
    }
}

/// Ordered pairwise convolution (a*b)_n of two symmetric coefficient
/// arrays (modes 1..=m each), for n = 0..=2m.
fn conv_two(a: &[Interval], b: &[Interval]) -> Vec<Interval> {
    let m = a.len() as i64;
    debug_assert_eq!(a.len(), b.len());
    let at = |arr: &[Interval], j: i64| -> Interval {
        let aj = j.abs();
        if aj == 0 || aj > m {
            Interval::ZERO
        } else {
            arr[(aj - 1) as usize]
        }
    };
    (0..=2 * m)
        .map(|n| {
            let mut acc = Interval::ZERO;
            for i in (n - m).max(-m)..=m {
                let x = at(a, i);
                if x.is_zero() {
                    continue;
                }
                let y = at(b, n - i);
                if !y.is_zero() {
                    acc = acc + x * y;
                }
            }
            acc
        })
        .collect()
}

/// sum over j of v_j * s_{k-j} with |j| <= m; s is a symmetric table on
/// 0..=2m.
fn conv_sv(s: &[Interval], v: &[Interval], k: i64) -> Interval {
    let m = v.len() as i64;
    let mut acc = Interval::ZERO;
    for j in -m..=m {
        if j == 0 {
            continue;
        }
        let vv = v[(j.abs() - 1) as usize];
        if vv.is_zero() {
            continue;
        }
        let idx = (k - j).unsigned_abs() as usize;
        if idx < s.len() {
            let sv = s[idx];
            if !sv.is_zero() {
                acc = acc + vv * sv;
            }
        }
    }
    acc
}

/// Direct backend: caches the order-split pair tables
/// S^[t]_n = sum_{t1+t2=t} (v^[t1] * v^[t2])_n within one Taylor pass.
pub struct DirectBackend {
    s_tables: Vec<Vec<Interval>>,
}

impl DirectBackend {
    pub fn new() -> DirectBackend {
        DirectBackend {
            s_tables: Vec::new(),
        }
    }

    fn ensure_tables(&mut self, series: &[JetOrder], r: usize) {
        for t in self.s_tables.len()..=r {
            let m = series[0].m;
            let mut table = vec![Interval::ZERO; 2 * m + 1];
            for t1 in 0..=t / 2 {
                let t2 = t - t1;
                let part = if t1 == t2 {
                    crate::okvf::pair_conv(&series[t1].value)
                } else {
                    conv_two(&series[t1].value, &series[t2].value)
                        .into_iter()
                        .map(|x| x.mul_pow2(1))
                        .collect()
                };
                for (acc, v) in table.iter_mut().zip(part) {
                    *acc = *acc + v;
                }
            }
            self.s_tables.push(table);
        }
    }
}

impl Default for DirectBackend {
    fn default() -> Self {
        Self::new()
    }
}

impl CubeBackend for DirectBackend {
    fn reset(&mut self) {
        self.s_tables.clear();
    }

    fn cube_order(&mut self, series: &[JetOrder], r: usize) -> JetOrder {
        self.ensure_tables(series, r);
        let m = series[0].m;
        let nvar = series[0].nvar;
        let mut out = JetOrder::zeros(m, nvar);
        for k in 1..=m as i64 {
            let mut acc = Interval::ZERO;
            for t in 0..=r {
                acc = acc + conv_sv(&self.s_tables[t], &series[r - t].value, k);
            }
            out.value[(k - 1) as usize] = acc;
        }
        for d in 0..nvar {
            for k in 1..=m as i64 {
                let mut acc = Interval::ZERO;
                for t in 0..=r {
                    acc = acc + conv_sv(&self.s_tables[t], series[r - t].partial_dir(d), k);
                }
                out.partial_dir_mut(d)[(k - 1) as usize] = acc.mul_f64(3.0);
            }
        }
        out
    }
}

type Grids = [Vec<Interval>; 2];

/// FFT backend: grid values of every jet array are cached per order (the
/// L-coefficients); the cubic becomes pointwise products on two shifted
/// grids followed by coefficient extraction.
pub struct FftBackend {
    plan: FftPlan,
    m: usize,
    vgrids: Vec<Grids>,
    pgrids: Vec<Vec<Grids>>,
    sgrids: Vec<Grids>,
}

impl FftBackend {
    pub fn new(m: usize, n_fft: usize) -> FftBackend {
        // two-shift dealiasing needs the +-2N images past the cubic support
        assert!(
            2 * n_fft > 3 * m + m,
            "FFT size {n_fft} too small for alias-free cubic of {m} modes"
        );
        assert!(2 * m < n_fft, "coefficients must fit below N/2");
        FftBackend {
            plan: FftPlan::new(n_fft),
            m,
            vgrids: Vec::new(),
            pgrids: Vec::new(),
            sgrids: Vec::new(),
        }
    }

    fn ensure_grids(&mut self, series: &[JetOrder], r: usize) {
        for ord in self.vgrids.len()..=r {
            let jo = &series[ord];
            let nvar = jo.nvar;
            // pack value with partial 0, then partials pairwise
            let mut pg: Vec<Grids> = Vec::with_capacity(nvar);
            let (vg, p0) = if nvar > 0 {
                let (a, b) = self.plan.synth_pair(&jo.value, Some(jo.partial_dir(0)));
                (a, Some(b))
            } else {
                let (a, _) = self.plan.synth_pair(&jo.value, None);
                (a, None)
            };
            if let Some(p0) = p0 {
                pg.push(p0);
            }
            let mut d = 1;
            while d < nvar {
                if d + 1 < nvar {
                    let (a, b) = self
                        .plan
                        .synth_pair(jo.partial_dir(d), Some(jo.partial_dir(d + 1)));
                    pg.push(a);
                    pg.push(b);
                    d += 2;
                } else {
                    let (a, _) = self.plan.synth_pair(jo.partial_dir(d), None);
                    pg.push(a);
                    d += 1;
                }
            }
            self.vgrids.push(vg);
            self.pgrids.push(pg);
        }
        let n = self.plan.n;
        for t in self.sgrids.len()..=r {
            let mut s: Grids = [vec![Interval::ZERO; n], vec![Interval::ZERO; n]];
            for t1 in 0..=t / 2 {
                let t2 = t - t1;
                for g in 0..2 {
                    let v1 = &self.vgrids[t1][g];
                    let v2 = &self.vgrids[t2][g];
                    for j in 0..n {
                        let term = if t1 == t2 {
                            v1[j].square()
                        } else {
                            (v1[j] * v2[j]).mul_pow2(1)
                        };
                        s[g][j] = s[g][j] + term;
                    }
                }
            }
            self.sgrids.push(s);
        }
    }

    fn cube_grid(&self, arrays: &[&Vec<Grids>], series_len: usize, r: usize) -> Vec<Grids> {
        let _ = series_len;
        let n = self.plan.n;
        arrays
            .iter()
            .map(|per_order| {
                let mut out: Grids = [vec![Interval::ZERO; n], vec![Interval::ZERO; n]];
                for t in 0..=r {
                    for g in 0..2 {
                        let s = &self.sgrids[t][g];
                        let v = &per_order[r - t][g];
                        for j in 0..n {
                            out[g][j] = out[g][j] + s[j] * v[j];
                        }
                    }
                }
                out
            })
            .collect()
    }
}

impl CubeBackend for FftBackend {
    fn reset(&mut self) {
        self.vgrids.clear();
        self.pgrids.clear();
        self.sgrids.clear();
    }

    fn cube_order(&mut self, series: &[JetOrder], r: usize) -> JetOrder {
        assert_eq!(series[0].m, self.m, "backend sized for a different m");
        self.ensure_grids(series, r);
        let m = self.m;
        let nvar = series[0].nvar;
        let n = self.plan.n;

        // value cube grid
        let mut cv: Grids = [vec![Interval::ZERO; n], vec![Interval::ZERO; n]];
        for t in 0..=r {
            for g in 0..2 {
                for j in 0..n {
                    cv[g][j] = cv[g][j] + self.sgrids[t][g][j] * self.vgrids[r - t][g][j];
                }
            }
        }
        // partial cube grids (times 3 from the cubic product rule)
        let mut cps: Vec<Grids> = Vec::with_capacity(nvar);
        for d in 0..nvar {
            let mut cp: Grids = [vec![Interval::ZERO; n], vec![Interval::ZERO; n]];
            for t in 0..=r {
                for g in 0..2 {
                    for j in 0..n {
                        cp[g][j] = cp[g][j] + self.sgrids[t][g][j] * self.pgrids[r - t][d][g][j];
                    }
                }
            }
            for g in 0..2 {
                for j in 0..n {
                    cp[g][j] = cp[g][j].mul_f64(3.0);
                }
            }
            cps.push(cp);
        }

        let mut out = JetOrder::zeros(m, nvar);
        if nvar == 0 {
            let (a, _) = self.plan.extract_pair(&cv, None, m);
            out.value = a;
        } else {
            let (a, b) = self.plan.extract_pair(&cv, Some(&cps[0]), m);
            out.value = a;
            out.partial_dir_mut(0).copy_from_slice(&b);
            let mut d = 1;
            while d < nvar {
                if d + 1 < nvar {
                    let (a, b) = self.plan.extract_pair(&cps[d], Some(&cps[d + 1]), m);
                    out.partial_dir_mut(d).copy_from_slice(&a);
                    out.partial_dir_mut(d + 1).copy_from_slice(&b);
                    d += 2;
                } else {
                    let (a, _) = self.plan.extract_pair(&cps[d], None, m);
                    out.partial_dir_mut(d).copy_from_slice(&a);
                    d += 1;
                }
            }
        }
        out
    }
}

pub fn make_backend(kind: BackendKind, m: usize, n_fft: usize) -> Box<dyn CubeBackend> {
    match kind {
        BackendKind::Direct => Box::new(DirectBackend::new()),
        BackendKind::Fft => Box::new(FftBackend::new(m, n_fft)),
    }
}

/// Default FFT size for padding constant c (a power of two at least c*m).
pub fn default_n_fft(c: usize, m: usize) -> usize {
    let mut n = (c * m + 1).next_power_of_two();
    while 2 * n <= 4 * m {
        n *= 2;
    }
    n
}

/// Order-0 cubic convolution of a plain coefficient vector.
pub fn cube_values(a: &[Interval], kind: BackendKind, n_fft: usize) -> Vec<Interval> {
    let series = vec![JetOrder {
        m: a.len(),
        nvar: 0,
        value: a.to_vec(),
        partial: Vec::new(),
    }];
    let mut backend = make_backend(kind, a.len(), n_fft);
    backend.cube_order(&series, 0).value
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_input_zero_output() {
        let a = vec![Interval::ZERO; 8];
        for kind in [BackendKind::Direct, BackendKind::Fft] {
            let c = cube_values(&a, kind, 32);
            assert!(c.iter().all(|x| x.max_abs() < 1e-300), "{kind:?}");
        }
    }

    #[test]
    fn single_mode_cube() {
        // a_3 = t: (a*a*a)_3 = 3 t^3, (a*a*a)_9 = t^3
        let t = 0.1;
        let mut a = vec![Interval::ZERO; 10];
        a[2] = Interval::point(t);
        for kind in [BackendKind::Direct, BackendKind::Fft] {
            let c = cube_values(&a, kind, 64);
            assert!(c[2].contains(3.0 * t * t * t), "{kind:?} k=3: {:?}", c[2]);
            assert!(c[8].contains(t * t * t), "{kind:?} k=9: {:?}", c[8]);
            for k in [1usize, 2, 4, 5, 6, 7, 8, 10] {
                assert!(c[k - 1].max_abs() < 1e-14, "{kind:?} k={k}");
            }
        }
        // direct keeps exact zeros
        let c = cube_values(&a, BackendKind::Direct, 32);
        for k in [1usize, 2, 4, 5, 7, 8, 10] {
            assert!(c[k - 1].is_zero(), "direct k={k}");
        }
    }

    #[test]
    fn paper_grid_size_is_alias_free() {
        // m = 15 with N = 32: mode 15 cubes into mode 45; without the
        // two-shift average it would wrap onto mode 13
        let m = 15;
        let mut a = vec![Interval::ZERO; m];
        a[14] = Interval::point(0.2);
        let c = cube_values(&a, BackendKind::Fft, 32);
        let d = cube_values(&a, BackendKind::Direct, 32);
        for k in 1..=m {
            assert!(
                (c[k - 1].mid() - d[k - 1].mid()).abs() < 1e-14,
                "k={k}: fft {:?} direct {:?}",
                c[k - 1],
                d[k - 1]
            );
            assert!(c[k - 1].intersect(&d[k - 1]).is_some());
        }
    }

    #[test]
    fn order_split_counts() {
        // with u^[1] = u^[0], the order-1 cube is 3 x the order-0 cube
        let m = 6;
        let mut v = vec![Interval::ZERO; m];
        v[1] = Interval::point(0.3);
        v[4] = Interval::point(-0.02);
        let o0 = JetOrder {
            m,
            nvar: 0,
            value: v.clone(),
            partial: Vec::new(),
        };
        let series = vec![o0.clone(), o0];
        for kind in [BackendKind::Direct, BackendKind::Fft] {
            let mut backend = make_backend(kind, m, 32);
            let c0 = backend.cube_order(&series, 0);
            let c1 = backend.cube_order(&series, 1);
            for k in 0..m {
                let expect = c0.value[k].mul_f64(3.0);
                assert!(
                    (c1.value[k].mid() - expect.mid()).abs() < 1e-14,
                    "{kind:?} k={}",
                    k + 1
                );
            }
        }
    }

    #[test]
    fn backends_agree_with_partials() {
        let m = 5;
        let mut o0 = JetOrder::zeros(m, m);
        for k in 0..m {
            o0.value[k] = Interval::point(0.05 * (k as f64 + 1.0) * if k % 2 == 0 { 1.0 } else { -0.4 });
            o0.partial_dir_mut(k)[k] = Interval::ONE;
        }
        let mut o1 = JetOrder::zeros(m, m);
        for k in 0..m {
            o1.value[k] = Interval::point(0.01 * (m - k) as f64);
            for d in 0..m {
                o1.partial_dir_mut(d)[k] = Interval::point(0.3 / (1.0 + (d + k) as f64));
            }
        }
        let series = vec![o0, o1];
        let mut direct = DirectBackend::new();
        let mut fft = FftBackend::new(m, 32);
        for r in 0..2 {
            let cd = direct.cube_order(&series, r);
            let cf = fft.cube_order(&series, r);
            for k in 0..m {
                assert!(
                    (cd.value[k].mid() - cf.value[k].mid()).abs() < 1e-13,
                    "value r={r} k={k}"
                );
                assert!(cd.value[k].intersect(&cf.value[k]).is_some());
                for d in 0..m {
                    let a = cd.partial_dir(d)[k];
                    let b = cf.partial_dir(d)[k];
                    assert!(
                        (a.mid() - b.mid()).abs() < 1e-12,
                        "partial r={r} d={d} k={k}: {a:?} vs {b:?}"
                    );
                    assert!(a.intersect(&b).is_some());
                }
            }
        }
    }
}
