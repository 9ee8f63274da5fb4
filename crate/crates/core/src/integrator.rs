//! Rigorous time stepping for the spectral Ohta-Kawasaki system.
//!
//! One step: validate a rough enclosure over [0,h] (absorbing form for
//! stiff dissipative modes, first-order candidate with inflation retries
//! for the rest), run three Taylor passes (point flow at the center, first
//! variation on the hull, order p+1 remainders on the rough enclosure),
//! fold in the Galerkin-tail perturbation as an a-posteriori differential
//! inclusion bound, and reorganize the finite-dimensional set in doubleton
//! form x + C r0 + Q s with a QR-refreshed rotation to suppress wrapping.
//! Mid-zone modes propagate as pure intervals by variation of constants;
//! the tail constant follows the isolation/absorption rule.

use crate::conv::{make_backend, BackendKind};
use crate::interval::{add_hi, div_hi, mul_hi, Interval};
use crate::jets::{compute_series, CubeBackend};
use crate::linalg::{inverse_enclosure, mgs_orthonormalize, FMatrix, IMatrix, IVector};
use crate::okvf::{
    conv_bounds, eigenvalue_table, galerkin_perturbation, jacobian_enclosure, OkParams,
};
use crate::profile::MagProfile;
use crate::scb::{ScbSet, TailBound};
use crate::transcend::{exp, phi};
use crate::Error;

/// Structured enclosure of the leading m modes plus interval mid-zone and
/// decaying tail. The represented set is
/// { center + C u + Q v : u in r0, v in s } x midzone x tail.
#[derive(Clone, Debug)]
pub struct LohnerSet {
    pub m: usize,
    pub center: Vec<f64>,
    pub c_frame: FMatrix,
    pub r0: Vec<Interval>,
    pub q_frame: FMatrix,
    pub s_box: Vec<Interval>,
    pub midzone: Vec<Interval>,
    pub tail: TailBound,
    pub sym_class: Option<usize>,
}

impl LohnerSet {
    /// Wrap an ScbSet (standard coordinates) for integration with Lohner
    /// dimension `m` and explicit mid-zone up to `big_m`.
    pub fn from_scb(set: &ScbSet, m: usize, big_m: usize) -> LohnerSet {
        assert!(set.frame.is_none(), "integrate in standard coordinates");
        assert!(m <= set.explicit_len());
        assert!(big_m >= set.explicit_len(), "mid-zone may only extend");
        let center: Vec<f64> = (1..=m).map(|k| set.mode(k).mid()).collect();
        let r0: Vec<Interval> = (1..=m)
            .map(|k| set.mode(k) - Interval::point(set.mode(k).mid()))
            .collect();
        let midzone: Vec<Interval> = (m + 1..=big_m).map(|k| set.mode(k)).collect();
        LohnerSet {
            m,
            center,
            c_frame: FMatrix::identity(m),
            r0,
            q_frame: FMatrix::identity(m),
            s_box: vec![Interval::ZERO; m],
            midzone,
            tail: TailBound::new(set.tail.c, set.tail.s, big_m + 1),
            sym_class: set.sym_class,
        }
    }

    pub fn big_m(&self) -> usize {
        self.m + self.midzone.len()
    }

    /// Interval hull of the finite part.
    pub fn hull(&self) -> IVector {
        let m = self.m;
        let mut out = IVector::zeros(m);
        for k in 0..m {
            let mut acc = Interval::point(self.center[k]);
            for j in 0..m {
                let c = self.c_frame.get(k, j);
                if c != 0.0 && !self.r0[j].is_zero() {
                    acc = acc + self.r0[j].mul_f64(c);
                }
                let q = self.q_frame.get(k, j);
                if q != 0.0 && !self.s_box[j].is_zero() {
                    acc = acc + self.s_box[j].mul_f64(q);
                }
            }
            out.0[k] = acc;
        }
        out
    }

    pub fn to_scb(&self) -> ScbSet {
        let hull = self.hull();
        let mut finite = hull.0;
        finite.extend_from_slice(&self.midzone);
        let mut out = ScbSet::new(IVector(finite), self.tail);
        out.sym_class = self.sym_class;
        out
    }

    /// Magnitude profile of the whole set.
    pub fn profile(&self) -> MagProfile {
        let hull = self.hull();
        let mut fin: Vec<f64> = hull.0.iter().map(|x| x.max_abs()).collect();
        fin.extend(self.midzone.iter().map(|x| x.max_abs()));
        MagProfile {
            fin,
            tail_c: self.tail.c,
        }
    }
}

#[derive(Clone, Debug)]
pub struct IntegratorCfg {
    pub h: f64,
    pub order: usize,
    pub backend: BackendKind,
    pub n_fft: usize,
    pub inflate_factor: f64,
    pub inflate_abs: f64,
    pub max_retries: usize,
}

impl IntegratorCfg {
    pub fn new(h: f64, order: usize, backend: BackendKind, n_fft: usize) -> IntegratorCfg {
        IntegratorCfg {
            h,
            order,
            backend,
            n_fft,
            inflate_factor: 1.1,
            inflate_abs: 1e-15,
            max_retries: 20,
        }
    }
}

/// Per-step record mirroring the integration log.
#[derive(Clone, Debug)]
pub struct StepReport {
    pub step: usize,
    pub time: f64,
    pub k_maxwidth: usize,
    pub maxwidth: f64,
    pub tail_c: f64,
    pub inclusion_pending: usize,
}

/// Step observer: logging and early-stop decisions live behind this.
pub trait StepSink {
    /// Called after each completed step; return true to stop early.
    fn on_step(&mut self, set: &LohnerSet, report: &mut StepReport) -> Result<bool, Error>;
}

/// A sink that does nothing (benchmarks, tests).
pub struct NullSink;

impl StepSink for NullSink {
    fn on_step(&mut self, _set: &LohnerSet, _report: &mut StepReport) -> Result<bool, Error> {
        Ok(false)
    }
}

struct RoughData {
    /// validated enclosure of all explicit modes over the step
    z_ext: Vec<Interval>,
    /// signed interval cubic convolution over the validated enclosure
    cube_iv: Vec<Interval>,
    profile: MagProfile,
    /// decay majorant of the cube over the rough profile, for the tail
    k3: f64,
}

pub struct Integrator {
    pub p: OkParams,
    pub cfg: IntegratorCfg,
    m: usize,
    big_m: usize,
    mu: Vec<Interval>,
    backend: Box<dyn CubeBackend>,
    backend_pt: Box<dyn CubeBackend>,
}

impl Integrator {
    pub fn new(
        p: OkParams,
        cfg: IntegratorCfg,
        m: usize,
        big_m: usize,
    ) -> Result<Integrator, Error> {
        if big_m < 3 * m {
            return Err(Error::Invalid(format!(
                "explicit mid-zone {big_m} must reach 3m = {}",
                3 * m
            )));
        }
        let mu = eigenvalue_table(big_m + 2, &p);
        if mu[big_m].hi() >= 0.0 {
            return Err(Error::Dissipativity(big_m + 1));
        }
        let backend = make_backend(cfg.backend, m, cfg.n_fft);
        let backend_pt = make_backend(cfg.backend, m, cfg.n_fft);
        Ok(Integrator {
            p,
            cfg,
            m,
            big_m,
            mu,
            backend,
            backend_pt,
        })
    }

    #[inline]
    fn mu_at(&self, k: usize) -> Interval {
        self.mu[k - 1]
    }

    /// Validated enclosure of every inclusion trajectory over [0, h].
    ///
    /// Dissipative modes (mu_k < 0) use a signed slaved interval: with the
    /// cubic forcing enclosed in [N], trajectories cannot leave
    /// hull(x_0, [N]/|mu_k|), because the derivative points back toward
    /// the slaved range on both sides. The finitely many non-dissipative
    /// modes use a first-order reach candidate with inflation retries.
    fn rough_enclosure(&mut self, set: &LohnerSet, step: usize) -> Result<RoughData, Error> {
        let m = self.m;
        let big_m = self.big_m;
        let h = self.cfg.h;
        let hull = set.hull();
        let mut x_ext: Vec<Interval> = hull.0.clone();
        x_ext.extend_from_slice(&set.midzone);

        let mut z_ext = x_ext.clone();
        let mut z_tail = set.tail.c;

        for attempt in 0..=self.cfg.max_retries {
            if z_ext.iter().any(|x| !x.lo().is_finite() || !x.hi().is_finite()) {
                break;
            }
            let t_att = std::time::Instant::now();
            let tail_bound = TailBound::new(z_tail, crate::scb::TAIL_EXPONENT, big_m + 1);
            let cube_iv = if self.p.cubic_enabled {
                crate::okvf::cube_extended(&z_ext, &tail_bound, big_m, set.sym_class)
            } else {
                vec![Interval::ZERO; big_m]
            };
            let t_cube = t_att.elapsed();
            let profile = MagProfile {
                fin: z_ext.iter().map(|x| x.max_abs()).collect(),
                tail_c: z_tail,
            };
            // the cheap majorant usually certifies isolation; fall back
            // to the longer explicit zone only when it does not
            let k3 = if self.p.cubic_enabled {
                let fast = profile.cube_tail_majorant_fast(big_m);
                if self
                    .absorbing_tail_constant(fast)
                    .map(|c| c <= z_tail)
                    .unwrap_or(false)
                {
                    fast
                } else {
                    profile.cube_tail_majorant(big_m)
                }
            } else {
                0.0
            };
            if std::env::var_os("OKHET_TIMING").is_some() {
                eprintln!("    attempt {attempt}: cube={t_cube:?} k3={:?}", t_att.elapsed() - t_cube);
            }

            let mut ok = true;
            let mut first_fail = 0usize;
            let mut next = z_ext.clone();
            for k in 1..=big_m {
                let x0 = x_ext[k - 1];
                let mu = self.mu_at(k);
                let force = -(self.p.cubic_coeff(k) * cube_iv[k - 1]);
                if mu.hi() < 0.0 && mu.lo() * h <= -0.8 {
                    // stiff dissipative mode: trajectories stay inside the
                    // slaved range hull(x0, [N]/|mu|); the self-coupling gain
                    // hidden in [N] is small once |mu| dominates
                    let slaved = force.div(&(-mu));
                    let need = x0.hull(&slaved);
                    if !z_ext[k - 1].contains_interval(&need) {
                        if ok {
                            first_fail = k;
                        }
                        ok = false;
                    }
                    // grow toward the (inflated) slaved range even when this
                    // mode passes, so coupled chains settle together instead
                    // of one hop per retry
                    next[k - 1] = z_ext[k - 1]
                        .hull(&need.inflate(self.cfg.inflate_factor, 0.0));
                } else {
                    // x0 + [0,h] F(Z) inside Z; grow unconditionally (the
                    // amplification h(|mu|+..) times the inflation stays
                    // below one here) so coupled modes settle together
                    let f = mu * z_ext[k - 1] + force;
                    let reach = x0 + (Interval::new(0.0, h) * f);
                    if !z_ext[k - 1].contains_interval(&reach) {
                        if ok {
                            first_fail = k;
                        }
                        ok = false;
                    }
                    let abs = if attempt == 0 { 0.0 } else { self.cfg.inflate_abs };
                    let grown = x0.hull(&reach).inflate(self.cfg.inflate_factor, abs);
                    next[k - 1] = z_ext[k - 1].hull(&grown);
                }
            }
            // tail: absorbing constant
            let c_abs = self.absorbing_tail_constant(k3)?;
            let need_tail = set.tail.c.max(c_abs);
            if z_tail < need_tail {
                ok = false;
            }

            if ok {
                return Ok(RoughData {
                    z_ext,
                    cube_iv,
                    profile,
                    k3,
                });
            }
            if std::env::var_os("OKHET_DEBUG_ROUGH").is_some() {
                eprintln!(
                    "attempt {attempt}: first_fail={first_fail} tail={:e} need_tail={:e} k3={:e}",
                    z_tail,
                    need_tail,
                    k3,
                );
                if first_fail > 0 {
                    let k = first_fail;
                    eprintln!("  mode {k}: z={:?} -> {:?}", z_ext[k - 1], next[k - 1]);
                }
            }
            z_ext = next;
            // overshoot the tail fixed point so the geometric feedback
            // through the coupling pads settles within the retry budget
            z_tail = z_tail.max(mul_hi(need_tail, 1.05));
        }
        Err(Error::RoughEnclosure {
            step,
            why: "validation did not stabilize; step size too large".into(),
        })
    }

    /// Smallest tail constant made invariant by dissipation:
    /// C >= lambda (pi/L)^2 K3 * sup_{k>M} k^2/|mu_k|. The supremum is the
    /// direct value at M+1 capped with the provable bound
    /// |mu_k| >= k^2 (pi/L)^2 (k^2 (pi/L)^2 - lambda) for k >= M+2.
    fn absorbing_tail_constant(&self, k3: f64) -> Result<f64, Error> {
        if k3 == 0.0 {
            return Ok(0.0);
        }
        let mb = self.big_m + 1;
        let mu_mb = self.mu_at(mb);
        if mu_mb.hi() >= 0.0 {
            return Err(Error::Dissipativity(mb));
        }
        let r_direct = div_hi((mb * mb) as f64, mu_mb.min_abs());
        let k2 = ((mb + 1) * (mb + 1)) as f64;
        let denom = self.p.pi2_l2() * (self.p.pi2_l2().mul_f64(k2) - self.p.lambda);
        if denom.lo() <= 0.0 {
            return Err(Error::Dissipativity(mb + 1));
        }
        let r_far = denom.recip().hi();
        let r_sup = r_direct.max(r_far);
        Ok(mul_hi(mul_hi(self.p.lam_pi2_l2().max_abs(), k3), r_sup))
    }

    /// One-step tail update per the isolation rule: keep C when the field
    /// points inwards on the tail boundary, otherwise absorb.
    pub fn advance_tail(&self, tail: &TailBound, k3: f64) -> Result<TailBound, Error> {
        let c_abs = self.absorbing_tail_constant(k3)?;
        let c_new = if tail.c >= c_abs {
            tail.c
        } else {
            // absorb with a small margin so the constant ratchets once
            // instead of creeping every step
            mul_hi(c_abs, 1.02)
        };
        Ok(TailBound::new(c_new, tail.s, tail.start))
    }

    /// Componentwise log-norm matrix of the Galerkin field over `z`:
    /// J_kk >= sup DF_kk, J_kl >= sup |DF_kl|.
    fn lognorm_matrix(&self, z: &[Interval]) -> FMatrix {
        let m = self.m;
        let mut zset = ScbSet::zero(m);
        zset.finite = IVector(z.to_vec());
        let cb = conv_bounds(&zset);
        let df = jacobian_enclosure(&cb, &self.p, m);
        let mut j = FMatrix::zeros(m);
        for k in 0..m {
            for l in 0..m {
                if k == l {
                    j.set(k, l, df[(k, l)].hi());
                } else {
                    j.set(k, l, df[(k, l)].max_abs());
                }
            }
        }
        j
    }

    /// Pattern-closure of a support set under a matrix.
    fn closure_mask(j: &FMatrix, mut mask: Vec<bool>) -> Vec<bool> {
        let n = j.n;
        loop {
            let mut changed = false;
            for k in 0..n {
                if mask[k] {
                    continue;
                }
                for l in 0..n {
                    if mask[l] && j.get(k, l) != 0.0 {
                        mask[k] = true;
                        changed = true;
                        break;
                    }
                }
            }
            if !changed {
                return mask;
            }
        }
    }

    /// Upper bound w >= integral_0^h e^{J(h-s)} dbar ds componentwise, for
    /// the comparison system e' <= J e + dbar with J Metzler-dominating.
    /// Components outside the J-closure of supp(dbar) stay exactly zero.
    fn inclusion_deviation(&self, j: &FMatrix, dbar: &[f64]) -> Vec<Interval> {
        let m = self.m;
        let h = self.cfg.h;
        let norm_d = dbar.iter().cloned().fold(0.0, f64::max);
        if norm_d == 0.0 {
            return vec![Interval::ZERO; m];
        }
        let mask = Self::closure_mask(j, dbar.iter().map(|&d| d != 0.0).collect());
        let mut jh = IMatrix::zeros(m, m);
        let mut norm_jh = 0.0f64;
        for k in 0..m {
            let mut row = 0.0;
            for l in 0..m {
                jh[(k, l)] = Interval::point(j.get(k, l)).mul_f64(h);
                row = add_hi(row, mul_hi(j.get(k, l).abs(), h));
            }
            norm_jh = norm_jh.max(row);
        }
        // acc = sum_{i<=I} (Jh)^i dbar / (i+1)!
        let terms = 30 + 3 * (norm_jh as usize + 1);
        let mut term = IVector(dbar.iter().map(|&d| Interval::point(d)).collect());
        let mut acc = IVector::zeros(m);
        let mut factorial = Interval::ONE; // (i+1)! at step i
        for i in 0..=terms {
            factorial = factorial * Interval::point((i + 1) as f64);
            for k in 0..m {
                if !term.0[k].is_zero() {
                    acc.0[k] = acc.0[k] + term.0[k].div(&factorial);
                }
            }
            if i < terms {
                term = jh.mat_vec(&term);
            }
        }
        // norm remainder past the series, confined to the pattern mask:
        // sum_{i>I} |Jh|^i |dbar| / (i+1)! <= |Jh|^{I+1} |dbar| / (I+2)! *
        // 1/(1 - |Jh|/(I+3))
        let mut pow = norm_d;
        for _ in 0..=terms {
            pow = mul_hi(pow, norm_jh);
        }
        let mut fact_lo = 1.0f64;
        for i in 2..=(terms as u64 + 2) {
            fact_lo = crate::interval::mul_lo(fact_lo, i as f64);
        }
        let guard = crate::interval::add_lo(1.0, -div_hi(norm_jh, terms as f64 + 3.0));
        assert!(guard > 0.0, "inclusion series too short");
        let rem = div_hi(pow, crate::interval::mul_lo(fact_lo, guard));
        (0..m)
            .map(|k| {
                if !mask[k] {
                    return Interval::ZERO;
                }
                let w = add_hi(mul_hi(acc.0[k].max_abs(), h), mul_hi(rem, h));
                Interval::sym(w)
            })
            .collect()
    }

    /// Entrywise bound W >= sup_{s in [0,h]} |e^{J+ s}| with J+ the Metzler
    /// majorant of J with nonnegative diagonal; encloses the variational
    /// flow over the step.
    fn variational_rough(&self, j: &FMatrix) -> FMatrix {
        let m = self.m;
        let h = self.cfg.h;
        let mut jp = IMatrix::zeros(m, m);
        let mut norm = 0.0f64;
        for k in 0..m {
            let mut row = 0.0;
            for l in 0..m {
                let v = if k == l {
                    j.get(k, l).max(0.0)
                } else {
                    j.get(k, l).abs()
                };
                jp[(k, l)] = Interval::point(v).mul_f64(h);
                row = add_hi(row, mul_hi(v, h));
            }
            norm = norm.max(row);
        }
        let terms = 20 + 3 * (norm as usize + 1);
        let mut acc = IMatrix::identity(m);
        let mut term = IMatrix::identity(m);
        let mut factorial = Interval::ONE;
        for i in 1..=terms {
            term = jp.mat_mat(&term);
            factorial = factorial * Interval::point(i as f64);
            for k in 0..m {
                for l in 0..m {
                    if !term[(k, l)].is_zero() {
                        acc[(k, l)] = acc[(k, l)] + term[(k, l)].div(&factorial);
                    }
                }
            }
        }
        let mut pow = 1.0f64;
        for _ in 0..=terms {
            pow = mul_hi(pow, norm);
        }
        let mut fact_lo = 1.0f64;
        for i in 2..=(terms as u64 + 1) {
            fact_lo = crate::interval::mul_lo(fact_lo, i as f64);
        }
        let guard = crate::interval::add_lo(1.0, -div_hi(norm, terms as f64 + 2.0));
        assert!(guard > 0.0, "variational series too short");
        let rem = div_hi(pow, crate::interval::mul_lo(fact_lo, guard));
        let mut out = FMatrix::zeros(m);
        for col in 0..m {
            let mut seed = vec![false; m];
            seed[col] = true;
            let mask = Self::closure_mask(j, seed);
            for row in 0..m {
                let base = acc[(row, col)].max_abs();
                let v = if mask[row] { add_hi(base, rem) } else { base };
                out.set(row, col, v);
            }
        }
        out
    }

    /// Advance the set by one step of size h.
    pub fn step(&mut self, set: &LohnerSet, step_idx: usize) -> Result<LohnerSet, Error> {
        let m = self.m;
        let h = Interval::point(self.cfg.h);
        let p_ord = self.cfg.order;
        let timing = std::env::var_os("OKHET_TIMING").is_some();
        let t0 = std::time::Instant::now();
        let rough = self.rough_enclosure(set, step_idx)?;
        if timing {
            eprintln!("  rough: {:?}", t0.elapsed());
        }
        let t0 = std::time::Instant::now();
        let z_fin = &rough.z_ext[..m];

        // Galerkin-tail perturbation over the step, and its flow bound
        let dbar_iv = galerkin_perturbation(&rough.profile, &self.p, m, set.sym_class);
        let dbar: Vec<f64> = dbar_iv.0.iter().map(|x| x.max_abs()).collect();
        let jmat = self.lognorm_matrix(z_fin);
        let deviation = self.inclusion_deviation(&jmat, &dbar);
        if timing {
            eprintln!("  lognorm+dev: {:?}", t0.elapsed());
        }
        let t0 = std::time::Instant::now();

        // Taylor pass 1: point flow at the center
        let center_iv: Vec<Interval> = set.center.iter().map(|&x| Interval::point(x)).collect();
        let series_pt = compute_series(&center_iv, None, p_ord, &self.p, self.backend_pt.as_mut());
        let mut y = crate::jets::taylor_sum_value(&series_pt, p_ord, h);
        if timing {
            eprintln!("  P1: {:?}", t0.elapsed());
        }
        let t0 = std::time::Instant::now();

        // Taylor pass 2: first variation on the hull
        let hull = set.hull();
        let ident: Vec<Interval> = {
            let mut v = vec![Interval::ZERO; m * m];
            for d in 0..m {
                v[d * m + d] = Interval::ONE;
            }
            v
        };
        let series_var = compute_series(&hull.0, Some(&ident), p_ord, &self.p, self.backend.as_mut());
        let a_poly = crate::jets::taylor_sum_partial(&series_var, p_ord, h);
        if timing {
            eprintln!("  P2: {:?}", t0.elapsed());
        }
        let t0 = std::time::Instant::now();

        // Taylor pass 3: order p+1 remainders on the rough enclosure
        let vz = self.variational_rough(&jmat);
        let vz_flat: Vec<Interval> = {
            let mut v = vec![Interval::ZERO; m * m];
            for d in 0..m {
                for k in 0..m {
                    let w = vz.get(k, d);
                    v[d * m + k] = if w == 0.0 {
                        Interval::ZERO
                    } else {
                        Interval::sym(w)
                    };
                }
            }
            v
        };
        let series_rem = compute_series(
            z_fin,
            Some(&vz_flat),
            p_ord + 1,
            &self.p,
            self.backend_pt.as_mut(),
        );
        let mut h_pow = Interval::ONE;
        for _ in 0..=p_ord {
            h_pow = h_pow * h;
        }
        if timing {
            eprintln!("  P3: {:?}", t0.elapsed());
        }
        let t0 = std::time::Instant::now();
        let rem_last = &series_rem[p_ord + 1];
        for k in 0..m {
            y[k] = y[k] + rem_last.value[k] * h_pow + deviation[k];
        }
        // A = sum_i D^[i] h^i + D^[p+1] h^{p+1}
        let mut a = IMatrix::zeros(m, m);
        for d in 0..m {
            for k in 0..m {
                a[(k, d)] = a_poly[d * m + k] + rem_last.partial[d * m + k] * h_pow;
            }
        }

        // Lohner reorganization
        let ac = a.mat_mat(&set.c_frame.to_intervals());
        let mut c_new = FMatrix::zeros(m);
        for k in 0..m {
            for l in 0..m {
                c_new.set(k, l, ac[(k, l)].mid());
            }
        }
        let aq = a.mat_mat(&set.q_frame.to_intervals());
        let mut aq_mid = FMatrix::zeros(m);
        for k in 0..m {
            for l in 0..m {
                aq_mid.set(k, l, aq[(k, l)].mid());
            }
        }
        let q_new = mgs_orthonormalize(&aq_mid);
        let q_inv = inverse_enclosure(&q_new).ok_or(Error::Singular)?;

        let center_new: Vec<f64> = y.iter().map(|x| x.mid()).collect();
        let mut garbage = IVector::zeros(m);
        for k in 0..m {
            let mut g = y[k] - Interval::point(center_new[k]);
            for l in 0..m {
                if set.r0[l].is_zero() {
                    continue;
                }
                let e = ac[(k, l)] - Interval::point(c_new.get(k, l));
                if !e.is_zero() {
                    g = g + e * set.r0[l];
                }
            }
            garbage.0[k] = g;
        }
        let s_new = {
            let qa = q_inv.mat_mat(&aq);
            let mut s = qa.mat_vec(&IVector(set.s_box.clone()));
            let g = q_inv.mat_vec(&garbage);
            for k in 0..m {
                s.0[k] = s.0[k] + g.0[k];
            }
            s
        };

        // mid-zone by variation of constants with the signed rough forcing
        let mut midzone_new = Vec::with_capacity(set.midzone.len());
        for (i, x0) in set.midzone.iter().enumerate() {
            let k = m + 1 + i;
            let z = self.mu_at(k) * h;
            let decay = exp(z);
            let forcing = -(self.p.cubic_coeff(k) * rough.cube_iv[k - 1]);
            let forced = if forcing.is_zero() {
                Interval::ZERO
            } else {
                phi(z).mul_f64(self.cfg.h) * forcing
            };
            midzone_new.push(decay * *x0 + forced);
        }

        // tail
        let tail_new = self.advance_tail(&set.tail, rough.k3)?;
        if timing {
            eprintln!("  rest: {:?}", t0.elapsed());
        }

        Ok(LohnerSet {
            m,
            center: center_new,
            c_frame: c_new,
            r0: set.r0.clone(),
            q_frame: q_new,
            s_box: s_new.0,
            midzone: midzone_new,
            tail: tail_new,
            sym_class: set.sym_class,
        })
    }

    /// Run up to `steps` steps, reporting to the sink after each one; the
    /// sink may stop the run early. Returns the final set and the number
    /// of steps taken.
    pub fn integrate(
        &mut self,
        initial: LohnerSet,
        steps: usize,
        sink: &mut dyn StepSink,
    ) -> Result<(LohnerSet, usize), Error> {
        let mut set = initial;
        for n in 1..=steps {
            set = self.step(&set, n)?;
            let hull = set.hull();
            let (mut kmax, mut wmax) = (1usize, 0.0f64);
            for (i, x) in hull.0.iter().enumerate() {
                if x.width() > wmax {
                    wmax = x.width();
                    kmax = i + 1;
                }
            }
            let mut report = StepReport {
                step: n,
                time: n as f64 * self.cfg.h,
                k_maxwidth: kmax,
                maxwidth: wmax,
                tail_c: set.tail.c,
                inclusion_pending: usize::MAX,
            };
            if sink.on_step(&set, &mut report)? {
                return Ok((set, n));
            }
        }
        Ok((set, steps))
    }
}
