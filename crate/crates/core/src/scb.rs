//! Phase-space sets: finite vectors of cosine-coefficient intervals plus a
//! polynomially decaying tail bound, with subset predicates, the
//! block-infinity norm, optional eigenbasis frames, and a plain-text
//! serialization.

use crate::interval::{add_hi, div_hi, Interval};
use crate::linalg::{FMatrix, IMatrix, IVector};
use crate::Error;
use std::fmt::Write as _;

pub const TAIL_EXPONENT: i32 = 6;

/// `|a_k| <= c / k^s` for all `k >= start`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailBound {
    pub c: f64,
    pub s: i32,
    pub start: usize,
}

impl TailBound {
    pub fn new(c: f64, s: i32, start: usize) -> TailBound {
        assert!(c >= 0.0, "tail constant must be nonnegative");
        assert!(s >= 6, "tail exponent below 6 is outside the phase space");
        TailBound { c, s, start }
    }

    pub fn zero(start: usize) -> TailBound {
        TailBound::new(0.0, TAIL_EXPONENT, start)
    }

    /// Upper bound on `c / k^s` for a given index.
    pub fn value_at(&self, k: usize) -> f64 {
        debug_assert!(k >= self.start);
        div_hi(self.c, pow_int_lo(k, self.s))
    }

    pub fn interval_at(&self, k: usize) -> Interval {
        Interval::sym(self.value_at(k))
    }
}

/// Lower bound on `k^e` (exact below 2^53).
pub fn pow_int_lo(k: usize, e: i32) -> f64 {
    let mut r = 1.0f64;
    for _ in 0..e {
        r = crate::interval::mul_lo(r, k as f64);
    }
    r
}

/// Upper bound on `k^e`.
pub fn pow_int_hi(k: usize, e: i32) -> f64 {
    let mut r = 1.0f64;
    for _ in 0..e {
        r = crate::interval::mul_hi(r, k as f64);
    }
    r
}

/// Affine frame for blocks expressed in an approximate eigenbasis of the
/// Jacobian: the first `dim` coordinates are frame coordinates `y` with
/// `x = center + basis * y`; everything beyond `dim` is standard.
#[derive(Clone, Debug)]
pub struct Frame {
    pub dim: usize,
    pub center: Vec<f64>,
    pub basis: FMatrix,
    pub basis_inv: IMatrix,
}

/// Parameter context carried for bookkeeping (midpoint values only).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SetContext {
    pub lambda: f64,
    pub sigma: f64,
    pub domain_len: f64,
}

/// Self-consistent bounds: explicit intervals for modes `1..=m` and a
/// uniform algebraic tail beyond. Mode 0 is identically zero (zero mass)
/// and negative modes mirror positive ones by cosine symmetry.
#[derive(Clone, Debug)]
pub struct ScbSet {
    pub finite: IVector,
    pub tail: TailBound,
    pub context: SetContext,
    pub frame: Option<Frame>,
    /// Verified invariant-subspace tag: modes with index not divisible by
    /// q are exactly zero, in the explicit part and throughout the tail.
    pub sym_class: Option<usize>,
}

impl ScbSet {
    pub fn new(finite: IVector, tail: TailBound) -> ScbSet {
        assert_eq!(
            tail.start,
            finite.len() + 1,
            "tail must begin right after the explicit modes"
        );
        ScbSet {
            finite,
            tail,
            context: SetContext::default(),
            frame: None,
            sym_class: None,
        }
    }

    /// Tag the set as lying in the invariant subspace {a_k = 0, k not in
    /// q N}; panics unless the explicit part satisfies it.
    pub fn with_sym_class(mut self, q: usize) -> ScbSet {
        for (i, x) in self.finite.0.iter().enumerate() {
            assert!(
                (i + 1) % q == 0 || x.is_zero(),
                "mode {} is nonzero outside the class",
                i + 1
            );
        }
        self.sym_class = Some(q);
        self
    }

    pub fn zero(m: usize) -> ScbSet {
        ScbSet::new(IVector::zeros(m), TailBound::zero(m + 1))
    }

    /// Number of explicitly stored modes.
    pub fn explicit_len(&self) -> usize {
        self.finite.len()
    }

    /// Interval for mode `k >= 1`, falling through to the tail bound.
    pub fn mode(&self, k: usize) -> Interval {
        assert!(k >= 1);
        if k <= self.finite.len() {
            self.finite.0[k - 1]
        } else if self.sym_class.map(|q| k % q != 0).unwrap_or(false) {
            Interval::ZERO
        } else {
            self.tail.interval_at(k)
        }
    }

    /// First `n` coefficient intervals.
    pub fn project(&self, n: usize) -> Result<IVector, Error> {
        if n > self.finite.len() {
            return Err(Error::Projection {
                n,
                m: self.finite.len(),
            });
        }
        Ok(IVector(self.finite.0[..n].to_vec()))
    }

    /// Supremum over modes of the componentwise max-abs, including the
    /// tail contribution `C / start^s`.
    pub fn block_inf_norm(&self) -> f64 {
        let mut best = if self.tail.c == 0.0 {
            0.0
        } else {
            self.tail.value_at(self.tail.start)
        };
        for x in &self.finite.0 {
            best = best.max(x.max_abs());
        }
        best
    }

    /// Subset test; both sets must be frame-free or share a frame (callers
    /// reconcile frames first). Returns the first failing index if any.
    pub fn is_subset(&self, outer: &ScbSet) -> SubsetCheck {
        let mi = self.finite.len();
        let mo = outer.finite.len();
        let top = mi.max(mo);
        for k in 1..=top {
            let inner = self.mode(k);
            let out = outer.mode(k);
            if !out.contains_interval(&inner) {
                return SubsetCheck {
                    ok: false,
                    first_fail: Some(k),
                };
            }
        }
        // beyond all explicit modes: same exponent, compare constants
        if self.tail.c > outer.tail.c {
            return SubsetCheck {
                ok: false,
                first_fail: Some(top + 1),
            };
        }
        SubsetCheck {
            ok: true,
            first_fail: None,
        }
    }

    /// Resolve a frame-carrying set into standard coordinates.
    pub fn to_standard(&self) -> ScbSet {
        let Some(frame) = &self.frame else {
            return self.clone();
        };
        let d = frame.dim;
        let y = IVector(self.finite.0[..d].to_vec());
        let x = IMatrix::from_points(d, d, &frame.basis.data).mat_vec(&y);
        let mut finite = self.finite.clone();
        for i in 0..d {
            finite.0[i] = x.0[i] + Interval::point(frame.center[i]);
        }
        let mut out = ScbSet::new(finite, self.tail);
        out.context = self.context;
        out.sym_class = self.sym_class;
        out
    }

    /// Express the leading modes of a standard-coordinate set in `frame`
    /// coordinates via the rigorous inverse enclosure.
    pub fn to_frame(&self, frame: &Frame) -> ScbSet {
        assert!(self.frame.is_none(), "set is already in a frame");
        let d = frame.dim;
        assert!(d <= self.finite.len());
        let mut shifted = IVector::zeros(d);
        for i in 0..d {
            shifted.0[i] = self.finite.0[i] - Interval::point(frame.center[i]);
        }
        let y = frame.basis_inv.mat_vec(&shifted);
        let mut finite = self.finite.clone();
        finite.0[..d].copy_from_slice(&y.0);
        let mut out = ScbSet::new(finite, self.tail);
        out.context = self.context;
        out.frame = Some(frame.clone());
        out
    }

    /// Componentwise magnitude profile `|a_k|` for modes `1..=m`, rounded up.
    pub fn magnitudes(&self, m: usize) -> Vec<f64> {
        (1..=m).map(|k| self.mode(k).max_abs()).collect()
    }

    pub fn serialize(&self) -> String {
        let mut s = String::new();
        writeln!(
            s,
            "scb M={} s={} C={} start={}",
            self.finite.len(),
            self.tail.s,
            self.tail.c,
            self.tail.start
        )
        .unwrap();
        for (i, x) in self.finite.0.iter().enumerate() {
            writeln!(s, "{} {} {}", i + 1, x.lo(), x.hi()).unwrap();
        }
        s
    }

    pub fn parse(text: &str) -> Result<ScbSet, Error> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty set".into()))?;
        let mut m = None;
        let mut s = None;
        let mut c = None;
        let mut start = None;
        for tok in header.split_whitespace() {
            if tok == "scb" {
                continue;
            }
            let (key, val) = tok
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad header token {tok}")))?;
            match key {
                "M" => m = Some(val.parse::<usize>().map_err(|e| Error::Parse(e.to_string()))?),
                "s" => s = Some(val.parse::<i32>().map_err(|e| Error::Parse(e.to_string()))?),
                "C" => c = Some(val.parse::<f64>().map_err(|e| Error::Parse(e.to_string()))?),
                "start" => {
                    start = Some(val.parse::<usize>().map_err(|e| Error::Parse(e.to_string()))?)
                }
                _ => return Err(Error::Parse(format!("unknown header key {key}"))),
            }
        }
        let (m, s, c, start) = match (m, s, c, start) {
            (Some(m), Some(s), Some(c), Some(start)) => (m, s, c, start),
            _ => return Err(Error::Parse("incomplete scb header".into())),
        };
        let mut finite = IVector::zeros(m);
        for line in lines {
            let mut it = line.split_whitespace();
            let k: usize = it
                .next()
                .ok_or_else(|| Error::Parse("missing index".into()))?
                .parse()
                .map_err(|e: std::num::ParseIntError| Error::Parse(e.to_string()))?;
            let lo: f64 = it
                .next()
                .ok_or_else(|| Error::Parse("missing lo".into()))?
                .parse()
                .map_err(|e: std::num::ParseFloatError| Error::Parse(e.to_string()))?;
            let hi: f64 = it
                .next()
                .ok_or_else(|| Error::Parse("missing hi".into()))?
                .parse()
                .map_err(|e: std::num::ParseFloatError| Error::Parse(e.to_string()))?;
            if k == 0 || k > m {
                return Err(Error::Parse(format!("mode index {k} out of range")));
            }
            finite.0[k - 1] = Interval::new(lo, hi);
        }
        Ok(ScbSet::new(finite, TailBound::new(c, s, start)))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SubsetCheck {
    pub ok: bool,
    pub first_fail: Option<usize>,
}

/// Invariant subspace `{a_k = 0 for k not in q*N}`.
#[derive(Clone, Copy, Debug)]
pub struct SymmetryClass {
    pub q: usize,
}

impl SymmetryClass {
    pub fn contains(&self, set: &ScbSet) -> bool {
        if set.tail.c != 0.0 && set.sym_class != Some(self.q) {
            return false;
        }
        set.finite
            .0
            .iter()
            .enumerate()
            .all(|(i, x)| (i + 1) % self.q == 0 || x.is_zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simple_set(vals: &[(f64, f64)], c: f64) -> ScbSet {
        let finite = IVector(vals.iter().map(|&(a, b)| Interval::new(a, b)).collect());
        let start = finite.len() + 1;
        ScbSet::new(finite, TailBound::new(c, 6, start))
    }

    #[test]
    fn project_examples() {
        let set = simple_set(&[(1.0, 1.0), (2.0, 2.0)], 0.0);
        let p = set.project(1).unwrap();
        assert_eq!(p.0, vec![Interval::point(1.0)]);
        let p = set.project(2).unwrap();
        assert_eq!(p.0, set.finite.0);
        assert!(set.project(3).is_err());
        let z = ScbSet::zero(5);
        assert!(z.project(3).unwrap().0.iter().all(|x| x.is_zero()));
    }

    #[test]
    fn block_inf_norm_examples() {
        assert_eq!(ScbSet::zero(4).block_inf_norm(), 0.0);
        let s = simple_set(&[(-3.0, 2.0)], 0.0);
        assert_eq!(s.block_inf_norm(), 3.0);
        // all-zero finite part, tail C=64, s=6, start=2 -> 64/2^6 = 1
        let s = ScbSet::new(IVector::zeros(1), TailBound::new(64.0, 6, 2));
        assert_eq!(s.block_inf_norm(), 1.0);
    }

    #[test]
    fn subset_examples() {
        let a = simple_set(&[(0.1, 0.2)], 1.0);
        assert!(a.is_subset(&a).ok);
        let outer = simple_set(&[(0.0, 1.0)], 2.0);
        assert!(a.is_subset(&outer).ok);
        let inner = simple_set(&[(-2.0, 2.0)], 1.0);
        let r = inner.is_subset(&simple_set(&[(-1.0, 1.0)], 1.0));
        assert!(!r.ok);
        assert_eq!(r.first_fail, Some(1));
    }

    #[test]
    fn subset_checks_tail_overlap() {
        // inner has a long explicit part; outer is mostly tail
        let mut inner = ScbSet::zero(10);
        inner.finite.0[7] = Interval::sym(1e-3); // mode 8
        let outer = ScbSet::new(IVector::zeros(4), TailBound::new(1.0, 6, 5));
        // outer allows |a_8| <= 1/8^6 = 3.8e-6 < 1e-3  -> fail at 8
        let r = inner.is_subset(&outer);
        assert!(!r.ok);
        assert_eq!(r.first_fail, Some(8));
        inner.finite.0[7] = Interval::sym(1e-7);
        assert!(inner.is_subset(&outer).ok);
    }

    #[test]
    fn subset_transitive_on_nested() {
        let a = simple_set(&[(-0.1, 0.1), (0.0, 0.2)], 0.5);
        let b = simple_set(&[(-0.2, 0.2), (-0.1, 0.3)], 0.7);
        let c = simple_set(&[(-0.5, 0.5), (-0.2, 0.4)], 1.0);
        assert!(a.is_subset(&b).ok);
        assert!(b.is_subset(&c).ok);
        assert!(a.is_subset(&c).ok);
    }

    #[test]
    fn serialization_roundtrip() {
        let mut s = simple_set(&[(-0.075, 0.075), (1e-17, 2e-17)], 1.393e-46);
        s.finite.0.push(Interval::new(-0.1, 0.30000000000000004));
        let s = ScbSet::new(s.finite, TailBound::new(1.393e-46, 6, 4));
        let text = s.serialize();
        let back = ScbSet::parse(&text).unwrap();
        assert_eq!(back.tail, s.tail);
        for (a, b) in back.finite.0.iter().zip(&s.finite.0) {
            assert_eq!(a, b, "lossless decimal round-trip");
        }
    }

    #[test]
    fn symmetry_class_membership() {
        let mut set = ScbSet::zero(9);
        set.finite.0[2] = Interval::sym(0.075); // mode 3
        set.finite.0[8] = Interval::sym(0.001); // mode 9
        assert!(SymmetryClass { q: 3 }.contains(&set));
        set.finite.0[1] = Interval::sym(1e-30); // mode 2 breaks it
        assert!(!SymmetryClass { q: 3 }.contains(&set));
    }
}
