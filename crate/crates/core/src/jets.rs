//! First-order jets and the normalized-derivative recursion.
//!
//! A jet carries interval values for modes 1..=m together with partials
//! with respect to the initial coordinates; products truncate the
//! second-order terms in the auxiliary variable. Normalized derivatives
//! z^[j+1] = (G o z)^[j] / (j+1) drive the Taylor method, applied to the
//! value and partial parts alike so the same pass yields the flow and its
//! first variation.

use crate::interval::Interval;
use crate::okvf::{linear_eigenvalue, OkParams};

/// One Taylor order of the jet: values for modes 1..=m and partials in
/// direction-major layout (`partial[d*m + k]` is d(mode k+1)/d a_{d+1}).
#[derive(Clone, Debug)]
pub struct JetOrder {
    pub m: usize,
    pub nvar: usize,
    pub value: Vec<Interval>,
    pub partial: Vec<Interval>,
}

impl JetOrder {
    pub fn zeros(m: usize, nvar: usize) -> JetOrder {
        JetOrder {
            m,
            nvar,
            value: vec![Interval::ZERO; m],
            partial: vec![Interval::ZERO; nvar * m],
        }
    }

    #[inline]
    pub fn partial_dir(&self, d: usize) -> &[Interval] {
        &self.partial[d * self.m..(d + 1) * self.m]
    }

    #[inline]
    pub fn partial_dir_mut(&mut self, d: usize) -> &mut [Interval] {
        &mut self.partial[d * self.m..(d + 1) * self.m]
    }

    pub fn add(&self, other: &JetOrder) -> JetOrder {
        assert_eq!(self.m, other.m, "jet dimension mismatch");
        assert_eq!(self.nvar, other.nvar, "jet partial dimension mismatch");
        JetOrder {
            m: self.m,
            nvar: self.nvar,
            value: self
                .value
                .iter()
                .zip(&other.value)
                .map(|(a, b)| *a + *b)
                .collect(),
            partial: self
                .partial
                .iter()
                .zip(&other.partial)
                .map(|(a, b)| *a + *b)
                .collect(),
        }
    }

    pub fn scale(&self, c: Interval) -> JetOrder {
        JetOrder {
            m: self.m,
            nvar: self.nvar,
            value: self.value.iter().map(|a| *a * c).collect(),
            partial: self.partial.iter().map(|a| *a * c).collect(),
        }
    }
}

/// First-order truncated product of scalar jet terms:
/// (x.v, x.d) * (y.v, y.d) = (x.v y.v, x.v y.d + y.v x.d).
pub fn jet_mul_scalar(
    xv: Interval,
    xd: &[Interval],
    yv: Interval,
    yd: &[Interval],
) -> (Interval, Vec<Interval>) {
    assert_eq!(xd.len(), yd.len(), "jet dimension mismatch");
    let v = xv * yv;
    let d = xd
        .iter()
        .zip(yd)
        .map(|(a, b)| xv * *b + yv * *a)
        .collect();
    (v, d)
}

/// Cubic-convolution backend: computes the jet of (u*u*u)^[r] for modes
/// 1..=m from the normalized derivatives of orders 0..=r. Backends may
/// cache per-order data; callers reset between Taylor passes.
pub trait CubeBackend {
    fn reset(&mut self);
    fn cube_order(&mut self, series: &[JetOrder], r: usize) -> JetOrder;
}

/// Normalized derivatives of the flow (and first variation when
/// `init_partial` is present) through `orders_out`, for the Galerkin
/// system of dimension `init_value.len()`.
pub fn compute_series(
    init_value: &[Interval],
    init_partial: Option<&[Interval]>,
    orders_out: usize,
    p: &OkParams,
    backend: &mut dyn CubeBackend,
) -> Vec<JetOrder> {
    let m = init_value.len();
    let nvar = init_partial.map(|q| q.len() / m).unwrap_or(0);
    if let Some(q) = init_partial {
        assert_eq!(q.len(), nvar * m, "partial block must be nvar x m");
    }
    backend.reset();
    let mu: Vec<Interval> = (1..=m).map(|k| linear_eigenvalue(k, p)).collect();
    let coeff: Vec<Interval> = (1..=m).map(|k| p.cubic_coeff(k)).collect();

    let mut series = Vec::with_capacity(orders_out + 1);
    series.push(JetOrder {
        m,
        nvar,
        value: init_value.to_vec(),
        partial: init_partial.map(|q| q.to_vec()).unwrap_or_default(),
    });

    for j in 0..orders_out {
        let cube = if p.cubic_enabled {
            Some(backend.cube_order(&series, j))
        } else {
            None
        };
        let prev = &series[j];
        let mut next = JetOrder::zeros(m, nvar);
        let div = Interval::point((j + 1) as f64);
        for k in 0..m {
            let mut g = mu[k] * prev.value[k];
            if let Some(c) = &cube {
                g = g - coeff[k] * c.value[k];
            }
            next.value[k] = g.div(&div);
        }
        for d in 0..nvar {
            for k in 0..m {
                let idx = d * m + k;
                let mut g = mu[k] * prev.partial[idx];
                if let Some(c) = &cube {
                    g = g - coeff[k] * c.partial[idx];
                }
                next.partial[idx] = g.div(&div);
            }
        }
        series.push(next);
    }
    series
}

/// Horner evaluation of sum_i series[i] * h^i over orders 0..=p.
pub fn taylor_sum_value(series: &[JetOrder], p: usize, h: Interval) -> Vec<Interval> {
    let m = series[0].m;
    let mut acc = vec![Interval::ZERO; m];
    for j in (0..=p).rev() {
        for k in 0..m {
            acc[k] = acc[k] * h + series[j].value[k];
        }
    }
    acc
}

/// Horner evaluation of the partial block, as an m x nvar set of sums
/// (direction-major like the jets).
pub fn taylor_sum_partial(series: &[JetOrder], p: usize, h: Interval) -> Vec<Interval> {
    let m = series[0].m;
    let nvar = series[0].nvar;
    let mut acc = vec![Interval::ZERO; nvar * m];
    for j in (0..=p).rev() {
        for i in 0..nvar * m {
            acc[i] = acc[i] * h + series[j].partial[i];
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jet_term_algebra() {
        let a = (Interval::point(2.0), vec![Interval::ONE, Interval::ZERO]);
        let b = (Interval::point(3.0), vec![Interval::ZERO, Interval::ONE]);
        let (v, d) = jet_mul_scalar(a.0, &a.1, b.0, &b.1);
        assert_eq!(v, Interval::point(6.0));
        assert_eq!(d[0], Interval::point(3.0));
        assert_eq!(d[1], Interval::point(2.0));
        // identity jet
        let one = (Interval::ONE, vec![Interval::ZERO, Interval::ZERO]);
        let (v, d) = jet_mul_scalar(a.0, &a.1, one.0, &one.1);
        assert_eq!(v, a.0);
        assert_eq!(d, a.1);
        // xi^2 truncation: zero values kill the product entirely
        let za = (Interval::ZERO, vec![Interval::ONE, Interval::ONE]);
        let zb = (Interval::ZERO, vec![Interval::ONE, -Interval::ONE]);
        let (v, d) = jet_mul_scalar(za.0, &za.1, zb.0, &zb.1);
        assert!(v.is_zero());
        assert!(d.iter().all(|x| x.is_zero()));
    }

    #[test]
    fn jet_add_commutes() {
        let mut a = JetOrder::zeros(3, 2);
        let mut b = JetOrder::zeros(3, 2);
        a.value[0] = Interval::new(-1.0, 2.0);
        b.value[0] = Interval::new(0.5, 0.75);
        a.partial[4] = Interval::sym(0.25);
        b.partial[4] = Interval::point(1.0);
        let ab = a.add(&b);
        let ba = b.add(&a);
        assert_eq!(ab.value, ba.value);
        assert_eq!(ab.partial, ba.partial);
    }
}
