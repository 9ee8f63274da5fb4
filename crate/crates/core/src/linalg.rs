//! Interval vectors and matrices, plus the small amount of floating-point
//! linear algebra the pipeline needs: orthonormalization of Lohner frames
//! and rigorous enclosures of inverses of point matrices.

use crate::interval::{add_hi, mul_hi, Interval};

#[derive(Clone, Debug, PartialEq)]
pub struct IVector(pub Vec<Interval>);

impl IVector {
    pub fn zeros(n: usize) -> IVector {
        IVector(vec![Interval::ZERO; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn from_points(v: &[f64]) -> IVector {
        IVector(v.iter().map(|&x| Interval::point(x)).collect())
    }

    pub fn add(&self, other: &IVector) -> IVector {
        assert_eq!(self.len(), other.len(), "vector dimension mismatch");
        IVector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| *a + *b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &IVector) -> IVector {
        assert_eq!(self.len(), other.len(), "vector dimension mismatch");
        IVector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| *a - *b)
                .collect(),
        )
    }

    pub fn mids(&self) -> Vec<f64> {
        self.0.iter().map(|x| x.mid()).collect()
    }

    /// Componentwise max-abs, rounded up.
    pub fn mags(&self) -> Vec<f64> {
        self.0.iter().map(|x| x.max_abs()).collect()
    }

    pub fn max_width(&self) -> f64 {
        self.0.iter().map(|x| x.width()).fold(0.0, f64::max)
    }
}

/// Dense interval matrix, row-major.
#[derive(Clone, Debug)]
pub struct IMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Interval>,
}

impl IMatrix {
    pub fn zeros(rows: usize, cols: usize) -> IMatrix {
        IMatrix {
            rows,
            cols,
            data: vec![Interval::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> IMatrix {
        let mut m = IMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Interval::ONE;
        }
        m
    }

    pub fn from_points(rows: usize, cols: usize, v: &[f64]) -> IMatrix {
        assert_eq!(v.len(), rows * cols, "matrix dimension mismatch");
        IMatrix {
            rows,
            cols,
            data: v.iter().map(|&x| Interval::point(x)).collect(),
        }
    }

    pub fn mids(&self) -> Vec<f64> {
        self.data.iter().map(|x| x.mid()).collect()
    }

    pub fn mat_vec(&self, v: &IVector) -> IVector {
        assert_eq!(self.cols, v.len(), "matrix-vector dimension mismatch");
        let mut out = IVector::zeros(self.rows);
        for i in 0..self.rows {
            let mut acc = Interval::ZERO;
            for j in 0..self.cols {
                acc = acc + self[(i, j)] * v.0[j];
            }
            out.0[i] = acc;
        }
        out
    }

    pub fn mat_mat(&self, other: &IMatrix) -> IMatrix {
        assert_eq!(self.cols, other.rows, "matrix-matrix dimension mismatch");
        let mut out = IMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] = out[(i, j)] + a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn add(&self, other: &IMatrix) -> IMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a = *a + *b;
        }
        out
    }

    /// Upper bound on the infinity (max row sum of |.|) norm.
    pub fn inf_norm(&self) -> f64 {
        let mut best = 0.0f64;
        for i in 0..self.rows {
            let mut s = 0.0f64;
            for j in 0..self.cols {
                s = add_hi(s, self[(i, j)].max_abs());
            }
            best = best.max(s);
        }
        best
    }
}

impl std::ops::Index<(usize, usize)> for IMatrix {
    type Output = Interval;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Interval {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Interval {
        &mut self.data[i * self.cols + j]
    }
}

/// Plain f64 matrix helpers (non-rigorous; rigor is reattached through
/// enclosures of residuals).
#[derive(Clone, Debug)]
pub struct FMatrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl FMatrix {
    pub fn zeros(n: usize) -> FMatrix {
        FMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> FMatrix {
        let mut m = FMatrix::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn to_intervals(&self) -> IMatrix {
        IMatrix::from_points(self.n, self.n, &self.data)
    }

    pub fn transpose(&self) -> FMatrix {
        let mut t = FMatrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mat_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.n, v.len());
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    /// Solve A x = b by LU with partial pivoting.
    pub fn solve(&self, b: &[f64]) -> Option<Vec<f64>> {
        let n = self.n;
        let a = nalgebra::DMatrix::from_row_slice(n, n, &self.data);
        let rhs = nalgebra::DVector::from_column_slice(b);
        a.lu().solve(&rhs).map(|x| x.as_slice().to_vec())
    }

    pub fn inverse(&self) -> Option<FMatrix> {
        let n = self.n;
        let a = nalgebra::DMatrix::from_row_slice(n, n, &self.data);
        a.try_inverse().map(|inv| {
            let mut out = FMatrix::zeros(n);
            for i in 0..n {
                for j in 0..n {
                    out.set(i, j, inv[(i, j)]);
                }
            }
            out
        })
    }
}

/// Orthonormalize the columns of `a` by modified Gram-Schmidt with one
/// re-orthogonalization pass. Exact zero entries stay exactly zero, which
/// keeps symmetry-class block structure intact. Degenerate columns fall
/// back to unit vectors.
pub fn mgs_orthonormalize(a: &FMatrix) -> FMatrix {
    let n = a.n;
    let mut q = a.clone();
    for pass in 0..2 {
        let _ = pass;
        for j in 0..n {
            let mut col: Vec<f64> = (0..n).map(|i| q.get(i, j)).collect();
            for k in 0..j {
                let dot: f64 = (0..n).map(|i| q.get(i, k) * col[i]).sum();
                if dot != 0.0 {
                    for i in 0..n {
                        col[i] -= dot * q.get(i, k);
                    }
                }
            }
            let norm: f64 = col.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-300 {
                for (i, c) in col.iter().enumerate() {
                    q.set(i, j, c / norm);
                }
            } else {
                // fall back to the missing coordinate direction
                for i in 0..n {
                    q.set(i, j, 0.0);
                }
                q.set(j, j, 1.0);
            }
        }
    }
    q
}

/// Connected components of the nonzero pattern of a square matrix,
/// treating it as an undirected graph. Index i and j are joined when
/// either entry (i,j) or (j,i) is nonzero.
fn pattern_components(a: &FMatrix) -> Vec<Vec<usize>> {
    let n = a.n;
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..n {
        for j in 0..n {
            if a.get(i, j) != 0.0 || a.get(j, i) != 0.0 {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

/// Rigorous enclosure of `a^{-1}` for a point matrix, via an approximate
/// inverse Y and the Neumann bound on `R = I - Y a`. Works per connected
/// component of the nonzero pattern so that decoupled blocks keep exact
/// zero couplings (the mathematical inverse is block diagonal).
pub fn inverse_enclosure(a: &FMatrix) -> Option<IMatrix> {
    let n = a.n;
    let mut out = IMatrix::zeros(n, n);
    for comp in pattern_components(a) {
        let k = comp.len();
        let mut sub = FMatrix::zeros(k);
        for (si, &gi) in comp.iter().enumerate() {
            for (sj, &gj) in comp.iter().enumerate() {
                sub.set(si, sj, a.get(gi, gj));
            }
        }
        let y = sub.inverse()?;
        // R = I - Y*sub with interval products
        let yi = y.to_intervals();
        let si = sub.to_intervals();
        let mut r = yi.mat_mat(&si);
        for i in 0..k {
            for j in 0..k {
                let id = if i == j { Interval::ONE } else { Interval::ZERO };
                r[(i, j)] = id - r[(i, j)];
            }
        }
        let rn = r.inf_norm();
        if rn >= 1.0 {
            return None;
        }
        // |inv - Y| <= ||R|| * ||Y|| / (1 - ||R||) entrywise
        let yn = yi.inf_norm();
        let d = crate::interval::div_hi(mul_hi(rn, yn), 1.0 - rn);
        let pad = Interval::sym(d);
        for (si_, &gi) in comp.iter().enumerate() {
            for (sj, &gj) in comp.iter().enumerate() {
                out[(gi, gj)] = yi[(si_, sj)] + pad;
            }
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mat_vec_examples() {
        let id = IMatrix::identity(3);
        let v = IVector::from_points(&[1.0, -2.0, 0.5]);
        let r = id.mat_vec(&v);
        assert_eq!(r, v);

        let z = IMatrix::zeros(2, 3);
        let r = z.mat_vec(&IVector::from_points(&[1.0, 1.0, 1.0]));
        assert!(r.0.iter().all(|x| x.is_zero()));

        let m = IMatrix::from_points(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let r = m.mat_vec(&IVector::from_points(&[1.0, 1.0]));
        assert_eq!(r.0[0], Interval::point(3.0));
        assert_eq!(r.0[1], Interval::point(7.0));
    }

    #[test]
    #[should_panic]
    fn dimension_mismatch_panics() {
        let m = IMatrix::zeros(2, 2);
        let _ = m.mat_vec(&IVector::zeros(3));
    }

    #[test]
    fn mgs_orthogonalizes() {
        let mut a = FMatrix::identity(3);
        a.set(0, 0, 2.0);
        a.set(1, 0, 1.0);
        a.set(0, 1, -1.0);
        a.set(1, 1, 3.0);
        let q = mgs_orthonormalize(&a);
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| q.get(k, i) * q.get(k, j)).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-13);
            }
        }
        // the decoupled third coordinate keeps exact zeros
        assert_eq!(q.get(2, 0), 0.0);
        assert_eq!(q.get(0, 2), 0.0);
        assert_eq!(q.get(2, 2), 1.0);
    }

    #[test]
    fn inverse_enclosure_contains_truth() {
        let mut a = FMatrix::identity(2);
        a.set(0, 0, 4.0);
        a.set(0, 1, 1.0);
        a.set(1, 0, 2.0);
        a.set(1, 1, 3.0);
        let inv = inverse_enclosure(&a).unwrap();
        // true inverse = 1/10 * [3 -1; -2 4]
        assert!(inv[(0, 0)].contains(0.3));
        assert!(inv[(0, 1)].contains(-0.1));
        assert!(inv[(1, 0)].contains(-0.2));
        assert!(inv[(1, 1)].contains(0.4));
    }

    #[test]
    fn inverse_enclosure_respects_blocks() {
        // block diagonal: coupling entries must stay exactly zero
        let mut a = FMatrix::identity(4);
        a.set(0, 0, 2.0);
        a.set(0, 2, 0.5);
        a.set(2, 0, -0.5);
        a.set(2, 2, 1.5);
        a.set(1, 1, 3.0);
        a.set(3, 3, 4.0);
        let inv = inverse_enclosure(&a).unwrap();
        assert!(inv[(0, 1)].is_zero());
        assert!(inv[(1, 2)].is_zero());
        assert!(inv[(1, 3)].is_zero());
        assert!(inv[(1, 1)].contains(1.0 / 3.0));
    }
}
