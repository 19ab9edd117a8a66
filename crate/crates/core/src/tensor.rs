//! Dense four-index tensor used for chemist-notation two-electron integrals
//! and the spinless two-particle density matrix.

use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn offset(&self, p: usize, q: usize, r: usize, s: usize) -> usize {
        ((p * self.n + q) * self.n + r) * self.n + s
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn iter_nonzero(&self) -> impl Iterator<Item = ([usize; 4], f64)> + '_ {
        let n = self.n;
        self.data.iter().enumerate().filter(|(_, v)| **v != 0.0).map(move |(i, &v)| {
            let s = i % n;
            let r = (i / n) % n;
            let q = (i / (n * n)) % n;
            let p = i / (n * n * n);
            ([p, q, r, s], v)
        })
    }

    /// Sets all eight permutation-equivalent entries of (pq|rs).
    pub fn set_sym8(&mut self, p: usize, q: usize, r: usize, s: usize, v: f64) {
        for (a, b, c, d) in [
            (p, q, r, s),
            (q, p, r, s),
            (p, q, s, r),
            (q, p, s, r),
            (r, s, p, q),
            (s, r, p, q),
            (r, s, q, p),
            (s, r, q, p),
        ] {
            self[[a, b, c, d]] = v;
        }
    }

    /// Largest deviation from 8-fold permutation symmetry.
    pub fn sym8_residual(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let v = self[[p, q, r, s]];
                        for w in [
                            self[[q, p, r, s]],
                            self[[p, q, s, r]],
                            self[[r, s, p, q]],
                        ] {
                            worst = worst.max((v - w).abs());
                        }
                    }
                }
            }
        }
        worst
    }

    /// Contracts every index with `c`: out[p,q,r,s] = Σ c[a,p] c[b,q] c[c,r] c[d,s] t[a,b,c,d].
    /// Done as four one-index transforms, each cycling the index order.
    pub fn transform(&self, c: &DMatrix<f64>) -> Tensor4 {
        let mut cur = self.clone();
        for _ in 0..4 {
            cur = cur.transform_first_cyclic(c);
        }
        cur
    }

    // out[b,c,d,p] = Σ_a c[a,p] t[a,b,c,d]
    fn transform_first_cyclic(&self, c: &DMatrix<f64>) -> Tensor4 {
        let n = self.n;
        let n3 = n * n * n;
        let mut out = Tensor4::zeros(n);
        for a in 0..n {
            let src = &self.data[a * n3..(a + 1) * n3];
            for p in 0..n {
                let cap = c[(a, p)];
                if cap == 0.0 {
                    continue;
                }
                for (bcd, &v) in src.iter().enumerate() {
                    out.data[bcd * n + p] += cap * v;
                }
            }
        }
        out
    }

    /// Restricts to the listed indices, in the given order.
    pub fn slice(&self, keep: &[usize]) -> Tensor4 {
        let m = keep.len();
        let mut out = Tensor4::zeros(m);
        for (p, &a) in keep.iter().enumerate() {
            for (q, &b) in keep.iter().enumerate() {
                for (r, &c) in keep.iter().enumerate() {
                    for (s, &d) in keep.iter().enumerate() {
                        out[[p, q, r, s]] = self[[a, b, c, d]];
                    }
                }
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Tensor4) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Index<[usize; 4]> for Tensor4 {
    type Output = f64;
    #[inline]
    fn index(&self, [p, q, r, s]: [usize; 4]) -> &f64 {
        &self.data[self.offset(p, q, r, s)]
    }
}

impl IndexMut<[usize; 4]> for Tensor4 {
    #[inline]
    fn index_mut(&mut self, [p, q, r, s]: [usize; 4]) -> &mut f64 {
        let o = self.offset(p, q, r, s);
        &mut self.data[o]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_transform_is_noop() {
        let mut t = Tensor4::zeros(3);
        t.set_sym8(0, 1, 2, 2, 0.7);
        t.set_sym8(1, 1, 0, 0, -0.2);
        let out = t.transform(&DMatrix::identity(3, 3));
        assert!(out.max_abs_diff(&t) < 1e-15);
    }

    #[test]
    fn permutation_transform_relabels() {
        let mut t = Tensor4::zeros(3);
        t.set_sym8(0, 1, 2, 2, 0.7);
        // orbital 0 -> 1 -> 2 -> 0
        let mut c = DMatrix::zeros(3, 3);
        c[(0, 1)] = 1.0;
        c[(1, 2)] = 1.0;
        c[(2, 0)] = 1.0;
        let out = t.transform(&c);
        assert_eq!(out[[1, 2, 0, 0]], 0.7);
        assert_eq!(out[[0, 0, 2, 1]], 0.7);
        assert_eq!(out.iter_nonzero().count(), 4);
    }
}
