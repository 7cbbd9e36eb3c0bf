//! Ambient linear operators: dense matrices, or the structured
//! finite-rank-plus-diagonal-tail form used by Galerkin-truncated
//! systems.

use alloc::format;
use nalgebra::{DMatrix, DVector};

use crate::error::{CoreError, Result};

/// A bounded linear operator on the ambient coordinate space.
#[derive(Debug, Clone, PartialEq)]
pub enum LinearMap {
    /// Plain dense matrix.
    Dense(DMatrix<f64>),
    /// `A = P Q + diag(tail)`: a finite-rank part (`P` is `D x r`, `Q`
    /// is `r x D`) plus a diagonal tail. The tail is the non-compact
    /// part of the operator.
    FiniteRankPlusTail { left: DMatrix<f64>, right: DMatrix<f64>, tail: DVector<f64> },
}

impl LinearMap {
    pub fn dense(m: DMatrix<f64>) -> Self {
        LinearMap::Dense(m)
    }

    pub fn finite_rank_plus_tail(
        left: DMatrix<f64>,
        right: DMatrix<f64>,
        tail: DVector<f64>,
    ) -> Result<Self> {
        let d = tail.len();
        if left.nrows() != d || right.ncols() != d || left.ncols() != right.nrows() {
            return Err(CoreError::input(format!(
                "shape mismatch: left {:?}, right {:?}, tail {d}",
                left.shape(),
                right.shape()
            )));
        }
        Ok(LinearMap::FiniteRankPlusTail { left, right, tail })
    }

    pub fn dim(&self) -> usize {
        match self {
            LinearMap::Dense(m) => m.nrows(),
            LinearMap::FiniteRankPlusTail { tail, .. } => tail.len(),
        }
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        match self {
            LinearMap::Dense(m) => m * v,
            LinearMap::FiniteRankPlusTail { left, right, tail } => {
                let mut out = left * (right * v);
                for i in 0..tail.len() {
                    out[i] += tail[i] * v[i];
                }
                out
            }
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            LinearMap::Dense(m) => m.clone(),
            LinearMap::FiniteRankPlusTail { left, right, tail } => {
                let mut m = left * right;
                for i in 0..tail.len() {
                    m[(i, i)] += tail[i];
                }
                m
            }
        }
    }
}

/// Upper bound for the Kuratowski seminorm `|A|_alpha` (the measure of
/// noncompactness of the image of the unit ball).
///
/// Dense and finite-rank operators are compact in the truncation model,
/// so the bound is 0; for the structured form the diagonal tail is the
/// non-compact part and its sup magnitude bounds the seminorm (exactly,
/// for the absolute norms used with these operators).
pub fn kuratowski_bound(map: &LinearMap) -> f64 {
    match map {
        LinearMap::Dense(_) => 0.0,
        LinearMap::FiniteRankPlusTail { tail, .. } => {
            tail.iter().fold(0.0f64, |m, t| m.max(t.abs()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn dense_is_compact() {
        let m = LinearMap::dense(DMatrix::from_element(10, 10, 0.37));
        assert_eq!(kuratowski_bound(&m), 0.0);
    }

    #[test]
    fn tail_sup_bounds_seminorm() {
        let d = 6;
        let left = DMatrix::identity(d, d).columns(0, 2).into_owned();
        let right = DMatrix::identity(d, d).rows(0, 2).into_owned();
        let tail = DVector::from_vec(vec![0.0, 0.0, 0.3, 0.25, 0.2, 0.15]);
        let m = LinearMap::finite_rank_plus_tail(left, right, tail).unwrap();
        assert_eq!(kuratowski_bound(&m), 0.3);
    }

    #[test]
    fn zero_tail_is_compact() {
        let d = 4;
        let m = LinearMap::finite_rank_plus_tail(
            DMatrix::identity(d, 1),
            DMatrix::identity(1, d),
            DVector::zeros(d),
        )
        .unwrap();
        assert_eq!(kuratowski_bound(&m), 0.0);
    }

    #[test]
    fn structured_apply_matches_dense() {
        let d = 5;
        let left = DMatrix::from_fn(d, 2, |i, j| (i + j) as f64 * 0.1);
        let right = DMatrix::from_fn(2, d, |i, j| (i * j) as f64 * 0.05 + 0.02);
        let tail = DVector::from_fn(d, |i, _| 0.5 / (i + 1) as f64);
        let m = LinearMap::finite_rank_plus_tail(left, right, tail).unwrap();
        let v = DVector::from_fn(d, |i, _| (i as f64).sin());
        let a = m.apply(&v);
        let b = m.to_dense() * &v;
        assert!((a - b).norm() < 1e-12);
    }
}
