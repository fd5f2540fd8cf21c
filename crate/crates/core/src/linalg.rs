//! Small fixed-size linear algebra shared by the metric and curvature code.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Symmetric 3×3 real matrix stored by its six independent entries.
///
/// Entry order is `xx, yy, tt, xy, xt, yt` in whatever chart the matrix was
/// produced in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix3 {
    pub xx: f64,
    pub yy: f64,
    pub tt: f64,
    pub xy: f64,
    pub xt: f64,
    pub yt: f64,
}

impl SymMatrix3 {
    pub const ZERO: Self = Self::diag(0.0, 0.0, 0.0);
    pub const IDENTITY: Self = Self::diag(1.0, 1.0, 1.0);

    pub const fn diag(a: f64, b: f64, c: f64) -> Self {
        Self {
            xx: a,
            yy: b,
            tt: c,
            xy: 0.0,
            xt: 0.0,
            yt: 0.0,
        }
    }

    /// Builds from a full matrix, averaging the off-diagonal pairs.
    pub fn from_matrix(m: &Matrix3<f64>) -> Self {
        Self {
            xx: m[(0, 0)],
            yy: m[(1, 1)],
            tt: m[(2, 2)],
            xy: 0.5 * (m[(0, 1)] + m[(1, 0)]),
            xt: 0.5 * (m[(0, 2)] + m[(2, 0)]),
            yt: 0.5 * (m[(1, 2)] + m[(2, 1)]),
        }
    }

    pub fn to_matrix(&self) -> Matrix3<f64> {
        Matrix3::new(
            self.xx, self.xy, self.xt, //
            self.xy, self.yy, self.yt, //
            self.xt, self.yt, self.tt,
        )
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match (i.min(j), i.max(j)) {
            (0, 0) => self.xx,
            (1, 1) => self.yy,
            (2, 2) => self.tt,
            (0, 1) => self.xy,
            (0, 2) => self.xt,
            (1, 2) => self.yt,
            _ => panic!("index ({i}, {j}) out of range for a 3x3 matrix"),
        }
    }

    pub fn to_array(&self) -> [[f64; 3]; 3] {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.get(i, j);
            }
        }
        out
    }

    pub fn from_array(a: &[[f64; 3]; 3]) -> Self {
        Self::from_matrix(&Matrix3::from_fn(|i, j| a[i][j]))
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn add(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a - b)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            xx: f(self.xx),
            yy: f(self.yy),
            tt: f(self.tt),
            xy: f(self.xy),
            xt: f(self.xt),
            yt: f(self.yt),
        }
    }

    fn zip(&self, o: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        Self {
            xx: f(self.xx, o.xx),
            yy: f(self.yy, o.yy),
            tt: f(self.tt, o.tt),
            xy: f(self.xy, o.xy),
            xt: f(self.xt, o.xt),
            yt: f(self.yt, o.yt),
        }
    }

    pub fn determinant(&self) -> f64 {
        self.to_matrix().determinant()
    }

    pub fn inverse(&self) -> Result<Self> {
        self.to_matrix()
            .try_inverse()
            .map(|m| Self::from_matrix(&m))
            .ok_or(Error::Singular)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 3] {
        let e = SymmetricEigen::new(self.to_matrix());
        let mut v = [e.eigenvalues[0], e.eigenvalues[1], e.eigenvalues[2]];
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn ensure_positive_definite(self) -> Result<Self> {
        let min = self.eigenvalues()[0];
        if min > 0.0 && min.is_finite() {
            Ok(self)
        } else {
            Err(Error::NotPositiveDefinite {
                min_eigenvalue: min,
            })
        }
    }

    /// `v^T M v`.
    pub fn quadratic(&self, v: &[f64; 3]) -> f64 {
        let m = self.to_matrix();
        let v = Vector3::from(*v);
        v.dot(&(m * v))
    }

    /// `aᵀ M b`.
    pub fn quadratic_pair(&self, a: &[f64; 3], b: &[f64; 3]) -> f64 {
        dot(a, &self.apply(b))
    }

    /// `M v`.
    pub fn apply(&self, v: &[f64; 3]) -> [f64; 3] {
        (self.to_matrix() * Vector3::from(*v)).into()
    }

    /// Congruence `A^T M A`.
    pub fn congruence(&self, a: &Matrix3<f64>) -> Self {
        Self::from_matrix(&(a.transpose() * self.to_matrix() * a))
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, o: &Self) -> f64 {
        let d = self.sub(o);
        [d.xx, d.yy, d.tt, d.xy, d.xt, d.yt]
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Largest entrywise difference measured against the diagonal scale
    /// `sqrt(|o_ii o_jj|)` of the reference matrix `o`.
    pub fn max_scaled_diff(&self, o: &Self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..3 {
            for j in i..3 {
                let scale = (o.get(i, i) * o.get(j, j)).abs().sqrt();
                worst = worst.max((self.get(i, j) - o.get(i, j)).abs() / scale);
            }
        }
        worst
    }
}

/// Generalized eigenvalues of the pencil `(a, b)` with `b` positive definite,
/// ascending.
pub fn generalized_eigenvalues(a: &SymMatrix3, b: &SymMatrix3) -> Result<[f64; 3]> {
    let chol = b.to_matrix().cholesky().ok_or(Error::NotPositiveDefinite {
        min_eigenvalue: b.eigenvalues()[0],
    })?;
    let l_inv = chol.l().try_inverse().ok_or(Error::Singular)?;
    let c = l_inv * a.to_matrix() * l_inv.transpose();
    Ok(SymMatrix3::from_matrix(&c).eigenvalues())
}

pub(crate) fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm(a: &[f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn scaled(alpha: f64, x: &[f64; 3]) -> [f64; 3] {
    [alpha * x[0], alpha * x[1], alpha * x[2]]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_round_trip() {
        let m = SymMatrix3 {
            xx: 4.0,
            yy: 3.0,
            tt: 2.0,
            xy: 0.5,
            xt: -0.25,
            yt: 0.1,
        };
        let prod = m.to_matrix() * m.inverse().unwrap().to_matrix();
        assert!((prod - Matrix3::identity()).abs().max() < 1e-14);
    }

    #[test]
    fn generalized_eigenvalues_of_scaled_pencil() {
        let b = SymMatrix3::diag(4.0, 9.0, 1.0);
        let a = b.scale(2.5);
        let ev = generalized_eigenvalues(&a, &b).unwrap();
        for v in ev {
            assert!((v - 2.5).abs() < 1e-14);
        }
    }

    #[test]
    fn non_spd_is_rejected() {
        let m = SymMatrix3::diag(1.0, -1.0, 1.0);
        assert!(matches!(
            m.ensure_positive_definite(),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }
}
