//! The map `g_{x,t}` whose graph point `(y, g(y))` lies at distance `t` from
//! `x`, with its derivative, operator norm and mean-value witness.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::Point;

/// Negative radicands above `-RADICAND_CLAMP * t^2` are treated as 0.
pub const RADICAND_CLAMP: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceMapParams {
    /// Base point in `R^{2d}`.
    pub x: Point,
    pub t: f64,
}

impl DistanceMapParams {
    pub fn new(x: Point, t: f64) -> Result<Self> {
        if x.dim() == 0 || !x.dim().is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "base point must have even dimension, got {}",
                x.dim()
            )));
        }
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidParameter(format!("t must be finite and >= 0, got {t}")));
        }
        Ok(Self { x, t })
    }

    pub fn dim(&self) -> usize {
        self.x.dim() / 2
    }

    /// `t^2 / d`, the squared per-coordinate radius.
    pub fn radius_sq(&self) -> f64 {
        self.t * self.t / self.dim() as f64
    }

    pub fn radicand(&self, i: usize, y: f64) -> f64 {
        let dy = self.x[i] - y;
        self.radius_sq() - dy * dy
    }

    fn clamped(&self, i: usize, y: f64) -> Result<f64> {
        let r = self.radicand(i, y);
        if r >= 0.0 {
            Ok(r)
        } else if r > -RADICAND_CLAMP * self.t * self.t {
            Ok(0.0)
        } else {
            Err(Error::Domain {
                coord: i,
                radicand: r,
            })
        }
    }

    /// Component `g^i(y) = x_{i+d} + sqrt(t^2/d - (x_i - y)^2)`.
    pub fn component(&self, i: usize, y: f64) -> Result<f64> {
        Ok(self.x[i + self.dim()] + self.clamped(i, y)?.sqrt())
    }

    pub fn in_domain(&self, y: &[f64]) -> bool {
        y.len() == self.dim() && (0..self.dim()).all(|i| self.clamped(i, y[i]).is_ok())
    }

    pub fn apply(&self, y: &[f64]) -> Result<Point> {
        check_dim(self.dim(), y.len())?;
        (0..self.dim()).map(|i| self.component(i, y[i])).collect::<Result<Vec<_>>>().map(Point)
    }

    /// `d g^i / d y_i = (x_i - z) / sqrt(t^2/d - (z - x_i)^2)`.
    pub fn derivative(&self, i: usize, z: f64) -> Result<f64> {
        let r = self.clamped(i, z)?;
        if r <= 0.0 {
            return Err(Error::Boundary { coord: i });
        }
        Ok((self.x[i] - z) / r.sqrt())
    }

    pub fn jacobian_diagonal(&self, z: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), z.len())?;
        (0..self.dim()).map(|i| self.derivative(i, z[i])).collect()
    }

    pub fn jacobian(&self, z: &[f64]) -> Result<DMatrix<f64>> {
        let diag = self.jacobian_diagonal(z)?;
        Ok(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag)))
    }

    /// Largest absolute diagonal entry of the (diagonal) Jacobian.
    pub fn operator_norm(&self, z: &[f64]) -> Result<f64> {
        Ok(self.jacobian_diagonal(z)?.iter().fold(0.0, |m, v| m.max(v.abs())))
    }

    /// `z` with `a_i < z_i < b_i` and `(b_i - a_i) g'_i(z_i) = g^i(b_i) - g^i(a_i)`,
    /// by bisection on the (monotone) derivative residual.
    pub fn mvt_witness(&self, a: &[f64], b: &[f64]) -> Result<Point> {
        check_dim(self.dim(), a.len())?;
        check_dim(self.dim(), b.len())?;
        (0..self.dim())
            .map(|i| {
                if a[i] >= b[i] {
                    return Err(Error::InvalidParameter(format!(
                        "need a_i < b_i, coordinate {i} has {} >= {}",
                        a[i], b[i]
                    )));
                }
                let slope = (self.component(i, b[i])? - self.component(i, a[i])?) / (b[i] - a[i]);
                // g^i is concave, so g'_i - slope decreases from + to -.
                let (mut lo, mut hi) = (a[i], b[i]);
                let mut seen_pos = false;
                let mut seen_neg = false;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    let r = self.derivative(i, mid)? - slope;
                    if r > 0.0 {
                        lo = mid;
                        seen_pos = true;
                    } else if r < 0.0 {
                        hi = mid;
                        seen_neg = true;
                    } else {
                        return Ok(mid);
                    }
                }
                let z = 0.5 * (lo + hi);
                let inside = z > a[i] && z < b[i];
                if !inside || !(seen_pos || seen_neg) {
                    return Err(Error::NoSignChange { coord: i });
                }
                Ok(z)
            })
            .collect::<Result<Vec<_>>>()
            .map(Point)
    }

    /// Componentwise `|(b_i - a_i) g'_i(z_i) - (g^i(b_i) - g^i(a_i))|`.
    pub fn mvt_residual(&self, a: &[f64], b: &[f64], z: &[f64]) -> Result<Vec<f64>> {
        (0..self.dim())
            .map(|i| {
                let lhs = (b[i] - a[i]) * self.derivative(i, z[i])?;
                let rhs = self.component(i, b[i])? - self.component(i, a[i])?;
                Ok((lhs - rhs).abs())
            })
            .collect()
    }
}

pub fn g_apply(params: &DistanceMapParams, y: &Point) -> Result<Point> {
    params.apply(y)
}

pub fn g_jacobian(params: &DistanceMapParams, z: &Point) -> Result<DMatrix<f64>> {
    params.jacobian(z)
}

pub fn g_operator_norm(params: &DistanceMapParams, z: &Point) -> Result<f64> {
    params.operator_norm(z)
}

pub fn g_mvt_witness(params: &DistanceMapParams, a: &Point, b: &Point) -> Result<Point> {
    params.mvt_witness(a, b)
}
