//! Constant-velocity Kalman filter over `[x, vx, y, vy, w, h]` in image pixels.

use nalgebra::{Matrix4, Matrix4x6, Matrix6, Matrix6x4, SymmetricEigen, Vector4, Vector6};

use crate::error::{Error, Result};
use crate::types::{BBox, RunConfig};

const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct KalmanState {
    pub mean: Vector6<f64>,
    pub cov: Matrix6<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MotionModel {
    pub a: Matrix6<f64>,
    pub c: Matrix4x6<f64>,
    pub q: Matrix6<f64>,
    pub r: Matrix4<f64>,
    pub dt: f64,
}

impl MotionModel {
    pub fn constant_velocity(dt: f64, q_pos: f64, q_vel: f64, q_box: f64, r_meas: f64) -> Self {
        let mut a = Matrix6::identity();
        a[(0, 1)] = dt;
        a[(2, 3)] = dt;
        let mut c = Matrix4x6::zeros();
        c[(0, 0)] = 1.0;
        c[(1, 2)] = 1.0;
        c[(2, 4)] = 1.0;
        c[(3, 5)] = 1.0;
        let q = Matrix6::from_diagonal(&Vector6::new(q_pos, q_vel, q_pos, q_vel, q_box, q_box));
        let r = Matrix4::from_diagonal_element(r_meas);
        Self { a, c, q, r, dt }
    }

    pub fn from_config(cfg: &RunConfig) -> Self {
        Self::constant_velocity(cfg.dt, cfg.q_pos, cfg.q_vel, cfg.q_box, cfg.r_meas)
    }
}

impl Default for MotionModel {
    fn default() -> Self {
        Self::from_config(&RunConfig::default())
    }
}

fn symmetrize(m: &Matrix6<f64>) -> Matrix6<f64> {
    (m + m.transpose()) * 0.5
}

/// Predicted measurement and inverse innovation covariance for one state.
#[derive(Debug, Clone)]
pub struct Innovation {
    pub predicted: Vector4<f64>,
    pub cov: Matrix4<f64>,
    pub cov_inv: Matrix4<f64>,
}

impl Innovation {
    pub fn mahalanobis_sq(&self, z: &[f64; 4]) -> f64 {
        let r = Vector4::from_column_slice(z) - self.predicted;
        (r.transpose() * self.cov_inv * r)[(0, 0)].max(0.0)
    }

    pub fn mahalanobis(&self, z: &[f64; 4]) -> f64 {
        self.mahalanobis_sq(z).sqrt()
    }
}

fn checked_inverse(s: &Matrix4<f64>) -> Result<Matrix4<f64>> {
    let eig = SymmetricEigen::new(*s);
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if !(min > 0.0) || !max.is_finite() || max / min > MAX_CONDITION {
        let cond = if min > 0.0 { max / min } else { f64::INFINITY };
        return Err(Error::SingularInnovation(cond));
    }
    s.cholesky()
        .map(|c| c.inverse())
        .ok_or(Error::SingularInnovation(f64::INFINITY))
}

impl KalmanState {
    /// Starts a track at a detection: zero velocity, diffuse velocity variance.
    pub fn from_bbox(b: &BBox) -> Self {
        Self {
            mean: Vector6::new(b.x, 0.0, b.y, 0.0, b.w, b.h),
            cov: Matrix6::from_diagonal(&Vector6::new(10.0, 25.0, 10.0, 25.0, 10.0, 10.0)),
        }
    }

    pub fn bbox(&self) -> BBox {
        BBox::new(self.mean[0], self.mean[2], self.mean[4], self.mean[5])
    }

    pub fn predict(&self, m: &MotionModel) -> KalmanState {
        KalmanState {
            mean: m.a * self.mean,
            cov: symmetrize(&(m.a * self.cov * m.a.transpose() + m.q)),
        }
    }

    pub fn innovation(&self, m: &MotionModel) -> Result<Innovation> {
        let s = m.c * self.cov * m.c.transpose() + m.r;
        let s = (s + s.transpose()) * 0.5;
        Ok(Innovation {
            predicted: m.c * self.mean,
            cov_inv: checked_inverse(&s)?,
            cov: s,
        })
    }

    /// Kalman update. Returns the posterior and the innovation covariance `S`.
    pub fn update(&self, z: &[f64; 4], m: &MotionModel) -> Result<(KalmanState, Matrix4<f64>)> {
        let inn = self.innovation(m)?;
        let gain: Matrix6x4<f64> = self.cov * m.c.transpose() * inn.cov_inv;
        let residual = Vector4::from_column_slice(z) - inn.predicted;
        let mean = self.mean + gain * residual;
        // Joseph form keeps the covariance symmetric positive semi-definite.
        let ikc = Matrix6::identity() - gain * m.c;
        let cov = ikc * self.cov * ikc.transpose() + gain * m.r * gain.transpose();
        Ok((
            KalmanState {
                mean,
                cov: symmetrize(&cov),
            },
            inn.cov,
        ))
    }
}

pub fn mahalanobis(z: &[f64; 4], s: &KalmanState, m: &MotionModel) -> Result<f64> {
    Ok(s.innovation(m)?.mahalanobis(z))
}
