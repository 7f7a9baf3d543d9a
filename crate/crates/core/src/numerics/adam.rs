//! Adam optimizer over lists of dense parameter matrices.

use crate::error::{Error, Result};
use crate::numerics::matrix::DenseMatrix;

pub const DEFAULT_BETA1: f64 = 0.9;
pub const DEFAULT_BETA2: f64 = 0.999;
pub const DEFAULT_EPS: f64 = 1e-8;

/// First/second moment estimates plus the step counter. One state instance
/// tracks a fixed list of parameter tensors, identified by position.
#[derive(Clone, Debug)]
pub struct AdamState {
    m: Vec<DenseMatrix>,
    v: Vec<DenseMatrix>,
    t: u64,
    beta1: f64,
    beta2: f64,
    eps: f64,
}

impl AdamState {
    /// Fresh state with zero moments, shaped after `params`.
    pub fn new(params: &[&DenseMatrix]) -> Self {
        AdamState {
            m: params
                .iter()
                .map(|p| DenseMatrix::zeros(p.rows(), p.cols()))
                .collect(),
            v: params
                .iter()
                .map(|p| DenseMatrix::zeros(p.rows(), p.cols()))
                .collect(),
            t: 0,
            beta1: DEFAULT_BETA1,
            beta2: DEFAULT_BETA2,
            eps: DEFAULT_EPS,
        }
    }

    /// Rebuilds a state from checkpointed moments and step counter.
    pub fn from_parts(m: Vec<DenseMatrix>, v: Vec<DenseMatrix>, t: u64) -> Result<Self> {
        if m.len() != v.len() {
            return Err(Error::invalid("adam moment lists differ in length"));
        }
        for (a, b) in m.iter().zip(&v) {
            if a.rows() != b.rows() || a.cols() != b.cols() {
                return Err(Error::invalid("adam moment shapes differ"));
            }
        }
        Ok(AdamState {
            m,
            v,
            t,
            beta1: DEFAULT_BETA1,
            beta2: DEFAULT_BETA2,
            eps: DEFAULT_EPS,
        })
    }

    pub fn first_moments(&self) -> &[DenseMatrix] {
        &self.m
    }

    pub fn second_moments(&self) -> &[DenseMatrix] {
        &self.v
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    /// One Adam update with bias correction. Returns the largest absolute
    /// parameter change, which callers can log or use as a stopping signal.
    pub fn step(
        &mut self,
        params: &mut [&mut DenseMatrix],
        grads: &[&DenseMatrix],
        lr: f64,
    ) -> Result<f64> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::invalid(format!(
                "adam step expects {} tensors, got {} params / {} grads",
                self.m.len(),
                params.len(),
                grads.len()
            )));
        }
        if !lr.is_finite() || lr <= 0.0 {
            return Err(Error::invalid("learning rate must be positive"));
        }
        for (i, g) in grads.iter().enumerate() {
            if g.rows() != self.m[i].rows() || g.cols() != self.m[i].cols() {
                return Err(Error::invalid(format!("gradient {i} has the wrong shape")));
            }
            if !g.is_finite() {
                return Err(Error::numerical(
                    format!("gradient {i} contains non-finite values"),
                    None,
                ));
            }
        }

        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        let mut max_delta = 0.0f64;
        for i in 0..params.len() {
            if params[i].rows() != self.m[i].rows() || params[i].cols() != self.m[i].cols() {
                return Err(Error::invalid(format!("parameter {i} has the wrong shape")));
            }
            let g = grads[i].data();
            let m = self.m[i].data_mut();
            let v = self.v[i].data_mut();
            let p = params[i].data_mut();
            for k in 0..g.len() {
                m[k] = self.beta1 * m[k] + (1.0 - self.beta1) * g[k];
                v[k] = self.beta2 * v[k] + (1.0 - self.beta2) * g[k] * g[k];
                let m_hat = m[k] / bc1;
                let v_hat = v[k] / bc2;
                let delta = lr * m_hat / (v_hat.sqrt() + self.eps);
                p[k] -= delta;
                max_delta = max_delta.max(delta.abs());
            }
        }
        Ok(max_delta)
    }
}
