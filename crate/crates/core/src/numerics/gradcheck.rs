//! Finite-difference verification of analytic gradients.

use crate::error::{Error, Result};
use crate::numerics::matrix::DenseMatrix;
use crate::numerics::rng::Rng;

/// Default central-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Compares analytic gradients against central finite differences at
/// `probes` randomly chosen coordinates and returns the worst relative
/// error, `|fd - analytic| / max(|fd|, |analytic|, 1e-8)`.
///
/// `f` must be a pure function of `params`; it is re-evaluated twice per
/// probe with one coordinate displaced by ±`step`, and every coordinate is
/// restored to its exact original bits afterwards.
pub fn finite_diff_check(
    params: &mut [DenseMatrix],
    analytic: &[&DenseMatrix],
    probes: usize,
    step: f64,
    rng: &mut Rng,
    mut f: impl FnMut(&[DenseMatrix]) -> Result<f64>,
) -> Result<f64> {
    if params.len() != analytic.len() {
        return Err(Error::invalid(
            "parameter and gradient lists differ in length",
        ));
    }
    for (p, g) in params.iter().zip(analytic) {
        if p.rows() != g.rows() || p.cols() != g.cols() {
            return Err(Error::invalid("gradient shape does not match parameter"));
        }
    }
    if !step.is_finite() || step <= 0.0 {
        return Err(Error::invalid("finite-difference step must be positive"));
    }
    let total: usize = params.iter().map(|p| p.data().len()).sum();
    if total == 0 || probes == 0 {
        return Err(Error::invalid("nothing to probe"));
    }

    let mut worst = 0.0f64;
    for _ in 0..probes {
        let mut flat = rng.below(total);
        let mut tensor = 0;
        while flat >= params[tensor].data().len() {
            flat -= params[tensor].data().len();
            tensor += 1;
        }
        let original = params[tensor].data()[flat];

        params[tensor].data_mut()[flat] = original + step;
        let plus = f(params)?;
        params[tensor].data_mut()[flat] = original - step;
        let minus = f(params)?;
        params[tensor].data_mut()[flat] = original;

        let fd = (plus - minus) / (2.0 * step);
        let an = analytic[tensor].data()[flat];
        if !fd.is_finite() {
            return Err(Error::numerical(
                "finite-difference evaluation produced non-finite loss",
                None,
            ));
        }
        let err = (fd - an).abs() / fd.abs().max(an.abs()).max(1e-8);
        worst = worst.max(err);
    }
    Ok(worst)
}
