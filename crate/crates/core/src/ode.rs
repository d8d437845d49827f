//! Adaptive Dormand–Prince 5(4) integrator for complex-valued first-order systems.
//!
//! The step is advanced with the fifth-order solution (local extrapolation) and
//! the embedded fourth-order solution provides the error estimate.

use num_complex::Complex64;

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step as a fraction of the integration span.
    pub initial_fraction: f64,
    pub max_steps: usize,
}

impl Default for StepperOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            initial_fraction: 1e-2,
            max_steps: 2_000_000,
        }
    }
}

impl StepperOptions {
    pub fn with_tol(rtol: f64) -> Self {
        Self {
            rtol,
            atol: (rtol * 1e-2).max(1e-15),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    /// Largest scaled error norm over accepted steps (≤ 1 by construction).
    pub max_error_estimate: f64,
}

impl IntegrationStats {
    pub fn merge(&mut self, other: &IntegrationStats) {
        self.accepted += other.accepted;
        self.rejected += other.rejected;
        self.max_error_estimate = self.max_error_estimate.max(other.max_error_estimate);
    }
}

/// Integrate `y' = f(t, y)` from `t0` to `t1` (either direction).
///
/// `f` writes the derivative into its third argument and may fail, in which
/// case the error is returned unchanged.
pub fn integrate<F>(
    mut f: F,
    t0: f64,
    t1: f64,
    y0: &[Complex64],
    opts: &StepperOptions,
) -> Result<(Vec<Complex64>, IntegrationStats)>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]) -> Result<()>,
{
    let n = y0.len();
    let mut stats = IntegrationStats::default();
    let span = t1 - t0;
    if span == 0.0 || n == 0 {
        return Ok((y0.to_vec(), stats));
    }
    let dir = span.signum();
    let min_step = span.abs() * 1e-13;

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut h = span.abs() * opts.initial_fraction;

    let mut k1 = vec![Complex64::default(); n];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut k5 = k1.clone();
    let mut k6 = k1.clone();
    let mut k7 = k1.clone();
    let mut tmp = k1.clone();
    let mut y_new = k1.clone();

    f(t, &y, &mut k1)?;

    loop {
        let remaining = (t1 - t).abs();
        if remaining <= span.abs() * 1e-15 {
            break;
        }
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        let hs = dir * h;

        for i in 0..n {
            tmp[i] = y[i] + k1[i] * (hs * A21);
        }
        f(t + C2 * hs, &tmp, &mut k2)?;
        for i in 0..n {
            tmp[i] = y[i] + (k1[i] * A31 + k2[i] * A32) * hs;
        }
        f(t + C3 * hs, &tmp, &mut k3)?;
        for i in 0..n {
            tmp[i] = y[i] + (k1[i] * A41 + k2[i] * A42 + k3[i] * A43) * hs;
        }
        f(t + C4 * hs, &tmp, &mut k4)?;
        for i in 0..n {
            tmp[i] = y[i] + (k1[i] * A51 + k2[i] * A52 + k3[i] * A53 + k4[i] * A54) * hs;
        }
        f(t + C5 * hs, &tmp, &mut k5)?;
        for i in 0..n {
            tmp[i] =
                y[i] + (k1[i] * A61 + k2[i] * A62 + k3[i] * A63 + k4[i] * A64 + k5[i] * A65) * hs;
        }
        let t_next = if last { t1 } else { t + hs };
        f(t_next, &tmp, &mut k6)?;
        for i in 0..n {
            y_new[i] =
                y[i] + (k1[i] * A71 + k3[i] * A73 + k4[i] * A74 + k5[i] * A75 + k6[i] * A76) * hs;
        }
        f(t_next, &y_new, &mut k7)?;

        let mut err_sq = 0.0;
        for i in 0..n {
            let e =
                (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * hs;
            let scale = opts.atol + opts.rtol * y[i].norm().max(y_new[i].norm());
            err_sq += (e.norm() / scale).powi(2);
        }
        let err = (err_sq / n as f64).sqrt();
        if !err.is_finite() {
            return Err(Error::Numerical {
                at: t,
                message: "non-finite error estimate".into(),
            });
        }

        if err <= 1.0 {
            t = t_next;
            std::mem::swap(&mut y, &mut y_new);
            std::mem::swap(&mut k1, &mut k7);
            stats.accepted += 1;
            stats.max_error_estimate = stats.max_error_estimate.max(err);
            if last {
                break;
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h *= factor;
        } else {
            stats.rejected += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            if h < min_step {
                return Err(Error::Numerical {
                    at: t,
                    message: format!(
                        "step size underflow (h = {h:e}, error estimate {err:e}, rtol {:e})",
                        opts.rtol
                    ),
                });
            }
        }
        if stats.accepted + stats.rejected > opts.max_steps {
            return Err(Error::Numerical {
                at: t,
                message: format!("exceeded {} steps", opts.max_steps),
            });
        }
    }
    Ok((y, stats))
}
