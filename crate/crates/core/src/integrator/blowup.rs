use alloc::vec::Vec;

use super::{integrate, IntegratorControls, Termination, Trajectory};
use crate::error::{Error, Result};
use crate::fit::{line_fit, minimize_scalar};
use crate::flow::VectorField;
use crate::geometry::MilnorMetric;
use crate::math::{abs, exp, ln};

/// Singular-time estimate from the tail of a blown-up trajectory.
///
/// The dominant component (largest `|d ln m_i/dt|` at the last sample) is fitted
/// jointly for `(T, p, η)` in `m_i ≈ η (T − t)^p`: for each trial `T` the fit is
/// linear in `ln(T − t)`, and `T` minimises the residual of that linear fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowUpEstimate {
    pub t_hat: f64,
    pub component: usize,
    pub exponent: f64,
    pub coefficient: f64,
    /// RMS residual of the log-log fit.
    pub residual: f64,
    /// Range of `T̂ − t` covered by the fit.
    pub window: (f64, f64),
    pub samples: usize,
}

const MIN_TAIL: usize = 8;
const DECADES: f64 = 100.0;

pub fn estimate_blowup_time(traj: &Trajectory) -> Result<BlowUpEstimate> {
    if traj.termination() != Termination::BlowUp {
        return Err(Error::NoBlowUp(traj.termination()));
    }
    let samples = traj.samples();
    let n = samples.len();
    if n < MIN_TAIL {
        return Err(Error::InsufficientSamples { needed: MIN_TAIL, found: n });
    }
    let rates = traj.log_rates_at(n - 1);
    let component = (0..3).max_by(|&i, &j| abs(rates[i]).total_cmp(&abs(rates[j]))).unwrap_or(0);
    let t_last = samples[n - 1].t;
    let mut delta = traj.last_step();
    if !(delta > 0.0) {
        delta = t_last - samples[n - 2].t;
    }

    let mut tail: Vec<(f64, f64)> = Vec::new();
    let mut best = None;
    for _ in 0..6 {
        let span = DECADES * delta;
        let start = samples.iter().rposition(|s| t_last - s.t > span).map_or(0, |i| i + 1).min(n - MIN_TAIL);
        tail.clear();
        tail.extend(samples[start..].iter().map(|s| (s.t, ln(s.metric.to_array()[component]))));

        let residual = |log_delta: f64| {
            let t_sing = t_last + exp(log_delta);
            let xs: Vec<f64> = tail.iter().map(|(t, _)| ln(t_sing - t)).collect();
            let ys: Vec<f64> = tail.iter().map(|(_, y)| *y).collect();
            line_fit(&xs, &ys).map_or(f64::INFINITY, |f| f.rms)
        };
        let centre = ln(delta);
        let log_delta = minimize_scalar(residual, centre - 7.0, centre + 7.0, 57, 1e-10);
        let new_delta = exp(log_delta);
        let converged = abs(log_delta - centre) < 1e-6;
        delta = new_delta;
        best = Some(delta);
        if converged {
            break;
        }
    }
    let delta = best.unwrap_or(delta);
    let t_hat = t_last + delta;
    let xs: Vec<f64> = tail.iter().map(|(t, _)| ln(t_hat - t)).collect();
    let ys: Vec<f64> = tail.iter().map(|(_, y)| *y).collect();
    let fit = line_fit(&xs, &ys).ok_or(Error::InsufficientSamples { needed: MIN_TAIL, found: tail.len() })?;
    Ok(BlowUpEstimate {
        t_hat,
        component,
        exponent: fit.slope,
        coefficient: exp(fit.intercept),
        residual: fit.rms,
        window: (delta, t_hat - tail[0].0),
        samples: tail.len(),
    })
}

/// Integrate to blow-up and estimate the singular time.
pub fn estimate_blowup<F: VectorField + ?Sized>(
    field: &F,
    init: MilnorMetric,
    controls: &IntegratorControls,
) -> Result<(Trajectory, BlowUpEstimate)> {
    let traj = integrate(field, init, f64::INFINITY, controls)?;
    let est = estimate_blowup_time(&traj)?;
    Ok((traj, est))
}
