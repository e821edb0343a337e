//! Adaptive Dormand–Prince 5(4) integration of Milnor-frame flows.
//!
//! By default the state is `(ln A, ln B, ln C)`, which keeps components
//! positive by construction and turns power-law blow-up into logarithmic
//! growth of the state. Every accepted step is recorded together with the
//! state derivative, so the trajectory carries a cubic Hermite dense output.

use alloc::vec::Vec;
use core::ops::ControlFlow;

use crate::error::{Error, Result};
use crate::flow::{FlowSign, VectorField};
use crate::geometry::{Geometry, MilnorMetric};
use crate::math::{abs, exp, ln, powf};

mod blowup;
pub(crate) mod events;
pub mod monitor;

pub use blowup::{estimate_blowup, estimate_blowup_time, BlowUpEstimate};
pub use events::{detect_events, Direction, EventHit, EventSpec, EVENT_TOL};

/// Integration variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariableMode {
    /// `(A, B, C)` directly; steps that leave the positive octant are rejected.
    Linear,
    /// `(ln A, ln B, ln C)`.
    Logarithmic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorControls {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Blow-up cap on any component. `None` means `1e9 ×` the largest initial component.
    pub max_component: Option<f64>,
    /// Smallest admissible step. `None` means `1e-14 ×` the current time scale.
    pub min_step: Option<f64>,
    /// Budget of attempted steps.
    pub max_steps: usize,
    pub variable_mode: VariableMode,
}

impl Default for IntegratorControls {
    fn default() -> Self {
        IntegratorControls {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_component: None,
            min_step: None,
            max_steps: 10_000_000,
            variable_mode: VariableMode::Logarithmic,
        }
    }
}

/// Default cap on components, relative to the largest initial component.
pub const CAP_FACTOR: f64 = 1e9;
/// Default minimum step, relative to the current time scale.
pub const MIN_STEP_FACTOR: f64 = 1e-14;
/// Growth of the largest log rate, relative to its initial value, that marks a
/// step underflow as a blow-up.
pub const DIVERGENCE_FACTOR: f64 = 1e3;

impl IntegratorControls {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::InvalidControls("rel_tol must lie in (0, 1)"));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::InvalidControls("abs_tol must be positive"));
        }
        if let Some(cap) = self.max_component {
            if !(cap > 0.0) {
                return Err(Error::InvalidControls("max_component must be positive"));
            }
        }
        if let Some(h) = self.min_step {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::InvalidControls("min_step must be positive"));
            }
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidControls("max_steps must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// The requested end time was reached.
    TimeReached,
    /// A component reached the cap with log rates above their initial size, or
    /// the step size underflowed while the log rates diverged.
    BlowUp,
    /// The step size underflowed without any sign of divergence.
    StepUnderflow,
    /// The step budget ran out, time itself overflowed, or a component reached
    /// the cap while the log rates were decaying.
    BudgetExhausted,
    /// An observer asked to stop.
    Stopped,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub metric: MilnorMetric,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Node {
    y: [f64; 3],
    dy: [f64; 3],
}

/// Accepted steps of one integration, with dense output between them.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    geometry: Geometry,
    sign: FlowSign,
    mode: VariableMode,
    samples: Vec<Sample>,
    nodes: Vec<Node>,
    termination: Termination,
    last_step: f64,
}

impl Trajectory {
    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    pub fn sign(&self) -> FlowSign {
        self.sign
    }

    pub fn variable_mode(&self) -> VariableMode {
        self.mode
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn first(&self) -> Sample {
        self.samples[0]
    }

    pub fn last(&self) -> Sample {
        self.samples[self.samples.len() - 1]
    }

    pub fn termination(&self) -> Termination {
        self.termination
    }

    /// Step size in force when integration stopped.
    pub fn last_step(&self) -> f64 {
        self.last_step
    }

    /// `d ln m_i / dt` at sample `i`.
    pub fn log_rates_at(&self, i: usize) -> [f64; 3] {
        let n = &self.nodes[i];
        match self.mode {
            VariableMode::Logarithmic => n.dy,
            VariableMode::Linear => [n.dy[0] / n.y[0], n.dy[1] / n.y[1], n.dy[2] / n.y[2]],
        }
    }

    /// Dense output at `t`; `None` outside the integrated interval.
    pub fn interpolate(&self, t: f64) -> Option<MilnorMetric> {
        let first = self.samples.first()?.t;
        let last = self.samples.last()?.t;
        if !(t >= first && t <= last) {
            return None;
        }
        let i = self.samples.partition_point(|s| s.t <= t);
        if i == 0 {
            return Some(self.samples[0].metric);
        }
        if i >= self.samples.len() {
            return Some(self.samples[self.samples.len() - 1].metric);
        }
        self.interpolate_segment(i - 1, t)
    }

    /// Hermite interpolation on the segment `[t_i, t_{i+1}]`.
    pub(crate) fn interpolate_segment(&self, i: usize, t: f64) -> Option<MilnorMetric> {
        let (s0, s1) = (&self.samples[i], &self.samples[i + 1]);
        let (n0, n1) = (&self.nodes[i], &self.nodes[i + 1]);
        let h = s1.t - s0.t;
        if h <= 0.0 {
            return Some(s1.metric);
        }
        let th = (t - s0.t) / h;
        let th2 = th * th;
        let th3 = th2 * th;
        let h00 = 2.0 * th3 - 3.0 * th2 + 1.0;
        let h10 = th3 - 2.0 * th2 + th;
        let h01 = -2.0 * th3 + 3.0 * th2;
        let h11 = th3 - th2;
        let y: [f64; 3] =
            core::array::from_fn(|k| h00 * n0.y[k] + h10 * h * n0.dy[k] + h01 * n1.y[k] + h11 * h * n1.dy[k]);
        to_metric(self.mode, &y)
    }
}

fn to_metric(mode: VariableMode, y: &[f64; 3]) -> Option<MilnorMetric> {
    let m = match mode {
        VariableMode::Logarithmic => [exp(y[0]), exp(y[1]), exp(y[2])],
        VariableMode::Linear => *y,
    };
    MilnorMetric::from_array(m).ok()
}

fn from_metric(mode: VariableMode, m: &MilnorMetric) -> [f64; 3] {
    match mode {
        VariableMode::Logarithmic => [ln(m.a()), ln(m.b()), ln(m.c())],
        VariableMode::Linear => m.to_array(),
    }
}

fn max_abs(v: &[f64; 3]) -> f64 {
    abs(v[0]).max(abs(v[1])).max(abs(v[2]))
}

// Dormand–Prince 5(4) tableau.
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

// PI step-size control.
const BETA: f64 = 0.04;
const EXPO1: f64 = 0.2 - BETA * 0.75;
const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

struct System<'a, F: ?Sized> {
    field: &'a F,
    mode: VariableMode,
}

impl<F: VectorField + ?Sized> System<'_, F> {
    /// Derivative of the integration variables; `None` off the domain or when not finite.
    fn eval(&self, y: &[f64; 3]) -> Option<[f64; 3]> {
        let m = to_metric(self.mode, y)?;
        let d = match self.mode {
            VariableMode::Logarithmic => self.field.log_rates(&m),
            VariableMode::Linear => self.field.rates(&m),
        };
        d.iter().all(|x| x.is_finite()).then_some(d)
    }

    fn log_rate_norm(&self, y: &[f64; 3], dy: &[f64; 3]) -> f64 {
        match self.mode {
            VariableMode::Logarithmic => max_abs(dy),
            VariableMode::Linear => max_abs(&[dy[0] / y[0], dy[1] / y[1], dy[2] / y[2]]),
        }
    }
}

fn axpy(y: &[f64; 3], h: f64, terms: &[(f64, &[f64; 3])]) -> [f64; 3] {
    core::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

fn error_norm(y: &[f64; 3], ynew: &[f64; 3], err: &[f64; 3], controls: &IntegratorControls) -> f64 {
    (0..3)
        .map(|i| {
            let sc = controls.abs_tol + controls.rel_tol * abs(y[i]).max(abs(ynew[i]));
            abs(err[i]) / sc
        })
        .fold(0.0, f64::max)
}

/// Integrate `field` from `init` at `t = 0` up to `t_end` (which may be `f64::INFINITY`).
pub fn integrate<F: VectorField + ?Sized>(
    field: &F,
    init: MilnorMetric,
    t_end: f64,
    controls: &IntegratorControls,
) -> Result<Trajectory> {
    integrate_observed(field, init, t_end, controls, |_| ControlFlow::Continue(()))
}

/// Like [`integrate`], calling `observer` after every accepted step; returning
/// `ControlFlow::Break` stops integration with [`Termination::Stopped`].
pub fn integrate_observed<F, O>(
    field: &F,
    init: MilnorMetric,
    t_end: f64,
    controls: &IntegratorControls,
    observer: O,
) -> Result<Trajectory>
where
    F: VectorField + ?Sized,
    O: FnMut(&Trajectory) -> ControlFlow<()>,
{
    match integrate_partial(field, init, t_end, controls, observer)? {
        (_, Some(err)) => Err(err),
        (traj, None) => Ok(traj),
    }
}

/// Integration that keeps the steps accepted before a numerical failure.
/// The outer error covers invalid arguments and a non-finite field at `init`.
pub(crate) fn integrate_partial<F, O>(
    field: &F,
    init: MilnorMetric,
    t_end: f64,
    controls: &IntegratorControls,
    mut observer: O,
) -> Result<(Trajectory, Option<Error>)>
where
    F: VectorField + ?Sized,
    O: FnMut(&Trajectory) -> ControlFlow<()>,
{
    controls.validate()?;
    if !(t_end >= 0.0) {
        return Err(Error::InvalidArgument("t_end must be non-negative"));
    }
    let mode = controls.variable_mode;
    let sys = System { field, mode };
    let mut y = from_metric(mode, &init);
    let mut f0 = sys.eval(&y).ok_or(Error::NumericalFailure { t: 0.0, last: init })?;

    let mut traj = Trajectory {
        geometry: field.geometry(),
        sign: field.sign(),
        mode,
        samples: Vec::new(),
        nodes: Vec::new(),
        termination: Termination::TimeReached,
        last_step: 0.0,
    };
    traj.samples.push(Sample { t: 0.0, metric: init });
    traj.nodes.push(Node { y, dy: f0 });
    if observer(&traj).is_break() {
        traj.termination = Termination::Stopped;
        return Ok((traj, None));
    }

    let rate0 = sys.log_rate_norm(&y, &f0);
    let tau0 = if rate0 > 0.0 { 1.0 / rate0 } else { 1.0 };
    let cap = controls.max_component.unwrap_or(CAP_FACTOR * init.max_component());
    let h_max = if t_end.is_finite() { t_end } else { f64::INFINITY };

    let mut t = 0.0_f64;
    let mut h = initial_step(&sys, &y, &f0, controls, h_max);
    let mut facold = 1e-4_f64;
    let mut rejected = false;
    let mut nonfinite = false;
    let mut attempts = 0_usize;

    let termination = loop {
        if t >= t_end {
            break Termination::TimeReached;
        }
        if attempts >= controls.max_steps {
            break Termination::BudgetExhausted;
        }
        let h_min = controls.min_step.unwrap_or(MIN_STEP_FACTOR * abs(t).max(tau0));
        if h < h_min {
            let m = to_metric(mode, &y).unwrap_or(init);
            let diverging = rate0 > 0.0 && sys.log_rate_norm(&y, &f0) >= DIVERGENCE_FACTOR * rate0;
            if diverging {
                break Termination::BlowUp;
            }
            if nonfinite {
                traj.termination = Termination::StepUnderflow;
                traj.last_step = h;
                return Ok((traj, Some(Error::NumericalFailure { t, last: m })));
            }
            break Termination::StepUnderflow;
        }
        let mut h_try = h.min(h_max);
        let mut last_step = false;
        if t + 1.01 * h_try >= t_end {
            h_try = t_end - t;
            last_step = true;
        }
        if !(t + h_try).is_finite() {
            break Termination::BudgetExhausted;
        }
        attempts += 1;

        let Some((y_new, f_new, err_vec)) = dp_step(&sys, &y, &f0, h_try) else {
            nonfinite = true;
            rejected = true;
            h = h_try * 0.25;
            continue;
        };
        nonfinite = false;
        let err = error_norm(&y, &y_new, &err_vec, controls);
        let fac11 = powf(err, EXPO1);
        if err <= 1.0 {
            let fac = (fac11 / powf(facold, BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            facold = err.max(1e-4);
            let mut h_new = h_try / fac;
            if rejected {
                h_new = h_new.min(h_try);
            }
            rejected = false;
            t = if last_step { t_end } else { t + h_try };
            y = y_new;
            f0 = f_new;
            h = h_new;
            let Some(metric) = to_metric(mode, &y) else {
                let last = traj.last().metric;
                traj.termination = Termination::StepUnderflow;
                return Ok((traj, Some(Error::NumericalFailure { t, last })));
            };
            traj.samples.push(Sample { t, metric });
            traj.nodes.push(Node { y, dy: f0 });
            traj.last_step = h_try;
            if metric.max_component() >= cap {
                // Growth with decaying rates (an immortal solution) is not a blow-up.
                if sys.log_rate_norm(&y, &f0) > rate0 {
                    break Termination::BlowUp;
                }
                break Termination::BudgetExhausted;
            }
            if observer(&traj).is_break() {
                break Termination::Stopped;
            }
        } else {
            rejected = true;
            h = h_try / (fac11 / SAFETY).min(1.0 / FAC_MIN);
        }
    };
    traj.termination = termination;
    if termination != Termination::TimeReached {
        traj.last_step = h;
    }
    Ok((traj, None))
}

/// One Dormand–Prince step: new state, derivative there (FSAL), local error estimate.
fn dp_step<F: VectorField + ?Sized>(
    sys: &System<'_, F>,
    y: &[f64; 3],
    k1: &[f64; 3],
    h: f64,
) -> Option<([f64; 3], [f64; 3], [f64; 3])> {
    let k2 = sys.eval(&axpy(y, h, &[(A21, k1)]))?;
    let k3 = sys.eval(&axpy(y, h, &[(A31, k1), (A32, &k2)]))?;
    let k4 = sys.eval(&axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]))?;
    let k5 = sys.eval(&axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]))?;
    let k6 = sys.eval(&axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]))?;
    let y_new = axpy(y, h, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
    let k7 = sys.eval(&y_new)?;
    let err: [f64; 3] =
        core::array::from_fn(|i| h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]));
    Some((y_new, k7, err))
}

fn initial_step<F: VectorField + ?Sized>(
    sys: &System<'_, F>,
    y0: &[f64; 3],
    f0: &[f64; 3],
    controls: &IntegratorControls,
    h_max: f64,
) -> f64 {
    let sk: [f64; 3] = core::array::from_fn(|i| controls.abs_tol + controls.rel_tol * abs(y0[i]));
    let scaled = |v: &[f64; 3]| max_abs(&[v[0] / sk[0], v[1] / sk[1], v[2] / sk[2]]);
    let d0 = scaled(y0);
    let d1 = scaled(f0);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(h_max);
    let y1 = axpy(y0, h0, &[(1.0, f0)]);
    let d2 = match sys.eval(&y1) {
        Some(f1) => scaled(&[f1[0] - f0[0], f1[1] - f0[1], f1[2] - f0[2]]) / h0,
        None => return (h0 * 1e-3).min(h_max),
    };
    let dm = d1.max(d2);
    let h1 = if dm <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { powf(0.01 / dm, 0.2) };
    (100.0 * h0).min(h1).min(h_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::Xcf;

    fn metric(a: f64, b: f64, c: f64) -> MilnorMetric {
        MilnorMetric::new(a, b, c).unwrap()
    }

    #[test]
    fn abelian_is_constant() {
        let field = Xcf::new(Geometry::Abelian, FlowSign::Positive);
        let init = metric(1.0, 2.0, 3.0);
        let traj = integrate(&field, init, 10.0, &IntegratorControls::default()).unwrap();
        assert_eq!(traj.termination(), Termination::TimeReached);
        assert_eq!(traj.last().t, 10.0);
        for (x, y) in traj.last().metric.to_array().iter().zip(init.to_array()) {
            assert!((x - y).abs() <= 4.0 * f64::EPSILON * y);
        }
    }

    #[test]
    fn round_su2_matches_square_root_law() {
        let field = Xcf::new(Geometry::Su2, FlowSign::Positive);
        let traj = integrate(&field, metric(1.0, 1.0, 1.0), 2.0, &IntegratorControls::default()).unwrap();
        let want = (1.0f64 + 8.0).sqrt();
        let got = traj.last().metric;
        for x in got.to_array() {
            assert!((x - want).abs() < 1e-9 * want, "{x} vs {want}");
        }
    }

    #[test]
    fn linear_mode_agrees_with_log_mode() {
        let field = Xcf::new(Geometry::Su2, FlowSign::Positive);
        let controls = IntegratorControls { variable_mode: VariableMode::Linear, ..Default::default() };
        let lin = integrate(&field, metric(2.0, 1.0, 0.7), 0.005, &controls).unwrap();
        let log = integrate(&field, metric(2.0, 1.0, 0.7), 0.005, &IntegratorControls::default()).unwrap();
        assert_eq!(lin.termination(), Termination::TimeReached);
        for (x, y) in lin.last().metric.to_array().iter().zip(log.last().metric.to_array()) {
            assert!((x - y).abs() < 1e-8 * y);
        }
    }

    #[test]
    fn heisenberg_blows_up() {
        let field = Xcf::new(Geometry::Heisenberg, FlowSign::Positive);
        let traj = integrate(&field, metric(1.0, 1.0, 1.0), f64::INFINITY, &IntegratorControls::default()).unwrap();
        assert_eq!(traj.termination(), Termination::BlowUp);
        assert!((traj.last().t - 1.0 / 28.0).abs() < 1e-9);
    }

    #[test]
    fn budget_is_respected() {
        let field = Xcf::new(Geometry::Su2, FlowSign::Positive);
        let controls = IntegratorControls { max_steps: 5, ..Default::default() };
        let traj = integrate(&field, metric(2.0, 1.0, 0.7), 100.0, &controls).unwrap();
        assert_eq!(traj.termination(), Termination::BudgetExhausted);
        assert!(traj.len() <= 6);
    }

    #[test]
    fn invalid_controls_rejected() {
        let field = Xcf::new(Geometry::Su2, FlowSign::Positive);
        let controls = IntegratorControls { rel_tol: 0.0, ..Default::default() };
        assert!(matches!(integrate(&field, metric(1.0, 1.0, 1.0), 1.0, &controls), Err(Error::InvalidControls(_))));
    }

    #[test]
    fn interpolation_hits_nodes_and_rejects_outside() {
        let field = Xcf::new(Geometry::Su2, FlowSign::Positive);
        let traj = integrate(&field, metric(2.0, 1.0, 0.7), 0.05, &IntegratorControls::default()).unwrap();
        let s = traj.samples()[3];
        let m = traj.interpolate(s.t).unwrap();
        for (x, y) in m.to_array().iter().zip(s.metric.to_array()) {
            assert!((x - y).abs() <= 1e-14 * y);
        }
        assert!(traj.interpolate(-1.0).is_none());
        assert!(traj.interpolate(1.0).is_none());
    }
}
