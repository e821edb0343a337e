//! Runs and the reports written for them.

use serde::{Deserialize, Serialize};
use xcf_core::asymptotics::{estimate_limits, fit_components, subriemannian_limit, FitWindow, LimitFunctional};
use xcf_core::integrator::monitor;
use xcf_core::integrator::{estimate_blowup_time, integrate, BlowUpEstimate};
use xcf_core::sl2::{
    case3_signature, classify_with_trajectory, find_separatrix, regime_coordinates, Case3Signature, RegimeLabel,
};
use xcf_core::{
    Error, FlowSign, Geometry, IntegratorControls, MilnorMetric, Termination, Trajectory, VariableMode, VectorField,
    Xcf,
};

use crate::config::{Horizon, RunConfig};
use crate::error::Result;

const COMPONENTS: [&str; 3] = ["A", "B", "C"];

pub fn termination_name(t: Termination) -> &'static str {
    match t {
        Termination::TimeReached => "time_reached",
        Termination::BlowUp => "blow_up",
        Termination::StepUnderflow => "step_underflow",
        Termination::BudgetExhausted => "budget_exhausted",
        Termination::Stopped => "stopped",
    }
}

fn sign_name(s: FlowSign) -> &'static str {
    match s {
        FlowSign::Positive => "plus",
        FlowSign::Negative => "minus",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlsReport {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    pub variable_mode: String,
}

impl From<&IntegratorControls> for ControlsReport {
    fn from(c: &IntegratorControls) -> Self {
        ControlsReport {
            rel_tol: c.rel_tol,
            abs_tol: c.abs_tol,
            max_steps: c.max_steps,
            variable_mode: match c.variable_mode {
                VariableMode::Logarithmic => "log".into(),
                VariableMode::Linear => "linear".into(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub t: f64,
    pub metric: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowUpReport {
    pub t_hat: f64,
    pub component: String,
    pub exponent: f64,
    pub coefficient: f64,
    pub residual: f64,
    pub window: [f64; 2],
    pub samples: usize,
}

impl From<&BlowUpEstimate> for BlowUpReport {
    fn from(e: &BlowUpEstimate) -> Self {
        BlowUpReport {
            t_hat: e.t_hat,
            component: COMPONENTS[e.component].into(),
            exponent: e.exponent,
            coefficient: e.coefficient,
            residual: e.residual,
            window: [e.window.0, e.window.1],
            samples: e.samples,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLawReport {
    pub component: String,
    pub exponent: f64,
    pub coefficient: f64,
    pub residual: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitReport {
    pub functional: String,
    /// `None` where the functional is not finite, e.g. `2kA/(B − C)²` with `B = C`.
    pub value: Option<f64>,
    pub last: Option<f64>,
    pub tail_variation: Option<f64>,
    pub converged: bool,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubRiemannianReport {
    pub normalizer: String,
    pub q: [f64; 3],
    pub exponents: [f64; 3],
    pub degenerate: Option<String>,
    /// SU(2) only: whether the limit coefficients satisfy `q3 ≥ q2`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub q3_at_least_q2: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub regime: String,
    pub trigger: Option<String>,
    pub trigger_time: Option<f64>,
    pub swapped: bool,
    pub a: f64,
    pub c: f64,
    pub termination: Option<String>,
}

impl RegimeReport {
    fn new(label: &RegimeLabel, init: &MilnorMetric) -> Self {
        let rc = regime_coordinates(init);
        RegimeReport {
            regime: label.regime.to_string(),
            trigger: label.trigger.map(|t| t.name().into()),
            trigger_time: label.trigger_time,
            swapped: label.swapped,
            a: rc.a,
            c: rc.c,
            termination: label.termination.map(|t| termination_name(t).into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorSummary {
    pub kind: String,
    pub steps_checked: usize,
    pub warnings: usize,
    pub violations: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateReport {
    pub geometry: String,
    pub sign: String,
    pub init: [f64; 3],
    /// `None` for runs to blow-up.
    pub t_end: Option<f64>,
    pub controls: ControlsReport,
    pub termination: String,
    pub steps: usize,
    #[serde(rename = "final")]
    pub final_state: State,
    pub blowup: Option<BlowUpReport>,
    pub power_law: Option<Vec<PowerLawReport>>,
    pub limits: Option<Vec<LimitReport>>,
    pub subriemannian: Option<SubRiemannianReport>,
    pub regime: Option<RegimeReport>,
    pub monitor: Option<MonitorSummary>,
    /// Analyses that could not be carried out, and why.
    pub notes: Vec<String>,
}

pub struct Run {
    pub trajectory: Trajectory,
    pub report: SimulateReport,
}

fn functionals(g: Geometry) -> Vec<LimitFunctional> {
    let mut out = vec![
        LimitFunctional::A3B,
        LimitFunctional::A3C,
        LimitFunctional::AB3,
        LimitFunctional::CB3,
        LimitFunctional::BOverC,
        LimitFunctional::COverA,
    ];
    if g == Geometry::Sl2R {
        out.push(LimitFunctional::Case3Ratio);
    }
    out
}

/// Integrate `field` from `init` and analyse the result.
pub fn simulate_field<F: VectorField + ?Sized>(
    field: &F,
    init: MilnorMetric,
    horizon: Horizon,
    controls: &IntegratorControls,
    window: FitWindow,
) -> Result<Run> {
    let g = field.geometry();
    let traj = integrate(field, init, horizon.t_end(), controls)?;
    let last = traj.last();
    let mut notes = Vec::new();
    let mut note = |what: &str, e: Error| notes.push(format!("{what}: {e}"));

    let estimate = match estimate_blowup_time(&traj) {
        Ok(e) => Some(e),
        Err(Error::NoBlowUp(_)) => None,
        Err(e) => {
            note("blow-up time", e);
            None
        }
    };
    let (mut power_law, mut limits, mut subriemannian) = (None, None, None);
    if let Some(est) = &estimate {
        match fit_components(&traj, est.t_hat, window) {
            Ok(fits) => {
                power_law = Some(
                    fits.iter()
                        .zip(COMPONENTS)
                        .map(|(f, c)| PowerLawReport {
                            component: c.into(),
                            exponent: f.exponent,
                            coefficient: f.coefficient,
                            residual: f.residual,
                            samples: f.samples,
                        })
                        .collect(),
                )
            }
            Err(e) => note("power-law fits", e),
        }
        match estimate_limits(&traj, est.t_hat, &functionals(g), window) {
            Ok(ls) => {
                limits = Some(
                    ls.iter()
                        .map(|l| LimitReport {
                            functional: l.functional.name().into(),
                            value: finite(l.value),
                            last: finite(l.last),
                            tail_variation: finite(l.tail_variation),
                            converged: l.converged,
                        })
                        .collect(),
                )
            }
            Err(e) => note("limits", e),
        }
        if g != Geometry::Abelian {
            match subriemannian_limit(&traj, est.t_hat, window) {
                Ok(s) => {
                    subriemannian = Some(SubRiemannianReport {
                        normalizer: COMPONENTS[s.normalizer].into(),
                        q: s.q,
                        exponents: s.exponents,
                        degenerate: s.degenerate.map(|i| COMPONENTS[i].into()),
                        q3_at_least_q2: (g == Geometry::Su2).then(|| s.q[2] >= s.q[1]),
                    })
                }
                Err(e) => note("sub-Riemannian limit", e),
            }
        }
    }

    let regime = if g == Geometry::Sl2R {
        match classify_with_trajectory(&init, controls) {
            Ok((label, _)) => Some(RegimeReport::new(&label, &init)),
            Err(e) => {
                note("regime", e);
                None
            }
        }
    } else {
        None
    };

    let monitor = monitor::applicable(g, field.sign(), &init).map(|kind| {
        let r = monitor::check(&traj, kind);
        MonitorSummary {
            kind: format!("{kind:?}"),
            steps_checked: r.steps_checked,
            warnings: r.warnings,
            violations: r.violations.len(),
            passed: r.passed(),
        }
    });

    let report = SimulateReport {
        geometry: g.name().into(),
        sign: sign_name(field.sign()).into(),
        init: init.to_array(),
        t_end: match horizon {
            Horizon::Until(t) => Some(t),
            Horizon::Auto => None,
        },
        controls: controls.into(),
        termination: termination_name(traj.termination()).into(),
        steps: traj.len() - 1,
        final_state: State { t: last.t, metric: last.metric.to_array() },
        blowup: estimate.as_ref().map(BlowUpReport::from),
        power_law,
        limits,
        subriemannian,
        regime,
        monitor,
        notes,
    };
    Ok(Run { trajectory: traj, report })
}

pub fn simulate(cfg: &RunConfig, init: MilnorMetric) -> Result<Run> {
    simulate_field(&Xcf::new(cfg.geometry, cfg.sign), init, cfg.horizon, &cfg.controls, cfg.fit_window)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Case3Report {
    pub window: [f64; 2],
    pub samples: usize,
    pub k: f64,
    pub ratio_range: [f64; 2],
    pub collapse_time: f64,
    pub scaled_a_slope: f64,
    pub sqrt_coefficient: f64,
}

impl From<&Case3Signature> for Case3Report {
    fn from(s: &Case3Signature) -> Self {
        Case3Report {
            window: [s.window.0, s.window.1],
            samples: s.samples,
            k: s.k,
            ratio_range: [s.ratio_range.0, s.ratio_range.1],
            collapse_time: s.collapse_time,
            scaled_a_slope: s.scaled_a_slope,
            sqrt_coefficient: s.sqrt_coefficient,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyReport {
    pub init: [f64; 3],
    #[serde(flatten)]
    pub label: RegimeReport,
    pub case3: Option<Case3Report>,
}

pub struct Classification {
    pub trajectory: Trajectory,
    pub report: ClassifyReport,
}

pub fn classify(init: MilnorMetric, controls: &IntegratorControls) -> Result<Classification> {
    let (label, traj) = classify_with_trajectory(&init, controls)?;
    let report = ClassifyReport {
        init: init.to_array(),
        label: RegimeReport::new(&label, &init),
        case3: case3_signature(&traj).as_ref().map(Case3Report::from),
    };
    Ok(Classification { trajectory: traj, report })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpotCheck {
    pub a: f64,
    pub regime: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparatrixReport {
    pub b: f64,
    pub c: f64,
    pub initial_bracket: [f64; 2],
    pub tol: f64,
    pub a_star: f64,
    pub bracket: [f64; 2],
    pub iterations: usize,
    pub spot_checks: Vec<SpotCheck>,
    /// Bisection presumes the label switches once along the family.
    pub monotonicity_assumed: bool,
    pub monotone: bool,
    pub stopped_on_undetermined: bool,
    /// Labels at `a* ∓ 10·tol`.
    pub below: String,
    pub above: String,
    /// Signature of the trajectory from the lower bracket end.
    pub case3: Option<Case3Report>,
}

pub fn separatrix(
    b: f64,
    c: f64,
    bracket: (f64, f64),
    tol: f64,
    controls: &IntegratorControls,
) -> Result<SeparatrixReport> {
    let sep = find_separatrix(b, c, bracket, tol, controls)?;
    let label = |a: f64| -> Result<String> {
        let m = MilnorMetric::new(a * b, b, c * b)?;
        Ok(xcf_core::sl2::classify(&m, controls)?.regime.to_string())
    };
    let (_, traj) = classify_with_trajectory(&MilnorMetric::new(sep.bracket.0 * b, b, c * b)?, controls)?;
    Ok(SeparatrixReport {
        b,
        c,
        initial_bracket: [bracket.0, bracket.1],
        tol,
        a_star: sep.a_star,
        bracket: [sep.bracket.0, sep.bracket.1],
        iterations: sep.iterations,
        spot_checks: sep.spot_checks.iter().map(|(a, r)| SpotCheck { a: *a, regime: r.to_string() }).collect(),
        monotonicity_assumed: true,
        monotone: sep.monotone,
        stopped_on_undetermined: sep.stopped_on_undetermined,
        below: label(sep.a_star - 10.0 * tol)?,
        above: label(sep.a_star + 10.0 * tol)?,
        case3: case3_signature(&traj).as_ref().map(Case3Report::from),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heisenberg_auto_run_reports_blowup() {
        let init = MilnorMetric::new(1.0, 1.0, 1.0).unwrap();
        let controls = IntegratorControls { max_steps: 200_000, ..Default::default() };
        let run = simulate_field(
            &Xcf::new(Geometry::Heisenberg, FlowSign::Positive),
            init,
            Horizon::Auto,
            &controls,
            FitWindow::default(),
        )
        .unwrap();
        let r = &run.report;
        assert_eq!(r.termination, "blow_up");
        assert!((r.blowup.as_ref().unwrap().t_hat * 28.0 - 1.0).abs() < 1e-6);
        assert_eq!(r.power_law.as_ref().unwrap().len(), 3);
        assert_eq!(r.subriemannian.as_ref().unwrap().degenerate.as_deref(), Some("A"));
        assert!(r.regime.is_none() && r.notes.is_empty());
    }

    #[test]
    fn finite_horizon_has_no_blowup_section() {
        let init = MilnorMetric::new(1.0, 1.0, 1.0).unwrap();
        let run = simulate_field(
            &Xcf::new(Geometry::Su2, FlowSign::Positive),
            init,
            Horizon::Until(2.0),
            &IntegratorControls::default(),
            FitWindow::default(),
        )
        .unwrap();
        assert_eq!(run.report.termination, "time_reached");
        assert!(run.report.blowup.is_none() && run.report.limits.is_none());
        assert!((run.report.final_state.metric[0] - 3.0).abs() < 1e-8);
        assert!(run.report.monitor.as_ref().unwrap().passed);
    }

    #[test]
    fn sl2r_runs_carry_a_regime() {
        let init = MilnorMetric::new(0.01, 1.0, 0.5).unwrap();
        let cfg = IntegratorControls { max_steps: 200_000, ..Default::default() };
        let run = simulate_field(
            &Xcf::new(Geometry::Sl2R, FlowSign::Positive),
            init,
            Horizon::Auto,
            &cfg,
            FitWindow::default(),
        )
        .unwrap();
        let regime = run.report.regime.unwrap();
        assert_eq!(regime.regime, "Q2");
        assert_eq!(regime.trigger_time, Some(0.0));
        assert!(run.report.limits.unwrap().iter().any(|l| l.functional == "2kA/(B-C)^2"));
    }
}
