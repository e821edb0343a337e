//! Regimes of SL(2,ℝ) under +XCF.
//!
//! With `B ≥ C` (swap the last two frame vectors otherwise), each trajectory
//! eventually enters one of two absorbing regions: `{A ≥ B − C} ∪ {F2 > 0}`
//! (regime Q1, `A` blows up) or `{F1 > 0}` (regime Q2, `B` blows up). Data
//! entering neither before the singular time lie on or extremely close to the
//! exceptional set separating the two basins, where `B` and `C` tend to a
//! common value `k` while `A` collapses linearly.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::fmt;
use core::ops::ControlFlow;

use crate::error::{Error, Result};
use crate::fit::line_fit;
use crate::flow::{FlowSign, Xcf};
use crate::geometry::{sl2_polynomials, Geometry, MilnorMetric};
use crate::integrator::{self, IntegratorControls, Termination, Trajectory};
use crate::math::{abs, sqrt};

/// `a = A/B`, `c = C/B` for a metric with `B ≥ C`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeCoordinates {
    pub a: f64,
    pub c: f64,
}

/// Orders the metric so that `B ≥ C`; reports whether a swap was needed.
pub fn normalize(m: &MilnorMetric) -> (MilnorMetric, bool) {
    if m.b() < m.c() {
        (m.swap_bc(), true)
    } else {
        (*m, false)
    }
}

pub fn regime_coordinates(m: &MilnorMetric) -> RegimeCoordinates {
    let (m, _) = normalize(m);
    RegimeCoordinates { a: m.a() / m.b(), c: m.c() / m.b() }
}

/// Membership of the absorbing regions, from the polynomials themselves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegionFlags {
    /// `A ≥ B − C`, i.e. `a ≥ 1 − c`.
    pub a_boundary: bool,
    pub f2_positive: bool,
    pub f1_positive: bool,
    pub swapped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trigger {
    ABoundary,
    F2Positive,
    F1Positive,
}

impl Trigger {
    pub fn regime(self) -> Regime {
        match self {
            Trigger::ABoundary | Trigger::F2Positive => Regime::Q1,
            Trigger::F1Positive => Regime::Q2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Trigger::ABoundary => "A>=B-C",
            Trigger::F2Positive => "F2>0",
            Trigger::F1Positive => "F1>0",
        }
    }

    /// Signed function that is non-negative (`ABoundary`) or positive on the region.
    fn function(self, m: &MilnorMetric) -> f64 {
        let (a, b, c) = (m.a(), m.b(), m.c());
        match self {
            Trigger::ABoundary => a - (b - c),
            Trigger::F2Positive => sl2_polynomials(a, b, c)[1],
            Trigger::F1Positive => sl2_polynomials(a, b, c)[0],
        }
    }

    fn holds(self, m: &MilnorMetric) -> bool {
        let v = self.function(m);
        match self {
            Trigger::ABoundary => v >= 0.0,
            _ => v > 0.0,
        }
    }

    const ALL: [Trigger; 3] = [Trigger::ABoundary, Trigger::F2Positive, Trigger::F1Positive];
}

impl fmt::Display for Trigger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl RegionFlags {
    /// The first condition that holds, Q1 conditions taking precedence.
    pub fn trigger(&self) -> Option<Trigger> {
        if self.a_boundary {
            Some(Trigger::ABoundary)
        } else if self.f2_positive {
            Some(Trigger::F2Positive)
        } else if self.f1_positive {
            Some(Trigger::F1Positive)
        } else {
            None
        }
    }
}

pub fn instantaneous_region(m: &MilnorMetric) -> RegionFlags {
    let (m, swapped) = normalize(m);
    RegionFlags {
        a_boundary: Trigger::ABoundary.holds(&m),
        f2_positive: Trigger::F2Positive.holds(&m),
        f1_positive: Trigger::F1Positive.holds(&m),
        swapped,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    Q1,
    Q2,
    Undetermined,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Q1 => "Q1",
            Regime::Q2 => "Q2",
            Regime::Undetermined => "Undetermined",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeLabel {
    pub regime: Regime,
    pub trigger: Option<Trigger>,
    /// First time the trigger condition held.
    pub trigger_time: Option<f64>,
    pub swapped: bool,
    /// How integration ended when no trigger fired.
    pub termination: Option<Termination>,
}

/// Classify `init` by integrating +XCF until an absorbing region is entered.
pub fn classify(init: &MilnorMetric, controls: &IntegratorControls) -> Result<RegimeLabel> {
    classify_with_trajectory(init, controls).map(|(label, _)| label)
}

/// [`classify`], also returning the (B ≥ C ordered) trajectory up to the trigger.
pub fn classify_with_trajectory(
    init: &MilnorMetric,
    controls: &IntegratorControls,
) -> Result<(RegimeLabel, Trajectory)> {
    let (m0, swapped) = normalize(init);
    let field = Xcf::new(Geometry::Sl2R, FlowSign::Positive);
    let at_start = instantaneous_region(&m0).trigger();
    let mut fired = None;
    let observer = |traj: &Trajectory| {
        if at_start.is_some() {
            return ControlFlow::Break(());
        }
        let s = traj.last();
        match instantaneous_region(&s.metric).trigger() {
            Some(_) => {
                fired = Some(traj.len() - 1);
                ControlFlow::Break(())
            }
            None => ControlFlow::Continue(()),
        }
    };
    let (traj, failure) = integrator::integrate_partial(&field, m0, f64::INFINITY, controls, observer)?;
    if let Some(reason) = failure {
        return Err(Error::Classification { reason: Box::new(reason), partial: Box::new(traj) });
    }
    let label = if let Some(trigger) = at_start {
        RegimeLabel {
            regime: trigger.regime(),
            trigger: Some(trigger),
            trigger_time: Some(0.0),
            swapped,
            termination: None,
        }
    } else if let Some(i) = fired {
        let (trigger, t) = earliest_crossing(&traj, i);
        RegimeLabel {
            regime: trigger.regime(),
            trigger: Some(trigger),
            trigger_time: Some(t),
            swapped,
            termination: None,
        }
    } else {
        RegimeLabel {
            regime: Regime::Undetermined,
            trigger: None,
            trigger_time: None,
            swapped,
            termination: Some(traj.termination()),
        }
    };
    Ok((label, traj))
}

/// Among conditions that hold at sample `i` but not at `i − 1`, the one whose
/// boundary is crossed first on the dense output.
fn earliest_crossing(traj: &Trajectory, i: usize) -> (Trigger, f64) {
    let samples = traj.samples();
    let (m0, m1) = (&samples[i - 1].metric, &samples[i].metric);
    let mut best: Option<(Trigger, f64)> = None;
    for trigger in Trigger::ALL {
        if !trigger.holds(m1) {
            continue;
        }
        let (f0, f1) = (trigger.function(m0), trigger.function(m1));
        let scale = abs(f0).max(abs(f1)).max(f64::MIN_POSITIVE);
        let f = |_: f64, m: &MilnorMetric| trigger.function(m);
        let (t, _, _) = integrator::events::refine(traj, i - 1, &f, f0, f1, integrator::events::EVENT_TOL * scale);
        if best.is_none_or(|(_, tb)| t < tb) {
            best = Some((trigger, t));
        }
    }
    best.unwrap_or((Trigger::ABoundary, samples[i].t))
}

/// Outcome of a separatrix bisection along `a ↦ (a·b, b, c·b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Separatrix {
    pub a_star: f64,
    /// Final bracket, Q2 at the lower end and Q1 at the upper end.
    pub bracket: (f64, f64),
    pub iterations: usize,
    /// Interior points of the initial bracket and their labels.
    pub spot_checks: Vec<(f64, Regime)>,
    /// Whether the spot checks agree with a single switch at `a_star`.
    pub monotone: bool,
    /// Set when a bisection midpoint came out undetermined and was taken as the answer.
    pub stopped_on_undetermined: bool,
}

fn family_member(a: f64, b: f64, c: f64) -> Result<MilnorMetric> {
    MilnorMetric::new(a * b, b, c * b)
}

/// Locate the switch between Q2 (below) and Q1 (above) along the family.
///
/// Assumes the label changes once inside the bracket; four interior spot
/// checks record the evidence for that.
pub fn find_separatrix(
    b: f64,
    c: f64,
    bracket: (f64, f64),
    tol: f64,
    controls: &IntegratorControls,
) -> Result<Separatrix> {
    let (mut lo, mut hi) = bracket;
    if !(lo > 0.0 && hi > lo && tol > 0.0) {
        return Err(Error::InvalidArgument("separatrix bracket needs 0 < lo < hi and tol > 0"));
    }
    if hi - lo <= tol {
        return Ok(Separatrix {
            a_star: 0.5 * (lo + hi),
            bracket: (lo, hi),
            iterations: 0,
            spot_checks: Vec::new(),
            monotone: true,
            stopped_on_undetermined: false,
        });
    }
    let label_at = |a: f64| -> Result<Regime> { Ok(classify(&family_member(a, b, c)?, controls)?.regime) };
    let (l_lo, l_hi) = (label_at(lo)?, label_at(hi)?);
    if l_lo == Regime::Undetermined {
        return Err(Error::Inconclusive { a: lo });
    }
    if l_hi == Regime::Undetermined {
        return Err(Error::Inconclusive { a: hi });
    }
    if l_lo != Regime::Q2 || l_hi != Regime::Q1 {
        return Err(Error::Bracket { lo: l_lo, hi: l_hi });
    }
    let mut iterations = 0;
    let mut stopped_on_undetermined = false;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        iterations += 1;
        match label_at(mid)? {
            Regime::Q2 => lo = mid,
            Regime::Q1 => hi = mid,
            Regime::Undetermined => {
                lo = mid;
                hi = mid;
                stopped_on_undetermined = true;
            }
        }
    }
    let a_star = 0.5 * (lo + hi);
    let mut spot_checks = Vec::with_capacity(4);
    let mut monotone = true;
    for k in 1..=4 {
        let a = bracket.0 + (bracket.1 - bracket.0) * k as f64 / 5.0;
        let label = label_at(a)?;
        let expected = if a < a_star { Regime::Q2 } else { Regime::Q1 };
        monotone &= label == expected;
        spot_checks.push((a, label));
    }
    Ok(Separatrix { a_star, bracket: (lo, hi), iterations, spot_checks, monotone, stopped_on_undetermined })
}

/// Evidence that a trajectory shadows the exceptional set: `B, C → k`,
/// `A ≈ (64/k)(T − t)` and `(B − C)² ≈ 128 (T − t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Case3Signature {
    /// Time interval of the window.
    pub window: (f64, f64),
    pub samples: usize,
    /// Mean of `(B + C)/2` over the window.
    pub k: f64,
    /// Range of `2kA/(B − C)²` over the window.
    pub ratio_range: (f64, f64),
    /// Where the linear fit of `A` against `t` reaches zero.
    pub collapse_time: f64,
    /// Fitted `dA/dt` times `k`; `−64` on the exceptional set.
    pub scaled_a_slope: f64,
    /// `sqrt(−d(B − C)²/dt)`; `8√2` on the exceptional set.
    pub sqrt_coefficient: f64,
}

/// Ratio band that selects the window.
pub const CASE3_BAND: (f64, f64) = (0.8, 1.2);
/// Largest `A/k` admitted to the window.
pub const CASE3_SMALL_A: f64 = 0.05;

/// Longest run of consecutive samples with `2kA/(B − C)²` in [`CASE3_BAND`]
/// and `A < CASE3_SMALL_A · k`, with linear fits over that run.
pub fn case3_signature(traj: &Trajectory) -> Option<Case3Signature> {
    let samples = traj.samples();
    let ratio = |m: &MilnorMetric| {
        let (a, b, c) = (m.a(), m.b(), m.c());
        let k = 0.5 * (b + c);
        (2.0 * k * a / ((b - c) * (b - c)), a < CASE3_SMALL_A * k)
    };
    let mut best = (0, 0);
    let mut start = None;
    for (i, s) in samples.iter().enumerate() {
        let (r, small) = ratio(&s.metric);
        let inside = small && r >= CASE3_BAND.0 && r <= CASE3_BAND.1;
        match (inside, start) {
            (true, None) => start = Some(i),
            (false, Some(s0)) => {
                if i - s0 > best.1 - best.0 {
                    best = (s0, i);
                }
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s0) = start {
        if samples.len() - s0 > best.1 - best.0 {
            best = (s0, samples.len());
        }
    }
    let run = &samples[best.0..best.1];
    if run.len() < 10 {
        return None;
    }
    let ts: Vec<f64> = run.iter().map(|s| s.t).collect();
    let a_vals: Vec<f64> = run.iter().map(|s| s.metric.a()).collect();
    let gap2: Vec<f64> = run.iter().map(|s| (s.metric.b() - s.metric.c()) * (s.metric.b() - s.metric.c())).collect();
    let k = run.iter().map(|s| 0.5 * (s.metric.b() + s.metric.c())).sum::<f64>() / run.len() as f64;
    let (lo, hi) = run
        .iter()
        .map(|s| ratio(&s.metric).0)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r)));
    let a_fit = line_fit(&ts, &a_vals)?;
    let gap_fit = line_fit(&ts, &gap2)?;
    Some(Case3Signature {
        window: (ts[0], ts[ts.len() - 1]),
        samples: run.len(),
        k,
        ratio_range: (lo, hi),
        collapse_time: -a_fit.intercept / a_fit.slope,
        scaled_a_slope: a_fit.slope * k,
        sqrt_coefficient: sqrt(abs(gap_fit.slope)),
    })
}
