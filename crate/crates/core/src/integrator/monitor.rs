//! Step-by-step checks of the monotone quantities of +XCF.
//!
//! A drop below the expected direction by more than `WARN_SLACK × scale` is
//! counted as a warning, by more than `HARD_SLACK × scale` as a violation.

use alloc::vec::Vec;

use super::Trajectory;
use crate::flow::FlowSign;
use crate::geometry::{sl2_polynomials, Geometry, MilnorMetric};
use crate::math::abs;

pub const WARN_SLACK: f64 = 1e-12;
pub const HARD_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonitorKind {
    /// SU(2) with `A ≥ B ≥ C`: `A`, `A/B`, `A/C`, `A − B`, `A − C` nondecreasing.
    Su2Ordered,
    /// E(1,1) with `A > C`: `C` decreasing; `A − C`, `A/C`, `A − 3C` increasing.
    E11Ordered,
    /// SL(2,ℝ): `F2 > 0` and `F1 > 0` persist once reached; `B ≥ C` persists.
    Sl2Latching,
}

/// The monitors that apply to +XCF from `init`, if any.
pub fn applicable(geometry: Geometry, sign: FlowSign, init: &MilnorMetric) -> Option<MonitorKind> {
    if sign != FlowSign::Positive {
        return None;
    }
    let (a, b, c) = (init.a(), init.b(), init.c());
    match geometry {
        Geometry::Su2 if a >= b && b >= c => Some(MonitorKind::Su2Ordered),
        Geometry::E11 if a > c => Some(MonitorKind::E11Ordered),
        Geometry::Sl2R => Some(MonitorKind::Sl2Latching),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub quantity: &'static str,
    pub t: f64,
    /// Size of the wrong-way change, relative to the quantity's scale.
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonitorReport {
    pub kind: MonitorKind,
    pub steps_checked: usize,
    pub warnings: usize,
    pub violations: Vec<Violation>,
}

impl MonitorReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Clone, Copy)]
enum Rule {
    Increasing,
    Decreasing,
    Latching,
}

type Quantity = (&'static str, fn(&MilnorMetric) -> f64, fn(&MilnorMetric) -> f64, Rule);

fn metric_scale(m: &MilnorMetric) -> f64 {
    m.max_component()
}

fn quadratic_scale(m: &MilnorMetric) -> f64 {
    let s = m.max_component();
    s * s
}

fn quantities(kind: MonitorKind) -> &'static [Quantity] {
    match kind {
        MonitorKind::Su2Ordered => &[
            ("A", |m| m.a(), metric_scale, Rule::Increasing),
            ("A/B", |m| m.a() / m.b(), |m| m.a() / m.b(), Rule::Increasing),
            ("A/C", |m| m.a() / m.c(), |m| m.a() / m.c(), Rule::Increasing),
            ("A-B", |m| m.a() - m.b(), metric_scale, Rule::Increasing),
            ("A-C", |m| m.a() - m.c(), metric_scale, Rule::Increasing),
        ],
        MonitorKind::E11Ordered => &[
            ("C", |m| m.c(), metric_scale, Rule::Decreasing),
            ("A-C", |m| m.a() - m.c(), metric_scale, Rule::Increasing),
            ("A/C", |m| m.a() / m.c(), |m| m.a() / m.c(), Rule::Increasing),
            ("A-3C", |m| m.a() - 3.0 * m.c(), metric_scale, Rule::Increasing),
        ],
        MonitorKind::Sl2Latching => &[
            ("F2", |m| sl2_polynomials(m.a(), m.b(), m.c())[1], quadratic_scale, Rule::Latching),
            ("F1", |m| sl2_polynomials(m.a(), m.b(), m.c())[0], quadratic_scale, Rule::Latching),
            ("B-C", |m| m.b() - m.c(), metric_scale, Rule::Latching),
        ],
    }
}

/// Check every accepted step of `traj` against the monitors of `kind`.
pub fn check(traj: &Trajectory, kind: MonitorKind) -> MonitorReport {
    let samples = traj.samples();
    let mut report =
        MonitorReport { kind, steps_checked: samples.len().saturating_sub(1), warnings: 0, violations: Vec::new() };
    for &(name, value, scale, rule) in quantities(kind) {
        let mut latched = false;
        for w in samples.windows(2) {
            let (m0, m1) = (&w[0].metric, &w[1].metric);
            let (v0, v1) = (value(m0), value(m1));
            let s = abs(scale(m0)).max(abs(scale(m1)));
            let wrong_way = match rule {
                Rule::Increasing => v0 - v1,
                Rule::Decreasing => v1 - v0,
                Rule::Latching => {
                    latched |= v0 >= 0.0;
                    if latched {
                        -v1
                    } else {
                        0.0
                    }
                }
            };
            if wrong_way > HARD_SLACK * s {
                report.violations.push(Violation { quantity: name, t: w[1].t, excess: wrong_way / s });
            } else if wrong_way > WARN_SLACK * s {
                report.warnings += 1;
            }
        }
    }
    report
}
