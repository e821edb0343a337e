use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

use super::Trajectory;
use crate::geometry::MilnorMetric;
use crate::math::abs;

/// Which sign changes of an event function count as crossings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Rising,
    Falling,
    Either,
}

/// Scalar function of `(t, metric)`.
pub type EventFn<'a> = Box<dyn Fn(f64, &MilnorMetric) -> f64 + 'a>;

/// A named scalar function of `(t, metric)` whose zeros are located.
pub struct EventSpec<'a> {
    pub name: String,
    pub function: EventFn<'a>,
    pub direction: Direction,
}

impl<'a> EventSpec<'a> {
    pub fn new(
        name: impl Into<String>,
        direction: Direction,
        function: impl Fn(f64, &MilnorMetric) -> f64 + 'a,
    ) -> Self {
        EventSpec { name: name.into(), function: Box::new(function), direction }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventHit {
    pub name: String,
    pub t: f64,
    pub metric: MilnorMetric,
    pub value: f64,
}

/// Relative accuracy of a located event, measured against the largest
/// magnitude the event function takes at the start and across the bracketing step.
pub const EVENT_TOL: f64 = 1e-10;

fn crosses(direction: Direction, before: f64, after: f64) -> bool {
    let rising = before < 0.0 && after >= 0.0;
    let falling = before > 0.0 && after <= 0.0;
    match direction {
        Direction::Rising => rising,
        Direction::Falling => falling,
        Direction::Either => rising || falling,
    }
}

/// Locate every crossing of each event along `traj`.
///
/// An event whose function vanishes at the initial sample is reported at the
/// initial time; sign changes between consecutive samples are refined on the
/// dense output by safeguarded false position.
pub fn detect_events(traj: &Trajectory, events: &[EventSpec<'_>]) -> Vec<EventHit> {
    let samples = traj.samples();
    let mut hits = Vec::new();
    let Some(first) = samples.first() else {
        return hits;
    };
    for ev in events {
        let f = &ev.function;
        let f_start = f(first.t, &first.metric);
        if f_start == 0.0 {
            hits.push(EventHit { name: ev.name.clone(), t: first.t, metric: first.metric, value: 0.0 });
        }
        let mut prev = f_start;
        for (i, s) in samples.iter().enumerate().skip(1) {
            let cur = f(s.t, &s.metric);
            if crosses(ev.direction, prev, cur) {
                let scale = abs(f_start).max(abs(prev)).max(abs(cur));
                let hit = refine(traj, i - 1, f.as_ref(), prev, cur, EVENT_TOL * scale);
                hits.push(EventHit { name: ev.name.clone(), t: hit.0, metric: hit.1, value: hit.2 });
            }
            prev = cur;
        }
    }
    hits.sort_by(|x, y| x.t.total_cmp(&y.t));
    hits
}

/// Root of `f` on segment `i` given values of opposite sign (or a zero) at its ends.
pub(crate) fn refine(
    traj: &Trajectory,
    i: usize,
    f: &dyn Fn(f64, &MilnorMetric) -> f64,
    f_lo: f64,
    f_hi: f64,
    tol: f64,
) -> (f64, MilnorMetric, f64) {
    let samples = traj.samples();
    let (mut lo, mut hi) = (samples[i].t, samples[i + 1].t);
    let (mut flo, mut fhi) = (f_lo, f_hi);
    let mut best = (hi, samples[i + 1].metric, f_hi);
    if abs(flo) < abs(fhi) {
        best = (lo, samples[i].metric, f_lo);
    }
    if abs(best.2) <= tol {
        return best;
    }
    let mut side = 0i8;
    for _ in 0..200 {
        let mut t = (lo * fhi - hi * flo) / (fhi - flo);
        if !(t > lo && t < hi) {
            t = 0.5 * (lo + hi);
        }
        let Some(m) = traj.interpolate_segment(i, t) else {
            break;
        };
        let v = f(t, &m);
        if abs(v) < abs(best.2) {
            best = (t, m, v);
        }
        if abs(v) <= tol || hi - lo <= 4.0 * f64::EPSILON * abs(hi) {
            break;
        }
        // Illinois modification keeps false position from stalling on one end.
        if (v < 0.0) == (flo < 0.0) {
            lo = t;
            flo = v;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = t;
            fhi = v;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{FlowSign, Xcf};
    use crate::geometry::Geometry;
    use crate::integrator::{integrate, IntegratorControls};

    #[test]
    fn immediate_event_reported_at_start() {
        let field = Xcf::new(Geometry::Su2, FlowSign::Positive);
        let init = MilnorMetric::new(2.0, 1.0, 1.0).unwrap();
        let traj = integrate(&field, init, 0.01, &IntegratorControls::default()).unwrap();
        let ev = EventSpec::new("a=2b", Direction::Rising, |_, m| m.a() - 2.0 * m.b());
        let hits = detect_events(&traj, &[ev]);
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].t, 0.0);
    }

    #[test]
    fn locates_threshold_crossing() {
        let field = Xcf::new(Geometry::Su2, FlowSign::Positive);
        let init = MilnorMetric::new(1.0, 1.0, 1.0).unwrap();
        let traj = integrate(&field, init, 1.0, &IntegratorControls::default()).unwrap();
        let ev = EventSpec::new("a=2", Direction::Rising, |_, m| m.a() - 2.0);
        let hits = detect_events(&traj, &[ev]);
        assert_eq!(hits.len(), 1);
        // round sphere: A = sqrt(1 + 4t) = 2 at t = 3/4, up to the cubic interpolant's accuracy
        assert!((hits[0].t - 0.75).abs() < 1e-7, "{}", hits[0].t - 0.75);
        assert!(hits[0].value.abs() <= EVENT_TOL * 2.0);
    }
}
