//! The acceptance suite behind `xcf verify`.
//!
//! Each check belongs to one suite (used by `--only`) and one numbered
//! criterion. A criterion passes when all of its checks pass and their total
//! wall time stays inside the criterion's budget.

use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use xcf_core::asymptotics::{extrapolate_at_infinity, fit_components, subriemannian_limit, FitWindow};
use xcf_core::exact::{e11_symmetric_exact, heisenberg_t0, su2_round_exact, ExactFamily};
use xcf_core::geometry::{cross_curvature, cross_curvature_via_einstein, sectional_curvatures};
use xcf_core::integrator::monitor::{self, MonitorKind};
use xcf_core::integrator::{estimate_blowup, integrate};
use xcf_core::sl2::{case3_signature, classify, classify_with_trajectory, find_separatrix, Regime};
use xcf_core::{FlowSign, Geometry, IntegratorControls, MilnorMetric, Termination, Trajectory, VectorField, Xcf};

use crate::error::{LabError, Result};

/// Deliberate corruption of the vector field, for negative controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Every rate comes back with the wrong sign.
    SignFlip,
}

/// Supplies the vector fields the checks integrate.
#[derive(Debug, Clone, Copy, Default)]
pub struct Lab {
    fault: Option<Fault>,
}

impl Lab {
    pub fn new() -> Self {
        Lab::default()
    }

    pub fn with_fault(fault: Fault) -> Self {
        Lab { fault: Some(fault) }
    }

    pub fn field(&self, geometry: Geometry, sign: FlowSign) -> LabField {
        LabField { xcf: Xcf::new(geometry, sign), fault: self.fault }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LabField {
    xcf: Xcf,
    fault: Option<Fault>,
}

impl VectorField for LabField {
    fn geometry(&self) -> Geometry {
        self.xcf.geometry
    }

    fn sign(&self) -> FlowSign {
        self.xcf.sign
    }

    fn log_rates(&self, m: &MilnorMetric) -> [f64; 3] {
        let r = self.xcf.log_rates(m);
        match self.fault {
            None => r,
            Some(Fault::SignFlip) => r.map(|x| -x),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Heisenberg,
    Su2,
    E11,
    E2,
    Sl2r,
    Oracle,
    Symmetry,
    Monotonicity,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Heisenberg,
        Suite::Su2,
        Suite::E11,
        Suite::E2,
        Suite::Sl2r,
        Suite::Oracle,
        Suite::Symmetry,
        Suite::Monotonicity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Heisenberg => "heisenberg",
            Suite::Su2 => "su2",
            Suite::E11 => "e11",
            Suite::E2 => "e2",
            Suite::Sl2r => "sl2r",
            Suite::Oracle => "oracle",
            Suite::Symmetry => "symmetry",
            Suite::Monotonicity => "monotonicity",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        Suite::ALL.into_iter().find(|x| x.name() == key).ok_or_else(|| {
            let names: Vec<&str> = Suite::ALL.iter().map(|x| x.name()).collect();
            LabError::Config(format!("unknown suite '{s}' (expected one of {})", names.join(", ")))
        })
    }
}

/// Wall-time budget in seconds for each criterion.
pub const BUDGETS: [(u8, f64); 9] =
    [(1, 2.0), (2, 10.0), (3, 5.0), (4, 1.0), (5, 10.0), (6, 1.0), (7, 5.0), (8, 60.0), (9, 5.0)];

pub fn budget(criterion: u8) -> f64 {
    BUDGETS.iter().find(|(c, _)| *c == criterion).map_or(f64::INFINITY, |(_, b)| *b)
}

/// `Ok(detail)` on success, `Err(detail)` on failure.
type Outcome = std::result::Result<String, String>;

pub struct Check {
    pub name: &'static str,
    pub suite: Suite,
    pub criterion: u8,
    run: fn(&Lab) -> Outcome,
}

trait OrFail<T> {
    fn or_fail(self, what: &str) -> std::result::Result<T, String>;
}

impl<T> OrFail<T> for xcf_core::Result<T> {
    fn or_fail(self, what: &str) -> std::result::Result<T, String> {
        self.map_err(|e| format!("{what}: {e}"))
    }
}

fn metric(m: [f64; 3]) -> MilnorMetric {
    MilnorMetric::from_array(m).expect("positive components")
}

fn max_rel(x: [f64; 3], y: [f64; 3]) -> f64 {
    (0..3).map(|i| ((x[i] - y[i]) / y[i]).abs()).fold(0.0, f64::max)
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn run_to(
    lab: &Lab,
    g: Geometry,
    s: FlowSign,
    init: MilnorMetric,
    t_end: f64,
    c: &IntegratorControls,
) -> std::result::Result<Trajectory, String> {
    integrate(&lab.field(g, s), init, t_end, c).or_fail("integration")
}

fn budgeted() -> IntegratorControls {
    IntegratorControls { max_steps: 200_000, ..Default::default() }
}

fn heisenberg_closed_form(lab: &Lab) -> Outcome {
    let init = metric([1.0, 1.0, 1.0]);
    let t0 = heisenberg_t0(&init);
    let t_end = t0 * (1.0 - 1e-6);
    // the error in A, B, C grows like δt/(T0 − t); 1e-10 leaves ~4e-6 at the end
    let controls = IntegratorControls { rel_tol: 1e-12, ..Default::default() };
    let traj = run_to(lab, Geometry::Heisenberg, FlowSign::Positive, init, t_end, &controls)?;
    if traj.termination() != Termination::TimeReached {
        return Err(format!("stopped at t={} ({:?})", traj.last().t, traj.termination()));
    }
    let mut worst: f64 = 0.0;
    for s in traj.samples() {
        let want = ExactFamily::Heisenberg.eval(&init, FlowSign::Positive, s.t).or_fail("closed form")?;
        worst = worst.max(max_rel(s.metric.to_array(), want.to_array()));
    }
    ensure(worst <= 1e-6, format!("max rel err {worst:.2e} over {} samples (tol 1e-6)", traj.len()))
}

fn heisenberg_blowup_time(lab: &Lab) -> Outcome {
    let init = metric([1.0, 1.0, 1.0]);
    let (_, est) =
        estimate_blowup(&lab.field(Geometry::Heisenberg, FlowSign::Positive), init, &IntegratorControls::default())
            .or_fail("blow-up estimate")?;
    let err = (est.t_hat * 28.0 - 1.0).abs();
    ensure(err <= 1e-4, format!("T^={:.10} rel err {err:.2e} (tol 1e-4)", est.t_hat))
}

fn exponents(lab: &Lab, g: Geometry, m: [f64; 3], dominant: usize, regime: Option<Regime>) -> Outcome {
    let init = metric(m);
    let mut prefix = String::new();
    if let Some(want) = regime {
        let label = classify(&init, &IntegratorControls::default()).or_fail("classify")?;
        if label.regime != want {
            return Err(format!("label {} (want {want})", label.regime));
        }
        prefix = format!("{want}, ");
    }
    let (traj, est) = estimate_blowup(&lab.field(g, FlowSign::Positive), init, &IntegratorControls::default())
        .or_fail("blow-up estimate")?;
    let fits = fit_components(&traj, est.t_hat, FitWindow::default()).or_fail("power-law fit")?;
    let mut want = [3.0 / 14.0; 3];
    want[dominant] = -1.0 / 14.0;
    let got = fits.map(|f| f.exponent);
    let worst = (0..3).map(|i| (got[i] - want[i]).abs()).fold(0.0, f64::max);
    ensure(
        worst <= 0.005,
        format!("{prefix}exponents ({:.4}, {:.4}, {:.4}) max dev {worst:.1e} (tol 5e-3)", got[0], got[1], got[2]),
    )
}

fn su2_round(lab: &Lab) -> Outcome {
    let init = metric([1.0, 1.0, 1.0]);
    let mut worst: f64 = 0.0;
    for t in [1.0, 2.0, 5.0] {
        let traj = run_to(lab, Geometry::Su2, FlowSign::Positive, init, t, &IntegratorControls::default())?;
        let last = traj.last();
        if last.t != t {
            return Err(format!("stopped at t={} ({:?})", last.t, traj.termination()));
        }
        let want = su2_round_exact(&init, t).or_fail("closed form")?.a();
        let a = (1.0 + 4.0 * t).sqrt();
        worst = worst.max((last.metric.a() - a).abs()).max((want - a).abs());
        for x in last.metric.to_array() {
            worst = worst.max((x - a).abs());
        }
    }
    ensure(worst <= 1e-8, format!("max |A - sqrt(1+4t)| {worst:.2e} at t in {{1,2,5}} (tol 1e-8)"))
}

fn su2_berger(lab: &Lab) -> Outcome {
    let t_end = 1e4;
    let traj =
        run_to(lab, Geometry::Su2, FlowSign::Positive, metric([2.0, 2.0, 1.0]), t_end, &IntegratorControls::default())?;
    if traj.termination() != Termination::TimeReached {
        return Err(format!("not immortal: stopped at t={} ({:?})", traj.last().t, traj.termination()));
    }
    let series: Vec<(f64, f64)> = traj.samples().iter().filter(|s| s.t >= 1e3).map(|s| (s.t, s.metric.c())).collect();
    let (c_inf, _) = extrapolate_at_infinity(&series, 1.0 / 3.0).or_fail("C limit")?;
    let last = traj.last();
    let ratio = last.metric.a() / (24.0 * c_inf * last.t).cbrt();
    ensure(
        (0.98..=1.02).contains(&ratio),
        format!("C_inf={c_inf:.6}, A/(24 C_inf t)^(1/3)={ratio:.4} at t=1e4 (band [0.98, 1.02])"),
    )
}

fn e11_symmetric(lab: &Lab) -> Outcome {
    let init = metric([2.0, 3.0, 2.0]);
    let traj = run_to(lab, Geometry::E11, FlowSign::Positive, init, 10.0, &IntegratorControls::default())?;
    if traj.termination() != Termination::TimeReached {
        return Err(format!("stopped at t={} ({:?})", traj.last().t, traj.termination()));
    }
    let ab0 = init.a() * init.b();
    let (mut worst, mut drift): (f64, f64) = (0.0, 0.0);
    for s in traj.samples() {
        let want = e11_symmetric_exact(&init, s.t, FlowSign::Positive).or_fail("closed form")?;
        worst = worst.max(max_rel(s.metric.to_array(), want.to_array()));
        drift = drift.max((s.metric.a() * s.metric.b() / ab0 - 1.0).abs());
    }
    ensure(
        worst <= 1e-8 && drift <= 1e-10,
        format!("max rel err {worst:.2e} (tol 1e-8), A*B drift {drift:.2e} (tol 1e-10) on [0, 10]"),
    )
}

fn monotone_suite(
    lab: &Lab,
    g: Geometry,
    kind: MonitorKind,
    seed: u64,
    draw: fn(&mut ChaCha8Rng) -> [f64; 3],
) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut steps = 0;
    let mut warnings = 0;
    for _ in 0..20 {
        let init = metric(draw(&mut rng));
        if monitor::applicable(g, FlowSign::Positive, &init) != Some(kind) {
            return Err(format!("{:?} does not qualify for {kind:?}", init.to_array()));
        }
        let traj = run_to(lab, g, FlowSign::Positive, init, f64::INFINITY, &budgeted())?;
        let report = monitor::check(&traj, kind);
        if let Some(v) = report.violations.first() {
            return Err(format!(
                "{:?}: {} moved the wrong way by {:.1e} at t={:.6e} ({} violations)",
                init.to_array(),
                v.quantity,
                v.excess,
                v.t,
                report.violations.len()
            ));
        }
        steps += report.steps_checked;
        warnings += report.warnings;
    }
    Ok(format!("20 runs, {steps} steps checked, {warnings} sub-threshold wobbles"))
}

fn log_uniform(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(-1.5f64..1.5).exp()
}

fn draw_su2(rng: &mut ChaCha8Rng) -> [f64; 3] {
    let mut m = [log_uniform(rng), log_uniform(rng), log_uniform(rng)];
    m.sort_by(|x, y| y.total_cmp(x));
    m
}

fn draw_e11(rng: &mut ChaCha8Rng) -> [f64; 3] {
    let (x, b, z) = (log_uniform(rng), log_uniform(rng), log_uniform(rng));
    if x > z {
        [x, b, z]
    } else {
        [z * 1.01, b, x]
    }
}

fn draw_sl2r(rng: &mut ChaCha8Rng) -> [f64; 3] {
    let scale = log_uniform(rng);
    [scale * rng.gen_range(0.01..2.0), scale, scale * rng.gen_range(0.05..1.5)]
}

fn oracle(_: &Lab) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut total = 0;
    let mut worst: f64 = 0.0;
    for g in Geometry::ALL {
        let mut compared = 0;
        for _ in 0..1000 {
            let m = metric(std::array::from_fn(|_| rng.gen_range(-2.0f64..2.0).exp()));
            let k = sectional_curvatures(g, &m);
            let direct = cross_curvature(&m, &k).to_array();
            let Ok(h) = cross_curvature_via_einstein(&m, &k) else {
                if !k.to_array().contains(&0.0) {
                    return Err(format!("{g}: Einstein route failed at {:?}", m.to_array()));
                }
                continue;
            };
            let h = h.to_array();
            let scale = direct.iter().fold(0.0f64, |s, x| s.max(x.abs())).max(f64::MIN_POSITIVE);
            worst = worst.max((0..3).map(|i| (h[i] - direct[i]).abs() / scale).fold(0.0, f64::max));
            compared += 1;
        }
        if g != Geometry::Abelian && compared < 900 {
            return Err(format!("{g}: only {compared} comparable metrics"));
        }
        total += compared;
    }
    ensure(worst <= 1e-12, format!("{total} metrics compared, max rel diff {worst:.2e} (tol 1e-12)"))
}

/// Random `(geometry, sign, init, t1)` cases with `t1` a fifth of the initial time scale.
fn symmetry_cases(seed: u64, geometries: &[Geometry], per_sign: usize) -> Vec<(Geometry, FlowSign, [f64; 3], f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for &g in geometries {
        for s in [FlowSign::Positive, FlowSign::Negative] {
            for _ in 0..per_sign {
                let m = [log_uniform(&mut rng), log_uniform(&mut rng), log_uniform(&mut rng)];
                let rate = Xcf::new(g, s).log_rates(&metric(m)).iter().fold(0.0f64, |a, x| a.max(x.abs()));
                let t1 = if rate > 0.0 { 0.2 / rate } else { 1.0 };
                out.push((g, s, m, t1));
            }
        }
    }
    out
}

/// Runs `case` on every symmetry case; requires most of them to reach their end time.
fn symmetry_suite(
    lab: &Lab,
    cases: Vec<(Geometry, FlowSign, [f64; 3], f64)>,
    case: impl Fn(&Lab, Geometry, FlowSign, [f64; 3], f64) -> std::result::Result<Option<f64>, String>,
) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut compared = 0;
    for (g, s, m, t1) in &cases {
        if let Some(err) = case(lab, *g, *s, *m, *t1)? {
            if !(err <= 1e-7) {
                return Err(format!("{g} {s} {m:?}: rel err {err:.2e} (tol 1e-7)"));
            }
            worst = worst.max(err);
            compared += 1;
        }
    }
    ensure(
        compared * 2 >= cases.len(),
        format!("{compared}/{} cases compared, max rel err {worst:.2e} (tol 1e-7)", cases.len()),
    )
}

fn finished(traj: &Trajectory) -> bool {
    traj.termination() == Termination::TimeReached
}

fn scaling(lab: &Lab) -> Outcome {
    let c = budgeted();
    symmetry_suite(lab, symmetry_cases(31, &Geometry::ALL, 4), |lab, g, s, m, t1| {
        let lam = 2.0;
        let base = run_to(lab, g, s, metric(m), t1, &c)?;
        let scaled = run_to(lab, g, s, metric(m.map(|x| lam * x)), lam * lam * t1, &c)?;
        if !(finished(&base) && finished(&scaled)) {
            return Ok(None);
        }
        Ok(Some(max_rel(scaled.last().metric.to_array(), base.last().metric.to_array().map(|x| lam * x))))
    })
}

fn round_trip(lab: &Lab) -> Outcome {
    let c = budgeted();
    symmetry_suite(lab, symmetry_cases(32, &Geometry::ALL, 4), |lab, g, s, m, t1| {
        let fwd = run_to(lab, g, s, metric(m), t1, &c)?;
        if !finished(&fwd) {
            return Ok(None);
        }
        let back = run_to(lab, g, s.flipped(), fwd.last().metric, t1, &c)?;
        if !finished(&back) {
            return Ok(None);
        }
        Ok(Some(max_rel(back.last().metric.to_array(), m)))
    })
}

fn e11_transverse(lab: &Lab) -> Outcome {
    let c = budgeted();
    symmetry_suite(lab, symmetry_cases(33, &[Geometry::E11], 12), |lab, g, s, m, t1| {
        let mut worst: f64 = 0.0;
        let base = run_to(lab, g, s, metric(m), t1, &c)?;
        for r in [0.5, 3.0] {
            let moved = run_to(lab, g, s, metric([r * m[0], m[1], r * m[2]]), t1, &c)?;
            if !(finished(&base) && finished(&moved)) {
                return Ok(None);
            }
            let b = base.last().metric.to_array();
            worst = worst.max(max_rel(moved.last().metric.to_array(), [r * b[0], b[1], r * b[2]]));
        }
        Ok(Some(worst))
    })
}

const SEP_FIBER: (f64, f64) = (1.0, 0.5);
const SEP_BRACKET: (f64, f64) = (0.078, 0.5);
const SEP_TOL: f64 = 1e-8;

fn separatrix(_: &Lab) -> Outcome {
    let controls = IntegratorControls::default();
    let (b, c) = SEP_FIBER;
    let sep = find_separatrix(b, c, SEP_BRACKET, SEP_TOL, &controls).or_fail("bisection")?;
    let width = sep.bracket.1 - sep.bracket.0;
    let label = |a: f64| classify(&metric([a * b, b, c * b]), &controls).map(|l| l.regime).or_fail("classify");
    let below = label(sep.a_star - 10.0 * SEP_TOL)?;
    let above = label(sep.a_star + 10.0 * SEP_TOL)?;
    ensure(
        width <= SEP_TOL && below == Regime::Q2 && above == Regime::Q1 && sep.monotone && !sep.stopped_on_undetermined,
        format!(
            "a*={:.10} after {} steps, width {width:.1e}, labels {below}/{above} at a*-/+10tol, spot checks monotone={}",
            sep.a_star, sep.iterations, sep.monotone
        ),
    )
}

fn case3(_: &Lab) -> Outcome {
    let controls = IntegratorControls::default();
    let (b, c) = SEP_FIBER;
    let sep = find_separatrix(b, c, SEP_BRACKET, SEP_TOL, &controls).or_fail("bisection")?;
    let (label, traj) =
        classify_with_trajectory(&metric([sep.bracket.0 * b, b, c * b]), &controls).or_fail("classify")?;
    let sig = case3_signature(&traj).ok_or_else(|| format!("no case-3 window on the {} trajectory", label.regime))?;
    let target = 8.0 * 2f64.sqrt();
    let dev = sig.sqrt_coefficient / target - 1.0;
    ensure(
        sig.ratio_range.0 >= 0.8 && sig.ratio_range.1 <= 1.2 && dev.abs() <= 0.1,
        format!(
            "2kA/(B-C)^2 in [{:.3}, {:.3}] over {} samples, (B-C)/sqrt(T-t)={:.3} vs 8*sqrt(2) ({:+.1}%, tol 10%)",
            sig.ratio_range.0,
            sig.ratio_range.1,
            sig.samples,
            sig.sqrt_coefficient,
            100.0 * dev
        ),
    )
}

fn subriemannian(lab: &Lab, g: Geometry, m: [f64; 3], want: [Option<f64>; 3]) -> Outcome {
    let (traj, est) = estimate_blowup(&lab.field(g, FlowSign::Positive), metric(m), &IntegratorControls::default())
        .or_fail("blow-up estimate")?;
    let lim = subriemannian_limit(&traj, est.t_hat, FitWindow::default()).or_fail("sub-Riemannian limit")?;
    let mut ok = true;
    for (q, w) in lim.q.iter().zip(want) {
        if let Some(w) = w {
            ok &= if w == 0.0 { *q == 0.0 } else { (q / w - 1.0).abs() <= 0.01 };
        }
    }
    ensure(ok, format!("q=({:.5}, {:.5}, {:.5}) (tol 1%)", lim.q[0], lim.q[1], lim.q[2]))
}

pub fn checks() -> Vec<Check> {
    use Geometry as G;
    vec![
        Check { name: "heisenberg-closed-form", suite: Suite::Heisenberg, criterion: 1, run: heisenberg_closed_form },
        Check { name: "heisenberg-blowup-time", suite: Suite::Heisenberg, criterion: 1, run: heisenberg_blowup_time },
        Check {
            name: "heisenberg-exponents",
            suite: Suite::Heisenberg,
            criterion: 2,
            run: |l| exponents(l, G::Heisenberg, [1.0, 1.0, 1.0], 0, None),
        },
        Check {
            name: "su2-exponents",
            suite: Suite::Su2,
            criterion: 2,
            run: |l| exponents(l, G::Su2, [2.0, 1.0, 1.0], 0, None),
        },
        Check {
            name: "e11-exponents",
            suite: Suite::E11,
            criterion: 2,
            run: |l| exponents(l, G::E11, [4.0, 1.0, 1.0], 0, None),
        },
        Check {
            name: "e2-exponents",
            suite: Suite::E2,
            criterion: 2,
            run: |l| exponents(l, G::E2, [2.0, 1.0, 1.0], 0, None),
        },
        Check {
            name: "sl2r-q1-exponents",
            suite: Suite::Sl2r,
            criterion: 2,
            run: |l| exponents(l, G::Sl2R, [1.0, 1.0, 0.5], 0, Some(Regime::Q1)),
        },
        Check {
            name: "sl2r-q2-exponents",
            suite: Suite::Sl2r,
            criterion: 2,
            run: |l| exponents(l, G::Sl2R, [0.01, 1.0, 0.5], 1, Some(Regime::Q2)),
        },
        Check { name: "su2-round", suite: Suite::Su2, criterion: 3, run: su2_round },
        Check { name: "su2-berger", suite: Suite::Su2, criterion: 3, run: su2_berger },
        Check { name: "e11-symmetric", suite: Suite::E11, criterion: 4, run: e11_symmetric },
        Check {
            name: "su2-monotone",
            suite: Suite::Monotonicity,
            criterion: 5,
            run: |l| monotone_suite(l, G::Su2, MonitorKind::Su2Ordered, 51, draw_su2),
        },
        Check {
            name: "e11-monotone",
            suite: Suite::Monotonicity,
            criterion: 5,
            run: |l| monotone_suite(l, G::E11, MonitorKind::E11Ordered, 52, draw_e11),
        },
        Check {
            name: "sl2r-latching",
            suite: Suite::Monotonicity,
            criterion: 5,
            run: |l| monotone_suite(l, G::Sl2R, MonitorKind::Sl2Latching, 53, draw_sl2r),
        },
        Check { name: "cross-curvature-routes", suite: Suite::Oracle, criterion: 6, run: oracle },
        Check { name: "scaling", suite: Suite::Symmetry, criterion: 7, run: scaling },
        Check { name: "round-trip", suite: Suite::Symmetry, criterion: 7, run: round_trip },
        Check { name: "e11-transverse", suite: Suite::Symmetry, criterion: 7, run: e11_transverse },
        Check { name: "sl2r-separatrix", suite: Suite::Sl2r, criterion: 8, run: separatrix },
        Check { name: "sl2r-case3-signature", suite: Suite::Sl2r, criterion: 8, run: case3 },
        Check {
            name: "heisenberg-subriemannian",
            suite: Suite::Heisenberg,
            criterion: 9,
            run: |l| subriemannian(l, G::Heisenberg, [1.0, 2.0, 3.0], [Some(0.0), Some(0.5), Some(1.0 / 3.0)]),
        },
        Check {
            name: "su2-subriemannian",
            suite: Suite::Su2,
            criterion: 9,
            run: |l| subriemannian(l, G::Su2, [2.0, 1.0, 1.0], [None, Some(1.0), None]),
        },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub suite: Suite,
    pub criterion: u8,
    pub passed: bool,
    pub seconds: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionRecord {
    pub criterion: u8,
    pub checks: usize,
    pub checks_passed: usize,
    pub seconds: f64,
    pub budget: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckRecord>,
    pub criteria: Vec<CriterionRecord>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        !self.checks.is_empty() && self.criteria.iter().all(|c| c.passed)
    }

    pub fn table(&self) -> String {
        let mut s = String::new();
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(5).max(5);
        let _ = writeln!(s, "{:<width$}  {:<12}  crit  result  {:>8}  detail", "check", "suite", "time");
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{:<width$}  {:<12}  {:>4}  {:<6}  {:>7.3}s  {}",
                c.name,
                c.suite.name(),
                c.criterion,
                if c.passed { "pass" } else { "FAIL" },
                c.seconds,
                c.detail
            );
        }
        let _ = writeln!(s);
        for c in &self.criteria {
            let _ = writeln!(
                s,
                "criterion {}: {}  ({}/{} checks, {:.3}s of {:.0}s budget)",
                c.criterion,
                if c.passed { "PASS" } else { "FAIL" },
                c.checks_passed,
                c.checks,
                c.seconds,
                c.budget
            );
        }
        let passed = self.checks.iter().filter(|c| c.passed).count();
        let _ = writeln!(s, "{passed}/{} checks passed", self.checks.len());
        s
    }
}

/// Run the checks in `only` (all of them when empty).
pub fn run(lab: &Lab, only: &[Suite]) -> VerifyReport {
    let mut records = Vec::new();
    for check in checks() {
        if !only.is_empty() && !only.contains(&check.suite) {
            continue;
        }
        let start = Instant::now();
        let outcome = (check.run)(lab);
        let seconds = start.elapsed().as_secs_f64();
        let (passed, detail) = match outcome {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        records.push(CheckRecord {
            name: check.name.into(),
            suite: check.suite,
            criterion: check.criterion,
            passed,
            seconds,
            detail,
        });
    }
    let mut criteria: Vec<CriterionRecord> = Vec::new();
    for (criterion, limit) in BUDGETS {
        let mine: Vec<&CheckRecord> = records.iter().filter(|r| r.criterion == criterion).collect();
        if mine.is_empty() {
            continue;
        }
        let seconds: f64 = mine.iter().map(|r| r.seconds).sum();
        let checks_passed = mine.iter().filter(|r| r.passed).count();
        criteria.push(CriterionRecord {
            criterion,
            checks: mine.len(),
            checks_passed,
            seconds,
            budget: limit,
            passed: checks_passed == mine.len() && seconds <= limit,
        });
    }
    VerifyReport { checks: records, criteria }
}
