//! Power-law fits and limits near a finite singular time `T`.
//!
//! Fits use samples with `T − t` inside a window given as fractions of `T`.
//! The default window sits deep in the singular regime: the generic exponents
//! `(−1/14, 3/14, 3/14)` are approached slowly on some geometries, and fits
//! over shallower windows are biased well beyond `±0.005`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::fit::line_fit;
use crate::geometry::{Geometry, MilnorMetric};
use crate::integrator::Trajectory;
use crate::math::{abs, exp, ln, powf, sqrt};

/// Range of `(T − t)/T` used by the fits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitWindow {
    pub lo: f64,
    pub hi: f64,
}

impl Default for FitWindow {
    fn default() -> Self {
        FitWindow { lo: 1e-12, hi: 1e-8 }
    }
}

impl FitWindow {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::InvalidArgument("fit window needs 0 < lo < hi"));
        }
        Ok(FitWindow { lo, hi })
    }

    fn contains(&self, t_sing: f64, t: f64) -> bool {
        let d = t_sing - t;
        d >= self.lo * t_sing && d <= self.hi * t_sing
    }
}

/// Minimum number of samples a fit window must hold.
pub const MIN_FIT_SAMPLES: usize = 10;

/// `x ≈ coefficient · (T − t)^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub coefficient: f64,
    /// RMS residual in `ln x`.
    pub residual: f64,
    pub samples: usize,
}

/// Fit a power law to `(t, x)` pairs over the window.
pub fn fit_power_law(series: &[(f64, f64)], t_sing: f64, window: FitWindow) -> Result<PowerLawFit> {
    if series.iter().any(|(t, _)| *t >= t_sing) {
        return Err(Error::InvalidArgument("singular time must exceed every sample time"));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &(t, x) in series {
        if window.contains(t_sing, t) && x > 0.0 {
            xs.push(ln(t_sing - t));
            ys.push(ln(x));
        }
    }
    if xs.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples { needed: MIN_FIT_SAMPLES, found: xs.len() });
    }
    let fit = line_fit(&xs, &ys).ok_or(Error::InsufficientSamples { needed: MIN_FIT_SAMPLES, found: xs.len() })?;
    Ok(PowerLawFit { exponent: fit.slope, coefficient: exp(fit.intercept), residual: fit.rms, samples: xs.len() })
}

/// Samples strictly before `t_sing`; later samples (the integrator may step a
/// hair past the estimated singular time) are dropped.
fn before(traj: &Trajectory, t_sing: f64) -> impl Iterator<Item = (f64, MilnorMetric)> + '_ {
    traj.samples().iter().filter(move |s| s.t < t_sing).map(|s| (s.t, s.metric))
}

/// Power-law fits of `A`, `B` and `C`.
pub fn fit_components(traj: &Trajectory, t_sing: f64, window: FitWindow) -> Result<[PowerLawFit; 3]> {
    let mut out = [PowerLawFit { exponent: 0.0, coefficient: 0.0, residual: 0.0, samples: 0 }; 3];
    for (i, slot) in out.iter_mut().enumerate() {
        let series: Vec<(f64, f64)> = before(traj, t_sing).map(|(t, m)| (t, m.to_array()[i])).collect();
        *slot = fit_power_law(&series, t_sing, window)?;
    }
    Ok(out)
}

/// Scale-invariant combinations whose limits at `T` describe the singularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitFunctional {
    A3B,
    A3C,
    AB3,
    CB3,
    BOverC,
    COverA,
    /// `2kA/(B − C)²` with `k = (B + C)/2`.
    Case3Ratio,
}

impl LimitFunctional {
    pub fn name(self) -> &'static str {
        match self {
            LimitFunctional::A3B => "A^3 B",
            LimitFunctional::A3C => "A^3 C",
            LimitFunctional::AB3 => "A B^3",
            LimitFunctional::CB3 => "C B^3",
            LimitFunctional::BOverC => "B/C",
            LimitFunctional::COverA => "C/A",
            LimitFunctional::Case3Ratio => "2kA/(B-C)^2",
        }
    }

    pub fn eval(self, m: &MilnorMetric) -> f64 {
        let (a, b, c) = (m.a(), m.b(), m.c());
        match self {
            LimitFunctional::A3B => a * a * a * b,
            LimitFunctional::A3C => a * a * a * c,
            LimitFunctional::AB3 => a * b * b * b,
            LimitFunctional::CB3 => c * b * b * b,
            LimitFunctional::BOverC => b / c,
            LimitFunctional::COverA => c / a,
            LimitFunctional::Case3Ratio => (b + c) * a / ((b - c) * (b - c)),
        }
    }
}

/// Tail variation (relative) below which a limit counts as converged.
pub const CONVERGENCE_TOL: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitEstimate {
    pub functional: LimitFunctional,
    /// Extrapolated limit.
    pub value: f64,
    /// Value at the sample closest to `T`.
    pub last: f64,
    /// `(max − min)/|value|` over the window.
    pub tail_variation: f64,
    pub converged: bool,
    pub samples: usize,
}

/// Fit `y ≈ L + κ·g` and return `(L, κ)`.
pub fn extrapolate_limit(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    line_fit(&xs, &ys).map(|f| (f.intercept, f.slope))
}

/// Limits at `T` of each functional, extrapolated in the gauge `(T − t)^{1/2}`.
pub fn estimate_limits(
    traj: &Trajectory,
    t_sing: f64,
    functionals: &[LimitFunctional],
    window: FitWindow,
) -> Result<Vec<LimitEstimate>> {
    let tail: Vec<(f64, MilnorMetric)> = before(traj, t_sing).filter(|(t, _)| window.contains(t_sing, *t)).collect();
    if tail.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples { needed: MIN_FIT_SAMPLES, found: tail.len() });
    }
    let mut out = Vec::with_capacity(functionals.len());
    for &functional in functionals {
        let points: Vec<(f64, f64)> = tail.iter().map(|(t, m)| (sqrt(t_sing - t), functional.eval(m))).collect();
        let (lo, hi) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.1), hi.max(p.1)));
        let last = points[points.len() - 1].1;
        let value = extrapolate_limit(&points).map_or(last, |(l, _)| l);
        let tail_variation = (hi - lo) / abs(value);
        out.push(LimitEstimate {
            functional,
            value,
            last,
            tail_variation,
            converged: tail_variation <= CONVERGENCE_TOL,
            samples: points.len(),
        });
    }
    Ok(out)
}

/// Limit as `t → ∞` of `(t, y)` data assuming `y ≈ L + κ t^{−decay}`.
pub fn extrapolate_at_infinity(series: &[(f64, f64)], decay: f64) -> Result<(f64, f64)> {
    let points: Vec<(f64, f64)> =
        series.iter().filter(|(t, _)| *t > 0.0).map(|(t, y)| (powf(*t, -decay), *y)).collect();
    if points.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples { needed: MIN_FIT_SAMPLES, found: points.len() });
    }
    extrapolate_limit(&points).ok_or(Error::InsufficientSamples { needed: MIN_FIT_SAMPLES, found: points.len() })
}

/// Index of the component used to normalise the metric near `T`.
pub fn normalizer(geometry: Geometry) -> Result<usize> {
    match geometry {
        Geometry::Heisenberg | Geometry::Su2 | Geometry::E11 => Ok(1),
        Geometry::E2 | Geometry::Sl2R => Ok(2),
        Geometry::Abelian => Err(Error::NotApplicable { what: "sub-Riemannian limit", geometry }),
    }
}

/// Exponent above which a normalised coefficient is treated as tending to zero.
pub const VANISHING_EXPONENT: f64 = 0.05;

/// Limit coefficients `q_i = lim N(t) / (N0 · g_i(t))` of the normalised inverse metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubRiemannianLimit {
    pub normalizer: usize,
    pub q: [f64; 3],
    /// Power-law exponents of `q_i(t)` in `T − t` over the window.
    pub exponents: [f64; 3],
    /// The direction that drops out, if any.
    pub degenerate: Option<usize>,
}

pub fn subriemannian_limit(traj: &Trajectory, t_sing: f64, window: FitWindow) -> Result<SubRiemannianLimit> {
    let n = normalizer(traj.geometry())?;
    let n0 = traj.first().metric.to_array()[n];
    let tail: Vec<(f64, [f64; 3])> = before(traj, t_sing)
        .filter(|(t, _)| window.contains(t_sing, *t))
        .map(|(t, m)| {
            let g = m.to_array();
            (t, [g[n] / (n0 * g[0]), g[n] / (n0 * g[1]), g[n] / (n0 * g[2])])
        })
        .collect();
    if tail.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples { needed: MIN_FIT_SAMPLES, found: tail.len() });
    }
    let mut q = [0.0; 3];
    let mut exponents = [0.0; 3];
    let mut degenerate = None;
    for i in 0..3 {
        let series: Vec<(f64, f64)> = tail.iter().map(|(t, v)| (*t, v[i])).collect();
        let fit = fit_power_law(&series, t_sing, window)?;
        exponents[i] = fit.exponent;
        if fit.exponent > VANISHING_EXPONENT {
            q[i] = 0.0;
            degenerate = Some(i);
        } else {
            let points: Vec<(f64, f64)> = series.iter().map(|(t, v)| (sqrt(t_sing - t), *v)).collect();
            q[i] = extrapolate_limit(&points).map_or(series[series.len() - 1].1, |(l, _)| l);
        }
    }
    Ok(SubRiemannianLimit { normalizer: n, q, exponents, degenerate })
}
