//! Closed-form solution families.
//!
//! Each family has a native flow direction; the other direction is the same
//! curve run backwards, `m_∓(s) = m_±(−s)`.

use core::fmt;

use crate::error::{Error, Result};
use crate::flow::FlowSign;
use crate::geometry::{Geometry, MilnorMetric};
use crate::math::{abs, powf, sqrt};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExactFamily {
    /// Heisenberg, any initial metric.
    Heisenberg,
    /// SU(2) with `A = B = C`.
    Su2Round,
    /// E(1,1) with `A = C`.
    E11Symmetric,
    /// E(2) with `A = B`: a fixed point.
    E2Fixed,
}

impl ExactFamily {
    pub const ALL: [ExactFamily; 4] =
        [ExactFamily::Heisenberg, ExactFamily::Su2Round, ExactFamily::E11Symmetric, ExactFamily::E2Fixed];

    pub fn geometry(self) -> Geometry {
        match self {
            ExactFamily::Heisenberg => Geometry::Heisenberg,
            ExactFamily::Su2Round => Geometry::Su2,
            ExactFamily::E11Symmetric => Geometry::E11,
            ExactFamily::E2Fixed => Geometry::E2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ExactFamily::Heisenberg => "heisenberg",
            ExactFamily::Su2Round => "su2-round",
            ExactFamily::E11Symmetric => "e11-symmetric",
            ExactFamily::E2Fixed => "e2-fixed",
        }
    }

    /// Evaluate the family from `init` at time `t` of the flow with `sign`.
    pub fn eval(self, init: &MilnorMetric, sign: FlowSign, t: f64) -> Result<MilnorMetric> {
        match self {
            ExactFamily::Heisenberg => heisenberg_exact(init, -sign.factor() * t),
            ExactFamily::Su2Round => su2_round_exact(init, sign.factor() * t),
            ExactFamily::E11Symmetric => e11_symmetric_exact(init, t, sign),
            ExactFamily::E2Fixed => e2_fixed_exact(init, t),
        }
    }

    /// Finite singular time of the flow with `sign`, if there is one.
    pub fn singular_time(self, init: &MilnorMetric, sign: FlowSign) -> Option<f64> {
        match (self, sign) {
            (ExactFamily::Heisenberg, FlowSign::Positive) => Some(heisenberg_t0(init)),
            (ExactFamily::Su2Round, FlowSign::Negative) => Some(init.a() * init.a() / 4.0),
            (ExactFamily::E11Symmetric, FlowSign::Negative) => Some(init.b() * init.b() / 64.0),
            _ => None,
        }
    }
}

impl fmt::Display for ExactFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

const FAMILY_TOL: f64 = 1e-12;

fn nearly_equal(x: f64, y: f64) -> bool {
    abs(x - y) <= FAMILY_TOL * x.max(y)
}

/// `T0 = B0² C0² / (28 A0²)`, the backward existence time of Heisenberg −XCF.
pub fn heisenberg_t0(init: &MilnorMetric) -> f64 {
    let (a, b, c) = (init.a(), init.b(), init.c());
    b * b * c * c / (28.0 * a * a)
}

/// Heisenberg −XCF, defined for `t > −T0`.
pub fn heisenberg_exact(init: &MilnorMetric, t: f64) -> Result<MilnorMetric> {
    let t0 = heisenberg_t0(init);
    let base = 1.0 + t / t0;
    if !(base > 0.0) {
        return Err(Error::OutOfDomain { family: "heisenberg", t });
    }
    let grow = powf(base, 3.0 / 14.0);
    MilnorMetric::new(init.a() * powf(base, -1.0 / 14.0), init.b() * grow, init.c() * grow)
}

/// Round SU(2) under +XCF: every component equals `sqrt(A0² + 4t)`.
pub fn su2_round_exact(init: &MilnorMetric, t: f64) -> Result<MilnorMetric> {
    let a0 = init.a();
    if !(nearly_equal(a0, init.b()) && nearly_equal(a0, init.c())) {
        return Err(Error::NotInFamily { family: "su2-round" });
    }
    let r = a0 * a0 + 4.0 * t;
    if !(r > 0.0) {
        return Err(Error::OutOfDomain { family: "su2-round", t });
    }
    let x = sqrt(r);
    MilnorMetric::new(x, x, x)
}

/// E(1,1) with `A = C`: `B = sqrt(B0² ± 64t)`, `A = C = A0 B0 / B`.
pub fn e11_symmetric_exact(init: &MilnorMetric, t: f64, sign: FlowSign) -> Result<MilnorMetric> {
    if !nearly_equal(init.a(), init.c()) {
        return Err(Error::NotInFamily { family: "e11-symmetric" });
    }
    let b0 = init.b();
    let r = b0 * b0 + sign.factor() * 64.0 * t;
    if !(r > 0.0) || t < 0.0 {
        return Err(Error::OutOfDomain { family: "e11-symmetric", t });
    }
    let b = sqrt(r);
    let a = init.a() * b0 / b;
    MilnorMetric::new(a, b, a)
}

/// E(2) with `A = B` is a fixed point of both flows.
pub fn e2_fixed_exact(init: &MilnorMetric, t: f64) -> Result<MilnorMetric> {
    if !nearly_equal(init.a(), init.b()) {
        return Err(Error::NotInFamily { family: "e2-fixed" });
    }
    if !(t >= 0.0) {
        return Err(Error::OutOfDomain { family: "e2-fixed", t });
    }
    Ok(*init)
}

/// `k2(t) = (A0 / (B0 C0)) (1 + t/T0)^{−1/2}` along Heisenberg −XCF.
pub fn heisenberg_k2(init: &MilnorMetric, t: f64) -> Result<f64> {
    let base = 1.0 + t / heisenberg_t0(init);
    if !(base > 0.0) {
        return Err(Error::OutOfDomain { family: "heisenberg", t });
    }
    Ok(init.a() / (init.b() * init.c()) * powf(base, -0.5))
}
