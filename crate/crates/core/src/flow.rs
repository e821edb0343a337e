//! The ±XCF vector fields in Milnor-frame variables.
//!
//! Under `∂g/∂t = ±2h` the components evolve by `dm_i/dt = ±2 h_i`, i.e.
//! `d ln m_i/dt = ±2 k_j k_l`. On SU(2), E(1,1) and E(2) the curvatures factor
//! as `k_i = −(X, Y, Z)_i / (ABC)`; on SL(2,ℝ) as `k_i = F_i / (ABC)`.

use core::fmt;
use core::str::FromStr;

use alloc::string::String;

use crate::error::{Error, Result};
use crate::geometry::{sl2_polynomials, Geometry, MilnorMetric};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FlowSign {
    Positive,
    Negative,
}

impl FlowSign {
    pub fn factor(self) -> f64 {
        match self {
            FlowSign::Positive => 1.0,
            FlowSign::Negative => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            FlowSign::Positive => FlowSign::Negative,
            FlowSign::Negative => FlowSign::Positive,
        }
    }
}

impl fmt::Display for FlowSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FlowSign::Positive => "plus",
            FlowSign::Negative => "minus",
        })
    }
}

impl FromStr for FlowSign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "+" | "plus" | "positive" | "+xcf" => Ok(FlowSign::Positive),
            "-" | "minus" | "negative" | "-xcf" => Ok(FlowSign::Negative),
            other => Err(Error::UnknownSign(String::from(other))),
        }
    }
}

/// The quadratic polynomials driving the flow: `(X, Y, Z)` on SU(2), E(1,1)
/// and E(2), `(F1, F2, F3)` on SL(2,ℝ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxQuantities {
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
}

impl AuxQuantities {
    pub fn to_array(&self) -> [f64; 3] {
        [self.q1, self.q2, self.q3]
    }
}

fn aux_array(geometry: Geometry, a: f64, b: f64, c: f64) -> Option<[f64; 3]> {
    let q = match geometry {
        Geometry::Su2 => [
            3.0 * a * a - (b - c) * (b - c) - 2.0 * a * b - 2.0 * a * c,
            3.0 * b * b - (a - c) * (a - c) - 2.0 * a * b - 2.0 * b * c,
            3.0 * c * c - (a - b) * (a - b) - 2.0 * b * c - 2.0 * a * c,
        ],
        Geometry::E11 => [(a + c) * (3.0 * a - c), -(a + c) * (a + c), -(a + c) * (a - 3.0 * c)],
        Geometry::E2 => [(a - b) * (3.0 * a + b), (b - a) * (3.0 * b + a), -(a - b) * (a - b)],
        Geometry::Sl2R => sl2_polynomials(a, b, c),
        Geometry::Heisenberg | Geometry::Abelian => return None,
    };
    Some(q)
}

pub fn aux_quantities(geometry: Geometry, m: &MilnorMetric) -> Result<AuxQuantities> {
    let [q1, q2, q3] = aux_array(geometry, m.a(), m.b(), m.c())
        .ok_or(Error::NotApplicable { what: "auxiliary polynomials", geometry })?;
    Ok(AuxQuantities { q1, q2, q3 })
}

/// `d ln m_i / dt` evaluated on the metric rescaled by its largest component,
/// so that no intermediate overflows while the components stay representable.
fn log_rates_of(geometry: Geometry, sign: FlowSign, m: &MilnorMetric) -> [f64; 3] {
    let s = m.max_component();
    let (a, b, c) = (m.a() / s, m.b() / s, m.c() / s);
    // every rate is homogeneous of degree -2 in (A, B, C)
    let unscale = sign.factor() / (s * s);
    match geometry {
        Geometry::Abelian => [0.0; 3],
        Geometry::Heisenberg => {
            let r = a / (b * c);
            let r2 = 2.0 * r * r * unscale;
            [r2, -3.0 * r2, -3.0 * r2]
        }
        _ => {
            let q = aux_array(geometry, a, b, c).unwrap_or([0.0; 3]);
            let abc = a * b * c;
            let p = [q[0] / abc, q[1] / abc, q[2] / abc];
            // the sign convention of k_i = ∓q_i/(ABC) cancels in products of two
            [2.0 * p[1] * p[2] * unscale, 2.0 * p[2] * p[0] * unscale, 2.0 * p[0] * p[1] * unscale]
        }
    }
}

/// `(dA/dt, dB/dt, dC/dt)` under ±XCF.
pub fn xcf_rhs(geometry: Geometry, sign: FlowSign, m: &MilnorMetric) -> [f64; 3] {
    let r = log_rates_of(geometry, sign, m);
    [m.a() * r[0], m.b() * r[1], m.c() * r[2]]
}

/// `d(ln A, ln B, ln C)/dt` at `u = (ln A, ln B, ln C)`.
pub fn log_rhs(geometry: Geometry, sign: FlowSign, u: [f64; 3]) -> Result<[f64; 3]> {
    let m = MilnorMetric::new(crate::math::exp(u[0]), crate::math::exp(u[1]), crate::math::exp(u[2]))?;
    Ok(log_rates_of(geometry, sign, &m))
}

/// Closed-form rates of ratios and differences that drive the monotonicity
/// arguments. Entries without a closed form for the geometry are `None`;
/// the values are for +XCF and change sign under −XCF.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DerivedRates {
    pub ln_a_over_b: Option<f64>,
    pub ln_a_over_c: Option<f64>,
    pub ln_b_over_c: Option<f64>,
    pub ln_c_over_b: Option<f64>,
    pub ln_c_over_a: Option<f64>,
    pub a_minus_b: Option<f64>,
    pub b_minus_c: Option<f64>,
    pub a_minus_c: Option<f64>,
    pub a_minus_3c: Option<f64>,
}

pub fn derived_rates(geometry: Geometry, sign: FlowSign, m: &MilnorMetric) -> Result<DerivedRates> {
    let (a, b, c) = (m.a(), m.b(), m.c());
    let d = (a * b * c) * (a * b * c);
    let s = sign.factor();
    let out = match geometry {
        Geometry::Su2 => {
            let [x, y, z] = aux_array(geometry, a, b, c).unwrap_or_default();
            DerivedRates {
                ln_a_over_b: Some(s * 8.0 * z * (b - a) * (a + b - c) / d),
                ln_a_over_c: Some(s * 8.0 * y * (a - c) * (b - c - a) / d),
                ln_b_over_c: Some(s * 8.0 * x * (b - c) * (a - b - c) / d),
                a_minus_b: Some(s * 2.0 * z * (b - a) * (a * a + a * (6.0 * b - 2.0 * c) + (b - c) * (b - c)) / d),
                b_minus_c: Some(s * 2.0 * x * (c - b) * ((a - b - c) * (a - b - c) + 4.0 * b * c) / d),
                a_minus_c: Some(s * 2.0 * y * (c - a) * ((a - b) * (a - b) + 6.0 * a * c - 2.0 * b * c + c * c) / d),
                ..DerivedRates::default()
            }
        }
        Geometry::E11 => {
            let p = a + c;
            DerivedRates {
                ln_a_over_c: Some(s * 8.0 * p * p * p * (a - c) / d),
                ln_b_over_c: Some(s * 8.0 * p * p * (3.0 * a - c) / (a * a * b * b * c)),
                a_minus_c: Some(s * 2.0 * p * p * p * p * (a - c) / d),
                a_minus_3c: Some(s * 2.0 * p * p * p * (a * a + 6.0 * a * c - 3.0 * c * c) / d),
                ..DerivedRates::default()
            }
        }
        Geometry::Sl2R => {
            let [f1, f2, f3] = sl2_polynomials(a, b, c);
            let ys = a * a + b * b + c * c + 6.0 * b * c + 2.0 * a * b + 2.0 * a * c;
            DerivedRates {
                ln_a_over_b: Some(s * 8.0 * (a + b) * f3 * (a + c - b) / d),
                ln_c_over_b: Some(-s * 8.0 * f1 * (b - c) * (a + b + c) / d),
                ln_c_over_a: Some(s * 8.0 * f2 * (c + a) * (c - a - b) / d),
                b_minus_c: Some(s * 2.0 * f1 * ys * (b - c) / d),
                ..DerivedRates::default()
            }
        }
        Geometry::Heisenberg | Geometry::E2 | Geometry::Abelian => {
            return Err(Error::NotApplicable { what: "derived rate identities", geometry });
        }
    };
    Ok(out)
}

/// A vector field on Milnor-frame metrics.
pub trait VectorField {
    fn geometry(&self) -> Geometry;

    fn sign(&self) -> FlowSign;

    /// `d(ln A, ln B, ln C)/dt`.
    fn log_rates(&self, m: &MilnorMetric) -> [f64; 3];

    /// `d(A, B, C)/dt`.
    fn rates(&self, m: &MilnorMetric) -> [f64; 3] {
        let r = self.log_rates(m);
        [m.a() * r[0], m.b() * r[1], m.c() * r[2]]
    }
}

/// The ±XCF vector field of a geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Xcf {
    pub geometry: Geometry,
    pub sign: FlowSign,
}

impl Xcf {
    pub fn new(geometry: Geometry, sign: FlowSign) -> Self {
        Xcf { geometry, sign }
    }
}

impl VectorField for Xcf {
    fn geometry(&self) -> Geometry {
        self.geometry
    }

    fn sign(&self) -> FlowSign {
        self.sign
    }

    fn log_rates(&self, m: &MilnorMetric) -> [f64; 3] {
        log_rates_of(self.geometry, self.sign, m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn metric(a: f64, b: f64, c: f64) -> MilnorMetric {
        MilnorMetric::new(a, b, c).unwrap()
    }

    fn assert_close(x: [f64; 3], y: [f64; 3]) {
        for i in 0..3 {
            assert!((x[i] - y[i]).abs() <= 1e-12 * (1.0 + y[i].abs()), "{x:?} vs {y:?}");
        }
    }

    #[test]
    fn su2_example() {
        assert_close(xcf_rhs(Geometry::Su2, FlowSign::Positive, &metric(2.0, 1.0, 1.0)), [16.0, -8.0, -8.0]);
    }

    #[test]
    fn e2_example() {
        assert_close(xcf_rhs(Geometry::E2, FlowSign::Positive, &metric(2.0, 1.0, 1.0)), [5.0, -3.5, -17.5]);
    }

    #[test]
    fn sl2_polynomial_example() {
        let q = aux_quantities(Geometry::Sl2R, &metric(1.0, 3.0, 1.0)).unwrap();
        assert_eq!(q.to_array(), [-7.0, -23.0, 17.0]);
    }

    #[test]
    fn heisenberg_unit_rhs() {
        assert_close(xcf_rhs(Geometry::Heisenberg, FlowSign::Positive, &metric(1.0, 1.0, 1.0)), [2.0, -6.0, -6.0]);
        assert_close(xcf_rhs(Geometry::Heisenberg, FlowSign::Negative, &metric(1.0, 1.0, 1.0)), [-2.0, 6.0, 6.0]);
    }

    #[test]
    fn e11_symmetric_difference_is_stationary() {
        let r = derived_rates(Geometry::E11, FlowSign::Positive, &metric(1.0, 3.7, 1.0)).unwrap();
        assert_eq!(r.a_minus_c, Some(0.0));
    }

    #[test]
    fn aux_not_applicable() {
        assert!(matches!(
            aux_quantities(Geometry::Heisenberg, &metric(1.0, 1.0, 1.0)),
            Err(Error::NotApplicable { .. })
        ));
        assert!(derived_rates(Geometry::Abelian, FlowSign::Positive, &metric(1.0, 1.0, 1.0)).is_err());
    }

    #[test]
    fn log_rhs_survives_large_components() {
        let u = [700.0, 699.0, 698.5];
        let r = log_rhs(Geometry::Su2, FlowSign::Positive, u).unwrap();
        assert!(r.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn sign_parsing() {
        assert_eq!("+".parse::<FlowSign>().unwrap(), FlowSign::Positive);
        assert_eq!("minus".parse::<FlowSign>().unwrap(), FlowSign::Negative);
        assert!("up".parse::<FlowSign>().is_err());
    }
}
