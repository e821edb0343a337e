//! Milnor-frame metrics and their curvature.
//!
//! Sectional curvatures are indexed by the plane they miss: `k1 = K(f2 ∧ f3)`,
//! `k2 = K(f3 ∧ f1)`, `k3 = K(f1 ∧ f2)`. Cross curvature components are given
//! in the Milnor co-frame, `h = h1 f¹⊗f¹ + h2 f²⊗f² + h3 f³⊗f³`, so that
//! `h_i = m_i k_j k_l` with `m = (A, B, C)`.

use alloc::string::String;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

/// The six unimodular Lie groups that carry a Milnor frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Geometry {
    Heisenberg,
    Su2,
    E11,
    E2,
    Sl2R,
    Abelian,
}

impl Geometry {
    pub const ALL: [Geometry; 6] =
        [Geometry::Heisenberg, Geometry::Su2, Geometry::E11, Geometry::E2, Geometry::Sl2R, Geometry::Abelian];

    /// Structure constants `(λ, μ, ν)` of `[f2,f3] = λ f1`, `[f3,f1] = μ f2`, `[f1,f2] = ν f3`.
    pub fn bracket_constants(self) -> (f64, f64, f64) {
        match self {
            Geometry::Heisenberg => (2.0, 0.0, 0.0),
            Geometry::Su2 => (2.0, 2.0, 2.0),
            Geometry::E11 => (2.0, 0.0, -2.0),
            Geometry::E2 => (2.0, 2.0, 0.0),
            Geometry::Sl2R => (-2.0, 2.0, 2.0),
            Geometry::Abelian => (0.0, 0.0, 0.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Geometry::Heisenberg => "heisenberg",
            Geometry::Su2 => "su2",
            Geometry::E11 => "e11",
            Geometry::E2 => "e2",
            Geometry::Sl2R => "sl2r",
            Geometry::Abelian => "abelian",
        }
    }

    /// Whether the geometry has the quadratic auxiliary polynomials of [`crate::flow::aux_quantities`].
    pub fn has_aux_quantities(self) -> bool {
        !matches!(self, Geometry::Heisenberg | Geometry::Abelian)
    }
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Geometry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        let g = match key.as_str() {
            "heisenberg" | "nil" | "h3" => Geometry::Heisenberg,
            "su2" | "su(2)" | "s3" => Geometry::Su2,
            "e11" | "e(1,1)" | "sol" => Geometry::E11,
            "e2" | "e(2)" => Geometry::E2,
            "sl2r" | "sl2" | "sl(2,r)" => Geometry::Sl2R,
            "abelian" | "r3" | "flat" => Geometry::Abelian,
            _ => return Err(Error::UnknownGeometry(String::from(s))),
        };
        Ok(g)
    }
}

/// A left-invariant metric diagonal in a Milnor frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MilnorMetric {
    a: f64,
    b: f64,
    c: f64,
}

impl MilnorMetric {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if ok(a) && ok(b) && ok(c) {
            Ok(MilnorMetric { a, b, c })
        } else {
            Err(Error::InvalidMetric { a, b, c })
        }
    }

    pub fn from_array(m: [f64; 3]) -> Result<Self> {
        Self::new(m[0], m[1], m[2])
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.a, self.b, self.c]
    }

    pub fn max_component(&self) -> f64 {
        self.a.max(self.b).max(self.c)
    }

    /// Swap the second and third frame vectors.
    pub fn swap_bc(&self) -> Self {
        MilnorMetric { a: self.a, b: self.c, c: self.b }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionalCurvatures {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
}

impl SectionalCurvatures {
    pub fn to_array(&self) -> [f64; 3] {
        [self.k1, self.k2, self.k3]
    }
}

/// Cross curvature in the Milnor co-frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossCurvature {
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
}

impl CrossCurvature {
    pub fn to_array(&self) -> [f64; 3] {
        [self.h1, self.h2, self.h3]
    }
}

pub fn sectional_curvatures(geometry: Geometry, m: &MilnorMetric) -> SectionalCurvatures {
    let (a, b, c) = (m.a, m.b, m.c);
    let abc = a * b * c;
    let (k1, k2, k3) = match geometry {
        Geometry::Heisenberg => {
            let r = a / (b * c);
            (-3.0 * r, r, r)
        }
        Geometry::Su2 => (
            (b - c) * (b - c) / abc - 3.0 * a / (b * c) + 2.0 / b + 2.0 / c,
            (c - a) * (c - a) / abc - 3.0 * b / (c * a) + 2.0 / c + 2.0 / a,
            (a - b) * (a - b) / abc - 3.0 * c / (a * b) + 2.0 / a + 2.0 / b,
        ),
        Geometry::E11 => {
            (((a - c) * (a - c) - 4.0 * a * a) / abc, (a + c) * (a + c) / abc, ((a - c) * (a - c) - 4.0 * c * c) / abc)
        }
        Geometry::E2 => ((b - a) * (b + 3.0 * a) / abc, (a - b) * (a + 3.0 * b) / abc, (a - b) * (a - b) / abc),
        Geometry::Sl2R => {
            let [f1, f2, f3] = sl2_polynomials(a, b, c);
            (f1 / abc, f2 / abc, f3 / abc)
        }
        Geometry::Abelian => (0.0, 0.0, 0.0),
    };
    SectionalCurvatures { k1, k2, k3 }
}

/// The quadratic forms `F_i` with `k_i = F_i / (ABC)` on SL(2,ℝ).
pub(crate) fn sl2_polynomials(a: f64, b: f64, c: f64) -> [f64; 3] {
    [
        -3.0 * a * a + b * b + c * c - 2.0 * b * c - 2.0 * a * c - 2.0 * a * b,
        -3.0 * b * b + a * a + c * c + 2.0 * b * c + 2.0 * a * c - 2.0 * a * b,
        -3.0 * c * c + a * a + b * b + 2.0 * b * c - 2.0 * a * c + 2.0 * a * b,
    ]
}

/// Scalar curvature `R = 2(k1 + k2 + k3)`.
pub fn scalar_curvature(geometry: Geometry, m: &MilnorMetric) -> f64 {
    let k = sectional_curvatures(geometry, m);
    2.0 * (k.k1 + k.k2 + k.k3)
}

/// Cross curvature from sectional curvatures, `h_i = m_i k_j k_l`.
pub fn cross_curvature(m: &MilnorMetric, k: &SectionalCurvatures) -> CrossCurvature {
    CrossCurvature { h1: m.a * k.k2 * k.k3, h2: m.b * k.k3 * k.k1, h3: m.c * k.k1 * k.k2 }
}

type Mat3 = [[f64; 3]; 3];

fn det3(m: &Mat3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn inv3(m: &Mat3) -> Option<Mat3> {
    let d = det3(m);
    if d == 0.0 || !d.is_finite() {
        return None;
    }
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            // adjugate: transpose of the cofactor matrix
            let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
            let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
            *x = (m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]) / d;
        }
    }
    Some(out)
}

fn mul3(x: &Mat3, y: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = (0..3).map(|k| x[i][k] * y[k][j]).sum();
        }
    }
    out
}

/// Cross curvature through the defining construction: raise both indices of
/// the Einstein tensor `E = Ric − (R/2) g`, invert, and rescale by
/// `det P / det g⁻¹`. Fails when `P` is singular.
pub fn cross_curvature_via_einstein(m: &MilnorMetric, k: &SectionalCurvatures) -> Result<CrossCurvature> {
    let masses = m.to_array();
    let ks = k.to_array();
    let scalar = 2.0 * (ks[0] + ks[1] + ks[2]);

    let mut g = [[0.0; 3]; 3];
    let mut einstein = [[0.0; 3]; 3];
    for i in 0..3 {
        g[i][i] = masses[i];
        // Ric(e_i, e_i) for the orthonormal e_i = f_i / sqrt(m_i), rescaled to the Milnor frame.
        let ric = ks[(i + 1) % 3] + ks[(i + 2) % 3];
        einstein[i][i] = masses[i] * (ric - 0.5 * scalar);
    }
    let g_inv = inv3(&g).ok_or(Error::SingularTensor)?;
    let p = mul3(&mul3(&g_inv, &einstein), &g_inv);
    let det_p = det3(&p);
    let v = inv3(&p).ok_or(Error::SingularTensor)?;
    let factor = det_p / det3(&g_inv);
    if !factor.is_finite() {
        return Err(Error::SingularTensor);
    }
    Ok(CrossCurvature { h1: factor * v[0][0], h2: factor * v[1][1], h3: factor * v[2][2] })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn metric(a: f64, b: f64, c: f64) -> MilnorMetric {
        MilnorMetric::new(a, b, c).unwrap()
    }

    fn close(x: f64, y: f64) -> bool {
        (x - y).abs() <= 1e-13 * (1.0 + y.abs())
    }

    #[test]
    fn rejects_nonpositive_components() {
        assert!(MilnorMetric::new(1.0, 0.0, 1.0).is_err());
        assert!(MilnorMetric::new(-1.0, 1.0, 1.0).is_err());
        assert!(MilnorMetric::new(1.0, f64::NAN, 1.0).is_err());
        assert!(MilnorMetric::new(1.0, 1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn parses_geometry_names() {
        for g in Geometry::ALL {
            assert_eq!(g.name().parse::<Geometry>().unwrap(), g);
        }
        assert!("nil3".parse::<Geometry>().is_err());
    }

    #[test]
    fn heisenberg_unit_metric() {
        let m = metric(1.0, 1.0, 1.0);
        let k = sectional_curvatures(Geometry::Heisenberg, &m);
        assert_eq!(k.to_array(), [-3.0, 1.0, 1.0]);
        let h = cross_curvature(&m, &k);
        assert_eq!(h.to_array(), [1.0, -3.0, -3.0]);
    }

    #[test]
    fn round_su2_has_unit_curvature() {
        let m = metric(1.0, 1.0, 1.0);
        let k = sectional_curvatures(Geometry::Su2, &m);
        assert_eq!(k.to_array(), [1.0, 1.0, 1.0]);
        assert_eq!(scalar_curvature(Geometry::Su2, &m), 6.0);
    }

    #[test]
    fn abelian_is_flat() {
        let m = metric(0.3, 2.0, 7.0);
        assert_eq!(sectional_curvatures(Geometry::Abelian, &m).to_array(), [0.0; 3]);
    }

    #[test]
    fn einstein_route_matches_heisenberg_example() {
        let m = metric(1.0, 1.0, 1.0);
        let k = SectionalCurvatures { k1: -3.0, k2: 1.0, k3: 1.0 };
        let h = cross_curvature_via_einstein(&m, &k).unwrap();
        for (x, y) in h.to_array().iter().zip([1.0, -3.0, -3.0]) {
            assert!(close(*x, y), "{x} vs {y}");
        }
    }

    #[test]
    fn einstein_route_singular_when_a_curvature_vanishes() {
        let m = metric(2.0, 1.0, 1.0);
        let k = SectionalCurvatures { k1: 0.0, k2: 1.0, k3: 1.0 };
        assert_eq!(cross_curvature_via_einstein(&m, &k), Err(Error::SingularTensor));
    }

    #[test]
    fn inverse_roundtrip() {
        let m = [[2.0, 1.0, 0.5], [0.0, 3.0, 1.0], [1.0, 0.0, 4.0]];
        let inv = inv3(&m).unwrap();
        let id = mul3(&m, &inv);
        for (i, row) in id.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((x - want).abs() < 1e-14);
            }
        }
    }
}
